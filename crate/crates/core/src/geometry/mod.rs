//! Discrete shape geometry on the pixel grid.
//!
//! Perimeters are boundary-pixel counts: a pixel belongs to the perimeter
//! when one of its 4-neighbors is outside the shape. Positions outside the
//! canvas count as outside, so shapes cut by the image frame are closed there.

mod hull;
mod pixel_set;
mod shape_grid;

pub use hull::{convex_hull_shape, HullShape};
pub use pixel_set::{is_four_connected, PixelSet};
pub use shape_grid::{
    average_shape, common_halfwidth, register_shape, registration_offset, required_halfwidth,
    Occupancy, RegisteredShape, ShapeGrid,
};

use crate::error::{Error, Result};
use crate::model::Point;

/// Number of shape pixels having at least one 4-neighbor outside the shape.
pub fn perimeter(pixels: &[Point]) -> Result<usize> {
    if pixels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(PixelSet::new(pixels).perimeter())
}

/// `|P(S)| / |S|`
pub fn cheeger_ratio(perimeter: usize, area: usize) -> Result<f64> {
    if area == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(perimeter as f64 / area as f64)
}

/// `min(σx, σy) / max(σx, σy)` with population standard deviations of the
/// pixel coordinates; 1 when both are zero.
pub fn spatial_variance_ratio(pixels: &[Point]) -> Result<f64> {
    if pixels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let n = pixels.len() as f64;
    let (mx, my) = pixels.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| {
        (sx + x as f64, sy + y as f64)
    });
    let (mx, my) = (mx / n, my / n);
    let (vx, vy) = pixels.iter().fold((0.0, 0.0), |(vx, vy), &(x, y)| {
        (vx + (x as f64 - mx).powi(2), vy + (y as f64 - my).powi(2))
    });
    let (sx, sy) = ((vx / n).sqrt(), (vy / n).sqrt());
    let hi = sx.max(sy);
    if hi == 0.0 {
        return Ok(1.0);
    }
    Ok(sx.min(sy) / hi)
}
