use super::PixelSet;
use crate::error::{Error, Result};
use crate::model::Point;

/// Rasterized convex hull of a pixel shape.
#[derive(Debug, Clone, PartialEq)]
pub struct HullShape {
    pixels: Vec<Point>,
    perimeter: usize,
    vertices: Vec<Point>,
}

impl HullShape {
    pub fn pixels(&self) -> &[Point] {
        &self.pixels
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn perimeter(&self) -> usize {
        self.perimeter
    }

    /// Hull polygon vertices (pixel centers), counter-clockwise in image
    /// coordinates, without collinear points.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cheeger_ratio(&self) -> f64 {
        self.perimeter as f64 / self.pixels.len() as f64
    }
}

#[inline]
fn cross(o: Point, a: Point, b: Point) -> i64 {
    (a.0 as i64 - o.0 as i64) * (b.1 as i64 - o.1 as i64)
        - (a.1 as i64 - o.1 as i64) * (b.0 as i64 - o.0 as i64)
}

/// Andrew's monotone chain over unique points.
fn hull_vertices(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

/// Integer points inside or on a counter-clockwise convex polygon with at
/// least three vertices, scanned row by row.
fn rasterize_polygon(vertices: &[Point]) -> Vec<Point> {
    let y_min = vertices.iter().map(|p| p.1).min().unwrap();
    let y_max = vertices.iter().map(|p| p.1).max().unwrap();
    let x_min = vertices.iter().map(|p| p.0).min().unwrap() as i64;
    let x_max = vertices.iter().map(|p| p.0).max().unwrap() as i64;
    let mut out = Vec::new();
    for y in y_min..=y_max {
        let (mut lo, mut hi) = (x_min, x_max);
        for i in 0..vertices.len() {
            let a = vertices[i];
            let b = vertices[(i + 1) % vertices.len()];
            let (ax, ay) = (a.0 as i64, a.1 as i64);
            let (ex, ey) = (b.0 as i64 - ax, b.1 as i64 - ay);
            // cross(b - a, p - a) >= 0  <=>  ey * px <= ex * (y - ay) + ey * ax
            let c = ex * (y as i64 - ay) + ey * ax;
            if ey > 0 {
                hi = hi.min(floor_div(c, ey));
            } else if ey < 0 {
                lo = lo.max(ceil_div(c, ey));
            } else if c < 0 {
                lo = 1;
                hi = 0;
            }
        }
        out.extend((lo..=hi).map(|x| (x as i32, y)));
    }
    out
}

/// Integer points on the closed segment `a`-`b`.
fn rasterize_segment(a: Point, b: Point) -> Vec<Point> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let g = gcd(dx.unsigned_abs(), dy.unsigned_abs()).max(1) as i32;
    let (sx, sy) = (dx / g, dy / g);
    (0..=g).map(|t| (a.0 + t * sx, a.1 + t * sy)).collect()
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Convex hull of the pixel centers, rasterized by a boundary-inclusive
/// point-in-polygon test on pixel centers. Collinear shapes yield the pixel
/// line spanned by their extreme points.
pub fn convex_hull_shape(pixels: &[Point]) -> Result<HullShape> {
    if pixels.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let vertices = hull_vertices(pixels.to_vec());
    let raster = match vertices.len() {
        1 => vertices.clone(),
        2 => rasterize_segment(vertices[0], vertices[1]),
        _ => rasterize_polygon(&vertices),
    };
    let set = PixelSet::new(&raster);
    Ok(HullShape {
        pixels: set.points(),
        perimeter: set.perimeter(),
        vertices,
    })
}
