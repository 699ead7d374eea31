use std::collections::BTreeMap;

use super::LabelMap;
use crate::error::{Error, Result};

/// Integer pixel coordinate `(x, y)`: x is the column, y the row.
pub type Point = (i32, i32);

/// A pixel set with its label, area and barycenter.
///
/// Pixels are kept sorted in row-major order and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    label: u32,
    pixels: Vec<Point>,
    barycenter: (f64, f64),
}

impl Region {
    pub fn new(label: u32, mut pixels: Vec<Point>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::EmptyRegion);
        }
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        let barycenter = mean_point(&pixels);
        Ok(Self {
            label,
            pixels,
            barycenter,
        })
    }

    pub fn label(&self) -> u32 {
        self.label
    }

    pub fn pixels(&self) -> &[Point] {
        &self.pixels
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn barycenter(&self) -> (f64, f64) {
        self.barycenter
    }

    /// Inclusive bounding box `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (i32, i32, i32, i32) {
        let mut b = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for &(x, y) in &self.pixels {
            b.0 = b.0.min(x);
            b.1 = b.1.min(y);
            b.2 = b.2.max(x);
            b.3 = b.3.max(y);
        }
        b
    }

    pub fn translate(&self, dx: i32, dy: i32) -> Self {
        let pixels = self.pixels.iter().map(|&(x, y)| (x + dx, y + dy)).collect();
        Self::new(self.label, pixels).expect("translation keeps the region non-empty")
    }

    /// Swaps the x and y axes.
    pub fn transpose(&self) -> Self {
        let pixels = self.pixels.iter().map(|&(x, y)| (y, x)).collect();
        Self::new(self.label, pixels).expect("transposition keeps the region non-empty")
    }

    /// Rotates by 90 degrees about the origin: `(x, y) -> (-y, x)`.
    pub fn rotate90(&self) -> Self {
        let pixels = self.pixels.iter().map(|&(x, y)| (-y, x)).collect();
        Self::new(self.label, pixels).expect("rotation keeps the region non-empty")
    }

    /// True if the region lies on the left/top/right/bottom edge of a
    /// `width x height` canvas.
    pub fn touches_border(&self, width: usize, height: usize) -> bool {
        let (x0, y0, x1, y1) = self.bounds();
        x0 <= 0 || y0 <= 0 || x1 as i64 >= width as i64 - 1 || y1 as i64 >= height as i64 - 1
    }
}

fn mean_point(pixels: &[Point]) -> (f64, f64) {
    let n = pixels.len() as f64;
    let (sx, sy) = pixels.iter().fold((0i64, 0i64), |(sx, sy), &(x, y)| {
        (sx + x as i64, sy + y as i64)
    });
    (sx as f64 / n, sy as f64 / n)
}

/// One region per distinct label, ordered by label.
pub fn extract_regions(labels: &LabelMap) -> Vec<Region> {
    let mut groups: BTreeMap<u32, Vec<Point>> = BTreeMap::new();
    for y in 0..labels.height() {
        for x in 0..labels.width() {
            groups
                .entry(labels.get(x, y))
                .or_default()
                .push((x as i32, y as i32));
        }
    }
    groups
        .into_iter()
        .map(|(label, pixels)| {
            // pixels were pushed in row-major order, already unique
            let barycenter = mean_point(&pixels);
            Region {
                label,
                pixels,
                barycenter,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_halves() {
        let map = LabelMap::from_rows(&[[0, 0], [1, 1]]).unwrap();
        let regions = extract_regions(&map);
        assert_eq!(regions.len(), 2);
        assert_eq!(regions[0].area(), 2);
        assert_eq!(regions[1].area(), 2);
        assert_eq!(regions[0].barycenter(), (0.5, 0.0));
        assert_eq!(regions[1].barycenter(), (0.5, 1.0));
    }

    #[test]
    fn constant_map_is_one_region() {
        let map = LabelMap::from_fn(7, 5, |_, _| 3).unwrap();
        let regions = extract_regions(&map);
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].area(), 35);
        assert_eq!(regions[0].label(), 3);
    }

    #[test]
    fn disconnected_label_stays_one_region() {
        let map = LabelMap::from_rows(&[[1, 0, 1]]).unwrap();
        let regions = extract_regions(&map);
        assert_eq!(regions.len(), 2);
        assert_eq!(regions[1].pixels(), &[(0, 0), (2, 0)]);
    }

    #[test]
    fn new_rejects_empty_and_dedups() {
        assert!(matches!(Region::new(0, vec![]), Err(Error::EmptyRegion)));
        let r = Region::new(0, vec![(1, 1), (0, 0), (1, 1)]).unwrap();
        assert_eq!(r.area(), 2);
        assert_eq!(r.pixels(), &[(0, 0), (1, 1)]);
    }
}
