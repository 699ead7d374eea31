use std::collections::{BTreeMap, BTreeSet};

use super::{extract_regions, LabelMap};
use crate::error::{Error, Result};

/// Per-pixel flag marking pixels that lie on a label boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl BoundaryMask {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::LengthMismatch(mask.len(), width * height));
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut mask = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                mask.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            mask,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }
}

/// Marks every pixel with a 4-neighbor of a different label. The image
/// border itself does not mark a pixel.
pub fn boundary_mask(labels: &LabelMap) -> BoundaryMask {
    let (w, h) = labels.dimensions();
    let l = labels.as_slice();
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && l[i] != l[i + 1] {
                mask[i] = true;
                mask[i + 1] = true;
            }
            if y + 1 < h && l[i] != l[i + w] {
                mask[i] = true;
                mask[i + w] = true;
            }
        }
    }
    BoundaryMask {
        width: w,
        height: h,
        mask,
    }
}

/// `|B(S)| / |I|`
pub fn contour_density(labels: &LabelMap) -> f64 {
    boundary_mask(labels).count() as f64 / labels.pixel_count() as f64
}

/// Unordered pairs of labels sharing a 4-connected boundary.
pub fn adjacent_pairs(labels: &LabelMap) -> BTreeSet<(u32, u32)> {
    let (w, h) = labels.dimensions();
    let mut pairs = BTreeSet::new();
    let mut add = |a: u32, b: u32| {
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    };
    for y in 0..h {
        for x in 0..w {
            let l = labels.get(x, y);
            if x + 1 < w {
                add(l, labels.get(x + 1, y));
            }
            if y + 1 < h {
                add(l, labels.get(x, y + 1));
            }
        }
    }
    pairs
}

/// Variance of barycenter distances between adjacent regions, divided by
/// their mean. Population variance is used.
pub fn barycenter_dispersion(labels: &LabelMap) -> Result<f64> {
    let regions = extract_regions(labels);
    if regions.len() < 2 {
        return Err(Error::TooFewRegions(regions.len()));
    }
    let centers: BTreeMap<u32, (f64, f64)> = regions
        .iter()
        .map(|r| (r.label(), r.barycenter()))
        .collect();
    let distances: Vec<f64> = adjacent_pairs(labels)
        .into_iter()
        .map(|(a, b)| {
            let (pa, pb) = (centers[&a], centers[&b]);
            (pa.0 - pb.0).hypot(pa.1 - pb.1)
        })
        .collect();
    if distances.is_empty() {
        return Err(Error::NoAdjacentRegions);
    }
    let n = distances.len() as f64;
    let mean = distances.iter().sum::<f64>() / n;
    let var = distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    Ok(var / mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_map_has_no_boundary() {
        let m = LabelMap::from_fn(5, 4, |_, _| 9).unwrap();
        assert!(boundary_mask(&m).is_empty());
        assert_eq!(contour_density(&m), 0.0);
    }

    #[test]
    fn halves_mark_two_middle_columns() {
        let m = LabelMap::from_fn(4, 4, |x, _| (x >= 2) as u32).unwrap();
        let b = boundary_mask(&m);
        assert_eq!(b.count(), 8);
        for y in 0..4 {
            assert!(!b.get(0, y) && b.get(1, y) && b.get(2, y) && !b.get(3, y));
        }
        assert_eq!(contour_density(&m), 0.5);
    }

    #[test]
    fn checkerboard_is_all_boundary() {
        let m = LabelMap::from_fn(6, 5, |x, y| ((x + y) % 2) as u32).unwrap();
        assert_eq!(boundary_mask(&m).count(), 30);
        assert_eq!(contour_density(&m), 1.0);
    }

    #[test]
    fn dispersion_of_uniform_grid_is_zero() {
        let m = LabelMap::from_fn(12, 12, |x, y| (y / 4 * 3 + x / 4) as u32).unwrap();
        assert!(barycenter_dispersion(&m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dispersion_of_uneven_strip() {
        // widths 1, 1, 2 -> barycenters 0, 1, 2.5 -> distances {1, 1.5}
        let m = LabelMap::from_rows(&[[0, 1, 2, 2]]).unwrap();
        let mean = 1.25;
        let var = (0.25f64.powi(2) + 0.25f64.powi(2)) / 2.0;
        assert!((barycenter_dispersion(&m).unwrap() - var / mean).abs() < 1e-15);
        assert!((var / mean - 0.05).abs() < 1e-15);
    }

    #[test]
    fn dispersion_errors() {
        let one = LabelMap::from_fn(3, 3, |_, _| 0).unwrap();
        assert!(matches!(
            barycenter_dispersion(&one),
            Err(Error::TooFewRegions(1))
        ));
        let two = LabelMap::from_rows(&[[0, 1]]).unwrap();
        assert_eq!(barycenter_dispersion(&two).unwrap(), 0.0);
    }
}
