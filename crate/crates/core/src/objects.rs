//! Respect of image objects: ASA, UE, UE_L, boundary recall, contour
//! precision and F-measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BoundaryMask, OverlapMatrix};

/// Achievable segmentation accuracy: `1/|I| Σ_k max_j |S_k ∩ G_j|`.
pub fn asa(ov: &OverlapMatrix) -> f64 {
    let best: u64 = (0..ov.rows())
        .map(|k| ov.row(k).iter().copied().max().unwrap_or(0))
        .sum();
    best as f64 / ov.total() as f64
}

/// Parameter-free undersegmentation error:
/// `1/|I| Σ_k Σ_j min(|S_k ∩ G_j|, |S_k \ G_j|)`.
pub fn undersegmentation_error(ov: &OverlapMatrix) -> f64 {
    let mut sum = 0u64;
    for k in 0..ov.rows() {
        let area = ov.sp_area(k);
        sum += ov.row(k).iter().map(|&c| c.min(area - c)).sum::<u64>();
    }
    sum as f64 / ov.total() as f64
}

/// Legacy undersegmentation error:
/// `1/|G| Σ_j ((Σ_{k: S_k ∩ G_j ≠ ∅} |S_k|) − |G_j|) / |G_j|`.
pub fn undersegmentation_error_legacy(ov: &OverlapMatrix) -> Result<f64> {
    if ov.cols() == 0 {
        return Err(Error::EmptyInput("ground truth has no regions"));
    }
    let mut sum = 0.0;
    for j in 0..ov.cols() {
        let gt_area = ov.gt_area(j);
        if gt_area == 0 {
            return Err(Error::EmptyGroundTruthRegion(ov.gt_labels()[j]));
        }
        let covering: u64 = (0..ov.rows())
            .filter(|&k| ov.get(k, j) > 0)
            .map(|k| ov.sp_area(k))
            .sum();
        sum += (covering - gt_area) as f64 / gt_area as f64;
    }
    Ok(sum / ov.cols() as f64)
}

/// Squared Euclidean distance from every pixel to the nearest marked pixel
/// (`f64::INFINITY` when nothing is marked). Exact, separable lower-envelope
/// algorithm of Felzenszwalb and Huttenlocher.
pub fn squared_distance_transform(mask: &BoundaryMask) -> Vec<f64> {
    let (w, h) = mask.dimensions();
    let mut grid: Vec<f64> = mask
        .as_slice()
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        envelope_1d(&f[..h], &mut d[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = d[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        envelope_1d(&f[..w], &mut d[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&d[..w]);
    }
    grid
}

fn envelope_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if sites.is_empty() {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    }
    let mut k = 0;
    v[0] = sites[0];
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for &q in &sites[1..] {
        let intersect = |p: usize| {
            ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
        };
        // z[0] is -inf, so this never pops the first parabola
        let mut s = intersect(v[k]);
        while s <= z[k] {
            k -= 1;
            s = intersect(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *out = (q as f64 - p as f64).powi(2) + f[p];
    }
}

/// Fraction of `targets` pixels having a `sources` pixel at distance
/// strictly below `epsilon`.
fn detected_fraction(targets: &BoundaryMask, sources: &BoundaryMask, epsilon: f64) -> f64 {
    let dist = squared_distance_transform(sources);
    let eps2 = epsilon * epsilon;
    let (mut hit, mut total) = (0usize, 0usize);
    for (&t, &d2) in targets.as_slice().iter().zip(&dist) {
        if t {
            total += 1;
            if d2 < eps2 {
                hit += 1;
            }
        }
    }
    hit as f64 / total as f64
}

fn check_pair(a: &BoundaryMask, b: &BoundaryMask, epsilon: f64) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: a.dimensions(),
            actual: b.dimensions(),
        });
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Boundary recall: fraction of ground-truth boundary pixels within
/// distance `< epsilon` of a superpixel boundary pixel.
pub fn boundary_recall(sp: &BoundaryMask, gt: &BoundaryMask, epsilon: f64) -> Result<f64> {
    check_pair(sp, gt, epsilon)?;
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruthBoundary);
    }
    Ok(detected_fraction(gt, sp, epsilon))
}

/// Contour precision: fraction of superpixel boundary pixels within
/// distance `< epsilon` of a ground-truth boundary pixel.
pub fn precision(sp: &BoundaryMask, gt: &BoundaryMask, epsilon: f64) -> Result<f64> {
    check_pair(sp, gt, epsilon)?;
    if sp.is_empty() {
        return Err(Error::EmptySuperpixelBoundary);
    }
    Ok(detected_fraction(sp, gt, epsilon))
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// A precision/recall pair with its F-measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionRecallPoint {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    /// Contour-map threshold that produced the point, if any.
    pub threshold: Option<f64>,
    /// Set when no boundary pixel was predicted; precision is then reported
    /// as 1 and the F-measure as 0.
    pub empty_prediction: bool,
}

impl PrecisionRecallPoint {
    pub fn new(precision: f64, recall: f64, threshold: Option<f64>) -> Self {
        Self {
            precision,
            recall,
            f_measure: f_measure(precision, recall),
            threshold,
            empty_prediction: false,
        }
    }

    /// Point for an empty prediction.
    pub fn empty(threshold: Option<f64>) -> Self {
        Self {
            precision: 1.0,
            recall: 0.0,
            f_measure: 0.0,
            threshold,
            empty_prediction: true,
        }
    }
}

/// Unweighted mean of a metric over ground-truth annotations.
pub fn mean_over_annotations(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no annotation values"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{boundary_mask, overlap_matrix, LabelMap};

    fn mask_with(w: usize, h: usize, on: &[(usize, usize)]) -> BoundaryMask {
        BoundaryMask::from_fn(w, h, |x, y| on.contains(&(x, y)))
    }

    #[test]
    fn identical_maps() {
        let m = LabelMap::from_fn(6, 6, |x, y| (x / 3 + 2 * (y / 2)) as u32).unwrap();
        let ov = overlap_matrix(&m, &m).unwrap();
        assert_eq!(asa(&ov), 1.0);
        assert_eq!(undersegmentation_error(&ov), 0.0);
        assert_eq!(undersegmentation_error_legacy(&ov).unwrap(), 0.0);
        let b = boundary_mask(&m);
        assert_eq!(boundary_recall(&b, &b, 2.0).unwrap(), 1.0);
        assert_eq!(precision(&b, &b, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn single_superpixel_over_halves() {
        let sp = LabelMap::from_fn(10, 10, |_, _| 0).unwrap();
        let gt = LabelMap::from_fn(10, 10, |x, _| (x >= 5) as u32).unwrap();
        let ov = overlap_matrix(&sp, &gt).unwrap();
        assert_eq!(asa(&ov), 0.5);
        assert_eq!(undersegmentation_error(&ov), 1.0);
        assert_eq!(undersegmentation_error_legacy(&ov).unwrap(), 1.0);
        // binary ground truth: UE = 2 (1 - ASA)
        assert_eq!(undersegmentation_error(&ov), 2.0 * (1.0 - asa(&ov)));
    }

    #[test]
    fn legacy_rejects_empty_gt_region() {
        let ov = OverlapMatrix::from_counts(vec![0], vec![0, 1], vec![4, 0]).unwrap();
        assert!(matches!(
            undersegmentation_error_legacy(&ov),
            Err(Error::EmptyGroundTruthRegion(1))
        ));
    }

    #[test]
    fn strict_epsilon() {
        let gt = mask_with(1, 3, &[(0, 0)]);
        let sp = mask_with(1, 3, &[(0, 2)]);
        assert_eq!(boundary_recall(&sp, &gt, 2.0).unwrap(), 0.0);
        assert_eq!(boundary_recall(&sp, &gt, 2.1).unwrap(), 1.0);
    }

    #[test]
    fn empty_boundaries() {
        let gt = mask_with(4, 4, &[(1, 1)]);
        let empty = mask_with(4, 4, &[]);
        assert_eq!(boundary_recall(&empty, &gt, 2.0).unwrap(), 0.0);
        assert!(matches!(
            boundary_recall(&gt, &empty, 2.0),
            Err(Error::EmptyGroundTruthBoundary)
        ));
        assert!(matches!(
            precision(&empty, &gt, 2.0),
            Err(Error::EmptySuperpixelBoundary)
        ));
        assert!(boundary_recall(&gt, &gt, 0.0).is_err());
    }

    #[test]
    fn far_boundary_has_zero_precision() {
        let sp = mask_with(10, 1, &[(0, 0)]);
        let gt = mask_with(10, 1, &[(9, 0)]);
        assert_eq!(precision(&sp, &gt, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn distance_transform_matches_scan() {
        let on = [(1, 1), (7, 2), (4, 6)];
        let m = mask_with(9, 8, &on);
        let d = squared_distance_transform(&m);
        for y in 0..8 {
            for x in 0..9 {
                let best = on
                    .iter()
                    .map(|&(a, b)| (x as f64 - a as f64).powi(2) + (y as f64 - b as f64).powi(2))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(d[y * 9 + x], best);
            }
        }
        assert!(squared_distance_transform(&mask_with(3, 3, &[]))
            .iter()
            .all(|v| v.is_infinite()));
    }

    #[test]
    fn f_measure_examples() {
        assert_eq!(f_measure(1.0, 1.0), 1.0);
        assert_eq!(f_measure(0.5, 0.5), 0.5);
        assert!((f_measure(0.2, 0.8) - 0.32).abs() < 1e-15);
        assert_eq!(f_measure(0.0, 0.0), 0.0);
    }

    #[test]
    fn annotation_mean() {
        assert_eq!(mean_over_annotations(&[0.3]).unwrap(), 0.3);
        assert!((mean_over_annotations(&[0.9, 0.7]).unwrap() - 0.8).abs() < 1e-15);
        let five = [0.91, 0.85, 0.88, 0.79, 0.93];
        assert!((mean_over_annotations(&five).unwrap() - 4.36 / 5.0).abs() < 1e-12);
        assert!(mean_over_annotations(&[]).is_err());
    }
}
