//! Cross-metric analyses: the ASA/UE relation, Pearson correlations between
//! sweep columns, multi-scale contour maps and precision/recall sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundaryMask, OverlapMatrix};
use crate::objects::{
    asa, boundary_recall, precision, undersegmentation_error, PrecisionRecallPoint,
};

/// Deviation of a decomposition from the relation `ASA = 1 − UE/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsaUeRelation {
    pub asa: f64,
    pub ue: f64,
    /// `ASA − (1 − UE/2)`
    pub error: f64,
    /// Fraction of superpixels whose best ground-truth region covers at
    /// least half of them.
    pub majority_fraction: f64,
}

pub fn asa_ue_relation_error(ov: &OverlapMatrix) -> AsaUeRelation {
    let a = asa(ov);
    let ue = undersegmentation_error(ov);
    let majority = (0..ov.rows())
        .filter(|&k| {
            let best = ov.row(k).iter().copied().max().unwrap_or(0);
            2 * best >= ov.sp_area(k)
        })
        .count();
    AsaUeRelation {
        asa: a,
        ue,
        error: a - (1.0 - ue / 2.0),
        majority_fraction: if ov.rows() == 0 {
            1.0
        } else {
            majority as f64 / ov.rows() as f64
        },
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "pearson needs at least 2 samples, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("first series"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("second series"));
    }
    let s = n - 1.0;
    let r = (sxy / s) / ((sxx / s).sqrt() * (syy / s).sqrt());
    Ok(r.clamp(-1.0, 1.0))
}

/// One evaluated decomposition in a sweep. Metrics that could not be
/// computed are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub id: String,
    pub k: usize,
    pub gr: Option<f64>,
    pub ev: Option<f64>,
    pub asa: Option<f64>,
    pub ue: Option<f64>,
    pub br: Option<f64>,
    pub cd: Option<f64>,
    pub precision: Option<f64>,
    pub c: Option<f64>,
    pub j: Option<f64>,
    pub smf: Option<f64>,
    pub src: Option<f64>,
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// Column of a [`SweepTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepColumn {
    Gr,
    Smf,
    J,
    Src,
    C,
    Asa,
    Ue,
    Br,
    Precision,
    Ev,
    Mse,
    Cd,
}

impl SweepColumn {
    pub const REGULARITY: [SweepColumn; 5] = [Self::Gr, Self::Smf, Self::J, Self::Src, Self::C];
    pub const PERFORMANCE: [SweepColumn; 6] = [
        Self::Asa,
        Self::Ue,
        Self::Br,
        Self::Precision,
        Self::Ev,
        Self::Mse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gr => "gr",
            Self::Smf => "smf",
            Self::J => "j",
            Self::Src => "src",
            Self::C => "c",
            Self::Asa => "asa",
            Self::Ue => "ue",
            Self::Br => "br",
            Self::Precision => "precision",
            Self::Ev => "ev",
            Self::Mse => "mse",
            Self::Cd => "cd",
        }
    }

    pub fn value(self, row: &SweepRow) -> Option<f64> {
        match self {
            Self::Gr => row.gr,
            Self::Smf => row.smf,
            Self::J => row.j,
            Self::Src => row.src,
            Self::C => row.c,
            Self::Asa => row.asa,
            Self::Ue => row.ue,
            Self::Br => row.br,
            Self::Precision => row.precision,
            Self::Ev => row.ev,
            Self::Mse => row.mse,
            Self::Cd => row.cd,
        }
    }
}

impl SweepTable {
    pub fn column(&self, col: SweepColumn) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| col.value(r)).collect()
    }
}

/// Pearson coefficients of every regularity column against every
/// performance column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub regularity: Vec<&'static str>,
    pub performance: Vec<&'static str>,
    /// `coefficients[p][r]` correlates performance `p` with regularity `r`;
    /// `None` for degenerate pairs.
    pub coefficients: Vec<Vec<Option<f64>>>,
    /// Mean absolute coefficient per regularity column over the defined
    /// entries.
    pub average_abs: Vec<Option<f64>>,
    /// Human-readable reasons for every undefined coefficient.
    pub flags: Vec<String>,
}

fn complete_column(values: Vec<Option<f64>>) -> Option<Vec<f64>> {
    values.into_iter().collect()
}

pub fn correlation_table(sweep: &SweepTable) -> Result<CorrelationTable> {
    if sweep.rows.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "correlation needs at least 2 sweep rows, got {}",
            sweep.rows.len()
        )));
    }
    let mut flags = Vec::new();
    let mut coefficients = Vec::new();
    for perf in SweepColumn::PERFORMANCE {
        let ys = complete_column(sweep.column(perf));
        let mut row = Vec::new();
        for reg in SweepColumn::REGULARITY {
            let xs = complete_column(sweep.column(reg));
            let value = match (&xs, &ys) {
                (Some(xs), Some(ys)) => match pearson(xs, ys) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        flags.push(format!("{}/{}: {e}", perf.name(), reg.name()));
                        None
                    }
                },
                _ => {
                    flags.push(format!("{}/{}: missing values", perf.name(), reg.name()));
                    None
                }
            };
            row.push(value);
        }
        coefficients.push(row);
    }
    let average_abs = (0..SweepColumn::REGULARITY.len())
        .map(|r| {
            let defined: Vec<f64> = coefficients.iter().filter_map(|row| row[r]).collect();
            if defined.is_empty() {
                None
            } else {
                Some(defined.iter().map(|v| v.abs()).sum::<f64>() / defined.len() as f64)
            }
        })
        .collect();
    Ok(CorrelationTable {
        regularity: SweepColumn::REGULARITY.iter().map(|c| c.name()).collect(),
        performance: SweepColumn::PERFORMANCE.iter().map(|c| c.name()).collect(),
        coefficients,
        average_abs,
        flags,
    })
}

/// Per-pixel fraction of scales detecting a boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ContourMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::LengthMismatch(values.len(), width * height));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(
                "contour map values must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Pixels with a positive value of at least `nu`.
    pub fn binarize(&self, nu: f64) -> BoundaryMask {
        let mask = self.values.iter().map(|&v| v > 0.0 && v >= nu).collect();
        BoundaryMask::new(self.width, self.height, mask).expect("matching length")
    }
}

fn check_unit(nu: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in [0, 1], got {nu}"
        )));
    }
    Ok(())
}

/// Averages boundary masks and zeroes values strictly below `nu`.
pub fn multiscale_contour_map(boundaries: &[BoundaryMask], nu: f64) -> Result<ContourMap> {
    check_unit(nu)?;
    let first = boundaries
        .first()
        .ok_or(Error::EmptyInput("no boundary masks"))?;
    let dims = first.dimensions();
    let mut counts = vec![0usize; dims.0 * dims.1];
    for b in boundaries {
        if b.dimensions() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: b.dimensions(),
            });
        }
        for (c, &on) in counts.iter_mut().zip(b.as_slice()) {
            *c += on as usize;
        }
    }
    let n = boundaries.len() as f64;
    let values = counts
        .into_iter()
        .map(|c| {
            let v = c as f64 / n;
            if v < nu {
                0.0
            } else {
                v
            }
        })
        .collect();
    ContourMap::new(dims.0, dims.1, values)
}

/// `count` uniform thresholds spanning [0, 1].
pub fn uniform_thresholds(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| i as f64 / (count - 1) as f64).collect(),
    }
}

pub const DEFAULT_THRESHOLD_COUNT: usize = 51;

/// Precision/recall points of a contour map over a threshold list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    pub points: Vec<PrecisionRecallPoint>,
    /// Index of the point with the maximum F-measure (first one on ties).
    pub best: usize,
}

impl PrCurve {
    pub fn max_f(&self) -> &PrecisionRecallPoint {
        &self.points[self.best]
    }
}

fn best_index(points: &[PrecisionRecallPoint]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.f_measure > points[best].f_measure {
            best = i;
        }
    }
    best
}

/// Binarizes the map at each threshold and scores it against the
/// ground-truth boundary. Empty predictions give `P = 1, BR = 0, F = 0`
/// and are flagged on the point.
pub fn pr_sweep(
    map: &ContourMap,
    gt_boundary: &BoundaryMask,
    epsilon: f64,
    thresholds: &[f64],
) -> Result<PrCurve> {
    if thresholds.is_empty() {
        return Err(Error::EmptyInput("no thresholds"));
    }
    if thresholds
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt()))
    {
        return Err(Error::InvalidParameter(
            "thresholds must be sorted ascending".into(),
        ));
    }
    for &t in thresholds {
        check_unit(t)?;
    }
    if map.dimensions() != gt_boundary.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: gt_boundary.dimensions(),
            actual: map.dimensions(),
        });
    }
    if gt_boundary.is_empty() {
        return Err(Error::EmptyGroundTruthBoundary);
    }
    let points = thresholds
        .par_iter()
        .map(|&nu| {
            let predicted = map.binarize(nu);
            if predicted.is_empty() {
                return Ok(PrecisionRecallPoint::empty(Some(nu)));
            }
            let p = precision(&predicted, gt_boundary, epsilon)?;
            let r = boundary_recall(&predicted, gt_boundary, epsilon)?;
            Ok(PrecisionRecallPoint::new(p, r, Some(nu)))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = best_index(&points);
    Ok(PrCurve { points, best })
}

/// Pointwise mean of curves sharing one threshold list: precision and
/// recall are averaged and F is recomputed from the means. A point is
/// flagged as an empty prediction when it is empty for every curve.
pub fn average_curves(curves: &[PrCurve]) -> Result<PrCurve> {
    let first = curves.first().ok_or(Error::EmptyInput("no curves"))?;
    let len = first.points.len();
    if let Some(c) = curves.iter().find(|c| c.points.len() != len) {
        return Err(Error::LengthMismatch(len, c.points.len()));
    }
    let n = curves.len() as f64;
    let points: Vec<PrecisionRecallPoint> = (0..len)
        .map(|i| {
            let threshold = first.points[i].threshold;
            let p = curves.iter().map(|c| c.points[i].precision).sum::<f64>() / n;
            let r = curves.iter().map(|c| c.points[i].recall).sum::<f64>() / n;
            if curves.iter().all(|c| c.points[i].empty_prediction) {
                PrecisionRecallPoint::empty(threshold)
            } else {
                PrecisionRecallPoint::new(p, r, threshold)
            }
        })
        .collect();
    let best = best_index(&points);
    Ok(PrCurve { points, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{overlap_matrix, LabelMap};

    #[test]
    fn relation_on_binary_ground_truth() {
        let gt = LabelMap::from_fn(6, 5, |x, _| (x >= 2) as u32).unwrap();
        let sp = LabelMap::from_fn(6, 5, |x, y| ((x + y) % 3) as u32).unwrap();
        let rel = asa_ue_relation_error(&overlap_matrix(&sp, &gt).unwrap());
        assert!(rel.error.abs() < 1e-15);
    }

    #[test]
    fn relation_forty_thirty_thirty() {
        let gt = LabelMap::from_fn(10, 10, |x, _| match x {
            0..=3 => 0,
            4..=6 => 1,
            _ => 2,
        })
        .unwrap();
        let sp = LabelMap::from_fn(10, 10, |_, _| 0).unwrap();
        let rel = asa_ue_relation_error(&overlap_matrix(&sp, &gt).unwrap());
        assert!((rel.asa - 0.4).abs() < 1e-15);
        assert!((rel.ue - 1.0).abs() < 1e-15);
        assert!((rel.error + 0.1).abs() < 1e-15);
        assert_eq!(rel.majority_fraction, 0.0);
    }

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0];
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&xs, &[-1.0, -2.0, -3.0]).unwrap() + 1.0).abs() < 1e-15);
        let r = pearson(&xs, &[1.0, 2.0, 4.0]).unwrap();
        // sxy = 3, sxx = 2, syy = 14/3
        assert!((r - 3.0 / (28.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((r - 0.9820).abs() < 1e-4);
        assert!(matches!(
            pearson(&xs, &[1.0, 1.0, 1.0]),
            Err(Error::ZeroVariance(_))
        ));
        assert!(matches!(
            pearson(&xs, &[1.0]),
            Err(Error::LengthMismatch(3, 1))
        ));
    }

    #[test]
    fn contour_map_examples() {
        let a = BoundaryMask::from_fn(3, 1, |x, _| x == 0);
        let b = BoundaryMask::from_fn(3, 1, |x, _| x == 1);
        let c = BoundaryMask::from_fn(3, 1, |x, _| x <= 1);
        let m = multiscale_contour_map(std::slice::from_ref(&a), 0.0).unwrap();
        assert_eq!(m.values(), &[1.0, 0.0, 0.0]);
        let m = multiscale_contour_map(&[a.clone(), b.clone()], 0.6).unwrap();
        assert_eq!(m.values(), &[0.0, 0.0, 0.0]);
        let m = multiscale_contour_map(&[a.clone(), b.clone(), c.clone()], 2.0 / 3.0).unwrap();
        assert_eq!(m.get(0, 0), 2.0 / 3.0);
        let m = multiscale_contour_map(&[a, b, c], 0.7).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn sweep_on_exact_map() {
        let gt = BoundaryMask::from_fn(6, 6, |x, _| x == 2);
        let map = multiscale_contour_map(std::slice::from_ref(&gt), 0.0).unwrap();
        let curve = pr_sweep(&map, &gt, 2.0, &[0.1, 0.5, 1.0]).unwrap();
        for p in &curve.points {
            assert_eq!((p.precision, p.recall, p.f_measure), (1.0, 1.0, 1.0));
        }
        let half = ContourMap::new(6, 6, map.values().iter().map(|v| v / 2.0).collect()).unwrap();
        let curve = pr_sweep(&half, &gt, 2.0, &[0.5, 0.9]).unwrap();
        assert!(curve.points[1].empty_prediction);
        assert_eq!(curve.points[1].precision, 1.0);
        assert_eq!(curve.points[1].f_measure, 0.0);
        assert_eq!(curve.best, 0);
        let avg = average_curves(&[curve.clone(), curve.clone()]).unwrap();
        assert_eq!(avg, curve);
    }

    #[test]
    fn correlation_flags_constant_columns() {
        let row = |i: usize| SweepRow {
            id: format!("d{i}"),
            k: 10 * (i + 1),
            gr: Some(i as f64),
            ev: Some(2.0 * i as f64 + 1.0),
            asa: Some(0.5),
            ue: Some(1.0 - i as f64),
            br: None,
            cd: Some(0.1),
            precision: Some(i as f64 * i as f64),
            c: Some(0.3),
            j: Some(i as f64),
            smf: Some(i as f64),
            src: Some(i as f64),
            mse: Some(0.0),
        };
        let table = correlation_table(&SweepTable {
            rows: (0..3).map(row).collect(),
        })
        .unwrap();
        let ev = SweepColumn::PERFORMANCE
            .iter()
            .position(|c| *c == SweepColumn::Ev)
            .unwrap();
        assert!((table.coefficients[ev][0].unwrap() - 1.0).abs() < 1e-15);
        assert!((table.coefficients[1][0].unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(table.coefficients[0][0], None);
        assert_eq!(table.coefficients[2][0], None);
        assert_eq!(table.coefficients[ev][4], None);
        assert!(!table.flags.is_empty());
        assert!(correlation_table(&SweepTable { rows: vec![row(0)] }).is_err());
    }

    #[test]
    fn uniform_grid() {
        let t = uniform_thresholds(DEFAULT_THRESHOLD_COUNT);
        assert_eq!(t.len(), 51);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[50], 1.0);
        assert_eq!(t[25], 0.5);
    }
}
