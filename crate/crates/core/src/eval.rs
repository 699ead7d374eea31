//! Batch evaluation of decompositions stored on disk, and the reports it
//! produces.
//!
//! Metrics that are undefined for an input (constant image, single
//! superpixel, ground truth without boundaries) are reported as `null` with
//! a flag; file, format and dimension errors abort the whole run.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{correlation_table, CorrelationTable, SweepRow, SweepTable};
use crate::color::{compression_mse, explained_variation, icv};
use crate::error::{Error, Result};
use crate::io::{read_image, read_label_map};
use crate::model::{boundary_mask, contour_density, overlap_matrix, Image, LabelMap};
use crate::objects::{
    asa, boundary_recall, f_measure, mean_over_annotations, precision, undersegmentation_error,
    undersegmentation_error_legacy,
};
use crate::regularity::global_regularity_of;

pub const DEFAULT_EPSILON: f64 = 2.0;

pub const PERIMETER_DEFINITION: &str =
    "count of pixels with a 4-neighbor outside the region; the image frame counts as outside";
pub const REGISTRATION_ROUNDING: &str =
    "integer shift floor(0.5 - barycenter) per axis (barycenter rounded half up)";
pub const AVERAGE_SHAPE_NORMALIZATION: &str = "mass (sum of average occupancy)";
pub const DISTANCE_RULE: &str = "Euclidean distance strictly below epsilon";
pub const FLOAT_FORMAT: &str = "6 significant digits";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Which metric groups to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetricSelection {
    pub color: bool,
    pub objects: bool,
    pub regularity: bool,
    pub compression: bool,
}

impl Default for MetricSelection {
    fn default() -> Self {
        Self {
            color: true,
            objects: true,
            regularity: true,
            compression: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub image: PathBuf,
    pub decompositions: Vec<PathBuf>,
    pub ground_truths: Vec<PathBuf>,
    pub epsilon: f64,
    /// Contour thresholds; recorded in the report.
    pub nu: Vec<f64>,
    pub metrics: MetricSelection,
    pub format: OutputFormat,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl EvalConfig {
    pub fn new(
        image: impl Into<PathBuf>,
        decompositions: Vec<PathBuf>,
        ground_truths: Vec<PathBuf>,
    ) -> Self {
        Self {
            image: image.into(),
            decompositions,
            ground_truths,
            epsilon: DEFAULT_EPSILON,
            nu: Vec::new(),
            metrics: MetricSelection::default(),
            format: OutputFormat::Json,
            jobs: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if let Some(nu) = self.nu.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "nu must lie in [0, 1], got {nu}"
            )));
        }
        if self.decompositions.is_empty() {
            return Err(Error::InvalidParameter("no decomposition given".into()));
        }
        if self.metrics.objects && self.ground_truths.is_empty() {
            return Err(Error::InvalidParameter(
                "object metrics need at least one ground truth".into(),
            ));
        }
        Ok(())
    }
}

/// Rounds to 6 significant digits; non-finite values become `None`.
pub fn round_sig(v: f64) -> Option<f64> {
    if !v.is_finite() {
        return None;
    }
    Some(format!("{v:.5e}").parse().expect("formatted float parses"))
}

/// Scalar metrics of one decomposition. Keys follow the usual symbols.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub ev: Option<f64>,
    pub icv: Option<f64>,
    pub asa: Option<f64>,
    pub ue: Option<f64>,
    pub ue_legacy: Option<f64>,
    pub br: Option<f64>,
    pub cd: Option<f64>,
    pub precision: Option<f64>,
    pub f: Option<f64>,
    pub c: Option<f64>,
    pub j: Option<f64>,
    pub src: Option<f64>,
    pub smf: Option<f64>,
    pub gr: Option<f64>,
    pub mse: Option<f64>,
}

impl Metrics {
    fn rounded(self) -> Self {
        let r = |v: Option<f64>| v.and_then(round_sig);
        Self {
            ev: r(self.ev),
            icv: r(self.icv),
            asa: r(self.asa),
            ue: r(self.ue),
            ue_legacy: r(self.ue_legacy),
            br: r(self.br),
            cd: r(self.cd),
            precision: r(self.precision),
            f: r(self.f),
            c: r(self.c),
            j: r(self.j),
            src: r(self.src),
            smf: r(self.smf),
            gr: r(self.gr),
            mse: r(self.mse),
        }
    }

    /// `(key, value)` pairs in report order.
    pub fn entries(&self) -> [(&'static str, Option<f64>); 15] {
        [
            ("ev", self.ev),
            ("icv", self.icv),
            ("asa", self.asa),
            ("ue", self.ue),
            ("ue_legacy", self.ue_legacy),
            ("br", self.br),
            ("cd", self.cd),
            ("precision", self.precision),
            ("f", self.f),
            ("c", self.c),
            ("j", self.j),
            ("src", self.src),
            ("smf", self.smf),
            ("gr", self.gr),
            ("mse", self.mse),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub path: String,
    /// Number of distinct labels.
    pub k: usize,
    /// Halfwidth of the registration grid used by SMF and J.
    pub halfwidth: Option<usize>,
    /// Regions truncated by the image frame.
    pub border_regions: Option<usize>,
    pub metrics: Metrics,
    /// One entry per metric that could not be computed.
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    pub epsilon: f64,
    pub nu: Vec<f64>,
    pub perimeter_def: &'static str,
    pub distance_rule: &'static str,
    pub rounding_rule: &'static str,
    pub average_shape_normalization: &'static str,
    pub object_metric_aggregation: &'static str,
    pub float_format: &'static str,
    pub metrics: MetricSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub image: String,
    pub ground_truths: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub provenance: Provenance,
    pub parameters: Parameters,
    pub decompositions: Vec<DecompositionReport>,
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("decomposition,k");
        for (key, _) in Metrics::default().entries() {
            out.push(',');
            out.push_str(key);
        }
        out.push('\n');
        for d in &self.decompositions {
            out.push_str(&csv_field(&d.path));
            out.push_str(&format!(",{}", d.k));
            for (_, v) in d.metrics.entries() {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Errors that mean "metric undefined for this input" rather than bad input.
fn is_undefined(e: &Error) -> bool {
    matches!(
        e,
        Error::ZeroVariance(_)
            | Error::EmptyGroundTruthBoundary
            | Error::EmptySuperpixelBoundary
            | Error::EmptyGroundTruthRegion(_)
            | Error::TooFewRegions(_)
            | Error::NoAdjacentRegions
    )
}

fn flagged<T>(res: Result<T>, metric: &str, flags: &mut Vec<String>) -> Result<Option<T>> {
    match res {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_undefined(&e) => {
            flags.push(format!("{metric}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn check_dims(what: &LabelMap, image: &Image, path: &Path) -> Result<()> {
    what.ensure_same_dimensions(image.dimensions())
        .map_err(|e| e.in_file(path))
}

/// Metrics of one decomposition against the image and its annotations.
/// Values are not rounded.
pub fn evaluate_decomposition(
    image: &Image,
    labels: &LabelMap,
    ground_truths: &[LabelMap],
    epsilon: f64,
    selection: MetricSelection,
) -> Result<(Metrics, DecompositionExtras)> {
    let mut m = Metrics::default();
    let mut extras = DecompositionExtras::default();
    let flags = &mut extras.flags;
    if selection.color {
        m.icv = Some(icv(image, labels)?);
        m.ev = flagged(explained_variation(image, labels), "ev", flags)?;
    }
    if selection.objects && !ground_truths.is_empty() {
        let sp_boundary = boundary_mask(labels);
        let (mut a, mut ue, mut uel, mut br, mut p) = (vec![], vec![], vec![], vec![], vec![]);
        let (mut uel_ok, mut br_ok, mut p_ok) = (true, true, true);
        for gt in ground_truths {
            let ov = overlap_matrix(labels, gt)?;
            a.push(asa(&ov));
            ue.push(undersegmentation_error(&ov));
            match flagged(undersegmentation_error_legacy(&ov), "ue_legacy", flags)? {
                Some(v) => uel.push(v),
                None => uel_ok = false,
            }
            let gt_boundary = boundary_mask(gt);
            match flagged(
                boundary_recall(&sp_boundary, &gt_boundary, epsilon),
                "br",
                flags,
            )? {
                Some(v) => br.push(v),
                None => br_ok = false,
            }
            match flagged(
                precision(&sp_boundary, &gt_boundary, epsilon),
                "precision",
                flags,
            )? {
                Some(v) => p.push(v),
                None => p_ok = false,
            }
        }
        m.asa = Some(mean_over_annotations(&a)?);
        m.ue = Some(mean_over_annotations(&ue)?);
        m.ue_legacy = if uel_ok {
            Some(mean_over_annotations(&uel)?)
        } else {
            None
        };
        m.br = if br_ok {
            Some(mean_over_annotations(&br)?)
        } else {
            None
        };
        m.precision = if p_ok {
            Some(mean_over_annotations(&p)?)
        } else {
            None
        };
        m.f = match (m.precision, m.br) {
            (Some(p), Some(r)) => Some(f_measure(p, r)),
            _ => {
                flags.push("f: needs both precision and br".into());
                None
            }
        };
    }
    if selection.objects {
        m.cd = Some(contour_density(labels));
    }
    if selection.regularity {
        let r = global_regularity_of(labels)?;
        m.c = Some(r.circularity);
        m.j = Some(r.j_index);
        m.src = Some(r.src);
        m.smf = Some(r.smf);
        m.gr = Some(r.gr);
        extras.halfwidth = Some(r.halfwidth);
        extras.border_regions = r.border_regions;
        if !r.binary_reached {
            flags.push("j: binary average shape never reached the mean superpixel area".into());
        }
    }
    if selection.compression {
        m.mse = Some(compression_mse(image, labels)?);
    }
    Ok((m, extras))
}

/// Report fields besides the metrics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecompositionExtras {
    pub halfwidth: Option<usize>,
    pub border_regions: Option<usize>,
    pub flags: Vec<String>,
}

fn build_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {jobs} workers: {e}")))
}

struct Loaded {
    image: Image,
    ground_truths: Vec<LabelMap>,
}

fn load_common(image: &Path, ground_truths: &[PathBuf]) -> Result<Loaded> {
    let image_data = read_image(image)?;
    let gts = ground_truths
        .iter()
        .map(|p| {
            let gt = read_label_map(p)?;
            check_dims(&gt, &image_data, p)?;
            Ok(gt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Loaded {
        image: image_data,
        ground_truths: gts,
    })
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn evaluate_paths(
    loaded: &Loaded,
    decompositions: &[PathBuf],
    epsilon: f64,
    selection: MetricSelection,
    jobs: usize,
) -> Result<Vec<DecompositionReport>> {
    let pool = build_pool(jobs)?;
    pool.install(|| {
        decompositions
            .par_iter()
            .map(|path| {
                let labels = read_label_map(path)?;
                check_dims(&labels, &loaded.image, path)?;
                let (metrics, extras) = evaluate_decomposition(
                    &loaded.image,
                    &labels,
                    &loaded.ground_truths,
                    epsilon,
                    selection,
                )
                .map_err(|e| e.in_file(path))?;
                Ok(DecompositionReport {
                    path: display(path),
                    k: labels.region_count(),
                    halfwidth: extras.halfwidth,
                    border_regions: extras.border_regions,
                    metrics: metrics.rounded(),
                    flags: extras.flags,
                })
            })
            .collect()
    })
}

/// Evaluates every decomposition of the config. Nothing is returned unless
/// every decomposition succeeds.
pub fn run_eval(config: &EvalConfig) -> Result<MetricReport> {
    config.validate()?;
    let loaded = load_common(&config.image, &config.ground_truths)?;
    let decompositions = evaluate_paths(
        &loaded,
        &config.decompositions,
        config.epsilon,
        config.metrics,
        config.jobs,
    )?;
    Ok(MetricReport {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            image: display(&config.image),
            ground_truths: config.ground_truths.iter().map(|p| display(p)).collect(),
        },
        parameters: Parameters {
            epsilon: config.epsilon,
            nu: config.nu.clone(),
            perimeter_def: PERIMETER_DEFINITION,
            distance_rule: DISTANCE_RULE,
            rounding_rule: REGISTRATION_ROUNDING,
            average_shape_normalization: AVERAGE_SHAPE_NORMALIZATION,
            object_metric_aggregation:
                "mean over annotations; f from the mean precision and mean br",
            float_format: FLOAT_FORMAT,
            metrics: config.metrics,
        },
        decompositions,
    })
}

/// Sweep table plus its correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub table: SweepTable,
    pub correlation: CorrelationTable,
}

impl SweepOutput {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep serializes");
        s.push('\n');
        s
    }

    /// Plot-ready table followed by the correlation matrix, separated by a
    /// blank line.
    pub fn to_csv(&self) -> String {
        let mut out = sweep_table_csv(&self.table);
        out.push('\n');
        out.push_str(&correlation_csv(&self.correlation));
        out
    }
}

pub fn sweep_table_csv(table: &SweepTable) -> String {
    let mut out = String::from("id,k,gr,ev,asa,ue,br,cd,precision,c,j,smf,src,mse\n");
    let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in &table.rows {
        let values = [
            r.gr,
            r.ev,
            r.asa,
            r.ue,
            r.br,
            r.cd,
            r.precision,
            r.c,
            r.j,
            r.smf,
            r.src,
            r.mse,
        ];
        let cells: Vec<String> = values.into_iter().map(cell).collect();
        out.push_str(&format!(
            "{},{},{}\n",
            csv_field(&r.id),
            r.k,
            cells.join(",")
        ));
    }
    out
}

pub fn correlation_csv(table: &CorrelationTable) -> String {
    let cell = |v: Option<f64>| {
        v.and_then(round_sig)
            .map(|v| v.to_string())
            .unwrap_or_default()
    };
    let mut out = format!("performance,{}\n", table.regularity.join(","));
    for (name, row) in table.performance.iter().zip(&table.coefficients) {
        let cells: Vec<String> = row.iter().map(|&v| cell(v)).collect();
        out.push_str(&format!("{name},{}\n", cells.join(",")));
    }
    let avg: Vec<String> = table.average_abs.iter().map(|&v| cell(v)).collect();
    out.push_str(&format!("average_abs,{}\n", avg.join(",")));
    out
}

pub fn sweep_row(id: String, k: usize, m: &Metrics) -> SweepRow {
    SweepRow {
        id,
        k,
        gr: m.gr,
        ev: m.ev,
        asa: m.asa,
        ue: m.ue,
        br: m.br,
        cd: m.cd,
        precision: m.precision,
        c: m.c,
        j: m.j,
        smf: m.smf,
        src: m.src,
        mse: m.mse,
    }
}

/// Evaluates at least two decompositions of one image into a sweep table
/// and correlates regularity with performance columns.
pub fn run_sweep(config: &EvalConfig) -> Result<SweepOutput> {
    config.validate()?;
    if config.decompositions.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a sweep needs at least 2 decompositions, got {}",
            config.decompositions.len()
        )));
    }
    let loaded = load_common(&config.image, &config.ground_truths)?;
    let reports = evaluate_paths(
        &loaded,
        &config.decompositions,
        config.epsilon,
        config.metrics,
        config.jobs,
    )?;
    let table = SweepTable {
        rows: reports
            .iter()
            .map(|d| sweep_row(d.path.clone(), d.k, &d.metrics))
            .collect(),
    };
    let correlation = correlation_table(&table)?;
    Ok(SweepOutput { table, correlation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_six_digits() {
        assert_eq!(round_sig(0.123456789), Some(0.123457));
        assert_eq!(round_sig(1.0), Some(1.0));
        assert_eq!(round_sig(123456.7), Some(123457.0));
        assert_eq!(round_sig(f64::NAN), None);
    }

    #[test]
    fn identical_labels_and_gt() {
        let labels = LabelMap::from_fn(8, 8, |x, y| (y / 4 * 2 + x / 4) as u32).unwrap();
        let image = Image::from_fn_gray(8, 8, |x, y| (x * 8 + y) as f64).unwrap();
        let (m, extras) = evaluate_decomposition(
            &image,
            &labels,
            std::slice::from_ref(&labels),
            2.0,
            MetricSelection::default(),
        )
        .unwrap();
        assert_eq!(m.asa, Some(1.0));
        assert_eq!(m.ue, Some(0.0));
        assert_eq!(m.br, Some(1.0));
        assert_eq!(m.precision, Some(1.0));
        assert!(extras.flags.is_empty());
    }

    #[test]
    fn constant_image_flags_ev() {
        let labels = LabelMap::from_fn(8, 8, |x, y| (y / 4 * 2 + x / 4) as u32).unwrap();
        let image = Image::from_fn_gray(8, 8, |_, _| 5.0).unwrap();
        let (m, extras) = evaluate_decomposition(
            &image,
            &labels,
            std::slice::from_ref(&labels),
            2.0,
            MetricSelection::default(),
        )
        .unwrap();
        assert_eq!(m.ev, None);
        assert!(extras.flags.iter().any(|f| f.starts_with("ev:")));
        assert!((m.gr.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = EvalConfig::new("a.pgm", vec!["b.csv".into()], vec!["c.csv".into()]);
        assert!(c.validate().is_ok());
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
        c.epsilon = 2.0;
        c.nu = vec![1.5];
        assert!(c.validate().is_err());
        c.nu.clear();
        c.decompositions.clear();
        assert!(c.validate().is_err());
    }
}
