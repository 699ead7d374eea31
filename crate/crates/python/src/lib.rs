//! Python bindings: label maps, images, the metric functions and the
//! evaluation driver.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spxeval::analysis::asa_ue_relation_error;
use spxeval::color::{compression_mse, explained_variation, icv};
use spxeval::eval::{run_eval, run_sweep, EvalConfig, MetricSelection};
use spxeval::model::{self, boundary_mask, contour_density, overlap_matrix, Region};
use spxeval::objects;
use spxeval::regularity::{
    global_regularity, global_regularity_of, region_regularity, RegularityReport,
};
use spxeval::synth::{self, ShapeKind, ShapeSpec};
use spxeval::Error;

fn to_py(e: Error) -> PyErr {
    let io = match &e {
        Error::Io(_) => true,
        Error::File { source, .. } => matches!(**source, Error::Io(_)),
        _ => false,
    };
    if io {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "LabelMap", frozen)]
#[derive(Clone)]
struct PyLabelMap {
    inner: model::LabelMap,
}

#[pymethods]
impl PyLabelMap {
    /// Builds a label map from a list of equal-length rows.
    #[new]
    fn new(rows: Vec<Vec<u32>>) -> PyResult<Self> {
        Ok(Self {
            inner: model::LabelMap::from_rows(&rows).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_flat(width: usize, height: usize, labels: Vec<u32>) -> PyResult<Self> {
        Ok(Self {
            inner: model::LabelMap::new(width, height, labels).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: spxeval::io::read_label_map(path).map_err(to_py)?,
        })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        spxeval::io::write_label_map(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn region_count(&self) -> usize {
        self.inner.region_count()
    }

    fn rows(&self) -> Vec<Vec<u32>> {
        self.inner
            .as_slice()
            .chunks(self.inner.width())
            .map(<[u32]>::to_vec)
            .collect()
    }

    fn boundary(&self) -> Vec<Vec<bool>> {
        let mask = boundary_mask(&self.inner);
        mask.as_slice()
            .chunks(mask.width())
            .map(<[bool]>::to_vec)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "LabelMap({}x{}, {} regions)",
            self.inner.width(),
            self.inner.height(),
            self.inner.region_count()
        )
    }
}

#[pyclass(name = "Image", frozen)]
#[derive(Clone)]
struct PyImage {
    inner: model::Image,
}

#[pymethods]
impl PyImage {
    /// `data` is row-major with interleaved channels.
    #[new]
    fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: model::Image::new(width, height, channels, data).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: spxeval::io::read_image(path).map_err(to_py)?,
        })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        spxeval::io::write_image(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Image({}x{}x{})",
            self.inner.width(),
            self.inner.height(),
            self.inner.channels()
        )
    }
}

#[pyfunction(name = "icv")]
fn py_icv(image: &PyImage, labels: &PyLabelMap) -> PyResult<f64> {
    icv(&image.inner, &labels.inner).map_err(to_py)
}

#[pyfunction(name = "explained_variation")]
fn py_explained_variation(image: &PyImage, labels: &PyLabelMap) -> PyResult<f64> {
    explained_variation(&image.inner, &labels.inner).map_err(to_py)
}

#[pyfunction(name = "compression_mse")]
fn py_compression_mse(image: &PyImage, labels: &PyLabelMap) -> PyResult<f64> {
    compression_mse(&image.inner, &labels.inner).map_err(to_py)
}

#[pyfunction]
fn asa(labels: &PyLabelMap, gt: &PyLabelMap) -> PyResult<f64> {
    Ok(objects::asa(
        &overlap_matrix(&labels.inner, &gt.inner).map_err(to_py)?,
    ))
}

#[pyfunction]
fn undersegmentation_error(labels: &PyLabelMap, gt: &PyLabelMap) -> PyResult<f64> {
    let ov = overlap_matrix(&labels.inner, &gt.inner).map_err(to_py)?;
    Ok(objects::undersegmentation_error(&ov))
}

#[pyfunction]
fn undersegmentation_error_legacy(labels: &PyLabelMap, gt: &PyLabelMap) -> PyResult<f64> {
    let ov = overlap_matrix(&labels.inner, &gt.inner).map_err(to_py)?;
    objects::undersegmentation_error_legacy(&ov).map_err(to_py)
}

/// `(asa, ue, error, majority_fraction)` of the ASA-UE relation.
#[pyfunction]
fn asa_ue_relation(labels: &PyLabelMap, gt: &PyLabelMap) -> PyResult<(f64, f64, f64, f64)> {
    let r = asa_ue_relation_error(&overlap_matrix(&labels.inner, &gt.inner).map_err(to_py)?);
    Ok((r.asa, r.ue, r.error, r.majority_fraction))
}

#[pyfunction]
#[pyo3(signature = (labels, gt, epsilon = 2.0))]
fn boundary_recall(labels: &PyLabelMap, gt: &PyLabelMap, epsilon: f64) -> PyResult<f64> {
    objects::boundary_recall(
        &boundary_mask(&labels.inner),
        &boundary_mask(&gt.inner),
        epsilon,
    )
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (labels, gt, epsilon = 2.0))]
fn precision(labels: &PyLabelMap, gt: &PyLabelMap, epsilon: f64) -> PyResult<f64> {
    objects::precision(
        &boundary_mask(&labels.inner),
        &boundary_mask(&gt.inner),
        epsilon,
    )
    .map_err(to_py)
}

#[pyfunction]
fn f_measure(precision: f64, recall: f64) -> f64 {
    objects::f_measure(precision, recall)
}

#[pyfunction(name = "contour_density")]
fn py_contour_density(labels: &PyLabelMap) -> f64 {
    contour_density(&labels.inner)
}

fn report_dict<'py>(py: Python<'py>, r: &RegularityReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("c", r.circularity)?;
    d.set_item("src", r.src)?;
    d.set_item("smf", r.smf)?;
    d.set_item("j", r.j_index)?;
    d.set_item("gr", r.gr)?;
    d.set_item("halfwidth", r.halfwidth)?;
    d.set_item("binary_threshold", r.binary_threshold)?;
    d.set_item("binary_reached", r.binary_reached)?;
    d.set_item("border_regions", r.border_regions)?;
    Ok(d)
}

/// Decomposition regularity: keys `c`, `src`, `smf`, `j`, `gr` and grid
/// details.
#[pyfunction(name = "global_regularity")]
fn py_global_regularity<'py>(py: Python<'py>, labels: &PyLabelMap) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &global_regularity_of(&labels.inner).map_err(to_py)?)
}

fn region_from(pixels: Vec<(i32, i32)>) -> PyResult<Region> {
    Region::new(0, pixels).map_err(to_py)
}

/// Regularity of a set of shapes given as pixel lists.
#[pyfunction]
fn shapes_regularity<'py>(
    py: Python<'py>,
    shapes: Vec<Vec<(i32, i32)>>,
) -> PyResult<Bound<'py, PyDict>> {
    let regions = shapes
        .into_iter()
        .map(region_from)
        .collect::<PyResult<Vec<_>>>()?;
    report_dict(py, &global_regularity(&regions).map_err(to_py)?)
}

/// Per-shape circularity, convexity ratio, variance ratio and SRC term.
#[pyfunction]
fn shape_regularity<'py>(py: Python<'py>, pixels: Vec<(i32, i32)>) -> PyResult<Bound<'py, PyDict>> {
    let r = region_regularity(&region_from(pixels)?);
    let d = PyDict::new(py);
    d.set_item("area", r.area)?;
    d.set_item("perimeter", r.perimeter)?;
    d.set_item("hull_area", r.hull_area)?;
    d.set_item("c", r.circularity)?;
    d.set_item("cr", r.convexity_ratio)?;
    d.set_item("vxy", r.variance_ratio)?;
    d.set_item("src", r.src_term())?;
    Ok(d)
}

fn spec_from(
    kind: &str,
    size: usize,
    aspect: Option<f64>,
    thickness: Option<usize>,
) -> PyResult<ShapeSpec> {
    let kind = ShapeKind::parse(kind)
        .ok_or_else(|| PyValueError::new_err(format!("unknown shape kind {kind:?}")))?;
    let mut spec = ShapeSpec::new(kind, size);
    if let Some(a) = aspect {
        spec = spec.with_aspect(a);
    }
    if let Some(t) = thickness {
        spec = spec.with_thickness(t);
    }
    Ok(spec)
}

/// Pixels of a synthetic shape anchored at the origin.
#[pyfunction]
#[pyo3(signature = (kind, size, aspect = None, thickness = None, noise = 0, seed = 0))]
fn generate_shape(
    kind: &str,
    size: usize,
    aspect: Option<f64>,
    thickness: Option<usize>,
    noise: usize,
    seed: u64,
) -> PyResult<Vec<(i32, i32)>> {
    let spec = spec_from(kind, size, aspect, thickness)?.with_noise(noise, seed);
    Ok(synth::generate(&spec).map_err(to_py)?.pixels().to_vec())
}

#[pyfunction]
#[pyo3(signature = (kind, area, aspect = None, thickness = None))]
fn size_for_area(
    kind: &str,
    area: usize,
    aspect: Option<f64>,
    thickness: Option<usize>,
) -> PyResult<usize> {
    synth::size_for_area(&spec_from(kind, 3, aspect, thickness)?, area).map_err(to_py)
}

#[pyfunction]
fn grid_decomposition(width: usize, height: usize, cell: usize) -> PyResult<PyLabelMap> {
    Ok(PyLabelMap {
        inner: synth::grid_decomposition(width, height, cell).map_err(to_py)?,
    })
}

#[pyfunction]
fn pearson(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    spxeval::analysis::pearson(&xs, &ys).map_err(to_py)
}

#[pyfunction]
fn read_label_map(path: PathBuf) -> PyResult<PyLabelMap> {
    PyLabelMap::read(path)
}

#[pyfunction]
fn read_image(path: PathBuf) -> PyResult<PyImage> {
    PyImage::read(path)
}

fn config(
    image: PathBuf,
    labels: Vec<PathBuf>,
    ground_truths: Vec<PathBuf>,
    epsilon: f64,
    jobs: usize,
) -> EvalConfig {
    let mut cfg = EvalConfig::new(image, labels, ground_truths);
    cfg.epsilon = epsilon;
    cfg.jobs = jobs;
    cfg.metrics = MetricSelection {
        objects: !cfg.ground_truths.is_empty(),
        ..MetricSelection::default()
    };
    cfg
}

fn json_loads<'py>(py: Python<'py>, text: String) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Evaluates decomposition files; returns the report as a dict. Object
/// metrics are skipped when no ground truth is given.
#[pyfunction]
#[pyo3(signature = (image, labels, ground_truths = Vec::new(), epsilon = 2.0, jobs = 0))]
fn evaluate(
    py: Python<'_>,
    image: PathBuf,
    labels: Vec<PathBuf>,
    ground_truths: Vec<PathBuf>,
    epsilon: f64,
    jobs: usize,
) -> PyResult<Bound<'_, PyAny>> {
    let cfg = config(image, labels, ground_truths, epsilon, jobs);
    let report = py.detach(|| run_eval(&cfg)).map_err(to_py)?;
    json_loads(py, report.to_json())
}

/// Sweep table and regularity/performance correlations as a dict.
#[pyfunction]
#[pyo3(signature = (image, labels, ground_truths, epsilon = 2.0, jobs = 0))]
fn sweep(
    py: Python<'_>,
    image: PathBuf,
    labels: Vec<PathBuf>,
    ground_truths: Vec<PathBuf>,
    epsilon: f64,
    jobs: usize,
) -> PyResult<Bound<'_, PyAny>> {
    let cfg = config(image, labels, ground_truths, epsilon, jobs);
    let out = py.detach(|| run_sweep(&cfg)).map_err(to_py)?;
    json_loads(py, out.to_json())
}

#[pymodule]
fn pyspxeval(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLabelMap>()?;
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(py_icv, m)?)?;
    m.add_function(wrap_pyfunction!(py_explained_variation, m)?)?;
    m.add_function(wrap_pyfunction!(py_compression_mse, m)?)?;
    m.add_function(wrap_pyfunction!(asa, m)?)?;
    m.add_function(wrap_pyfunction!(undersegmentation_error, m)?)?;
    m.add_function(wrap_pyfunction!(undersegmentation_error_legacy, m)?)?;
    m.add_function(wrap_pyfunction!(asa_ue_relation, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_recall, m)?)?;
    m.add_function(wrap_pyfunction!(precision, m)?)?;
    m.add_function(wrap_pyfunction!(f_measure, m)?)?;
    m.add_function(wrap_pyfunction!(py_contour_density, m)?)?;
    m.add_function(wrap_pyfunction!(py_global_regularity, m)?)?;
    m.add_function(wrap_pyfunction!(shapes_regularity, m)?)?;
    m.add_function(wrap_pyfunction!(shape_regularity, m)?)?;
    m.add_function(wrap_pyfunction!(generate_shape, m)?)?;
    m.add_function(wrap_pyfunction!(size_for_area, m)?)?;
    m.add_function(wrap_pyfunction!(grid_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(read_label_map, m)?)?;
    m.add_function(wrap_pyfunction!(read_image, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
