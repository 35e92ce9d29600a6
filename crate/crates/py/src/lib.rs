//! Python bindings. Point clouds cross the boundary as lists of rows
//! (anything sequence-like, including 2-D numpy arrays).

use flatfield::datasets::{self, Jitter, Surface, SurfaceSpec};
use flatfield::deform::{self, DeformConfig};
use flatfield::neighborhood::{self, SoftNeighborhood};
use flatfield::pipeline::{self, ReduceConfig};
use flatfield::{spectral, Error, PointCloud};
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<f64>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Ingestion { .. } => PyValueError::new_err(e.to_string()),
        Error::Divergence { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
    }
}

fn cloud(points: Rows) -> PyResult<PointCloud> {
    PointCloud::new(points).map_err(to_py)
}

fn neighborhoods(original: &PointCloud, k: Option<usize>) -> PyResult<Vec<SoftNeighborhood>> {
    let d0 = flatfield::pairwise_distances(original);
    let k = k.unwrap_or_else(|| neighborhood::default_k(original.len()));
    neighborhood::build_soft_neighborhoods(&d0, k).map_err(to_py)
}

/// Deformation parameters; `k` and `epsilon` of `None` resolve from the
/// point count.
#[pyclass(name = "DeformConfig", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyDeformConfig {
    k: Option<usize>,
    alpha1_amplitude: f64,
    period: usize,
    alpha2: f64,
    clamp_alpha1_nonnegative: bool,
    epsilon: Option<f64>,
    max_steps: usize,
    trace_pca_every: usize,
}

impl From<&PyDeformConfig> for DeformConfig {
    fn from(c: &PyDeformConfig) -> Self {
        DeformConfig {
            k: c.k,
            alpha1_amplitude: c.alpha1_amplitude,
            period: c.period,
            alpha2: c.alpha2,
            clamp_alpha1_nonnegative: c.clamp_alpha1_nonnegative,
            epsilon: c.epsilon,
            max_steps: c.max_steps,
            trace_pca_every: c.trace_pca_every,
        }
    }
}

#[pymethods]
impl PyDeformConfig {
    #[new]
    #[pyo3(signature = (k=None, alpha1_amplitude=1e-4, period=60, alpha2=0.1,
                        clamp_alpha1_nonnegative=true, epsilon=None, max_steps=600, trace_pca_every=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        k: Option<usize>,
        alpha1_amplitude: f64,
        period: usize,
        alpha2: f64,
        clamp_alpha1_nonnegative: bool,
        epsilon: Option<f64>,
        max_steps: usize,
        trace_pca_every: usize,
    ) -> PyResult<Self> {
        let c = Self {
            k,
            alpha1_amplitude,
            period,
            alpha2,
            clamp_alpha1_nonnegative,
            epsilon,
            max_steps,
            trace_pca_every,
        };
        DeformConfig::from(&c).validate().map_err(to_py)?;
        Ok(c)
    }

    fn __repr__(&self) -> String {
        format!(
            "DeformConfig(k={:?}, alpha1_amplitude={}, period={}, alpha2={}, clamp_alpha1_nonnegative={}, epsilon={:?}, max_steps={}, trace_pca_every={})",
            self.k, self.alpha1_amplitude, self.period, self.alpha2,
            self.clamp_alpha1_nonnegative, self.epsilon, self.max_steps, self.trace_pca_every
        )
    }
}

fn resolve(config: Option<PyRef<'_, PyDeformConfig>>) -> DeformConfig {
    config.map(|c| DeformConfig::from(&*c)).unwrap_or_default()
}

#[pyclass(name = "Pca", get_all)]
struct PyPca {
    mean: Vec<f64>,
    components: Rows,
    variances: Vec<f64>,
    ratios: Vec<f64>,
}

/// Trace rows are `(step, alpha1, total_displacement, ratios or None)`.
type TraceRow = (usize, f64, f64, Option<Vec<f64>>);

fn trace_rows(trace: &deform::DeformTrace) -> Vec<TraceRow> {
    trace
        .records()
        .iter()
        .map(|r| (r.step, r.alpha1, r.total_displacement, r.ratios.clone()))
        .collect()
}

#[pyclass(name = "DeformOutcome", get_all)]
struct PyDeformOutcome {
    points: Rows,
    steps: usize,
    stop_reason: String,
    trace: Vec<TraceRow>,
}

#[pyclass(name = "Reduction", get_all)]
struct PyReduction {
    intrinsic_dimension: usize,
    coordinates: Rows,
    /// `(i, j, degree, d0)` for every soft-neighbour entry.
    edges: Vec<(usize, usize, f64, f64)>,
    ratios: Vec<f64>,
    deformed: Rows,
    steps: usize,
    stop_reason: String,
    trace: Vec<TraceRow>,
}

#[pyfunction]
fn pairwise_distances(points: Rows) -> PyResult<Rows> {
    Ok(flatfield::pairwise_distances(&cloud(points)?).to_rows())
}

#[pyfunction]
fn neighbor_degrees(distances: Vec<f64>) -> PyResult<Vec<f64>> {
    neighborhood::neighbor_degrees(&distances).map_err(to_py)
}

/// Soft neighbourhoods as lists of `(index, d0, degree)`.
#[pyfunction]
#[pyo3(signature = (points, k=None))]
fn soft_neighborhoods(points: Rows, k: Option<usize>) -> PyResult<Vec<Vec<(usize, f64, f64)>>> {
    let sn = neighborhoods(&cloud(points)?, k)?;
    Ok(sn
        .into_iter()
        .map(|s| s.entries.into_iter().map(|e| (e.index, e.d0, e.degree)).collect())
        .collect())
}

#[pyfunction]
#[pyo3(signature = (step, config=None))]
fn schedule_alphas(step: usize, config: Option<PyRef<'_, PyDeformConfig>>) -> (f64, f64) {
    deform::schedule_alphas(step, &resolve(config))
}

/// Deforming field of `current`, using soft neighbourhoods built from
/// `original`.
#[pyfunction]
#[pyo3(signature = (original, current, alpha1, alpha2, k=None))]
fn total_field(original: Rows, current: Rows, alpha1: f64, alpha2: f64, k: Option<usize>) -> PyResult<Rows> {
    let sn = neighborhoods(&cloud(original)?, k)?;
    deform::total_field(&cloud(current)?, &sn, alpha1, alpha2).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (points, config=None))]
fn run_deformation(
    py: Python<'_>,
    points: Rows,
    config: Option<PyRef<'_, PyDeformConfig>>,
) -> PyResult<PyDeformOutcome> {
    let c = cloud(points)?;
    let cfg = resolve(config);
    let out = py
        .detach(|| deform::run_deformation(c, &cfg))
        .map_err(to_py)?;
    Ok(PyDeformOutcome {
        points: out.cloud.to_rows(),
        steps: out.steps,
        stop_reason: out.stop_reason.to_string(),
        trace: trace_rows(&out.trace),
    })
}

#[pyfunction]
fn pca(points: Rows) -> PyResult<PyPca> {
    let p = spectral::pca(&cloud(points)?).map_err(to_py)?;
    Ok(PyPca {
        mean: p.mean,
        components: p.components,
        variances: p.variances,
        ratios: p.ratios,
    })
}

#[pyfunction]
#[pyo3(signature = (ratios, threshold=spectral::DEFAULT_RATIO_THRESHOLD))]
fn estimate_dimension(ratios: Vec<f64>, threshold: f64) -> PyResult<usize> {
    let result = spectral::PcaResult {
        mean: Vec::new(),
        components: Vec::new(),
        variances: ratios.clone(),
        ratios,
    };
    spectral::estimate_dimension(&result, threshold).map_err(to_py)
}

/// Full pipeline: deform, then PCA readout.
#[pyfunction]
#[pyo3(signature = (points, config=None, ratio_threshold=spectral::DEFAULT_RATIO_THRESHOLD, dim=None))]
fn reduce(
    py: Python<'_>,
    points: Rows,
    config: Option<PyRef<'_, PyDeformConfig>>,
    ratio_threshold: f64,
    dim: Option<usize>,
) -> PyResult<PyReduction> {
    let c = cloud(points)?;
    let cfg = ReduceConfig {
        deform: resolve(config),
        ratio_threshold,
        dim,
    };
    let r = py.detach(|| pipeline::reduce(&c, &cfg)).map_err(to_py)?;
    Ok(PyReduction {
        intrinsic_dimension: r.embedding.intrinsic_dimension,
        coordinates: r.embedding.coordinates,
        edges: r.embedding.edges.iter().map(|e| (e.from, e.to, e.degree, e.d0)).collect(),
        ratios: r.embedding.ratios,
        deformed: r.deformed.to_rows(),
        steps: r.steps,
        stop_reason: r.stop_reason.to_string(),
        trace: trace_rows(&r.trace),
    })
}

fn jitter(amplitude: Option<f64>, seed: u64) -> Option<Jitter> {
    amplitude.map(|amplitude| Jitter { amplitude, seed })
}

#[pyfunction]
#[pyo3(signature = (grid_u=12, grid_v=10, radius=1.0, height=2.5, jitter=None, seed=0))]
fn half_cylinder(
    grid_u: usize,
    grid_v: usize,
    radius: f64,
    height: f64,
    jitter: Option<f64>,
    seed: u64,
) -> PyResult<Rows> {
    let spec = SurfaceSpec {
        surface: Surface::HalfCylinder { radius, height },
        grid_u,
        grid_v,
        jitter: self::jitter(jitter, seed),
    };
    Ok(spec.generate().map_err(to_py)?.to_rows())
}

#[pyfunction]
#[pyo3(signature = (variance=6.0, grid_u=12, grid_v=10, peak=3.0, half_width=5.0, jitter=None, seed=0))]
fn gaussian_surface(
    variance: f64,
    grid_u: usize,
    grid_v: usize,
    peak: f64,
    half_width: f64,
    jitter: Option<f64>,
    seed: u64,
) -> PyResult<Rows> {
    let spec = SurfaceSpec {
        surface: Surface::Gaussian { variance, peak, half_width },
        grid_u,
        grid_v,
        jitter: self::jitter(jitter, seed),
    };
    Ok(spec.generate().map_err(to_py)?.to_rows())
}

#[pyfunction]
fn load_csv(path: std::path::PathBuf) -> PyResult<Rows> {
    Ok(datasets::load_csv(path).map_err(to_py)?.to_rows())
}

#[pymodule]
fn pyflatfield(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDeformConfig>()?;
    m.add_class::<PyPca>()?;
    m.add_class::<PyDeformOutcome>()?;
    m.add_class::<PyReduction>()?;
    m.add_function(wrap_pyfunction!(pairwise_distances, m)?)?;
    m.add_function(wrap_pyfunction!(neighbor_degrees, m)?)?;
    m.add_function(wrap_pyfunction!(soft_neighborhoods, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_alphas, m)?)?;
    m.add_function(wrap_pyfunction!(total_field, m)?)?;
    m.add_function(wrap_pyfunction!(run_deformation, m)?)?;
    m.add_function(wrap_pyfunction!(pca, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(half_cylinder, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_surface, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_conversion_keeps_every_field() {
        let py = PyDeformConfig {
            k: Some(4),
            alpha1_amplitude: 2e-4,
            period: 30,
            alpha2: 0.2,
            clamp_alpha1_nonnegative: false,
            epsilon: Some(1e-3),
            max_steps: 12,
            trace_pca_every: 3,
        };
        let c = DeformConfig::from(&py);
        assert_eq!(
            c,
            DeformConfig {
                k: Some(4),
                alpha1_amplitude: 2e-4,
                period: 30,
                alpha2: 0.2,
                clamp_alpha1_nonnegative: false,
                epsilon: Some(1e-3),
                max_steps: 12,
                trace_pca_every: 3,
            }
        );
    }

    #[test]
    fn jitter_is_optional() {
        assert_eq!(jitter(None, 3), None);
        assert_eq!(jitter(Some(0.1), 3), Some(Jitter { amplitude: 0.1, seed: 3 }));
    }
}
