//! Python bindings for `rmtlaw`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rmtlaw::sim::Budget;
use rmtlaw::{AspectRatio, Error, HSequence};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Bound { .. } | Error::Domain(_) | Error::Budget(_) => PyValueError::new_err(e.to_string()),
        Error::Numeric(_) | Error::Range(_) | Error::Unsupported(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for rmtlaw::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Set partition of {1..k}, written like "1,2,4|3|5".
#[pyclass(module = "pyrmtlaw", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct Partition {
    inner: rmtlaw::Partition,
}

#[pymethods]
impl Partition {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: text.parse().py_err()?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn blocks(&self) -> Vec<Vec<usize>> {
        self.inner.blocks().to_vec()
    }

    fn num_blocks(&self) -> usize {
        self.inner.num_blocks()
    }

    fn is_noncrossing(&self) -> bool {
        self.inner.is_noncrossing()
    }

    fn kreweras_complement(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.kreweras_complement().py_err()?,
        })
    }

    /// Component partitions of the consistent graphs with `k − #π + 1`
    /// components (empty unless non-crossing).
    fn max_component_graphs(&self) -> PyResult<Vec<Self>> {
        Ok(rmtlaw::max_component_graphs(&self.inner)
            .py_err()?
            .iter()
            .map(|g| Self {
                inner: g.component_partition(),
            })
            .collect())
    }

    fn consistent_graph_count(&self) -> PyResult<usize> {
        Ok(rmtlaw::enumerate_consistent_graphs(&self.inner).py_err()?.len())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Partition('{}')", self.inner)
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{DefaultHasher, Hash, Hasher};
        let mut h = DefaultHasher::new();
        self.inner.to_string().hash(&mut h);
        h.finish()
    }
}

#[pyfunction]
fn enumerate_noncrossing(k: usize) -> PyResult<Vec<Partition>> {
    Ok(rmtlaw::enumerate_noncrossing(k)
        .py_err()?
        .into_iter()
        .map(|inner| Partition { inner })
        .collect())
}

#[pyfunction]
fn enumerate_partitions(k: usize) -> PyResult<Vec<Partition>> {
    Ok(rmtlaw::enumerate_partitions(k)
        .py_err()?
        .into_iter()
        .map(|inner| Partition { inner })
        .collect())
}

#[pyfunction]
fn catalan(k: usize) -> PyResult<u128> {
    rmtlaw::catalan(k).py_err()
}

#[pyfunction]
fn narayana(k: usize, i: usize) -> PyResult<u128> {
    rmtlaw::narayana(k, i).py_err()
}

/// Non-crossing partitions of [k] with `sizes[size]` blocks of each size.
#[pyfunction]
fn count_nc(k: usize, sizes: BTreeMap<usize, usize>) -> PyResult<u128> {
    rmtlaw::count_nc_by_block_sizes(k, &sizes).py_err()
}

fn seq(values: Vec<f64>) -> PyResult<HSequence> {
    HSequence::user(values).py_err()
}

fn ratio(y: f64) -> PyResult<AspectRatio> {
    AspectRatio::new(y).py_err()
}

#[pyfunction]
fn limiting_moment(k: usize, y: f64, h: Vec<f64>) -> PyResult<f64> {
    rmtlaw::limiting_moment(k, ratio(y)?, &seq(h)?).py_err()
}

/// Moments 1..=k_max.
#[pyfunction]
fn limiting_moments(y: f64, h: Vec<f64>, k_max: usize) -> PyResult<Vec<f64>> {
    let (y, h) = (ratio(y)?, seq(h)?);
    (1..=k_max).map(|k| rmtlaw::limiting_moment(k, y, &h)).collect::<rmtlaw::Result<_>>().py_err()
}

#[pyfunction]
fn limiting_moment_via_nc(k: usize, y: f64, h: Vec<f64>) -> PyResult<f64> {
    rmtlaw::limiting_moment_via_nc(k, ratio(y)?, &seq(h)?).py_err()
}

#[pyfunction]
#[pyo3(signature = (k, y, variance=1.0))]
fn mp_moment(k: usize, y: f64, variance: f64) -> PyResult<f64> {
    rmtlaw::mp_moment(k, ratio(y)?, variance).py_err()
}

#[pyfunction]
fn qform_moment(k: usize, y: f64, h: Vec<f64>, htilde: Vec<f64>) -> PyResult<f64> {
    rmtlaw::qform_moment(k, ratio(y)?, &seq(h)?, &seq(htilde)?).py_err()
}

/// Column model, parsed from strings like "ar1:p=0.5" or "twostate:alpha=0.3".
#[pyclass(module = "pyrmtlaw", frozen, skip_from_py_object)]
#[derive(Clone)]
struct StationaryModel {
    inner: rmtlaw::StationaryModel,
}

#[pymethods]
impl StationaryModel {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self {
            inner: spec.parse().py_err()?,
        })
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    /// `(1/m) tr T_m^l` for `l = 1..=k_max`.
    fn h_finite(&self, m: usize, k_max: usize) -> PyResult<Vec<f64>> {
        Ok(rmtlaw::h_finite(&self.inner, m, k_max).py_err()?.values().to_vec())
    }

    fn h_limit(&self, k_max: usize) -> PyResult<Vec<f64>> {
        Ok(rmtlaw::h_limit(&self.inner, k_max).py_err()?.values().to_vec())
    }

    fn h_szego(&self, k_max: usize) -> PyResult<Vec<f64>> {
        Ok(rmtlaw::h_szego(&self.inner, k_max).py_err()?.values().to_vec())
    }

    fn spectral_density(&self, x: f64) -> PyResult<f64> {
        rmtlaw::spectral_density(&self.inner, x).py_err()
    }

    fn covariance_matrix(&self, m: usize) -> PyResult<Vec<Vec<f64>>> {
        let t = rmtlaw::covariance_matrix(&self.inner, m).py_err()?;
        Ok(t.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    #[pyo3(signature = (m, seed=0))]
    fn sample_path(&self, m: usize, seed: u64) -> Vec<f64> {
        let mut rng = rmtlaw::rng::replicate_stream(seed, 0);
        rmtlaw::sample_path(&self.inner, m, &mut rng)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("StationaryModel('{}')", self.inner)
    }
}

#[allow(clippy::too_many_arguments)]
fn sim_config(
    model: &str,
    m: usize,
    n: usize,
    replicates: usize,
    k_max: usize,
    seed: u64,
    mode: &str,
) -> PyResult<rmtlaw::SimConfig> {
    Ok(rmtlaw::SimConfig {
        model: model.parse().py_err()?,
        m,
        n,
        replicates,
        k_max,
        seed,
        mode: mode.parse().py_err()?,
    })
}

fn options(workers: usize, force: bool) -> rmtlaw::RunOptions {
    rmtlaw::RunOptions {
        workers,
        budget: if force { Budget::Unlimited } else { Budget::Desk },
    }
}

/// Runs the simulation and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (model, m, n, replicates, k_max=4, seed=0, mode="direct", workers=0, force=false, timing=false))]
#[allow(clippy::too_many_arguments)]
fn run_monte_carlo(
    py: Python<'_>,
    model: &str,
    m: usize,
    n: usize,
    replicates: usize,
    k_max: usize,
    seed: u64,
    mode: &str,
    workers: usize,
    force: bool,
    timing: bool,
) -> PyResult<String> {
    let config = sim_config(model, m, n, replicates, k_max, seed, mode)?;
    let opts = options(workers, force);
    let report = py.detach(|| rmtlaw::run_monte_carlo(&config, &opts)).py_err()?;
    Ok(report.to_json(timing))
}

/// `(bin_lo, bin_hi, count, density)` rows of the pooled eigenvalue histogram.
#[pyfunction]
#[pyo3(signature = (model, m, n, replicates, bins=50, range=None, seed=0, mode="direct", workers=0, force=false))]
#[allow(clippy::too_many_arguments)]
fn eigenvalue_histogram(
    py: Python<'_>,
    model: &str,
    m: usize,
    n: usize,
    replicates: usize,
    bins: usize,
    range: Option<(f64, f64)>,
    seed: u64,
    mode: &str,
    workers: usize,
    force: bool,
) -> PyResult<Vec<(f64, f64, usize, f64)>> {
    let config = sim_config(model, m, n, replicates, 1, seed, mode)?;
    let opts = options(workers, force);
    let hist = py
        .detach(|| rmtlaw::eigenvalue_histogram(&config, bins, range, &opts))
        .py_err()?;
    Ok(hist.bins.iter().map(|b| (b.lo, b.hi, b.count, b.density)).collect())
}

#[pymodule]
fn pyrmtlaw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Partition>()?;
    m.add_class::<StationaryModel>()?;
    m.add_function(wrap_pyfunction!(enumerate_noncrossing, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_partitions, m)?)?;
    m.add_function(wrap_pyfunction!(catalan, m)?)?;
    m.add_function(wrap_pyfunction!(narayana, m)?)?;
    m.add_function(wrap_pyfunction!(count_nc, m)?)?;
    m.add_function(wrap_pyfunction!(limiting_moment, m)?)?;
    m.add_function(wrap_pyfunction!(limiting_moments, m)?)?;
    m.add_function(wrap_pyfunction!(limiting_moment_via_nc, m)?)?;
    m.add_function(wrap_pyfunction!(mp_moment, m)?)?;
    m.add_function(wrap_pyfunction!(qform_moment, m)?)?;
    m.add_function(wrap_pyfunction!(run_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalue_histogram, m)?)?;
    Ok(())
}
