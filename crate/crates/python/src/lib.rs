//! Python bindings for the `negmix` library.

use nalgebra::{DMatrix, DVector};
use negmix::experiments::{convergence_experiment, learning_experiment, LearningConfig};
use negmix::gaussian::{self, Dataset, FitConfig};
use negmix::power::{self, DecomposeConfig};
use negmix::rational::{self, PAMixture};
use negmix::tensor::SymTensor3;
use negmix::whitening::{whiten, WhiteningPair};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: negmix::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// Signed mixture of spherical Gaussians.
#[pyclass(name = "SphericalMixture", module = "pynegmix")]
struct PyMixture {
    inner: gaussian::SphericalMixture,
}

#[pymethods]
impl PyMixture {
    #[new]
    fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, variances: Vec<f64>) -> PyResult<Self> {
        let means = means.into_iter().map(DVector::from_vec).collect();
        Ok(Self { inner: gaussian::SphericalMixture::new(weights, means, variances).map_err(err)? })
    }

    #[staticmethod]
    fn running_example() -> Self {
        Self { inner: gaussian::SphericalMixture::running_example() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: gaussian::SphericalMixture::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn means(&self) -> Vec<Vec<f64>> {
        self.inner.means.iter().map(|m| m.iter().copied().collect()).collect()
    }

    #[getter]
    fn variances(&self) -> Vec<f64> {
        self.inner.variances.clone()
    }

    fn pdf(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected a point of dimension {}", self.inner.dim())));
        }
        Ok(self.inner.pdf(&x))
    }

    /// Rejection-sample `n` points; returns `(rows, acceptance_rate)`.
    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, py: Python<'_>, n: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, f64)> {
        let out = py.detach(|| gaussian::sample_mixture(&self.inner, n, seed)).map_err(err)?;
        Ok((out.data.rows().map(<[f64]>::to_vec).collect(), out.acceptance_rate()))
    }

    fn __repr__(&self) -> String {
        format!(
            "SphericalMixture(weights={:?}, means={:?}, variances={:?})",
            self.inner.weights,
            self.means(),
            self.inner.variances
        )
    }
}

/// Fit a `k`-component mixture to rows of data by the method of moments.
#[pyfunction]
#[pyo3(signature = (data, k, restarts = 10, seed = 0, prefer_admissible = true))]
fn fit<'py>(
    py: Python<'py>,
    data: Vec<Vec<f64>>,
    k: usize,
    restarts: usize,
    seed: u64,
    prefer_admissible: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let data = Dataset::from_rows(&data).map_err(err)?;
    let mut cfg = FitConfig::new(k, restarts, seed);
    cfg.prefer_admissible = prefer_admissible;
    let res = py.detach(|| gaussian::fit(&data, &cfg)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("model", PyMixture { inner: res.model.mixture.clone() })?;
    out.set_item("log_likelihood", res.log_likelihood.value)?;
    out.set_item("floored", res.log_likelihood.floored)?;
    out.set_item("candidate_index", res.model.candidate_index)?;
    out.set_item("sigma_bar2", res.model.sigma_bar2)?;
    out.set_item("imag_residue", res.model.imag_residue)?;
    out.set_item("complex_warning", res.model.complex_warning)?;
    out.set_item("negative_variance", res.model.negative_variance)?;
    Ok(out)
}

/// Recover real `(weight, mean)` pairs from second and third moment tensors.
#[pyfunction]
#[pyo3(signature = (m2, m3, k, restarts = 10, seed = 0))]
fn decompose(
    m2: Vec<Vec<f64>>,
    m3: Vec<Vec<Vec<f64>>>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Vec<(f64, Vec<f64>)>> {
    let m2 = matrix(&m2)?;
    let d = m3.len();
    if m2.nrows() != d
        || m2.ncols() != d
        || m3.iter().flatten().any(|r| r.len() != d)
        || m3.iter().any(|s| s.len() != d)
    {
        return Err(PyValueError::new_err("M2 must be d×d and M3 d×d×d"));
    }
    let flat: Vec<f64> = m3.into_iter().flatten().flatten().collect();
    let t3 = SymTensor3::from_real_symmetrized(d, &flat);
    let wp = WhiteningPair::from_m2(&m2, k, None).map_err(err)?;
    let t = whiten(&t3, &wp).map_err(err)?;
    let dec = power::decompose(&t, &DecomposeConfig::new(k, restarts, seed)).map_err(err)?;
    let comps = power::recover_parameters(&dec.pairs, &wp, 1e-6).map_err(err)?;
    Ok(comps.iter().map(|c| (c.real_weight(), c.real_mean().iter().copied().collect())).collect())
}

/// Rational series given by a weighted automaton.
#[pyclass(name = "LinearRep", module = "pynegmix")]
struct PyLinearRep {
    inner: rational::LinearRep,
}

#[pymethods]
impl PyLinearRep {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: rational::LinearRep::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn one_letter(iota: Vec<f64>, m: Vec<Vec<f64>>, tau: Vec<f64>) -> PyResult<Self> {
        let m = matrix(&m)?;
        let rep = rational::LinearRep::one_letter(DVector::from_vec(iota), m, DVector::from_vec(tau)).map_err(err)?;
        Ok(Self { inner: rep })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.inner.alphabet().to_vec()
    }

    #[getter]
    fn iota(&self) -> Vec<f64> {
        self.inner.iota().iter().copied().collect()
    }

    #[getter]
    fn tau(&self) -> Vec<f64> {
        self.inner.tau().iter().copied().collect()
    }

    fn matrix(&self, symbol: &str) -> PyResult<Vec<Vec<f64>>> {
        self.inner.matrix(symbol).map(rows).ok_or_else(|| PyValueError::new_err(format!("unknown symbol {symbol:?}")))
    }

    /// Value of the series on a word, given as a list of symbols or a string.
    fn eval(&self, word: &Bound<'_, PyAny>) -> PyResult<f64> {
        let symbols: Vec<String> = match word.extract::<String>() {
            Ok(text) => self.inner.parse_word(&text),
            Err(_) => word.extract()?,
        };
        self.inner.eval_word(&symbols).map_err(err)
    }

    /// Sum of the series over all words.
    fn sum(&self) -> PyResult<f64> {
        self.inner.series_sum().map_err(err)
    }

    fn spectral_radius(&self) -> f64 {
        self.inner.spectral_radius()
    }

    /// Nonnegative pair `(plus, minus)` whose difference is this series.
    fn split(&self) -> (Self, Self) {
        let (plus, minus) = self.inner.split_difference();
        (Self { inner: plus }, Self { inner: minus })
    }

    /// Probabilistic automaton rescaled from a nonnegative representation.
    fn normalize(&self) -> PyResult<Self> {
        Ok(Self { inner: rational::normalize_to_pa(&self.inner).map_err(err)?.into_rep() })
    }

    /// Write the series as `s_plus * pa_plus - s_minus * pa_minus`; `pa_minus`
    /// is `None` for a nonnegative series.
    #[pyo3(signature = (check_distribution = true))]
    fn to_pa_mixture<'py>(&self, py: Python<'py>, check_distribution: bool) -> PyResult<Bound<'py, PyDict>> {
        let PAMixture { s_plus, s_minus, pa_plus, pa_minus } =
            rational::to_pa_mixture(&self.inner, check_distribution).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("s_plus", s_plus)?;
        out.set_item("s_minus", s_minus)?;
        out.set_item("pa_plus", Self { inner: pa_plus.into_rep() })?;
        out.set_item("pa_minus", pa_minus.map(|p| Self { inner: p.into_rep() }))?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("LinearRep(dim={}, alphabet={:?})", self.inner.dim(), self.inner.alphabet())
    }
}

/// Error against iteration count on exact tensors; one dict per iteration.
#[pyfunction]
#[pyo3(signature = (runs = 500, iterations = 20, seed = 0))]
fn convergence<'py>(py: Python<'py>, runs: usize, iterations: usize, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let table = py.detach(|| convergence_experiment(runs, iterations, seed)).map_err(err)?;
    table
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("iteration", r.iteration)?;
            d.set_item("mean_error", r.mean_error)?;
            d.set_item("median_error", r.median_error)?;
            d.set_item("max_error", r.max_error)?;
            d.set_item("success_rate", r.success_rate)?;
            d.set_item("degenerate", r.degenerate)?;
            Ok(d)
        })
        .collect()
}

/// Error against dataset size on the running example; one dict per size.
#[pyfunction]
#[pyo3(signature = (sizes, datasets = 20, restarts = 10, seed = 0))]
fn learning<'py>(
    py: Python<'py>,
    sizes: Vec<usize>,
    datasets: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = LearningConfig { datasets, restarts, seed };
    let (table, _) = py.detach(|| learning_experiment(&sizes, &cfg)).map_err(err)?;
    table
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("size", r.size)?;
            d.set_item("median_error", r.median_error)?;
            d.set_item("mean_error", r.mean_error)?;
            d.set_item("pathological", r.pathological)?;
            d.set_item("complex_candidates", r.complex_candidates)?;
            d.set_item("failed", r.failed)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pynegmix(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMixture>()?;
    m.add_class::<PyLinearRep>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(learning, m)?)?;
    Ok(())
}
