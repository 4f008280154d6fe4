use pyo3::exceptions::{PyMemoryError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde_json::json;

use smu_npmle::experiments::{self, ExperimentConfig};
use smu_npmle::metrics::{self, McProposal};
use smu_npmle::{theory, Dataset, FitOptions, MixingMeasure, RngSpec, SmuDensity, SmuError};

fn err(e: SmuError) -> PyErr {
    if e.is_resource() {
        PyMemoryError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dataset(points: Vec<Vec<f64>>) -> PyResult<Dataset> {
    Dataset::from_rows(&points).map_err(err)
}

/// Discrete mixing measure over scale vectors.
#[pyclass(name = "MixingMeasure", module = "pysmu", from_py_object)]
#[derive(Clone)]
struct PyMixing {
    inner: MixingMeasure,
}

#[pymethods]
impl PyMixing {
    /// Weights summing to one give a probability measure, smaller totals a
    /// subprobability measure.
    #[new]
    fn new(thetas: Vec<Vec<f64>>, weights: Vec<f64>) -> PyResult<Self> {
        if thetas.len() != weights.len() {
            return Err(PyValueError::new_err("thetas and weights differ in length"));
        }
        let d = thetas.first().map_or(0, Vec::len);
        let atoms: Vec<_> = thetas
            .iter()
            .zip(&weights)
            .map(|(t, w)| json!({"theta": t, "weight": w}))
            .collect();
        Self::from_json(&json!({"dimension": d, "atoms": atoms}).to_string())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let mut v: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("fit");
        }
        Ok(Self {
            inner: serde_json::from_value(v).map_err(json_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn thetas(&self) -> Vec<Vec<f64>> {
        self.inner.atoms().iter().map(|a| a.theta.clone()).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.atoms().iter().map(|a| a.weight).collect()
    }

    fn density(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval_density(&x).map_err(err)
    }

    fn sample(&self, n: usize, seed: u64, stream: u64) -> PyResult<Vec<Vec<f64>>> {
        let data = smu_npmle::sample_mixture(&self.inner, n, &RngSpec::new(seed, stream)).map_err(err)?;
        Ok(data.iter().map(<[f64]>::to_vec).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("MixingMeasure(dimension={}, atoms={})", self.inner.dimension(), self.inner.len())
    }
}

#[pyclass(name = "FitResult", module = "pysmu", frozen)]
struct PyFit {
    #[pyo3(get)]
    mixture: PyMixing,
    #[pyo3(get)]
    log_likelihood: f64,
    #[pyo3(get)]
    gap: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    runtime_ms: f64,
}

#[pyfunction]
#[pyo3(signature = (points, cert_tol = 1e-6, max_iters = 5000))]
fn fit_npmle(points: Vec<Vec<f64>>, cert_tol: f64, max_iters: usize) -> PyResult<PyFit> {
    let opts = FitOptions {
        cert_tol,
        max_iters,
        ..FitOptions::default()
    };
    let fit = smu_npmle::fit_npmle(&dataset(points)?, &opts).map_err(err)?;
    Ok(PyFit {
        log_likelihood: fit.log_likelihood,
        gap: fit.certificate.gap,
        iterations: fit.iterations,
        converged: fit.converged,
        runtime_ms: fit.runtime_ms,
        mixture: PyMixing { inner: fit.mixture },
    })
}

#[pyfunction]
fn certify<'py>(py: Python<'py>, mixture: &PyMixing, points: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let c = smu_npmle::certify(&mixture.inner, &dataset(points)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("gap", c.gap)?;
    d.set_item("argmax_atom", c.argmax_atom)?;
    d.set_item("kkt_max", c.kkt_max)?;
    d.set_item("kkt_exhaustive", c.kkt_exhaustive)?;
    Ok(d)
}

/// Breakpoints and cell values of the one-dimensional Grenander estimator.
#[pyfunction]
fn grenander_1d(points: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let data = Dataset::new(points, 1).map_err(err)?;
    let g = smu_npmle::grenander_1d(&data).map_err(err)?;
    Ok((g.partition().breakpoints()[0].clone(), g.values().to_vec()))
}

#[pyfunction]
fn hellinger_sq(p: &PyMixing, q: &PyMixing) -> PyResult<f64> {
    metrics::hellinger_sq_exact(&SmuDensity::Discrete(p.inner.clone()), &SmuDensity::Discrete(q.inner.clone()))
        .map_err(err)
}

/// Monte Carlo estimate and its standard error.
#[pyfunction]
#[pyo3(signature = (p, q, n_samples, seed = 0))]
fn hellinger_sq_mc(p: &PyMixing, q: &PyMixing, n_samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let est = metrics::hellinger_sq_mc(
        &SmuDensity::Discrete(p.inner.clone()),
        &SmuDensity::Discrete(q.inner.clone()),
        n_samples,
        seed,
        McProposal::UniformBox,
    )
    .map_err(err)?;
    Ok((est.estimate, est.std_error))
}

#[pyfunction]
#[pyo3(signature = (mixture, delta = 1e-3))]
fn decomp1d(mixture: &PyMixing, delta: f64) -> PyResult<(Vec<f64>, usize)> {
    let pc = smu_npmle::to_piecewise(&mixture.inner).map_err(err)?;
    let d = theory::decomp1d_piecewise(&pc, delta).map_err(err)?;
    Ok((d.breakpoints, d.k_bound))
}

/// Runs a rate or adaptation study from a config JSON string and returns
/// the summary as JSON.
#[pyfunction]
#[pyo3(signature = (config_json, resume = false))]
fn run_study(py: Python<'_>, config_json: &str, resume: bool) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json, "<config>").map_err(err)?;
    let out = py.detach(|| experiments::run_study(&cfg, resume)).map_err(err)?;
    serde_json::to_string(&out.summary).map_err(json_err)
}

#[pymodule]
fn pysmu(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMixing>()?;
    m.add_class::<PyFit>()?;
    m.add_function(wrap_pyfunction!(fit_npmle, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(grenander_1d, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger_sq, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger_sq_mc, m)?)?;
    m.add_function(wrap_pyfunction!(decomp1d, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    m.add("RNG_ALGORITHM", smu_npmle::RNG_ALGORITHM)?;
    Ok(())
}
