//! Python bindings for timolab.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use timolab::coefficients::{build_exploratory, build_theorem_coeffs, TheoremInputs};
use timolab::functionals::{self, FunctionalRow};
use timolab::harness::{self, ExperimentKind, Overrides};
use timolab::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Divergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Round-trips a serializable value through Python's `json`.
fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Relaxation kernel `g` with its rate function `zeta`.
#[pyclass(name = "Kernel", frozen)]
#[derive(Clone)]
struct PyKernel {
    inner: timolab::RelaxationKernel,
}

#[pymethods]
impl PyKernel {
    /// `g0 exp(-rate t)`, `zeta = zeta_rate` (defaults to `rate`).
    #[staticmethod]
    #[pyo3(signature = (g0, rate, zeta_rate=None))]
    fn exponential(g0: f64, rate: f64, zeta_rate: Option<f64>) -> PyResult<Self> {
        timolab::RelaxationKernel::exponential_with_zeta(g0, rate, zeta_rate.unwrap_or(rate))
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// `g0 (1+t)^-rate`, `zeta = zeta_rate/(1+t)`.
    #[staticmethod]
    #[pyo3(signature = (g0, rate, zeta_rate=None))]
    fn power(g0: f64, rate: f64, zeta_rate: Option<f64>) -> PyResult<Self> {
        timolab::RelaxationKernel::power_with_zeta(g0, rate, zeta_rate.unwrap_or(rate))
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn none() -> Self {
        Self {
            inner: timolab::RelaxationKernel::none(),
        }
    }

    fn g(&self, t: f64) -> f64 {
        self.inner.g(t)
    }

    fn dg(&self, t: f64) -> f64 {
        self.inner.dg(t)
    }

    fn zeta(&self, t: f64) -> f64 {
        self.inner.zeta(t)
    }

    fn zeta_integral(&self, t0: f64, t: f64) -> f64 {
        self.inner.zeta_integral(t0, t)
    }

    fn gbar(&self) -> PyResult<f64> {
        self.inner.gbar().map_err(py_err)
    }

    fn echo(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &self.inner.echo())
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", self.inner.echo())
    }
}

/// Physical coefficients with the derived `gamma`, `beta`, `xi`, `lambda`.
#[pyclass(name = "Coefficients", frozen)]
#[derive(Clone)]
struct PyCoefficients {
    inner: timolab::Coefficients,
}

#[pymethods]
impl PyCoefficients {
    /// Builds coefficients satisfying the structural relations.
    #[new]
    #[pyo3(signature = (kernel, rho1, rho2, rho3, k, b, delta, mu1, mu2, tau, exploratory=false))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        kernel: &PyKernel,
        rho1: f64,
        rho2: f64,
        rho3: f64,
        k: f64,
        b: f64,
        delta: f64,
        mu1: f64,
        mu2: f64,
        tau: f64,
        exploratory: bool,
    ) -> PyResult<Self> {
        let inp = TheoremInputs {
            rho1,
            rho2,
            rho3,
            k,
            b,
            delta,
            mu1,
            mu2,
            tau,
        };
        let built = if exploratory {
            build_exploratory(&inp, &kernel.inner)
        } else {
            build_theorem_coeffs(&inp, &kernel.inner)
        };
        built.map(|inner| Self { inner }).map_err(py_err)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn case(&self) -> String {
        format!("{:?}", self.inner.case()).to_lowercase()
    }

    fn m0(&self) -> f64 {
        self.inner.m0()
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &self.inner)
    }
}

/// Lyapunov constants for `coeffs` and `kernel`.
#[pyfunction]
#[pyo3(signature = (coeffs, kernel, t0=1.0))]
fn select_constants(py: Python<'_>, coeffs: &PyCoefficients, kernel: &PyKernel, t0: f64) -> PyResult<PyObject> {
    let k = functionals::select_constants(&coeffs.inner, &kernel.inner, t0).map_err(py_err)?;
    to_py(py, &k)
}

/// Regression of `log E` on `int_{t0}^t zeta`.
#[pyfunction]
fn fit_decay(py: Python<'_>, times: Vec<f64>, energy: Vec<f64>, kernel: &PyKernel, t0: f64) -> PyResult<PyObject> {
    let f = functionals::fit_decay(&times, &energy, &kernel.inner, t0).map_err(py_err)?;
    to_py(py, &f)
}

/// Parses and validates a JSON config; returns the validation report.
#[pyfunction]
fn validate_config(py: Python<'_>, config_json: &str) -> PyResult<PyObject> {
    let cfg = harness::parse_config(config_json)
        .and_then(|raw| harness::resolve(raw, &PathBuf::from(".")))
        .map_err(py_err)?;
    to_py(py, &cfg.report)
}

/// Runs a JSON config in memory. Returns `{"summary": ..., "columns": {name: list}}`.
#[pyfunction]
fn simulate(py: Python<'_>, config_json: &str) -> PyResult<PyObject> {
    let text = config_json.to_owned();
    let out = py
        .allow_threads(move || {
            let cfg = harness::resolve(harness::parse_config(&text)?, &PathBuf::from("."))?;
            harness::simulate(&cfg)
        })
        .map_err(py_err)?;
    let columns = PyDict::new(py);
    for (j, name) in FunctionalRow::HEADER.iter().enumerate() {
        let col: Vec<f64> = out.functionals.rows.iter().map(|r| r.values()[j]).collect();
        columns.set_item(name, col)?;
    }
    let result = PyDict::new(py);
    result.set_item("summary", to_py(py, &out.summary)?)?;
    result.set_item("columns", columns)?;
    Ok(result.into_any().unbind())
}

/// Loads the config file and writes the experiment outputs into `out`.
#[pyfunction]
#[pyo3(signature = (config_path, out, kind=None))]
fn run_experiment(py: Python<'_>, config_path: PathBuf, out: PathBuf, kind: Option<&str>) -> PyResult<PyObject> {
    let kind = match kind {
        None => None,
        Some(k) => Some(
            serde_json::from_value::<ExperimentKind>(serde_json::Value::String(k.into()))
                .map_err(|e| PyValueError::new_err(e.to_string()))?,
        ),
    };
    let manifest = py
        .allow_threads(move || {
            let cfg = harness::load_config(&config_path)?;
            let over = Overrides {
                kind,
                ..Default::default()
            };
            harness::run_experiment(&cfg, &over, &out)
        })
        .map_err(py_err)?;
    to_py(py, &manifest)
}

/// Seeded property suite for the memory operators.
#[pyfunction]
#[pyo3(signature = (seed=42, trials=100))]
fn verify_kernels(py: Python<'_>, seed: u64, trials: usize) -> PyResult<PyObject> {
    let r = harness::verify_kernels(seed, trials).map_err(py_err)?;
    to_py(py, &r)
}

#[pymodule]
fn timolab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CSV_COLUMNS", FunctionalRow::HEADER.to_vec())?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyCoefficients>()?;
    m.add_function(wrap_pyfunction!(select_constants, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify_kernels, m)?)?;
    Ok(())
}
