//! Python bindings. Specs go in as JSON text and results come back as the
//! same JSON records the `divflow` binary writes.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use divflow::harness::{self, Parity, ResultRecord, Suspension};
use divflow::regint::QuadConfig;
use divflow::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NonConvergence(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn config(text: Option<&str>) -> PyResult<QuadConfig> {
    match text {
        Some(t) => serde_json::from_str(t).map_err(|e| PyValueError::new_err(format!("bad config: {e}"))),
        None => Ok(QuadConfig::default()),
    }
}

fn finish(py: Python<'_>, f: impl FnOnce() -> divflow::Result<ResultRecord> + Send) -> PyResult<String> {
    py.allow_threads(|| f().and_then(|r| r.to_json())).map_err(to_py)
}

/// Spectral flow of a `hermitian_path` spec.
#[pyfunction]
#[pyo3(signature = (spec, config=None))]
fn sf(py: Python<'_>, spec: &str, config: Option<&str>) -> PyResult<String> {
    let (spec, cfg) = (harness::parse_family(spec).map_err(to_py)?, self::config(config)?);
    finish(py, || harness::cmd_sf(&spec, &cfg))
}

/// Eta invariants of the path's matrix at `s = 0`.
#[pyfunction]
#[pyo3(signature = (spec, p=1, config=None))]
fn eta(py: Python<'_>, spec: &str, p: usize, config: Option<&str>) -> PyResult<String> {
    let (spec, cfg) = (harness::parse_family(spec).map_err(to_py)?, self::config(config)?);
    finish(py, || harness::cmd_eta(&spec, p, &cfg))
}

#[pyfunction]
#[pyo3(signature = (spec, k=None, parity=None, config=None))]
fn df(py: Python<'_>, spec: &str, k: Option<usize>, parity: Option<&str>, config: Option<&str>) -> PyResult<String> {
    let (spec, cfg) = (harness::parse_family(spec).map_err(to_py)?, self::config(config)?);
    let parity = match parity {
        None => None,
        Some("odd") => Some(Parity::Odd),
        Some("even") => Some(Parity::Even),
        Some(other) => return Err(PyValueError::new_err(format!("parity must be 'odd' or 'even', got {other:?}"))),
    };
    finish(py, || harness::cmd_df(&spec, k, parity, &cfg))
}

#[pyfunction]
#[pyo3(signature = (expr, config=None))]
fn regint(py: Python<'_>, expr: &str, config: Option<&str>) -> PyResult<String> {
    let (expr, cfg) = (harness::parse_expr(expr).map_err(to_py)?, self::config(config)?);
    finish(py, || harness::cmd_regint(&expr, &cfg))
}

/// Odd suspension by default; pass `k` for the even one.
#[pyfunction]
#[pyo3(signature = (spec, p=1, sign=1.0, k=None, config=None))]
fn suspend(py: Python<'_>, spec: &str, p: usize, sign: f64, k: Option<usize>, config: Option<&str>) -> PyResult<String> {
    let (spec, cfg) = (harness::parse_family(spec).map_err(to_py)?, self::config(config)?);
    let how = match k {
        Some(k) => Suspension::Even { k },
        None => Suspension::Odd { p, sign },
    };
    finish(py, || harness::cmd_suspend(&spec, how, &cfg))
}

#[pyfunction]
#[pyo3(signature = (suite="all", seed=0, config=None))]
fn verify(py: Python<'_>, suite: &str, seed: u64, config: Option<&str>) -> PyResult<String> {
    let cfg = self::config(config)?;
    finish(py, || harness::cmd_verify(suite, seed, &cfg))
}

/// CSV of eigenvalues and reduced eta along the path.
#[pyfunction]
#[pyo3(signature = (spec, config=None))]
fn trace(py: Python<'_>, spec: &str, config: Option<&str>) -> PyResult<String> {
    let (spec, cfg) = (harness::parse_family(spec).map_err(to_py)?, self::config(config)?);
    py.allow_threads(|| harness::cmd_trace(&spec, &cfg)).map_err(to_py)
}

#[pymodule]
fn divflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA_VERSION", harness::SCHEMA_VERSION)?;
    m.add_function(wrap_pyfunction!(sf, m)?)?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(df, m)?)?;
    m.add_function(wrap_pyfunction!(regint, m)?)?;
    m.add_function(wrap_pyfunction!(suspend, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    Ok(())
}
