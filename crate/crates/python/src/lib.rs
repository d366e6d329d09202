//! Python bindings. Tensors and reports cross the boundary as JSON strings.

use std::collections::BTreeMap;

use gluekit::classify::{self, MuVector, TVector};
use gluekit::io;
use gluekit::push::gluability_check;
use gluekit::{mps, protocol, report, Config, GlueError};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(pygluekit, GluekitError, PyException);

fn py_err(e: GlueError) -> PyErr {
    GluekitError::new_err(format!("{e} (exit code {})", e.exit_code()))
}

fn load(mps_json: &str) -> Result<mps::MpsTensor, GlueError> {
    io::mps_from_json(&serde_json::from_str(mps_json)?)
}

fn config(seed: Option<u64>) -> Config {
    let mut cfg = Config::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg
}

pub fn example_json(name: &str, params: BTreeMap<String, f64>) -> Result<String, GlueError> {
    let t = gluekit::build_example(name.parse()?, &params)?;
    Ok(io::to_string(&io::mps_to_json(&t)))
}

pub fn analyze_json(mps_json: &str, basis: &str) -> Result<String, GlueError> {
    let t = load(mps_json)?;
    let b = io::parse_basis_spec(basis)?;
    let r = gluability_check(&t, &b, &Config::default());
    Ok(io::to_string(&report::gluability_json(&r, &b)))
}

pub fn simulate_json(mps_json: &str, basis: &str, sites: usize, trials: usize, seed: u64) -> Result<String, GlueError> {
    let t = load(mps_json)?;
    let b = io::parse_basis_spec(basis)?;
    let stats = protocol::run_trials(&t, &b, sites, trials, &config(Some(seed)))?;
    Ok(io::to_string(&report::trials_json(&stats)))
}

/// Build a named example tensor; returns its JSON.
#[pyfunction]
#[pyo3(signature = (name, params = None))]
fn build_example(name: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<String> {
    example_json(name, params.unwrap_or_default()).map_err(py_err)
}

/// Gluability report JSON for a tensor and an error basis (`pauli`, `clock:N` or a file).
#[pyfunction]
#[pyo3(signature = (mps_json, basis = "pauli"))]
fn analyze(mps_json: &str, basis: &str) -> PyResult<String> {
    analyze_json(mps_json, basis).map_err(py_err)
}

#[pyfunction]
fn correlation_spectrum(mps_json: &str) -> PyResult<Vec<Complex64>> {
    let t = load(mps_json).map_err(py_err)?;
    Ok(mps::transfer_matrix(&t).map_err(py_err)?.eigenvalues)
}

#[pyfunction]
fn entanglement_spectrum(mps_json: &str) -> PyResult<Vec<f64>> {
    let t = load(mps_json).map_err(py_err)?;
    Ok(mps::entanglement_spectrum(&t).map_err(py_err)?.values)
}

/// Trial statistics JSON of the measure-and-correct protocol.
#[pyfunction]
#[pyo3(signature = (mps_json, basis = "pauli", sites = 6, trials = 200, seed = 0))]
fn simulate(mps_json: &str, basis: &str, sites: usize, trials: usize, seed: u64) -> PyResult<String> {
    simulate_json(mps_json, basis, sites, trials, seed).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (t, basis = "pauli"))]
fn t_to_mu(t: Vec<Complex64>, basis: &str) -> PyResult<Vec<Complex64>> {
    let b = io::parse_basis_spec(basis).map_err(py_err)?;
    let t = TVector::normalized(t).map_err(py_err)?;
    Ok(classify::t_to_mu(&b, &t).map_err(py_err)?.mu)
}

#[pyfunction]
#[pyo3(signature = (mu, basis = "pauli"))]
fn mu_to_t(mu: Vec<Complex64>, basis: &str) -> PyResult<Vec<Complex64>> {
    let b = io::parse_basis_spec(basis).map_err(py_err)?;
    let t = classify::mu_to_t(&b, &MuVector { mu, physical: true }).map_err(py_err)?;
    Ok(t.values().to_vec())
}

/// Run the command line tool in-process; returns (exit code, stdout, stderr).
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gluekit".to_string()).chain(args);
    let code = gluekit::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

#[pymodule]
fn pygluekit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GluekitError", m.py().get_type::<GluekitError>())?;
    m.add_function(wrap_pyfunction!(build_example, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(t_to_mu, m)?)?;
    m.add_function(wrap_pyfunction!(mu_to_t, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_then_analyze() {
        let mut p = BTreeMap::new();
        p.insert("beta".to_string(), 0.5);
        let j = example_json("deformed_ghz", p).unwrap();
        let r: serde_json::Value = serde_json::from_str(&analyze_json(&j, "pauli").unwrap()).unwrap();
        assert_eq!(r["verdict"], "right_gluable");
    }

    #[test]
    fn simulate_small() {
        let j = example_json("aklt", BTreeMap::new()).unwrap();
        let r: serde_json::Value = serde_json::from_str(&simulate_json(&j, "pauli", 3, 5, 1).unwrap()).unwrap();
        assert!(r["min_fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn unknown_example() {
        assert!(matches!(example_json("nope", BTreeMap::new()), Err(GlueError::UnknownExample(_))));
    }
}
