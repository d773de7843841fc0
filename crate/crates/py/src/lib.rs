//! Thin Python layer over `meanfield_spectra`. Results come back as floats,
//! tuples and dicts; library errors become `ValueError` (bad input) or
//! `RuntimeError` (a solver that did not converge).

use meanfield_spectra::acceptance::{run_all_parallel, AcceptanceOptions};
use meanfield_spectra::potential::{self, ModelParams};
use meanfield_spectra::{ising_chain, schrodinger, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NonConvergence(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn params(n: usize, beta: f64, h: f64) -> PyResult<ModelParams> {
    ModelParams::new(n, beta, vec![h]).map_err(py_err)
}

/// Field at which the Ising potential loses its second well.
#[pyfunction]
fn critical_field(beta: f64) -> PyResult<f64> {
    potential::critical_field(beta).map_err(py_err)
}

/// Barrier height seen from the deepest minimum.
#[pyfunction]
#[pyo3(signature = (beta, h, n = 1))]
fn well_depth(beta: f64, h: f64, n: usize) -> PyResult<f64> {
    potential::well_depth(&params(n, beta, h)?).map_err(py_err)
}

/// Critical points of V as dicts with `location`, `kind`, `value`, `hess_eigs`.
#[pyfunction]
#[pyo3(signature = (beta, h, n = 1))]
fn critical_points<'py>(py: Python<'py>, beta: f64, h: f64, n: usize) -> PyResult<Vec<Bound<'py, PyDict>>> {
    potential::critical_points(&params(n, beta, h)?)
        .into_iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("location", c.location)?;
            d.set_item("kind", format!("{:?}", c.kind).to_lowercase())?;
            d.set_item("value", c.value)?;
            d.set_item("hess_eigs", c.hess_eigs)?;
            Ok(d)
        })
        .collect()
}

/// `(gap, log_gap)` of the magnetization chain.
#[pyfunction]
fn chain_gap(n_spins: usize, beta: f64, h: f64) -> PyResult<(f64, f64)> {
    let e = ising_chain::chain_gap(n_spins, beta, h).map_err(py_err)?;
    Ok((e.gap, e.log_gap))
}

/// `(gap, log_gap)` of the full single-spin-flip generator; small N only.
#[pyfunction]
fn full_gap(n_spins: usize, beta: f64, h: f64) -> PyResult<(f64, f64)> {
    let e = ising_chain::full_gap(n_spins, beta, h).map_err(py_err)?;
    Ok((e.gap, e.log_gap))
}

/// Lowest `k` levels of the renormalized operator.
#[pyfunction]
#[pyo3(signature = (n, beta, h, n_spins, l = 0, k = 2))]
fn solve_renormalized<'py>(py: Python<'py>, n: usize, beta: f64, h: f64, n_spins: usize, l: usize, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = schrodinger::solve_renormalized(&params(n, beta, h)?, n_spins, l, k).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("eigenvalues", r.eigenvalues)?;
    d.set_item("log_gap", r.log_gap)?;
    d.set_item("converged", r.converged)?;
    d.set_item("drift", r.drift)?;
    d.set_item("resolution", r.resolution)?;
    Ok(d)
}

/// Run the acceptance criteria; one dict per criterion. Releases the GIL.
#[pyfunction]
#[pyo3(signature = (quick = true))]
fn run_acceptance<'py>(py: Python<'py>, quick: bool) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let opts = AcceptanceOptions { quick, ..Default::default() };
    let results = py.detach(|| run_all_parallel(&opts));
    results
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("id", r.id)?;
            d.set_item("name", r.name)?;
            d.set_item("pass", r.pass)?;
            d.set_item("detail", r.detail)?;
            d.set_item("seconds", r.seconds)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn meanfield_spectra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(critical_field, m)?)?;
    m.add_function(wrap_pyfunction!(well_depth, m)?)?;
    m.add_function(wrap_pyfunction!(critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(chain_gap, m)?)?;
    m.add_function(wrap_pyfunction!(full_gap, m)?)?;
    m.add_function(wrap_pyfunction!(solve_renormalized, m)?)?;
    m.add_function(wrap_pyfunction!(run_acceptance, m)?)?;
    Ok(())
}
