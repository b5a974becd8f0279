//! Thin Python wrapper over a handful of `ptk_core` entry points.

// pyo3 0.22 macro expansion trips this lint on every function.
#![allow(clippy::useless_conversion)]

use num_complex::Complex64;
use ptk_core::isogeny::{explicit_bound, IsogenyBoundInput, IsogenyCase};
use ptk_core::modular::{delta_at, DeltaNormalization, QSeriesConfig};
use ptk_core::{heights, lattice, serre, CurveRecord, Error, SiegelTau};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Reduce a period ratio into the fundamental domain.
/// Returns the reduced value and the matrix entries (a, b, c, d).
#[pyfunction]
fn reduce_tau(tau: Complex64) -> PyResult<(Complex64, [i64; 4])> {
    let (t, m) = lattice::reduce_tau(tau).map_err(py_err)?;
    Ok((Complex64::new(t.re(), t.im()), m.entries()))
}

/// Δ(τ) with the q-product normalization. τ must already be reduced.
#[pyfunction]
fn delta(tau: Complex64) -> PyResult<Complex64> {
    let cfg = QSeriesConfig::default();
    delta_at(tau, &cfg, DeltaNormalization::Ramanujan)
        .map(|v| v.value)
        .map_err(py_err)
}

/// Faltings height of a curve over Q from its reduced period ratio and log|Δ_min|.
#[pyfunction]
fn faltings_height(tau: Complex64, log_disc: f64) -> PyResult<f64> {
    let t = SiegelTau::from_complex(tau).map_err(py_err)?;
    let rec = CurveRecord::new("py", 1, vec![t], log_disc, None).map_err(py_err)?;
    heights::faltings_height_silverman(&rec)
        .map(|h| h.value)
        .map_err(py_err)
}

/// Explicit isogeny degree bound. `case` is one of "general", "cm", "real".
#[pyfunction]
#[pyo3(signature = (h_f, d_k=1, case="general"))]
fn isogeny_bound(h_f: f64, d_k: u64, case: &str) -> PyResult<f64> {
    let case: IsogenyCase = case.parse().map_err(py_err)?;
    let input = IsogenyBoundInput::new(d_k, h_f, case).map_err(py_err)?;
    Ok(explicit_bound(&input).bound)
}

/// Smallest prime-index threshold p* from the explicit surjectivity bound.
#[pyfunction]
fn serre_threshold() -> PyResult<u64> {
    serre::find_threshold().map(|s| s.p_star).map_err(py_err)
}

#[pymodule]
fn ptk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(reduce_tau, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(faltings_height, m)?)?;
    m.add_function(wrap_pyfunction!(isogeny_bound, m)?)?;
    m.add_function(wrap_pyfunction!(serre_threshold, m)?)?;
    Ok(())
}
