//! The decreasing function whose crossing of 1 bounds the primes for which
//! a split Cartan image can occur, and the exact integer threshold.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::heights::HETJ_CONSTANT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerreThreshold {
    pub p_star: u64,
    pub f_at_p_star: f64,
    pub f_at_p_star_plus_1: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p >= 2.0 && p.is_finite() {
        Ok(())
    } else {
        domain("p must be at least 2")
    }
}

/// Upper bound 2π√p + 6 log p + 21 (log p)²/√p for log |j|.
pub fn j_log_upper(p: f64) -> Result<f64> {
    check_p(p)?;
    let l = p.ln();
    Ok(2.0 * std::f64::consts::PI * p.sqrt() + 6.0 * l + 21.0 * l * l / p.sqrt())
}

fn h_branch(p: f64) -> f64 {
    let l = p.ln();
    std::f64::consts::PI / 6.0 * p.sqrt() + l + 7.0 * l * l / (4.0 * p.sqrt()) + HETJ_CONSTANT
}

#[allow(non_snake_case)]
pub fn H_of_p(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(h_branch(p).max(1000.0))
}

pub fn f_of_p(p: f64) -> Result<f64> {
    let h = H_of_p(p)?;
    Ok(2.0 * (2.0f64 / 3.0).sqrt() * 1778.0 * (h + 4.0 * p.ln() + 2.4 + 0.5 * h.ln()) / p)
}

/// Smallest p ≥ 2 at which the square-root branch of H reaches 1000.
pub fn h_crossover() -> f64 {
    let (mut lo, mut hi) = (2.0f64, 1e8f64);
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if h_branch(mid) < 1000.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Largest integer p with f(p) ≥ 1, by integer bisection after checking
/// that f decreases on a dyadic grid spanning the bracket.
pub fn find_threshold() -> Result<SerreThreshold> {
    let f = |p: u64| f_of_p(p as f64);
    let mut grid = Vec::new();
    let mut p = 1024u64;
    while p <= 1 << 30 {
        grid.push(f(p)?);
        p <<= 1;
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Internal("f is not decreasing on the dyadic grid".into()));
    }
    let (mut lo, mut hi) = (2u64, 1u64 << 30);
    if f(lo)? < 1.0 || f(hi)? >= 1.0 {
        return Err(Error::Internal("threshold not bracketed".into()));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (f(lo)?, f(hi)?);
    if a <= b {
        return Err(Error::Internal("f not decreasing at the threshold".into()));
    }
    Ok(SerreThreshold { p_star: lo, f_at_p_star: a, f_at_p_star_plus_1: b })
}
