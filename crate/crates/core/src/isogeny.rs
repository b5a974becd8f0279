//! Explicit isogeny-degree bounds for elliptic curves and the numeric steps
//! their derivations rely on.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{domain, Error, Result};
use crate::lattice::SiegelTau;

/// Leading constant of the implicit inequality for √Δ.
pub const IMPLICIT_CONSTANT: f64 = 1778.0;
/// Floor on the working height in the implicit inequality.
pub const H_FLOOR: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsogenyCase {
    General,
    Cm,
    RealPlaceNonCm,
}

impl std::str::FromStr for IsogenyCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Self::General),
            "cm" => Ok(Self::Cm),
            "real" | "real_place_non_cm" => Ok(Self::RealPlaceNonCm),
            _ => domain(format!("unknown isogeny case '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsogenyBoundInput {
    pub d_k: u64,
    pub h_f: f64,
    pub case: IsogenyCase,
}

impl IsogenyBoundInput {
    pub fn new(d_k: u64, h_f: f64, case: IsogenyCase) -> Result<Self> {
        if d_k == 0 {
            return domain("field degree must be at least 1");
        }
        if !h_f.is_finite() {
            return domain("height must be finite");
        }
        Ok(Self { d_k, h_f, case })
    }
}

/// `bound` is the sharpest closed form for the case; `simplified` is the
/// 10¹³ form, present only in the general case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsogenyBound {
    pub bound: f64,
    pub simplified: Option<f64>,
}

pub fn explicit_bound(input: &IsogenyBoundInput) -> IsogenyBound {
    let d = input.d_k as f64;
    let ld = d.ln();
    let h = input.h_f;
    match input.case {
        IsogenyCase::General => IsogenyBound {
            bound: 1e7 * d * d * (h.max(985.0) + 4.0 * ld).powi(2),
            simplified: Some(1e13 * d * d * h.max(ld).max(1.0).powi(2)),
        },
        IsogenyCase::Cm => IsogenyBound {
            bound: 3.4e4 * d * d * (h + 0.5 * ld).max(1.0).powi(2),
            simplified: None,
        },
        IsogenyCase::RealPlaceNonCm => IsogenyBound {
            bound: 3583.0 * d * d * h.max(ld).max(1.0).powi(2),
            simplified: None,
        },
    }
}

/// Excess of √Δ over the implicit bound, as a function of x = √Δ.
fn implicit_excess(d: f64, h: f64, x: f64) -> f64 {
    x - IMPLICIT_CONSTANT * d * (2.0f64 / 3.0).sqrt() * (h + 0.5 * h.ln() + 4.0 * x.ln() + 2.4)
}

/// Largest x = √Δ ≥ 1 satisfying √Δ ≤ 1778·D·√(2/3)·(H + ½ log H + 2 log Δ + 2.4).
///
/// The excess is convex in x and negative at x = 1, so the admissible set
/// is an interval whose right end is bracketed and bisected.
pub fn implicit_delta_solver(d: f64, h: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return domain("D must be positive");
    }
    if !(h >= H_FLOOR && h.is_finite()) {
        return domain("H must be at least 1000");
    }
    let mut lo = 1.0;
    if implicit_excess(d, h, lo) > 0.0 {
        return Err(Error::Internal("implicit inequality fails at Δ = 1".into()));
    }
    let mut hi = 2.0;
    while implicit_excess(d, h, hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if implicit_excess(d, h, mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Upper bound h(E₁) + log Δ + ½ log(n/π) for the maximal slope.
pub fn pentedeux_bound(h_e1: f64, delta: f64, n: u64) -> Result<f64> {
    if !(delta >= 1.0) || n == 0 {
        return domain("need Δ >= 1 and n >= 1");
    }
    Ok(h_e1 + delta.ln() + 0.5 * (n as f64 / std::f64::consts::PI).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheckpoint {
    pub name: String,
    pub report: BoundReport,
}

fn checkpoint(name: &str, lhs: f64, rhs: f64) -> ChainCheckpoint {
    ChainCheckpoint { name: name.into(), report: BoundReport::new(name, lhs, rhs) }
}

fn relative_margin(r: &BoundReport) -> f64 {
    r.margin / r.rhs.abs().max(1.0)
}

/// Seven numeric steps of the isogeny derivations. Step (d) holds two
/// inequalities; its report carries the tighter one.
pub fn chain_checkpoints() -> Vec<ChainCheckpoint> {
    let s233 = 233f64.sqrt();
    let pi = std::f64::consts::PI;
    let d1 = BoundReport::new("", 23.61 / (pi - 6.0 * 12.31f64.ln() / 12.31), 12.31);
    let d2 = BoundReport::new("", 39.74 / (pi - 6.0 * 18.19f64.ln() / 18.19), 18.19);
    let d = if relative_margin(&d1) <= relative_margin(&d2) { &d1 } else { &d2 };
    let mut step_d = checkpoint("d_real_place_fixed_points", d.lhs, d.rhs);
    step_d.report = step_d.report.with_input("lhs_12_31", d1.lhs).with_input("lhs_18_19", d2.lhs);
    let e1 = BoundReport::new("", 24.62 * 36.38, 895.7);
    let e2 = BoundReport::new("", 895.7 * 4.0, 3583.0);
    let e = if relative_margin(&e1) <= relative_margin(&e2) { &e1 } else { &e2 };
    let mut step_e = checkpoint("e_real_place_product", e.lhs, e.rhs);
    step_e.report = step_e.report.with_input("product", e1.lhs).with_input("times_four", e2.lhs);
    vec![
        checkpoint("a_log_over_x", 2.0 * 1.545e6f64.ln() / 1.545e6, 1.85e-5),
        checkpoint("b_1461_to_1545", 1461.0 / (1.0 - 1461.0 * 3.7e-5), 1545.0),
        checkpoint("c_cm_fixed_point", 25.12 / (pi * 3f64.sqrt() / 2.0 - 6.0 * s233.ln() / s233), s233),
        step_d,
        step_e,
        checkpoint("f_1778_to_1461", 1.006 * 1778.0 * (2.0f64 / 3.0).sqrt(), 1461.0),
        checkpoint("g_n_ge_2_fallback", 1.03 * (4.0f64 / 7.0).sqrt(), (2.0f64 / 3.0).sqrt()),
    ]
}

/// ‖ω‖² = (n + |τ|²)/y for n = ⌊|τ|²⌋, checked against
/// (n + |τ|²)/√(|τ|² − ¼) and then 2n/√(n − ¼). The report carries the
/// tighter of the two steps.
pub fn period_norm_identity(n: u64, tau: &SiegelTau) -> Result<BoundReport> {
    let t2 = tau.re() * tau.re() + tau.im() * tau.im();
    // slack for τ on the unit circle up to rounding
    if n == 0 || n as f64 > t2 + 1e-12 * t2 || t2 >= n as f64 + 1.0 {
        return domain(format!("n = {n} is not the integer part of |tau|^2 = {t2}"));
    }
    let nf = n as f64;
    let norm = (nf + t2) / tau.im();
    let middle = (nf + t2) / (t2 - 0.25).sqrt();
    let last = 2.0 * nf / (nf - 0.25).sqrt();
    let first = BoundReport::new("", norm, middle);
    let second = BoundReport::new("", middle, last);
    let r = if relative_margin(&first) <= relative_margin(&second) { first } else { second };
    Ok(BoundReport::new("period_norm_identity", r.lhs, r.rhs)
        .with_input("n", nf)
        .with_input("norm_sq", norm)
        .with_input("middle", middle)
        .with_input("final", last)
        .with_input("tau_re", tau.re())
        .with_input("tau_im", tau.im()))
}
