//! q-expansions of Δ, E₄ and j with certified truncation bounds, and the
//! classical lower bounds for |j| and |Δ| on the fundamental domain.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{domain, Error, Result};
use crate::lattice::SiegelTau;

const ZETA3_UPPER: f64 = 1.202_056_903_159_6;
const MAX_ORDER: usize = 100_000;
/// Number of q-expansion coefficients of j kept for the direct series.
const J_COEFFS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaNormalization {
    /// q ∏ (1 − qⁿ)²⁴
    #[default]
    Ramanujan,
    /// (2π)¹² q ∏ (1 − qⁿ)²⁴
    TwoPi12,
}

impl DeltaNormalization {
    pub fn factor(self) -> f64 {
        match self {
            Self::Ramanujan => 1.0,
            Self::TwoPi12 => (2.0 * PI).powi(12),
        }
    }
}

/// Truncation control for q-series. `tail_tolerance` bounds the relative
/// truncation error of Δ and the absolute truncation error of E₄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QSeriesConfig {
    truncation_order: usize,
    tail_tolerance: f64,
}

impl QSeriesConfig {
    pub fn new(truncation_order: usize, tail_tolerance: f64) -> Result<Self> {
        if truncation_order == 0 || !(tail_tolerance > 0.0) {
            return domain("truncation order must be >= 1 and tolerance > 0");
        }
        Ok(Self { truncation_order, tail_tolerance })
    }

    /// Smallest order meeting `tail_tolerance` for every τ with Im τ ≥ `im`.
    pub fn for_im(im: f64, tail_tolerance: f64) -> Result<Self> {
        if !(im > 0.0) {
            return domain("imaginary part must be positive");
        }
        let n = required_order((-2.0 * PI * im).exp(), tail_tolerance)?;
        Self::new(n, tail_tolerance)
    }

    /// Configuration valid on the whole fundamental domain.
    pub fn fundamental_domain() -> Self {
        Self::for_im(3f64.sqrt() / 2.0, 1e-16).expect("valid constants")
    }

    pub fn truncation_order(&self) -> usize {
        self.truncation_order
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    pub fn doubled(&self) -> Self {
        Self { truncation_order: 2 * self.truncation_order, ..*self }
    }

    fn check(&self, qabs: f64) -> Result<()> {
        let required = required_order(qabs, self.tail_tolerance)?;
        if self.truncation_order < required {
            return Err(Error::Truncation { given: self.truncation_order, required });
        }
        Ok(())
    }
}

impl Default for QSeriesConfig {
    fn default() -> Self {
        Self::fundamental_domain()
    }
}

/// A series value with a certified bound on the truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Relative error of ∏_{n≤N}(1 − qⁿ)²⁴ against the infinite product.
fn product_tail(qabs: f64, n: usize) -> f64 {
    let qn1 = qabs.powi(n as i32 + 1);
    let s = 24.0 * qn1 / ((1.0 - qabs) * (1.0 - qn1));
    s.exp_m1()
}

/// Absolute error of the truncated E₄ sum, using σ₃(n) ≤ ζ(3) n³.
fn e4_tail(qabs: f64, n: usize) -> f64 {
    let m = (n + 1) as f64;
    let ratio = (1.0 + 1.0 / m).powi(3) * qabs;
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    240.0 * ZETA3_UPPER * m.powi(3) * qabs.powf(m) / (1.0 - ratio)
}

fn required_order(qabs: f64, tol: f64) -> Result<usize> {
    if !(qabs < 1.0) {
        return domain("|q| must be < 1");
    }
    (1..=MAX_ORDER)
        .find(|&n| product_tail(qabs, n) <= tol && e4_tail(qabs, n) <= tol)
        .ok_or_else(|| Error::Domain("Im tau too small for q-series evaluation".into()))
}

fn q_of(tau: Complex64) -> Result<Complex64> {
    if !tau.is_finite() || tau.im <= 0.0 {
        return domain("tau must lie in the upper half plane");
    }
    Ok((Complex64::i() * 2.0 * PI * tau).exp())
}

/// Δ at any point of the upper half plane.
pub fn delta_at(tau: Complex64, cfg: &QSeriesConfig, normalization: DeltaNormalization) -> Result<SeriesValue> {
    let q = q_of(tau)?;
    cfg.check(q.norm())?;
    let n = cfg.truncation_order;
    let mut log_sum = Complex64::new(0.0, 0.0);
    let mut qn = q;
    for _ in 0..n {
        log_sum += (Complex64::new(1.0, 0.0) - qn).ln();
        qn *= q;
    }
    let value = q * (log_sum * 24.0).exp() * normalization.factor();
    Ok(SeriesValue { value, tail_bound: value.norm() * product_tail(q.norm(), n) })
}

pub fn delta_tau(tau: SiegelTau, cfg: &QSeriesConfig, normalization: DeltaNormalization) -> Result<SeriesValue> {
    delta_at(tau.to_complex(), cfg, normalization)
}

fn sigma3(n: usize) -> f64 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| (d as f64).powi(3)).sum()
}

pub fn eisenstein_e4_at(tau: Complex64, cfg: &QSeriesConfig) -> Result<SeriesValue> {
    let q = q_of(tau)?;
    cfg.check(q.norm())?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut qn = q;
    for k in 1..=cfg.truncation_order {
        sum += qn * sigma3(k);
        qn *= q;
        if qn.norm() == 0.0 {
            break;
        }
    }
    Ok(SeriesValue {
        value: Complex64::new(1.0, 0.0) + sum * 240.0,
        tail_bound: e4_tail(q.norm(), cfg.truncation_order),
    })
}

/// j = E₄³/Δ at any point of the upper half plane.
pub fn j_at(tau: Complex64, cfg: &QSeriesConfig) -> Result<SeriesValue> {
    let e4 = eisenstein_e4_at(tau, cfg)?;
    let delta = delta_at(tau, cfg, DeltaNormalization::Ramanujan)?;
    let num = e4.value.powu(3);
    let a = e4.value.norm();
    let e = e4.tail_bound;
    let num_err = 3.0 * a * a * e + 3.0 * a * e * e + e * e * e;
    let den = delta.value.norm();
    let value = num / delta.value;
    let tail_bound = if delta.tail_bound < den {
        (num_err + value.norm() * delta.tail_bound) / (den - delta.tail_bound)
    } else {
        f64::INFINITY
    };
    if cfg!(debug_assertions) && tau.im >= 0.5 {
        let direct = j_direct(tau)?;
        debug_assert!(
            (direct - value).norm() <= 1e-8 * value.norm().max(1e3),
            "q-series cross-check failed at {tau}: {direct} vs {value}"
        );
    }
    Ok(SeriesValue { value, tail_bound })
}

pub fn j_invariant(tau: SiegelTau, cfg: &QSeriesConfig) -> Result<SeriesValue> {
    j_at(tau.to_complex(), cfg)
}

fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
}

/// Coefficients c(−1), c(0), c(1), ... of j = Σ c(n) qⁿ.
pub fn j_coefficients() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let m = J_COEFFS;
        let mut e4 = vec![0.0; m];
        e4[0] = 1.0;
        for (k, c) in e4.iter_mut().enumerate().skip(1) {
            *c = 240.0 * sigma3(k);
        }
        let e4_cubed = series_mul(&series_mul(&e4, &e4), &e4);
        // ∏ (1 − qⁿ)²⁴ as a power series, then its reciprocal
        let mut eta24 = vec![0.0; m];
        eta24[0] = 1.0;
        for n in 1..m {
            for _ in 0..24 {
                for k in (n..m).rev() {
                    eta24[k] -= eta24[k - n];
                }
            }
        }
        let mut inv = vec![0.0; m];
        inv[0] = 1.0;
        for k in 1..m {
            inv[k] = -(1..=k).map(|i| eta24[i] * inv[k - i]).sum::<f64>();
        }
        series_mul(&e4_cubed, &inv)
    })
}

/// j from its q-expansion with integer coefficients.
pub fn j_direct(tau: Complex64) -> Result<Complex64> {
    let q = q_of(tau)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut qn = q.inv();
    for &c in j_coefficients() {
        sum += qn * c;
        qn *= q;
    }
    Ok(sum)
}

/// Lower bound |j(τ)| ≥ e^{2πy} − 1193 on the fundamental domain.
pub fn j_lower_bound(y: f64) -> f64 {
    (2.0 * PI * y).exp() - 1193.0
}

/// Lower bound |q ∏(1 − qⁿ)²⁴| ≥ e^{−1/9 − 2πy}.
pub fn delta_lower_bound(y: f64) -> f64 {
    (-1.0 / 9.0 - 2.0 * PI * y).exp()
}

/// The j and Δ lower bounds at τ. The Δ bound is tested against the
/// Ramanujan-normalized Δ, where it is tight up to e^{−1/9}.
pub fn check_classical_bounds(tau: SiegelTau) -> Result<(BoundReport, BoundReport)> {
    let cfg = QSeriesConfig::default();
    let y = tau.im();
    let j = j_invariant(tau, &cfg)?;
    let d = delta_tau(tau, &cfg, DeltaNormalization::Ramanujan)?;
    let jr = BoundReport::new("j_lower_bound", j_lower_bound(y), j.value.norm() - j.tail_bound)
        .with_input("tau_re", tau.re())
        .with_input("tau_im", y);
    let dr = BoundReport::new("delta_lower_bound", delta_lower_bound(y), d.value.norm() - d.tail_bound)
        .with_input("tau_re", tau.re())
        .with_input("tau_im", y);
    Ok((jr, dr))
}

/// The Δ bound in its weaker form e^{−1/9 − 2πy}(2π)^{−12}, evaluated
/// against Δ in the chosen normalization.
pub fn check_delta_bound_scaled(tau: SiegelTau, normalization: DeltaNormalization) -> Result<BoundReport> {
    let d = delta_tau(tau, &QSeriesConfig::default(), normalization)?;
    let lhs = delta_lower_bound(tau.im()) * (2.0 * PI).powi(-12);
    Ok(BoundReport::new("delta_lower_bound_scaled", lhs, d.value.norm() - d.tail_bound)
        .with_input("tau_re", tau.re())
        .with_input("tau_im", tau.im()))
}

/// max(y⁶e^{−2πy}, y⁶(1 − 1193e^{−2πy})), a lower bound for |Δ|y⁶ e^{1/9}
/// combined with |j|.
pub fn silverman_f(y: f64) -> f64 {
    let e = (-2.0 * PI * y).exp();
    let y6 = y.powi(6);
    (y6 * e).max(y6 * (1.0 - 1193.0 * e))
}

/// 1194 (2π/log 1194)⁶ e^{1/9} (2π)¹²
pub fn silverman_b() -> f64 {
    1194.0 * (2.0 * PI / 1194f64.ln()).powi(6) * (1.0f64 / 9.0).exp() * (2.0 * PI).powi(12)
}

fn monotone_defect(a: f64, b: f64, step: f64, increasing: bool) -> f64 {
    let n = ((b - a) / step).round() as usize;
    let mut worst = f64::NEG_INFINITY;
    let mut prev = silverman_f(a);
    for i in 1..=n {
        let cur = silverman_f(a + (b - a) * i as f64 / n as f64);
        let d = if increasing { prev - cur } else { cur - prev };
        worst = worst.max(d);
        prev = cur;
    }
    worst
}

/// Shape of `silverman_f` on the fundamental domain and the resulting
/// height constant.
pub fn silverman_f_extrema() -> Vec<BoundReport> {
    let y0 = 3f64.sqrt() / 2.0;
    let y1 = 3.0 / PI;
    let y2 = 1194f64.ln() / (2.0 * PI);
    let y_far = 30.0;
    let step = 1e-4;
    let b = silverman_b();
    let constant = 0.5 * PI.ln() + b.ln() / 12.0;
    vec![
        BoundReport::new("silverman_f_increasing_low", monotone_defect(y0, y1, step, true), 0.0)
            .with_input("from", y0)
            .with_input("to", y1),
        BoundReport::new("silverman_f_decreasing_mid", monotone_defect(y1, y2, step, false), 0.0)
            .with_input("from", y1)
            .with_input("to", y2),
        BoundReport::new("silverman_f_increasing_high", monotone_defect(y2, y_far, step, true), 0.0)
            .with_input("from", y2)
            .with_input("to", y_far),
        BoundReport::new("silverman_f_minimum", silverman_f(y2), silverman_f(y0))
            .with_input("y_low", y0)
            .with_input("y_switch", y2),
        BoundReport::new("silverman_height_constant", constant, 2.95).with_input("log_b", b.ln()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> QSeriesConfig {
        QSeriesConfig::default()
    }

    #[test]
    fn delta_far_up() {
        let d = delta_tau(SiegelTau::new(0.0, 10.0).unwrap(), &cfg(), DeltaNormalization::Ramanujan).unwrap();
        let expect = (-20.0 * PI).exp();
        assert!((d.value.re - expect).abs() <= 1e-12 * expect);
        assert!(d.value.im.abs() <= 1e-12 * expect);
    }

    #[test]
    fn delta_at_rho_matches_high_precision() {
        // 2000-term product evaluated at 50 digits
        const DELTA_RHO: f64 = -4.805_138_377_052_948_3e-3;
        let d = delta_tau(SiegelTau::rho(), &cfg(), DeltaNormalization::Ramanujan).unwrap();
        assert!((d.value.re - DELTA_RHO).abs() < 1e-15, "{}", d.value);
        assert!(d.value.im.abs() < 1e-15);
        // Δ(i) from the same oracle
        const DELTA_I: f64 = 1.785_369_850_642_151_9e-3;
        let d = delta_tau(SiegelTau::i(), &cfg(), DeltaNormalization::Ramanujan).unwrap();
        assert!((d.value.re - DELTA_I).abs() < 1e-16);
    }

    #[test]
    fn delta_bound_at_i() {
        let d = delta_tau(SiegelTau::i(), &cfg(), DeltaNormalization::Ramanujan).unwrap();
        assert!(d.value.norm() >= delta_lower_bound(1.0));
    }

    #[test]
    fn insufficient_truncation_is_reported() {
        let small = QSeriesConfig::new(2, 1e-15).unwrap();
        match delta_tau(SiegelTau::i(), &small, DeltaNormalization::Ramanujan) {
            Err(Error::Truncation { given: 2, required }) => assert!(required > 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn j_classical_values() {
        let j = j_invariant(SiegelTau::i(), &cfg()).unwrap();
        assert!((j.value - Complex64::new(1728.0, 0.0)).norm() < 1e-9);
        let j = j_invariant(SiegelTau::rho(), &cfg()).unwrap();
        assert!(j.value.norm() < 1e-9, "{}", j.value);
        assert!((j_direct(Complex64::new(0.0, 1.0)).unwrap().re - 1728.0).abs() < 1e-9);
    }

    #[test]
    fn j_coefficients_are_classical() {
        let c = j_coefficients();
        assert_eq!(&c[..5], &[1.0, 744.0, 196_884.0, 21_493_760.0, 864_299_970.0]);
        assert_eq!(c[5], 20_245_856_256.0);
    }

    #[test]
    fn j_real_on_imaginary_axis() {
        for k in 0..=40 {
            let t = 1.0 + 2.0 * k as f64 / 40.0;
            let j = j_invariant(SiegelTau::new(0.0, t).unwrap(), &cfg()).unwrap();
            assert!(j.value.im.abs() < 1e-9);
        }
    }

    #[test]
    fn classical_bounds_on_grid() {
        let (a, b) = check_classical_bounds(SiegelTau::i()).unwrap();
        assert!(a.satisfied && b.satisfied);
        let (a, b) = check_classical_bounds(SiegelTau::rho()).unwrap();
        assert!(a.satisfied && b.satisfied);
        let mut count = 0;
        for i in 0..20 {
            for k in 0..25 {
                let re = -0.5 + i as f64 / 19.0;
                let lo = (1.0 - re * re).sqrt().max(3f64.sqrt() / 2.0);
                let im = lo + (10.0 - lo) * k as f64 / 24.0;
                let (a, b) = check_classical_bounds(SiegelTau::new(re, im).unwrap()).unwrap();
                assert!(a.satisfied && b.satisfied, "{re} {im}");
                count += 1;
            }
        }
        assert_eq!(count, 500);
    }

    #[test]
    fn scaled_delta_bound_holds_in_both_normalizations() {
        for t in [SiegelTau::i(), SiegelTau::rho(), SiegelTau::new(0.3, 2.0).unwrap()] {
            for n in [DeltaNormalization::Ramanujan, DeltaNormalization::TwoPi12] {
                assert!(check_delta_bound_scaled(t, n).unwrap().satisfied);
            }
        }
    }

    #[test]
    fn silverman_shape() {
        for r in silverman_f_extrema() {
            assert!(r.satisfied, "{r:?}");
        }
        // f(√3/2) and f(log 1194 / 2π) from 30-digit evaluation
        assert!((silverman_f(3f64.sqrt() / 2.0) - 1.828_161_777_649_132_6e-3).abs() < 1e-17);
        assert!((silverman_f(1194f64.ln() / (2.0 * PI)) - 1.721_786_256_456_369_5e-3).abs() < 1e-17);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn doubling_truncation_changes_little(re in -0.5f64..0.5, im in 0.87f64..5.0) {
            prop_assume!(re * re + im * im >= 1.0);
            let t = SiegelTau::new(re, im).unwrap();
            let a = delta_tau(t, &cfg(), DeltaNormalization::Ramanujan).unwrap();
            let b = delta_tau(t, &cfg().doubled(), DeltaNormalization::Ramanujan).unwrap();
            prop_assert!((a.value - b.value).norm() <= 4.0 * f64::EPSILON * a.value.norm() + a.tail_bound);
        }

        #[test]
        fn j_is_modular_invariant(re in -0.5f64..0.5, im in 0.87f64..3.0, a in -10i64..=10, c in 1i64..=10) {
            prop_assume!(re * re + im * im >= 1.0);
            prop_assume!(num_integer::gcd(a, c) == 1);
            let (g, x, _) = {
                fn eg(a: i64, b: i64) -> (i64, i64, i64) {
                    if b == 0 { (a, 1, 0) } else { let (g, x, y) = eg(b, a.rem_euclid(b)); (g, y, x - a.div_euclid(b) * y) } }
                eg(a, c)
            };
            // a·x + c·y = g = ±1, so (a, −y·g; c, x·g) has determinant 1
            let y_coef = (g - a * x) / c;
            let m = crate::lattice::UnimodularMap::new(a, -y_coef * g, c, x * g).unwrap();
            let tau = Complex64::new(re, im);
            let image = m.apply(tau);
            let (back, _) = crate::lattice::reduce_tau(image).unwrap();
            let j0 = j_at(tau, &cfg()).unwrap().value;
            let j1 = j_invariant(back, &cfg()).unwrap().value;
            prop_assert!((j0 - j1).norm() <= 1e-8 * j0.norm().max(1.0));
        }

        #[test]
        fn delta_weight_twelve(re in -0.5f64..0.5, im in 0.87f64..3.0) {
            prop_assume!(re * re + im * im >= 1.0);
            let tau = Complex64::new(re, im);
            let cfg_low = QSeriesConfig::for_im(im / tau.norm_sqr(), 1e-15).unwrap();
            let a = delta_at(-tau.inv(), &cfg_low, DeltaNormalization::Ramanujan).unwrap().value.norm();
            let b = delta_at(tau, &cfg(), DeltaNormalization::Ramanujan).unwrap().value.norm();
            prop_assert!((a - tau.norm().powi(12) * b).abs() <= 1e-8 * a);
        }
    }
}
