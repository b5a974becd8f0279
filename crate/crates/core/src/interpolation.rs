//! The auxiliary polynomial P = ∏_{|j|<S} (X − j), the sequence u_S, Hermite
//! interpolation on contours around the points |j| < S, and the resulting
//! approximate Schwarz lemma.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::bounds::BoundReport;
use crate::error::{domain, Result};

pub const DEFAULT_EPSILON: f64 = 1.0 / 12.0;
pub const BOUNDARY_SAMPLES: usize = 4096;
pub const CONTOUR_NODES: usize = 1024;
/// Grid step for the real-line and angular scans of the polynomial.
pub const SCAN_STEP: f64 = 1e-3;

/// Entire test functions with closed-form Taylor coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticTestFunction {
    Monomial(u32),
    Exponential(Complex64),
    Polynomial(Vec<Complex64>),
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * f64::from(i))
}

impl AnalyticTestFunction {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.taylor(0, z)
    }

    /// f^{(ℓ)}(z)/ℓ!
    pub fn taylor(&self, l: u32, z: Complex64) -> Complex64 {
        match self {
            Self::Monomial(d) => {
                if l > *d {
                    Complex64::new(0.0, 0.0)
                } else {
                    z.powu(d - l) * binomial(*d, l)
                }
            }
            Self::Exponential(c) => c.powu(l) * (c * z).exp() / factorial(l),
            Self::Polynomial(a) => a
                .iter()
                .enumerate()
                .skip(l as usize)
                .map(|(k, &ak)| ak * z.powu(k as u32 - l) * binomial(k as u32, l))
                .sum(),
        }
    }

    /// An upper bound for |f′| on the closed disc of radius r.
    pub fn derivative_bound(&self, r: f64) -> f64 {
        match self {
            Self::Monomial(0) => 0.0,
            Self::Monomial(d) => f64::from(*d) * r.powi(*d as i32 - 1),
            Self::Exponential(c) => c.norm() * (c.norm() * r).exp(),
            Self::Polynomial(a) => a
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, ak)| k as f64 * ak.norm() * r.powi(k as i32 - 1))
                .sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationParams {
    s: u32,
    t: u32,
    epsilon: f64,
}

impl InterpolationParams {
    pub fn new(s: u32, t: u32, epsilon: f64) -> Result<Self> {
        if s == 0 || t == 0 || !(epsilon > 0.0 && epsilon < 0.5) {
            return domain("need S >= 1, T >= 1 and 0 < epsilon < 1/2");
        }
        Ok(Self { s, t, epsilon })
    }

    pub fn with_default_epsilon(s: u32, t: u32) -> Result<Self> {
        Self::new(s, t, DEFAULT_EPSILON)
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

fn roots(s: u32) -> impl Iterator<Item = i64> {
    let s = i64::from(s);
    1 - s..s
}

pub fn poly_p(s: u32, z: Complex64) -> Complex64 {
    roots(s).map(|j| z - j as f64).product()
}

/// log |P(z)|, stable for large S.
pub fn log_abs_p(s: u32, z: Complex64) -> f64 {
    roots(s).map(|j| (z - j as f64).norm().ln()).sum()
}

/// P at an integer point in exact arithmetic.
pub fn poly_p_exact(s: u32, n: i64) -> BigInt {
    roots(s).map(|j| BigInt::from(n - j)).product()
}

fn ln_factorial(n: u32) -> f64 {
    // the direct product is exact through 22! and stays finite up to 170!
    if n <= 170 {
        factorial(n).ln()
    } else {
        ln_gamma(f64::from(n) + 1.0)
    }
}

/// sin(πt) computed after reduction to [−1/2, 1/2], exact zero at integers.
fn sin_pi(t: f64) -> f64 {
    let k = t.round();
    let s = (PI * (t - k)).sin();
    if (k as i64).rem_euclid(2) == 0 {
        s
    } else {
        -s
    }
}

/// Points on the boundary of {min(|z|, 2|z − 1|, 2|z + 1|) ≤ 1}, at angular
/// step `step` on each of the three circles.
pub fn test_curve(step: f64) -> Vec<Complex64> {
    let mut pts = Vec::new();
    for (center, radius) in [(0.0, 1.0), (1.0, 0.5), (-1.0, 0.5)] {
        let n = (2.0 * PI / step).ceil() as usize;
        for i in 0..n {
            let z = Complex64::new(center, 0.0) + Complex64::from_polar(radius, 2.0 * PI * i as f64 / n as f64);
            let m = z.norm().min(2.0 * (z - 1.0).norm()).min(2.0 * (z + 1.0).norm());
            if m >= 1.0 - 1e-12 {
                pts.push(z);
            }
        }
    }
    pts
}

fn worst_of(name: String, s: u32, reports: impl IntoIterator<Item = BoundReport>) -> BoundReport {
    let mut out: Option<BoundReport> = None;
    for r in reports {
        let key = r.margin / BoundReport::tolerance(r.rhs);
        if out.as_ref().is_none_or(|o| key < o.margin / BoundReport::tolerance(o.rhs)) {
            out = Some(r);
        }
    }
    let r = out.expect("nonempty scan");
    let mut rep = BoundReport::new(name, r.lhs, r.rhs).with_input("s", f64::from(s));
    rep.inputs.extend(r.inputs);
    rep
}

pub fn lemma52_checks(s_max: u32) -> Result<Vec<BoundReport>> {
    if s_max < 2 {
        return domain("S_max must be at least 2");
    }
    let mut out = Vec::new();
    let curve = test_curve(SCAN_STEP);
    for s in 2..=s_max {
        let sf = f64::from(s);
        let fact2 = 2.0 * ln_factorial(s - 1);

        // (1) exact factorial identity
        let f: BigInt = (1..=2 * i64::from(s) - 1).map(BigInt::from).product();
        let ok = poly_p_exact(s, i64::from(s)) == f && poly_p_exact(s, -i64::from(s)) == -&f;
        out.push(
            BoundReport::new(format!("lemma52_factorial[{s}]"), if ok { 0.0 } else { 1.0 }, 0.0)
                .with_input("s", sf),
        );

        // (2) |P(t)| ≥ (S−1)!² π⁻¹ |sin πt| on [−S, S], as a ratio ≥ 1 away
        // from the integers where both sides vanish
        let n = (2.0 * sf / SCAN_STEP).round() as i64;
        let per_unit = (1.0 / SCAN_STEP).round() as i64;
        out.push(worst_of(
            format!("lemma52_real_lower[{s}]"),
            s,
            (0..=n).filter(|i| i % per_unit != 0).map(|i| {
                let t = -sf + i as f64 * SCAN_STEP;
                let log_ratio = log_abs_p(s, Complex64::new(t, 0.0)) + PI.ln() - fact2 - sin_pi(t).abs().ln();
                BoundReport::new("", 1.0, log_ratio.exp()).with_input("t", t)
            }),
        ));

        // (3) |P(z)| ≤ (S−1)!² π⁻¹ sinh π on the test curve (hence inside it)
        let log_bound = fact2 - PI.ln() + PI.sinh().ln();
        out.push(worst_of(
            format!("lemma52_curve_upper[{s}]"),
            s,
            curve.iter().map(|&z| BoundReport::new("", log_abs_p(s, z), log_bound).with_input("z_re", z.re).with_input("z_im", z.im)),
        ));

        // (4) minimum over |z − k| = ρ attained at k ± ρ
        let angles = (2.0 * PI / SCAN_STEP).ceil() as usize;
        out.push(worst_of(
            format!("lemma52_circle_min[{s}]"),
            s,
            (0..24).map(|i| {
                let k = (((i as f64 + 1.0) * 0.618_033_988_749_895).fract() * (2.0 * sf + 5.0)).floor() - sf - 2.0;
                let rho = 0.05 + 2.0 * sf * ((i as f64 + 1.0) * 0.754_877_666_246_693).fract();
                let c = Complex64::new(k, 0.0);
                let real = log_abs_p(s, c + rho).min(log_abs_p(s, c - rho));
                let sampled = (1..angles)
                    .filter(|&a| 2 * a != angles)
                    .map(|a| log_abs_p(s, c + Complex64::from_polar(rho, 2.0 * PI * a as f64 / angles as f64)))
                    .fold(f64::INFINITY, f64::min);
                BoundReport::new("", real, sampled).with_input("k", k).with_input("rho", rho)
            }),
        ));
    }
    Ok(out)
}

/// log u_S = S log 4 + 2 log (S−1)! − log (2S−1)!
pub fn log_u(s: u32) -> f64 {
    f64::from(s) * 4f64.ln() + 2.0 * ln_factorial(s - 1) - ln_factorial(2 * s - 1)
}

pub fn u_sequence(s_max: u32) -> Result<Vec<BoundReport>> {
    if s_max < 2 {
        return domain("S_max must be at least 2");
    }
    let mut out = Vec::new();
    // u_2 = 4² · 1!² / 3! exactly
    let u2_num = BigInt::from(16);
    let u2_den = BigInt::from(6);
    let exact = &u2_num * 3 == &u2_den * 8;
    out.push(BoundReport::new("u2_equals_8_3", if exact { 0.0 } else { 1.0 }, 0.0));

    let ratio = (2..=s_max).map(|s| {
        let lhs = (log_u(s) - log_u(s + 1) - (1.0 / (2.0 * f64::from(s))).ln_1p()).abs();
        // rounding allowance of the log-gamma evaluations
        let mag = f64::from(s) * 4f64.ln() + 2.0 * ln_factorial(s) + ln_factorial(2 * s + 1);
        BoundReport::new("", lhs, 16.0 * f64::EPSILON * mag).with_input("s", f64::from(s))
    });
    out.push(worst_of("u_ratio_identity".into(), s_max, ratio));
    out.push(worst_of(
        "u_decreasing".into(),
        s_max,
        (2..s_max).map(|s| BoundReport::new("", log_u(s + 1), log_u(s)).with_input("s", f64::from(s))),
    ));
    if s_max >= 3 {
        out.push(worst_of(
            "u_below_u2".into(),
            s_max,
            (3..=s_max).map(|s| BoundReport::new("", log_u(s).exp(), 8.0 / 3.0).with_input("s", f64::from(s))),
        ));
    }
    out.push(BoundReport::new("sinh_pi_constant_10", 8.0 * PI.sinh() / (3.0 * PI), 10.0));
    out.push(BoundReport::new("sinh_pi_constant_12", PI.sinh() / (PI / 12.0).cos(), 12.0));
    Ok(out)
}

fn check_separation(params: &InterpolationParams, z: Complex64) -> Result<()> {
    let r = 0.5 - params.epsilon;
    if z.norm() >= f64::from(params.s) {
        return domain("z must satisfy |z| < S");
    }
    if roots(params.s).any(|j| (z - j as f64).norm() <= r) {
        return domain("z must stay outside the small contours |z - j| = 1/2 - epsilon");
    }
    Ok(())
}

fn q_poly(params: &InterpolationParams, z: Complex64) -> Complex64 {
    poly_p(params.s, z).powu(params.t)
}

/// Both sides of the Hermite interpolation identity at z, evaluated with
/// `nodes` trapezoid nodes per contour.
pub fn hermite_sides(
    f: &AnalyticTestFunction,
    params: &InterpolationParams,
    z: Complex64,
    nodes: usize,
) -> Result<(Complex64, Complex64)> {
    check_separation(params, z)?;
    let circle = |center: f64, radius: f64, g: &dyn Fn(Complex64) -> Complex64| -> Complex64 {
        // (1/2πi)∮ g dζ = (1/n) Σ g(ζ_k)(ζ_k − c)
        (0..nodes)
            .map(|k| {
                let w = Complex64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
                g(w + center) * w
            })
            .sum::<Complex64>()
            / nodes as f64
    };
    let s = f64::from(params.s);
    let outer = circle(0.0, s, &|w| f.eval(w) / (q_poly(params, w) * (w - z)));
    let r = 0.5 - params.epsilon;
    let mut inner = Complex64::new(0.0, 0.0);
    for j in roots(params.s) {
        let jf = j as f64;
        for l in 0..params.t {
            let coef = f.taylor(l, Complex64::new(jf, 0.0));
            if coef.norm() == 0.0 {
                continue;
            }
            inner += coef * circle(jf, r, &|w| (w - jf).powu(l) / (q_poly(params, w) * (w - z)));
        }
    }
    Ok((f.eval(z) / q_poly(params, z), outer - inner))
}

pub fn hermite_identity_check(f: &AnalyticTestFunction, params: &InterpolationParams, z: Complex64) -> Result<BoundReport> {
    let (lhs, rhs) = hermite_sides(f, params, z, CONTOUR_NODES)?;
    let scale = lhs.norm().max(rhs.norm()).max(1.0);
    Ok(BoundReport::new("hermite_identity", (lhs - rhs).norm() / scale, 1e-8)
        .with_input("s", f64::from(params.s))
        .with_input("t", f64::from(params.t))
        .with_input("z_re", z.re)
        .with_input("z_im", z.im))
}

/// Certified upper bound for sup_{|z| ≤ r} |f|: sampled maximum on the
/// circle plus the Lipschitz allowance (πr/M)·sup|f′| for M samples.
pub fn disc_max_upper(f: &AnalyticTestFunction, r: f64, samples: usize) -> f64 {
    circle_max(f, r, samples) + PI * r / samples as f64 * f.derivative_bound(r)
}

/// Sampled maximum of |f| on |z| = r, a lower bound for sup_{|z| ≤ r} |f|.
pub fn circle_max(f: &AnalyticTestFunction, r: f64, samples: usize) -> f64 {
    (0..samples)
        .map(|k| f.eval(Complex64::from_polar(r, 2.0 * PI * k as f64 / samples as f64)).norm())
        .fold(0.0, f64::max)
}

/// Sampled quantities entering both forms of the Schwarz-lemma estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzData {
    pub f_1_upper: f64,
    pub f_s_lower: f64,
    pub jet_max: f64,
}

pub fn schwarz_data(f: &AnalyticTestFunction, params: &InterpolationParams) -> SchwarzData {
    let jet_max = roots(params.s)
        .flat_map(|j| (0..params.t).map(move |l| (j, l)))
        .map(|(j, l)| f.taylor(l, Complex64::new(j as f64, 0.0)).norm() / 2f64.powi(l as i32))
        .fold(0.0, f64::max);
    SchwarzData {
        f_1_upper: disc_max_upper(f, 1.0, BOUNDARY_SAMPLES),
        f_s_lower: circle_max(f, f64::from(params.s), BOUNDARY_SAMPLES),
        jet_max,
    }
}

/// Right-hand side of the sharp form.
pub fn schwarz_sharp_rhs(params: &InterpolationParams, d: &SchwarzData) -> f64 {
    let (s, t, e) = (params.s, params.t, params.epsilon);
    let ratio = (2.0 * ln_factorial(s - 1) + PI.sinh().ln() - PI.ln() - ln_factorial(2 * s - 1)).exp();
    let st = f64::from(s) * f64::from(t);
    4.0 * ratio.powi(t as i32) * d.f_s_lower + st / e * (PI.sinh() / (PI * e).cos()).powi(t as i32) * d.jet_max
}

/// Right-hand side of the simplified form with constants 10/4^S and 12.
pub fn schwarz_simplified_rhs(params: &InterpolationParams, d: &SchwarzData) -> f64 {
    let (s, t) = (params.s as i32, params.t as i32);
    let st = f64::from(s) * f64::from(t);
    4.0 * (10.0 / 4f64.powi(s)).powi(t) * d.f_s_lower + 12.0 * st * 12f64.powi(t) * d.jet_max
}

pub fn schwarz_lemma_check(f: &AnalyticTestFunction, params: &InterpolationParams) -> (BoundReport, BoundReport) {
    let d = schwarz_data(f, params);
    let tag = |r: BoundReport| {
        r.with_input("s", f64::from(params.s))
            .with_input("t", f64::from(params.t))
            .with_input("epsilon", params.epsilon)
            .with_input("f_s", d.f_s_lower)
            .with_input("jet_max", d.jet_max)
    };
    (
        tag(BoundReport::new("schwarz_sharp", d.f_1_upper, schwarz_sharp_rhs(params, &d))),
        tag(BoundReport::new("schwarz_simplified", d.f_1_upper, schwarz_simplified_rhs(params, &d))),
    )
}

/// Monomials of degree ≤ 10 and exponentials e^{cz} for c on a grid of
/// the disc |c| ≤ 2.
pub fn standard_test_family() -> Vec<AnalyticTestFunction> {
    let mut v: Vec<AnalyticTestFunction> = (0..=10).map(AnalyticTestFunction::Monomial).collect();
    for r in [0.5, 1.0, 2.0] {
        for k in 0..8 {
            v.push(AnalyticTestFunction::Exponential(Complex64::from_polar(r, PI * f64::from(k) / 4.0)));
        }
    }
    v.push(AnalyticTestFunction::Exponential(Complex64::new(0.0, 0.0)));
    v
}
