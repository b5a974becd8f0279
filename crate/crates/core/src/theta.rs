//! The normalized theta function F(τp + q) for g ∈ {1, 2}, its associated
//! theta function ϑ, torus integrals of |F|² and log|F|, and the resulting
//! lower bound for the Faltings height.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bounds::BoundReport;
use crate::error::{domain, Error, Result};
use crate::heights::{convert_height, faltings_height_silverman, CurveRecord, HeightConvention};
use crate::DEFAULT_TOL;

/// Terms of size below e^{−TAIL_EXPONENT} are dropped by the default box.
pub const TAIL_EXPONENT: f64 = 40.0;
pub const MIN_QUADRATURE_POINTS: usize = 16;

/// A g×g symmetric matrix with positive definite imaginary part, g ∈ {1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannTau {
    matrix: DMatrix<Complex64>,
    y_inv: DMatrix<f64>,
    lambda_min: f64,
}

impl RiemannTau {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let g = matrix.nrows();
        if !(1..=2).contains(&g) || matrix.ncols() != g {
            return domain("tau must be a 1x1 or 2x2 matrix");
        }
        if matrix.iter().any(|z| !z.is_finite()) {
            return domain("tau has non-finite entries");
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if (&matrix - matrix.transpose()).iter().any(|z| z.norm() > DEFAULT_TOL * scale) {
            return domain("tau is not symmetric");
        }
        let y = matrix.map(|z| z.im);
        let lambda_min = SymmetricEigen::new(y.clone()).eigenvalues.min();
        if !(lambda_min > 0.0) {
            return domain("Im tau is not positive definite");
        }
        let y_inv = y
            .try_inverse()
            .ok_or_else(|| Error::Domain("Im tau is singular".into()))?;
        Ok(Self { matrix, y_inv, lambda_min })
    }

    pub fn elliptic(tau: Complex64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, tau))
    }

    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        let n = entries.len();
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (i, &t) in entries.iter().enumerate() {
            m[(i, i)] = t;
        }
        Self::new(m)
    }

    pub fn g(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn y(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.im)
    }

    pub fn x(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }

    pub fn y_inv(&self) -> &DMatrix<f64> {
        &self.y_inv
    }

    /// det(2y)^{1/4}
    fn normalization(&self) -> f64 {
        (self.y() * 2.0).determinant().powf(0.25)
    }

    /// Half-width of the summation box: ⌈√(40/(π λ_min(y)))⌉ + 2.
    pub fn default_truncation(&self) -> usize {
        (TAIL_EXPONENT / (PI * self.lambda_min)).sqrt().ceil() as usize + 2
    }

    /// (p, q) ∈ R^g × R^g with z = τp + q.
    pub fn split(&self, z: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.g();
        if z.len() != g {
            return domain("point has the wrong dimension");
        }
        let im: Vec<f64> = z.iter().map(|w| w.im).collect();
        let p: Vec<f64> = (0..g).map(|i| (0..g).map(|j| self.y_inv[(i, j)] * im[j]).sum()).collect();
        let x = self.x();
        let q = (0..g)
            .map(|i| z[i].re - (0..g).map(|j| x[(i, j)] * p[j]).sum::<f64>())
            .collect();
        Ok((p, q))
    }

    pub fn point(&self, p: &[f64], q: &[f64]) -> Vec<Complex64> {
        let g = self.g();
        (0..g)
            .map(|i| (0..g).map(|j| self.matrix[(i, j)] * p[j]).sum::<Complex64>() + q[i])
            .collect()
    }

    fn quad(&self, u: &[f64]) -> Complex64 {
        let g = self.g();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                s += self.matrix[(i, j)] * (u[i] * u[j]);
            }
        }
        s
    }
}

/// A point of (R^g/Z^g)², coordinates in [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl TorusPoint {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() || p.is_empty() || p.len() > 2 {
            return domain("p and q must have the same length 1 or 2");
        }
        if p.iter().chain(&q).any(|x| !(0.0..1.0).contains(x)) {
            return domain("torus coordinates must lie in [0, 1)");
        }
        Ok(Self { p, q })
    }

    pub fn origin(g: usize) -> Self {
        Self { p: vec![0.0; g], q: vec![0.0; g] }
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }
}

/// A value together with a bound on the omitted terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Bound on Σ_{n ∉ [−K, K]^g} e^{−π(n+p)ᵀy(n+p)} for |p_i| ≤ 1/2.
fn gaussian_tail(lambda: f64, k: usize, g: usize) -> f64 {
    let r = k as f64 + 0.5;
    let one_dim_tail = 2.0 * (-PI * lambda * r * r).exp() / (1.0 - (-2.0 * PI * lambda * r).exp());
    let full = 2.0 / (1.0 - (-PI * lambda).exp());
    g as f64 * one_dim_tail * full.powi(g as i32 - 1)
}

fn check_truncation(tau: &RiemannTau, k: usize) -> Result<()> {
    let required = tau.default_truncation();
    if k < required {
        return Err(Error::Truncation { given: k, required });
    }
    Ok(())
}

/// F at z = τp + q for arbitrary real p, q.
pub fn eval_f_pq(tau: &RiemannTau, p: &[f64], q: &[f64], truncation: usize) -> Result<ThetaValue> {
    let g = tau.g();
    if p.len() != g || q.len() != g {
        return domain("point has the wrong dimension");
    }
    check_truncation(tau, truncation)?;
    // shift p into [−1/2, 1/2]: n + p = (n + m) + (p − m)
    let m: Vec<f64> = p.iter().map(|x| x.round()).collect();
    let ps: Vec<f64> = p.iter().zip(&m).map(|(a, b)| a - b).collect();
    let k = truncation as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = vec![-k; g];
    let mut u = vec![0.0; g];
    loop {
        let mut phase = 0.0;
        for i in 0..g {
            u[i] = n[i] as f64 + ps[i];
            phase += n[i] as f64 * q[i];
        }
        let arg = Complex64::i() * PI * tau.quad(&u) + Complex64::i() * (2.0 * PI * phase);
        sum += arg.exp();
        let mut i = 0;
        loop {
            if i == g {
                let shift: f64 = m.iter().zip(q).map(|(a, b)| a * b).sum();
                let norm = tau.normalization();
                let value = sum * norm * Complex64::from_polar(1.0, -2.0 * PI * shift);
                let tail_bound = norm * gaussian_tail(tau.lambda_min, truncation, g);
                return Ok(ThetaValue { value, tail_bound });
            }
            n[i] += 1;
            if n[i] <= k {
                break;
            }
            n[i] = -k;
            i += 1;
        }
    }
}

pub fn eval_f(tau: &RiemannTau, pt: &TorusPoint, truncation: usize) -> Result<ThetaValue> {
    if pt.p.len() != tau.g() {
        return domain("point has the wrong dimension");
    }
    eval_f_pq(tau, &pt.p, &pt.q, truncation)
}

pub fn eval_f_at(tau: &RiemannTau, z: &[Complex64]) -> Result<ThetaValue> {
    let (p, q) = tau.split(z)?;
    eval_f_pq(tau, &p, &q, tau.default_truncation())
}

/// ϑ(z) = F(z)·exp((π/2) zᵀy⁻¹z − iπ pᵀτp).
pub fn theta_at(tau: &RiemannTau, z: &[Complex64]) -> Result<Complex64> {
    let (p, q) = tau.split(z)?;
    let f = eval_f_pq(tau, &p, &q, tau.default_truncation())?.value;
    let g = tau.g();
    let yi = tau.y_inv();
    let mut zyz = Complex64::new(0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            zyz += z[i] * z[j] * yi[(i, j)];
        }
    }
    Ok(f * (zyz * (PI / 2.0) - Complex64::i() * PI * tau.quad(&p)).exp())
}

pub fn theta_from_f(tau: &RiemannTau, pt: &TorusPoint) -> Result<Complex64> {
    theta_at(tau, &tau.point(&pt.p, &pt.q))
}

/// Appell–Humbert data of the principal polarization: H = y⁻¹ and the
/// semicharacter χ(τm + n) = (−1)^{mᵀn}.
#[derive(Debug, Clone, PartialEq)]
pub struct AppellHumbert {
    h: DMatrix<f64>,
}

impl AppellHumbert {
    pub fn principal(tau: &RiemannTau) -> Self {
        Self { h: tau.y_inv().clone() }
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// H(z, w) = z̄ᵀ y⁻¹ w
    pub fn hermitian(&self, z: &[Complex64], w: &[Complex64]) -> Complex64 {
        let g = self.h.nrows();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                s += z[i].conj() * w[j] * self.h[(i, j)];
            }
        }
        s
    }

    pub fn chi(&self, m: &[i64], n: &[i64]) -> f64 {
        let dot: i64 = m.iter().zip(n).map(|(a, b)| a * b).sum();
        if dot.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// χ(ω) exp(πH(ω, z) + (π/2)H(ω, ω)) for ω = τm + n.
    pub fn automorphy_factor(&self, tau: &RiemannTau, m: &[i64], n: &[i64], z: &[Complex64]) -> Complex64 {
        let mf: Vec<f64> = m.iter().map(|&x| x as f64).collect();
        let nf: Vec<f64> = n.iter().map(|&x| x as f64).collect();
        let omega = tau.point(&mf, &nf);
        let e = self.hermitian(&omega, z) * PI + self.hermitian(&omega, &omega) * (PI / 2.0);
        e.exp() * self.chi(m, n)
    }
}

/// Tensor midpoint rule for ∫ φ(|F|²) over (R^g/Z^g)², evaluating the q-sums
/// separably for each p-node.
fn torus_quadrature(tau: &RiemannTau, points: usize, phi: impl Fn(f64) -> f64 + Sync) -> Result<f64> {
    if points < MIN_QUADRATURE_POINTS {
        return domain(format!("quadrature needs at least {MIN_QUADRATURE_POINTS} points per axis"));
    }
    let g = tau.g();
    let nn = points;
    let k = tau.default_truncation() as i64;
    let width = (2 * k + 1) as usize;
    let nodes: Vec<f64> = (0..nn).map(|a| (a as f64 + 0.5) / nn as f64).collect();
    // phase[t][b] = e^{2πi n q_b} with n = t − k
    let phase: Vec<Vec<Complex64>> = (0..width)
        .map(|t| {
            let n = t as f64 - k as f64;
            nodes.iter().map(|&q| Complex64::from_polar(1.0, 2.0 * PI * n * q)).collect()
        })
        .collect();
    let norm = tau.normalization();
    let p_count = nn.pow(g as u32);

    let per_p: Vec<f64> = (0..p_count)
        .into_par_iter()
        .map(|idx| {
            let p: Vec<f64> = (0..g).map(|i| nodes[(idx / nn.pow(i as u32)) % nn]).collect();
            let coeff = |n: &[i64]| -> Complex64 {
                let u: Vec<f64> = n.iter().zip(&p).map(|(&a, b)| a as f64 + b).collect();
                (Complex64::i() * PI * tau.quad(&u)).exp() * norm
            };
            let mut acc = 0.0;
            if g == 1 {
                let c: Vec<Complex64> = (-k..=k).map(|n| coeff(&[n])).collect();
                for b in 0..nn {
                    let f: Complex64 = (0..width).map(|t| c[t] * phase[t][b]).sum();
                    acc += phi(f.norm_sqr());
                }
            } else {
                let c: Vec<Vec<Complex64>> = (-k..=k)
                    .map(|n1| (-k..=k).map(|n2| coeff(&[n1, n2])).collect())
                    .collect();
                // inner[t1][b2] = Σ_{t2} c[t1][t2] e^{2πi n2 q_b2}
                let inner: Vec<Vec<Complex64>> = c
                    .iter()
                    .map(|row| (0..nn).map(|b2| (0..width).map(|t2| row[t2] * phase[t2][b2]).sum()).collect())
                    .collect();
                for b1 in 0..nn {
                    for b2 in 0..nn {
                        let f: Complex64 = (0..width).map(|t1| phase[t1][b1] * inner[t1][b2]).sum();
                        acc += phi(f.norm_sqr());
                    }
                }
            }
            acc
        })
        .collect();
    let total: f64 = per_p.iter().sum();
    Ok(total / (nn as f64).powi(2 * g as i32))
}

/// ∫|F|² over the real torus (R^g/Z^g)²; equal to 1.
pub fn torus_l2_norm(tau: &RiemannTau, quadrature_points_per_axis: usize) -> Result<f64> {
    torus_quadrature(tau, quadrature_points_per_axis, |x| x)
}

/// ∫ log|F| over the real torus. The midpoint nodes (a + 1/2)/N with N even
/// never meet the zeros at p = q = 1/2.
pub fn torus_log_integral(tau: &RiemannTau, quadrature_points_per_axis: usize) -> Result<f64> {
    if !quadrature_points_per_axis.is_multiple_of(2) {
        return domain("log integral needs an even number of quadrature points");
    }
    torus_quadrature(tau, quadrature_points_per_axis, |x| 0.5 * x.ln())
}

/// Outcome of the Bost inequality check for one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BostCheck {
    pub report: BoundReport,
    /// Change of the mean log integral when the resolution is doubled.
    pub integral_change: f64,
}

/// a = −(h + ½ log 2π)/2 against the mean over embeddings of ∫ log|F|.
pub fn bost_inequality_check(record: &CurveRecord, quadrature_points: usize) -> Result<BostCheck> {
    record.validate()?;
    if record.embeddings.is_empty() {
        return Err(Error::MissingData(format!("{}: no embeddings", record.label)));
    }
    let h_f = faltings_height_silverman(record)?;
    let h = convert_height(h_f, HeightConvention::Normalized, 1).value;
    let a = -(h + 0.5 * (2.0 * PI).ln()) / 2.0;
    let mean = |n: usize| -> Result<f64> {
        let mut s = 0.0;
        for t in &record.embeddings {
            s += torus_log_integral(&RiemannTau::elliptic(t.to_complex())?, n)?;
        }
        Ok(s / record.embeddings.len() as f64)
    };
    let m1 = mean(quadrature_points)?;
    let m2 = mean(2 * quadrature_points)?;
    let report = BoundReport::new(format!("bost[{}]", record.label), a, m1)
        .with_input("h", h)
        .with_input("quadrature_points", quadrature_points as f64);
    Ok(BostCheck { report, integral_change: (m2 - m1).abs() })
}
