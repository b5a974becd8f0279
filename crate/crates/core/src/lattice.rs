//! Complex lattices of rank 2 and 4: Siegel reduction of elliptic period
//! ratios, shortest vectors and avoidance minima of polarized tori.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::smith::smith_normal_form;
use crate::DEFAULT_TOL;

/// Slack used by the reduction loop when comparing against the boundary.
const REDUCE_EPS: f64 = 1e-13;
const MAX_REDUCTION_STEPS: usize = 100_000;
/// Largest number of box points visited by a single enumeration.
const MAX_BOX_POINTS: u64 = 60_000_000;
/// Half-width of the search box used to detect lattice vectors in a subspace.
const KERNEL_SEARCH_BOX: i64 = 12;

/// A period ratio in the Siegel fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiegelTau {
    re: f64,
    im: f64,
}

impl SiegelTau {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::with_tol(re, im, DEFAULT_TOL)
    }

    pub fn with_tol(re: f64, im: f64, tol: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) {
            return domain("non-finite period ratio");
        }
        let ok = re.abs() <= 0.5 + tol
            && im >= 3f64.sqrt() / 2.0 - tol
            && re * re + im * im >= 1.0 - tol;
        if !ok {
            return domain(format!("tau = {re} + {im}i is outside the fundamental domain"));
        }
        Ok(Self { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn i() -> Self {
        Self { re: 0.0, im: 1.0 }
    }

    /// e^{iπ/3}, the corner of the domain where j vanishes.
    pub fn rho() -> Self {
        Self { re: 0.5, im: 3f64.sqrt() / 2.0 }
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// An element (a b; c d) of SL2(Z), acting by τ ↦ (aτ + b)/(cτ + d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnimodularMap {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl UnimodularMap {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = i128::from(a) * i128::from(d) - i128::from(b) * i128::from(c);
        if det != 1 {
            return domain(format!("determinant {det} != 1"));
        }
        Ok(Self { a, b, c, d })
    }

    pub const fn identity() -> Self {
        Self { a: 1, b: 0, c: 0, d: 1 }
    }

    /// τ ↦ −1/τ
    pub const fn s() -> Self {
        Self { a: 0, b: -1, c: 1, d: 0 }
    }

    /// τ ↦ τ + n
    pub const fn t(n: i64) -> Self {
        Self { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Matrix product `self * rhs`, i.e. apply `rhs` first.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        let m = |x: i64, y: i64, z: i64, w: i64| -> Result<i64> {
            x.checked_mul(y)
                .zip(z.checked_mul(w))
                .and_then(|(p, q)| p.checked_add(q))
                .ok_or_else(|| Error::Domain("SL2(Z) entries overflow".into()))
        };
        Ok(Self {
            a: m(self.a, rhs.a, self.b, rhs.c)?,
            b: m(self.a, rhs.b, self.b, rhs.d)?,
            c: m(self.c, rhs.a, self.d, rhs.c)?,
            d: m(self.c, rhs.b, self.d, rhs.d)?,
        })
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn apply(&self, tau: Complex64) -> Complex64 {
        let num = tau * self.a as f64 + self.b as f64;
        let den = tau * self.c as f64 + self.d as f64;
        num / den
    }
}

/// An oriented basis (ω1, ω2) of a rank-2 lattice in C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticLattice {
    omega1: Complex64,
    omega2: Complex64,
}

impl EllipticLattice {
    pub fn new(omega1: Complex64, omega2: Complex64) -> Result<Self> {
        if omega1.norm() == 0.0 || !omega1.is_finite() || !omega2.is_finite() {
            return domain("lattice basis must be finite with omega1 != 0");
        }
        let ratio = omega2 / omega1;
        if ratio.im <= REDUCE_EPS * ratio.norm().max(1.0) {
            return domain("basis is degenerate or negatively oriented");
        }
        Ok(Self { omega1, omega2 })
    }

    pub fn omega1(&self) -> Complex64 {
        self.omega1
    }

    pub fn omega2(&self) -> Complex64 {
        self.omega2
    }

    pub fn ratio(&self) -> Complex64 {
        self.omega2 / self.omega1
    }
}

/// Reduce a period ratio in the upper half plane to the fundamental domain.
///
/// Returns the reduced ratio and the map sending the input to it. On the
/// boundary, Re τ = 1/2 is preferred over −1/2 and on |τ| = 1 the point with
/// Re τ ≥ 0 is chosen.
pub fn reduce_tau(tau0: Complex64) -> Result<(SiegelTau, UnimodularMap)> {
    if !tau0.is_finite() || tau0.im <= 0.0 {
        return domain("period ratio must lie in the upper half plane");
    }
    let mut tau = tau0;
    let mut map = UnimodularMap::identity();
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > MAX_REDUCTION_STEPS {
            return Err(Error::Internal("reduction did not terminate".into()));
        }
        let n = (tau.re + 0.5).floor();
        if n != 0.0 {
            tau -= n;
            map = UnimodularMap::t(-(n as i64)).compose(&map)?;
        }
        if tau.norm_sqr() < 1.0 - REDUCE_EPS {
            tau = -tau.inv();
            map = UnimodularMap::s().compose(&map)?;
        } else {
            break;
        }
    }
    if (tau.re + 0.5).abs() <= REDUCE_EPS {
        tau += 1.0;
        map = UnimodularMap::t(1).compose(&map)?;
    }
    if (tau.norm_sqr() - 1.0).abs() <= REDUCE_EPS && tau.re < 0.0 {
        tau = -tau.inv();
        map = UnimodularMap::s().compose(&map)?;
    }
    let reduced = SiegelTau::with_tol(tau.re, tau.im, 1e-12)?;
    Ok((reduced, map))
}

pub fn siegel_reduce(lat: &EllipticLattice) -> Result<(SiegelTau, UnimodularMap)> {
    reduce_tau(lat.ratio())
}

/// 1/ρ² for the principal polarization of C/(Z + τZ).
pub fn rho_inverse_squared(tau: SiegelTau) -> f64 {
    tau.im
}

/// Hermitian form z* H w.
pub fn hermitian(h: &DMatrix<Complex64>, z: &DVector<Complex64>, w: &DVector<Complex64>) -> Complex64 {
    z.dotc(&(h * w))
}

/// A complex torus C^g/Ω with a Riemann form H, for g ∈ {1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedTorus {
    periods: DMatrix<Complex64>,
    riemann_form: DMatrix<Complex64>,
}

impl PolarizedTorus {
    pub fn new(periods: DMatrix<Complex64>, riemann_form: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tol(periods, riemann_form, DEFAULT_TOL)
    }

    pub fn with_tol(
        periods: DMatrix<Complex64>,
        riemann_form: DMatrix<Complex64>,
        tol: f64,
    ) -> Result<Self> {
        let g = periods.nrows();
        if !(1..=2).contains(&g) || periods.ncols() != 2 * g {
            return domain("period matrix must be g x 2g with g in {1, 2}");
        }
        if riemann_form.shape() != (g, g) {
            return domain("Riemann form must be g x g");
        }
        let scale = riemann_form.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if (&riemann_form - riemann_form.adjoint()).iter().any(|z| z.norm() > tol * scale.max(1.0)) {
            return domain("Riemann form is not Hermitian");
        }
        if riemann_form.clone().cholesky().is_none() {
            return domain("Riemann form is not positive definite");
        }
        let torus = Self { periods, riemann_form };
        for i in 0..2 * g {
            for j in 0..2 * g {
                let e = torus.form(i, j).im;
                if (e - e.round()).abs() > tol * e.abs().max(1.0) {
                    return domain(format!("Im H on basis pair ({i}, {j}) is {e}, not integral"));
                }
            }
        }
        let eig = SymmetricEigen::new(torus.gram()).eigenvalues;
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0f64), |(l, h), &x| (l.min(x), h.max(x)));
        if !(lo > tol * hi) {
            return domain("period lattice does not have full real rank");
        }
        Ok(torus)
    }

    /// C/(Z + τZ) with H = 1/Im τ.
    pub fn elliptic(tau: Complex64) -> Result<Self> {
        if tau.im <= 0.0 {
            return domain("period ratio must lie in the upper half plane");
        }
        let periods = DMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, 0.0), tau]);
        let h = DMatrix::from_element(1, 1, Complex64::new(1.0 / tau.im, 0.0));
        Self::new(periods, h)
    }

    /// Product torus with the product polarization.
    pub fn product(a: &Self, b: &Self) -> Result<Self> {
        if a.g() != 1 || b.g() != 1 {
            return domain("products are supported for two one-dimensional tori");
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut periods = DMatrix::from_element(2, 4, zero);
        let mut h = DMatrix::from_element(2, 2, zero);
        for j in 0..2 {
            periods[(0, j)] = a.periods[(0, j)];
            periods[(1, j + 2)] = b.periods[(0, j)];
        }
        h[(0, 0)] = a.riemann_form[(0, 0)];
        h[(1, 1)] = b.riemann_form[(0, 0)];
        Self::new(periods, h)
    }

    /// Same lattice with H replaced by N·H.
    pub fn scaled(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return domain("polarization scale must be positive");
        }
        Self::new(self.periods.clone(), self.riemann_form.scale(f64::from(n)))
    }

    pub fn g(&self) -> usize {
        self.periods.nrows()
    }

    pub fn periods(&self) -> &DMatrix<Complex64> {
        &self.periods
    }

    pub fn riemann_form(&self) -> &DMatrix<Complex64> {
        &self.riemann_form
    }

    pub fn period(&self, i: usize) -> DVector<Complex64> {
        self.periods.column(i).into_owned()
    }

    fn form(&self, i: usize, j: usize) -> Complex64 {
        hermitian(&self.riemann_form, &self.period(i), &self.period(j))
    }

    /// Real Gram matrix Re H(ω_i, ω_j) on the lattice basis.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = 2 * self.g();
        DMatrix::from_fn(n, n, |i, j| self.form(i, j).re)
    }

    pub fn vector(&self, coeffs: &[i64]) -> DVector<Complex64> {
        let c = DVector::from_iterator(coeffs.len(), coeffs.iter().map(|&x| Complex64::new(x as f64, 0.0)));
        &self.periods * c
    }

    pub fn norm(&self, z: &DVector<Complex64>) -> f64 {
        hermitian(&self.riemann_form, z, z).re.max(0.0).sqrt()
    }
}

/// An integer combination of the lattice basis together with its H-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeVector {
    pub coeffs: Vec<i64>,
    pub norm: f64,
}

/// A complex subspace of C^g of dimension 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_g: usize,
    basis: Vec<DVector<Complex64>>,
}

impl Subspace {
    pub fn zero(ambient_g: usize) -> Self {
        Self { ambient_g, basis: Vec::new() }
    }

    pub fn line(v: DVector<Complex64>) -> Result<Self> {
        if !(1..=2).contains(&v.len()) {
            return domain("ambient dimension must be 1 or 2");
        }
        if v.norm() == 0.0 || v.iter().any(|z| !z.is_finite()) {
            return domain("subspace generator must be a finite nonzero vector");
        }
        Ok(Self { ambient_g: v.len(), basis: vec![v] })
    }

    /// The line spanned by (a, b) in C².
    pub fn line2(a: Complex64, b: Complex64) -> Result<Self> {
        Self::line(DVector::from_vec(vec![a, b]))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_g(&self) -> usize {
        self.ambient_g
    }

    pub fn basis(&self) -> &[DVector<Complex64>] {
        &self.basis
    }

    pub fn conjugate(&self) -> Self {
        Self {
            ambient_g: self.ambient_g,
            basis: self.basis.iter().map(|v| v.map(|z| z.conj())).collect(),
        }
    }
}

pub fn conjugate_torus(torus: &PolarizedTorus) -> PolarizedTorus {
    PolarizedTorus {
        periods: torus.periods.map(|z| z.conj()),
        riemann_form: torus.riemann_form.map(|z| z.conj()),
    }
}

/// Per-coordinate half-width ⌈R/√λ_min⌉ of a box containing every integer
/// vector n with nᵀGn ≤ R², where R² is the smallest diagonal entry of G.
///
/// Since |n|² λ_min ≤ nᵀGn, the box is complete; the basis vector realizing
/// the smallest diagonal entry shows the minimum is at most R².
pub fn certified_box(gram: &DMatrix<f64>) -> Result<i64> {
    let lambda_min = SymmetricEigen::new(gram.clone()).eigenvalues.min();
    if !(lambda_min > 0.0) {
        return domain("Gram matrix is not positive definite");
    }
    let r2 = (0..gram.nrows()).map(|i| gram[(i, i)]).fold(f64::INFINITY, f64::min);
    let k = ((r2 / lambda_min).sqrt() * (1.0 + 1e-12)).ceil();
    Ok(k.max(1.0) as i64)
}

fn canonical_sign(n: &[i64]) -> bool {
    n.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Prefer smaller L1 norm, then vectors supported on earlier basis elements.
fn tie_key(n: &[i64]) -> (i64, Vec<i64>) {
    (n.iter().map(|x| x.abs()).sum(), n.iter().map(|x| -x.abs()).collect())
}

/// Minimum of nᵀGn over nonzero n in the box [−k, k]^dim, with deterministic
/// tie-breaking. Returns the coefficient vector and the squared norm.
pub fn box_minimum(gram: &DMatrix<f64>, k: i64) -> Result<(Vec<i64>, f64)> {
    let dim = gram.nrows();
    let side = (2 * k + 1) as u64;
    if side.checked_pow(dim as u32).is_none_or(|p| p > MAX_BOX_POINTS) {
        return domain(format!("enumeration box of half-width {k} in dimension {dim} is too large"));
    }
    let mut n = vec![-k; dim];
    let mut best: Option<(Vec<i64>, f64)> = None;
    loop {
        if canonical_sign(&n) {
            let mut q = 0.0;
            for i in 0..dim {
                let row: f64 = (0..dim).map(|j| gram[(i, j)] * n[j] as f64).sum();
                q += n[i] as f64 * row;
            }
            let better = match &best {
                None => true,
                Some((bn, bq)) => {
                    let eps = 1e-12 * bq.abs();
                    q < bq - eps || ((q - bq).abs() <= eps && tie_key(&n) < tie_key(bn))
                }
            };
            if better {
                best = Some((n.clone(), q));
            }
        }
        let mut i = 0;
        loop {
            if i == dim {
                return best.ok_or_else(|| Error::Internal("empty enumeration".into()));
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

/// Certified minimum of a positive definite integral quadratic form.
pub fn gram_minimum(gram: &DMatrix<f64>) -> Result<(Vec<i64>, f64)> {
    box_minimum(gram, certified_box(gram)?)
}

pub fn shortest_vector(torus: &PolarizedTorus) -> Result<LatticeVector> {
    let (coeffs, q) = gram_minimum(&torus.gram())?;
    Ok(LatticeVector { coeffs, norm: q.sqrt() })
}

/// Integer data attached to a line B ⊂ C² meeting the lattice in rank 2.
struct LineSplitting {
    /// Coordinate of each basis period along the H-orthogonal complement of B.
    transverse: Vec<Complex64>,
    /// Unimodular change of basis whose first two rows span Ω ∩ t_B.
    basis: Vec<Vec<i64>>,
}

fn line_splitting(torus: &PolarizedTorus, sub: &Subspace, tol: f64) -> Result<LineSplitting> {
    let h = torus.riemann_form();
    let v = &sub.basis()[0];
    let e = if v[0].norm() >= v[1].norm() {
        DVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    } else {
        DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
    };
    let mut u = &e - v * (hermitian(h, v, &e) / hermitian(h, v, v));
    let un = hermitian(h, &u, &u).re.sqrt();
    u /= Complex64::new(un, 0.0);
    let transverse: Vec<Complex64> = (0..4).map(|i| hermitian(h, &u, &torus.period(i))).collect();
    let scale: f64 = transverse.iter().map(|c| c.norm()).fold(0.0, f64::max);

    let k = KERNEL_SEARCH_BOX;
    let mut found: Vec<Vec<i64>> = Vec::new();
    let mut n = [-k; 4];
    'outer: loop {
        if canonical_sign(&n) {
            let s: Complex64 = n.iter().zip(&transverse).map(|(&a, c)| c * a as f64).sum();
            let l1: i64 = n.iter().map(|x| x.abs()).sum();
            if s.norm() <= tol * scale * l1 as f64 {
                found.push(n.to_vec());
            }
        }
        for x in n.iter_mut() {
            *x += 1;
            if *x <= k {
                continue 'outer;
            }
            *x = -k;
        }
        break;
    }
    found.sort_by_key(|n| tie_key(n));
    let mut gens: Vec<Vec<i64>> = Vec::new();
    for cand in &found {
        let mut trial = gens.clone();
        trial.push(cand.clone());
        if integer_rank(&trial)? == trial.len() {
            gens = trial;
        }
    }
    if gens.len() != 2 {
        return domain("subspace does not meet the lattice in a rank-2 sublattice");
    }
    let sf = smith_normal_form(&gens)?;
    Ok(LineSplitting { transverse, basis: sf.v_inv })
}

fn integer_rank(rows: &[Vec<i64>]) -> Result<usize> {
    let sf = smith_normal_form(rows)?;
    Ok(sf.invariants().iter().filter(|&&d| d != 0).count())
}

fn validate_subspace(torus: &PolarizedTorus, sub: &Subspace) -> Result<()> {
    if sub.ambient_g() != torus.g() {
        return domain("subspace and torus have different dimensions");
    }
    if sub.dim() >= torus.g() {
        return domain("avoidance minimum is undefined for the whole space");
    }
    Ok(())
}

/// Smallest positive H-distance from a period outside t_B to t_B.
pub fn avoidance_minimum(torus: &PolarizedTorus, sub: &Subspace) -> Result<f64> {
    avoidance_minimum_with_tol(torus, sub, DEFAULT_TOL)
}

pub fn avoidance_minimum_with_tol(torus: &PolarizedTorus, sub: &Subspace, tol: f64) -> Result<f64> {
    validate_subspace(torus, sub)?;
    if sub.dim() == 0 {
        return Ok(shortest_vector(torus)?.norm);
    }
    let split = line_splitting(torus, sub, tol)?;
    let gamma: Vec<Complex64> = split.basis[2..]
        .iter()
        .map(|row| row.iter().zip(&split.transverse).map(|(&a, c)| c * a as f64).sum())
        .collect();
    let q = DMatrix::from_fn(2, 2, |a, b| (gamma[a].conj() * gamma[b]).re);
    Ok(gram_minimum(&q)?.1.sqrt())
}

/// ρ(C, L) for the subtorus with tangent space `sub`: the shortest nonzero
/// period lying in `sub`.
pub fn sublattice_minimum(torus: &PolarizedTorus, sub: &Subspace) -> Result<f64> {
    validate_subspace(torus, sub)?;
    if sub.dim() == 0 {
        return domain("the zero subspace contains no nonzero period");
    }
    let split = line_splitting(torus, sub, DEFAULT_TOL)?;
    let vecs: Vec<DVector<Complex64>> = split.basis[..2].iter().map(|r| torus.vector(r)).collect();
    let h = torus.riemann_form();
    let q = DMatrix::from_fn(2, 2, |a, b| hermitian(h, &vecs[a], &vecs[b]).re);
    Ok(gram_minimum(&q)?.1.sqrt())
}

/// Degree of the polarization restricted to the subtorus with tangent space
/// `sub`, i.e. |Im H| on a basis of Ω ∩ t_B.
pub fn sublattice_degree(torus: &PolarizedTorus, sub: &Subspace) -> Result<f64> {
    validate_subspace(torus, sub)?;
    if sub.dim() == 0 {
        return domain("the zero subspace has no degree");
    }
    let split = line_splitting(torus, sub, DEFAULT_TOL)?;
    let a = torus.vector(&split.basis[0]);
    let b = torus.vector(&split.basis[1]);
    Ok(hermitian(torus.riemann_form(), &a, &b).im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent reduction: maximize Im(γτ) over coprime bottom rows, then
    /// translate and apply the boundary conventions.
    fn oracle_reduce(tau: Complex64) -> Complex64 {
        let mut best = tau;
        let bound = 60i64;
        for cc in 0..=bound {
            for dd in -bound..=bound {
                if num_integer::gcd(cc, dd) != 1 {
                    continue;
                }
                let den = (tau * cc as f64 + dd as f64).norm_sqr();
                let y = tau.im / den;
                if y > best.im * (1.0 + 1e-14) {
                    // any (a, b) completing the row gives the same orbit point up to translation
                    let (g, a, b) = ext_gcd(dd, -cc);
                    debug_assert_eq!(g.abs(), 1);
                    let m = UnimodularMap::new(a * g, b * g, cc, dd).unwrap();
                    best = m.apply(tau);
                }
            }
        }
        let mut z = best - (best.re + 0.5).floor();
        if (z.re + 0.5).abs() < 1e-12 {
            z += 1.0;
        }
        if (z.norm_sqr() - 1.0).abs() < 1e-12 && z.re < 0.0 {
            z = -z.inv();
        }
        z
    }

    fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
        if b == 0 {
            (a, 1, 0)
        } else {
            let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
            (g, y, x - (a.div_euclid(b)) * y)
        }
    }

    fn random_reduced(rng: &mut ChaCha8Rng) -> SiegelTau {
        loop {
            let re = rng.gen_range(-0.5..0.5);
            let im = rng.gen_range(0.8..4.0);
            if let Ok(t) = SiegelTau::new(re, im) {
                if re * re + im * im > 1.0 + 1e-6 {
                    return t;
                }
            }
        }
    }

    fn random_map(rng: &mut ChaCha8Rng, steps: usize) -> UnimodularMap {
        let mut m = UnimodularMap::identity();
        for _ in 0..steps {
            let g = if rng.gen_bool(0.5) { UnimodularMap::s() } else { UnimodularMap::t(rng.gen_range(-3..=3)) };
            m = g.compose(&m).unwrap();
        }
        m
    }

    #[test]
    fn reduce_examples() {
        let (t, m) = siegel_reduce(&EllipticLattice::new(c(1.0, 0.0), c(0.0, 1.0)).unwrap()).unwrap();
        assert_eq!((t.re(), t.im()), (0.0, 1.0));
        assert!(m.is_identity());

        let (t, _) = siegel_reduce(&EllipticLattice::new(c(1.0, 0.0), c(0.5, 0.5)).unwrap()).unwrap();
        assert!((t.to_complex() - c(0.0, 1.0)).norm() < 1e-14);

        let tau0 = c(5.3, 0.2);
        let (t, m) = reduce_tau(tau0).unwrap();
        assert!((t.to_complex() - oracle_reduce(tau0)).norm() < 1e-12);
        assert!((m.apply(tau0) - t.to_complex()).norm() < 1e-12);
    }

    #[test]
    fn boundary_tie_breaks() {
        let (t, _) = reduce_tau(c(-0.5, 1.2)).unwrap();
        assert_eq!(t.re(), 0.5);
        let z = c(-0.28, 0.96);
        let (t, _) = reduce_tau(z).unwrap();
        assert!(t.re() >= 0.0 && (t.to_complex().norm() - 1.0).abs() < 1e-12);
        let (t, _) = reduce_tau(c(-0.5, 3f64.sqrt() / 2.0)).unwrap();
        assert!((t.re() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(EllipticLattice::new(c(1.0, 0.0), c(2.0, 0.0)).is_err());
        assert!(EllipticLattice::new(c(0.0, 0.0), c(0.0, 1.0)).is_err());
        assert!(reduce_tau(c(0.3, -1.0)).is_err());
        assert!(SiegelTau::new(0.7, 1.0).is_err());
        assert!(SiegelTau::new(0.0, 0.9).is_err());
    }

    #[test]
    fn matches_orbit_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..2.0));
            let (t, m) = reduce_tau(z).unwrap();
            assert!((t.to_complex() - oracle_reduce(z)).norm() < 1e-9, "{z}");
            assert!((m.apply(z) - t.to_complex()).norm() < 1e-9);
        }
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_inverse_squared(SiegelTau::i()), 1.0);
        assert!((rho_inverse_squared(SiegelTau::rho()) - 3f64.sqrt() / 2.0).abs() < 1e-16);
        let tau = c(0.0, 2.0);
        let sv = shortest_vector(&PolarizedTorus::elliptic(tau).unwrap()).unwrap();
        assert_eq!(sv.coeffs, vec![1, 0]);
        assert!((sv.norm * sv.norm - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rho_matches_small_box_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let t = random_reduced(&mut rng);
            let mut best = f64::INFINITY;
            for a in -20i64..=20 {
                for b in -20i64..=20 {
                    if (a, b) != (0, 0) {
                        best = best.min((t.to_complex() * b as f64 + a as f64).norm_sqr() / t.im());
                    }
                }
            }
            assert!((1.0 / best - rho_inverse_squared(t)).abs() < 1e-12);
            let sv = shortest_vector(&PolarizedTorus::elliptic(t.to_complex()).unwrap()).unwrap();
            assert!((rho_inverse_squared(t) * sv.norm * sv.norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn certified_box_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let e1 = PolarizedTorus::elliptic(random_reduced(&mut rng).to_complex()).unwrap();
            let e2 = PolarizedTorus::elliptic(random_reduced(&mut rng).to_complex()).unwrap();
            let g = PolarizedTorus::product(&e1, &e2).unwrap().gram();
            let k = certified_box(&g).unwrap();
            let (_, q1) = box_minimum(&g, k).unwrap();
            let (_, q2) = box_minimum(&g, 2 * k).unwrap();
            assert_eq!(q1, q2);
        }
    }

    #[test]
    fn product_and_sublattice_minima() {
        let e1 = PolarizedTorus::elliptic(c(0.1, 1.3)).unwrap();
        let e2 = PolarizedTorus::elliptic(c(-0.4, 2.5)).unwrap();
        let p = PolarizedTorus::product(&e1, &e2).unwrap();
        let m = shortest_vector(&p).unwrap().norm;
        let m1 = shortest_vector(&e1).unwrap().norm;
        let m2 = shortest_vector(&e2).unwrap().norm;
        assert!((m - m1.min(m2)).abs() < 1e-14);

        // index-n sublattice Zω1 + Z nω2 with the pulled-back form
        let tau = c(0.2, 1.1);
        let rho_b = shortest_vector(&PolarizedTorus::elliptic(tau).unwrap()).unwrap().norm;
        for n in 1..6 {
            let periods = DMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), tau * n as f64]);
            let h = DMatrix::from_element(1, 1, c(1.0 / tau.im, 0.0));
            let a = PolarizedTorus::new(periods, h).unwrap();
            let rho_a = shortest_vector(&a).unwrap().norm;
            assert!(rho_b <= rho_a + 1e-14 && rho_a <= n as f64 * rho_b + 1e-14);
        }
    }

    #[test]
    fn torus_validation() {
        let periods = DMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 1.0)]);
        let bad = DMatrix::from_element(1, 1, c(0.7, 0.0));
        assert!(PolarizedTorus::new(periods.clone(), bad).is_err());
        let neg = DMatrix::from_element(1, 1, c(-1.0, 0.0));
        assert!(PolarizedTorus::new(periods, neg).is_err());
        let flat = DMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(PolarizedTorus::new(flat, DMatrix::from_element(1, 1, c(1.0, 0.0))).is_err());
    }

    #[test]
    fn avoidance_examples() {
        let e = PolarizedTorus::elliptic(c(0.2, 1.4)).unwrap();
        let rho = shortest_vector(&e).unwrap().norm;
        assert_eq!(avoidance_minimum(&e, &Subspace::zero(1)).unwrap(), rho);
        let ee = PolarizedTorus::product(&e, &e).unwrap();
        let diag = Subspace::line2(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let d = avoidance_minimum(&ee, &diag).unwrap();
        assert!((d - rho / 2f64.sqrt()).abs() < 1e-12);
        for n in [2u32, 3, 5] {
            let dn = avoidance_minimum(&ee.scaled(n).unwrap(), &diag).unwrap();
            assert!((dn - f64::from(n).sqrt() * d).abs() < 1e-12);
        }
        assert!(avoidance_minimum(&e, &Subspace::line(DVector::from_vec(vec![c(1.0, 0.0)])).unwrap()).is_err());
        let irrational = Subspace::line2(c(1.0, 0.0), c(2f64.sqrt(), 0.3)).unwrap();
        assert!(avoidance_minimum(&ee, &irrational).is_err());
    }

    #[test]
    fn conjugation_preserves_minima() {
        let e = PolarizedTorus::elliptic(c(0.0, 1.0)).unwrap();
        let ce = conjugate_torus(&e);
        assert_eq!(shortest_vector(&e).unwrap().norm, shortest_vector(&ce).unwrap().norm);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let t = random_reduced(&mut rng).to_complex();
            let ee = PolarizedTorus::product(&PolarizedTorus::elliptic(t).unwrap(), &PolarizedTorus::elliptic(t).unwrap()).unwrap();
            let diag = Subspace::line2(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
            let a = avoidance_minimum(&ee, &diag).unwrap();
            let b = avoidance_minimum(&conjugate_torus(&ee), &diag.conjugate()).unwrap();
            assert!((a - b).abs() < 1e-12);
            let s1 = shortest_vector(&ee).unwrap().norm;
            let s2 = shortest_vector(&conjugate_torus(&ee)).unwrap().norm;
            assert!((s1 - s2).abs() < 1e-14);
        }
    }

    #[test]
    fn minkowski_and_transverse_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let lines = [(1i64, 0i64), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, 3), (3, -2)];
        for _ in 0..10 {
            let t = random_reduced(&mut rng).to_complex();
            let e = PolarizedTorus::elliptic(t).unwrap();
            let ee = PolarizedTorus::product(&e, &e).unwrap();
            for &(a, b) in &lines {
                let sub = Subspace::line2(c(a as f64, 0.0), c(b as f64, 0.0)).unwrap();
                let deg = (a * a + b * b) as f64;
                assert!((sublattice_degree(&ee, &sub).unwrap() - deg).abs() < 1e-9);
                let d = avoidance_minimum(&ee, &sub).unwrap();
                let x = deg / 2.0;
                assert!(x * d * d <= 2.0 / 3f64.sqrt() + 1e-12);
                for &(a2, b2) in &lines {
                    if a * b2 - a2 * b != 0 {
                        let other = Subspace::line2(c(a2 as f64, 0.0), c(b2 as f64, 0.0)).unwrap();
                        assert!(d <= sublattice_minimum(&ee, &other).unwrap() + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn product_formula_for_avoidance() {
        // δ(E1 × E2, E1 × 0) is the minimum of E2 against {0}, and min(δ(E1, 0), ...) for B = 0
        let e1 = PolarizedTorus::elliptic(c(0.3, 1.2)).unwrap();
        let e2 = PolarizedTorus::elliptic(c(-0.1, 1.9)).unwrap();
        let p = PolarizedTorus::product(&e1, &e2).unwrap();
        let r1 = shortest_vector(&e1).unwrap().norm;
        let r2 = shortest_vector(&e2).unwrap().norm;
        let first_axis = Subspace::line2(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let second_axis = Subspace::line2(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((avoidance_minimum(&p, &first_axis).unwrap() - r2).abs() < 1e-12);
        assert!((avoidance_minimum(&p, &second_axis).unwrap() - r1).abs() < 1e-12);
        assert!((avoidance_minimum(&p, &Subspace::zero(2)).unwrap() - r1.min(r2)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reduction_is_idempotent(re in -0.49f64..0.49, im in 0.87f64..6.0) {
            prop_assume!(re * re + im * im > 1.0 + 1e-9);
            let (t, m) = reduce_tau(c(re, im)).unwrap();
            prop_assert!(m.is_identity());
            prop_assert_eq!((t.re(), t.im()), (re, im));
        }

        #[test]
        fn round_trip_scrambles(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_reduced(&mut rng);
            let m = random_map(&mut rng, 12);
            let (back, _) = reduce_tau(m.apply(t.to_complex())).unwrap();
            prop_assert!((back.to_complex() - t.to_complex()).norm() < 1e-10);
        }

        #[test]
        fn map_determinant_is_one(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_map(&mut rng, 20);
            let [a, b, c, d] = m.entries();
            prop_assert_eq!(a * d - b * c, 1);
            prop_assert!(m.compose(&m.inverse()).unwrap().is_identity());
        }
    }
}
