//! The verification suites, one per library module.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use ptk_core::bounds::{curve_pipeline, prop_ell_solver, structural_constants};
use ptk_core::heights::{faltings_height_silverman, height_inequality_suite, HeightCheck};
use ptk_core::interpolation::{
    hermite_identity_check, lemma52_checks, schwarz_lemma_check, standard_test_family, test_curve, u_sequence,
    InterpolationParams,
};
use ptk_core::isogeny::{
    chain_checkpoints, explicit_bound, implicit_delta_solver, period_norm_identity, IsogenyBoundInput, IsogenyCase,
    H_FLOOR,
};
use ptk_core::lattice::{avoidance_minimum, reduce_tau, shortest_vector};
use ptk_core::modular::{check_classical_bounds, j_invariant, silverman_f_extrema, QSeriesConfig};
use ptk_core::serre::find_threshold;
use ptk_core::theta::{bost_inequality_check, torus_l2_norm};
use ptk_core::{BoundReport, CurveRecord, PolarizedTorus, RiemannTau, SiegelTau, Subspace, UnimodularMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::manifest::{RunManifest, SuiteCheck};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    All,
    Lattice,
    Modular,
    Theta,
    Heights,
    Bounds,
    Interpolation,
    Isogeny,
    Serre,
}

impl Suite {
    pub const MODULES: [Suite; 8] = [
        Suite::Lattice,
        Suite::Modular,
        Suite::Theta,
        Suite::Heights,
        Suite::Bounds,
        Suite::Interpolation,
        Suite::Isogeny,
        Suite::Serre,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Lattice => "lattice",
            Suite::Modular => "modular",
            Suite::Theta => "theta",
            Suite::Heights => "heights",
            Suite::Bounds => "bounds",
            Suite::Interpolation => "interpolation",
            Suite::Isogeny => "isogeny",
            Suite::Serre => "serre",
        }
    }

    pub fn needs_records(self) -> bool {
        matches!(self, Suite::All | Suite::Theta | Suite::Heights | Suite::Bounds)
    }

    fn expand(self) -> Vec<Suite> {
        if self == Suite::All {
            Self::MODULES.to_vec()
        } else {
            vec![self]
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        std::iter::once(Suite::All)
            .chain(Self::MODULES)
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::Input(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteContext {
    pub records: Vec<CurveRecord>,
    pub tol: f64,
    pub quad_points: usize,
    pub seed: u64,
    pub timing: bool,
    pub input_digests: BTreeMap<String, String>,
}

impl SuiteContext {
    pub fn new(records: Vec<CurveRecord>) -> Self {
        Self {
            records,
            tol: ptk_core::DEFAULT_TOL,
            quad_points: 64,
            seed: 0,
            timing: false,
            input_digests: BTreeMap::new(),
        }
    }
}

pub fn run_suite(suite: Suite, ctx: &SuiteContext) -> Result<RunManifest> {
    if suite.needs_records() && ctx.records.is_empty() {
        return Err(CliError::MissingFixtures(format!("suite '{}' needs curve records", suite.name())));
    }
    let start = Instant::now();
    let parts = suite.expand();
    let results: Vec<ptk_core::Result<Vec<BoundReport>>> = parts.par_iter().map(|&s| module_checks(s, ctx)).collect();
    let mut checks = Vec::new();
    for (s, r) in parts.iter().zip(results) {
        checks.extend(r?.into_iter().map(|report| SuiteCheck { suite: s.name().to_string(), report }));
    }
    let mut tolerances = BTreeMap::new();
    tolerances.insert("tol".to_string(), ctx.tol);
    tolerances.insert("quad_points".to_string(), ctx.quad_points as f64);
    tolerances.insert("seed".to_string(), ctx.seed as f64);
    tolerances.insert("report_relative".to_string(), BoundReport::tolerance(0.0));
    Ok(RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        suites: parts.iter().map(|s| s.name().to_string()).collect(),
        tolerances,
        checks,
        wall_time_seconds: ctx.timing.then(|| start.elapsed().as_secs_f64()),
        input_digests: ctx.input_digests.clone(),
    })
}

fn module_checks(suite: Suite, ctx: &SuiteContext) -> ptk_core::Result<Vec<BoundReport>> {
    match suite {
        Suite::All => unreachable!("expanded before dispatch"),
        Suite::Lattice => lattice_checks(ctx),
        Suite::Modular => modular_checks(),
        Suite::Theta => theta_checks(ctx),
        Suite::Heights => height_checks(ctx),
        Suite::Bounds => bounds_checks(ctx),
        Suite::Interpolation => interpolation_checks(),
        Suite::Isogeny => isogeny_checks(),
        Suite::Serre => serre_checks(),
    }
}

/// The report with the smallest margin relative to its tolerance.
pub fn worst(name: impl Into<String>, reports: impl IntoIterator<Item = BoundReport>) -> BoundReport {
    let mut count = 0usize;
    let mut best: Option<BoundReport> = None;
    for r in reports {
        count += 1;
        let key = |x: &BoundReport| if x.satisfied { x.margin / BoundReport::tolerance(x.rhs) } else { f64::NEG_INFINITY };
        if best.as_ref().is_none_or(|b| key(&r) < key(b)) {
            best = Some(r);
        }
    }
    let r = best.expect("nonempty family");
    let mut out = BoundReport::new(name, r.lhs, r.rhs).with_input("cases", count as f64);
    out.inputs.extend(r.inputs);
    out
}

pub fn random_reduced(rng: &mut ChaCha8Rng) -> SiegelTau {
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

pub fn random_map(rng: &mut ChaCha8Rng, steps: usize) -> UnimodularMap {
    let mut m = UnimodularMap::identity();
    for _ in 0..steps {
        let g = if rng.gen_bool(0.5) { UnimodularMap::s() } else { UnimodularMap::t(rng.gen_range(-3..=3)) };
        m = g.compose(&m).expect("small words stay in range");
    }
    m
}

pub const DIAGONAL_SAMPLES: usize = 50;
pub const DIAGONAL_TOL: f64 = 1e-10;
pub const SCRAMBLES: usize = 1000;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const J_TOL: f64 = 1e-9;

fn lattice_checks(ctx: &SuiteContext) -> ptk_core::Result<Vec<BoundReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let diag = Subspace::line2(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))?;
    let mut diagonal = Vec::new();
    let mut rho_y = Vec::new();
    for _ in 0..DIAGONAL_SAMPLES {
        let tau = random_reduced(&mut rng);
        let e = PolarizedTorus::elliptic(tau.to_complex())?;
        let rho = shortest_vector(&e)?.norm;
        let delta = avoidance_minimum(&PolarizedTorus::product(&e, &e)?, &diag)?;
        diagonal.push(
            BoundReport::new("", (delta - rho / 2f64.sqrt()).abs(), DIAGONAL_TOL)
                .with_input("tau_re", tau.re())
                .with_input("tau_im", tau.im()),
        );
        rho_y.push(BoundReport::new("", (rho.powi(-2) - tau.im()).abs(), 1e-12 * tau.im()).with_input("tau_im", tau.im()));
    }
    let mut trips = Vec::new();
    for _ in 0..SCRAMBLES {
        let tau = random_reduced(&mut rng);
        let steps = rng.gen_range(1..=12);
        let m = random_map(&mut rng, steps);
        let (back, _) = reduce_tau(m.apply(tau.to_complex()))?;
        trips.push(
            BoundReport::new("", (back.to_complex() - tau.to_complex()).norm(), ROUND_TRIP_TOL)
                .with_input("tau_re", tau.re())
                .with_input("tau_im", tau.im()),
        );
    }
    Ok(vec![
        worst("diagonal_avoidance", diagonal),
        worst("rho_inverse_squared_is_im_tau", rho_y),
        worst("siegel_round_trip", trips),
    ])
}

fn modular_checks() -> ptk_core::Result<Vec<BoundReport>> {
    let cfg = QSeriesConfig::fundamental_domain();
    let j_i = j_invariant(SiegelTau::i(), &cfg)?.value;
    let j_rho = j_invariant(SiegelTau::rho(), &cfg)?.value;
    let mut out = vec![
        BoundReport::new("j_at_i", (j_i - 1728.0).norm(), J_TOL),
        BoundReport::new("j_at_rho", j_rho.norm(), J_TOL),
    ];
    let mut lower_j = Vec::new();
    let mut lower_delta = Vec::new();
    for a in 0..=20 {
        for b in 0..=20 {
            let x = -0.5 + f64::from(a) / 20.0;
            let y = (1.0 - x * x).sqrt().max(3f64.sqrt() / 2.0) + f64::from(b) * 0.25;
            let (rj, rd) = check_classical_bounds(SiegelTau::with_tol(x, y, 1e-12)?)?;
            lower_j.push(rj);
            lower_delta.push(rd);
        }
    }
    out.push(worst("j_lower_bound_grid", lower_j));
    out.push(worst("delta_lower_bound_grid", lower_delta));
    out.extend(silverman_f_extrema());
    Ok(out)
}

pub const L2_TOL_G1: f64 = 1e-6;
pub const L2_TOL_G2: f64 = 1e-5;
pub const BOST_CONVERGENCE_TOL: f64 = 1e-4;

pub fn l2_norm_checks(quad_points: usize) -> ptk_core::Result<Vec<BoundReport>> {
    let cases: Vec<(&str, RiemannTau, f64)> = vec![
        ("l2_norm[i]", RiemannTau::elliptic(Complex64::new(0.0, 1.0))?, L2_TOL_G1),
        ("l2_norm[2i]", RiemannTau::elliptic(Complex64::new(0.0, 2.0))?, L2_TOL_G1),
        ("l2_norm[0.5+i sqrt3]", RiemannTau::elliptic(Complex64::new(0.5, 3f64.sqrt()))?, L2_TOL_G1),
        (
            "l2_norm[diag(i,2i)]",
            RiemannTau::diagonal(&[Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)])?,
            L2_TOL_G2,
        ),
    ];
    cases
        .into_par_iter()
        .map(|(name, tau, tol)| {
            let n = torus_l2_norm(&tau, quad_points)?;
            Ok(BoundReport::new(name, (n - 1.0).abs(), tol).with_input("norm", n))
        })
        .collect()
}

pub fn bost_checks(records: &[CurveRecord], quad_points: usize) -> ptk_core::Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for r in records {
        let b = bost_inequality_check(r, quad_points)?;
        out.push(
            BoundReport::new(format!("bost_convergence[{}]", r.label), b.integral_change, BOST_CONVERGENCE_TOL)
                .with_input("quadrature_points", quad_points as f64),
        );
        out.push(b.report);
    }
    Ok(out)
}

fn theta_checks(ctx: &SuiteContext) -> ptk_core::Result<Vec<BoundReport>> {
    let mut out = l2_norm_checks(ctx.quad_points)?;
    out.extend(bost_checks(&ctx.records, ctx.quad_points)?);
    Ok(out)
}

fn height_checks(ctx: &SuiteContext) -> ptk_core::Result<Vec<BoundReport>> {
    let mut inputs: Vec<HeightCheck<'_>> = ctx.records.iter().filter(|r| r.j_rational.is_some()).map(HeightCheck::Hetj).collect();
    let by_label = |l: &str| ctx.records.iter().find(|r| r.label == l);
    // 11a1 and 11a3 are linked by an isogeny of degree 5 in each direction
    let mut pair = Vec::new();
    if let (Some(a), Some(b)) = (by_label("11a1"), by_label("11a3")) {
        let ha = faltings_height_silverman(a)?.value;
        let hb = faltings_height_silverman(b)?.value;
        pair.push(HeightCheck::Isogeny { h_source: ha, h_target: hb, degree: 5.0 });
        pair.push(HeightCheck::Isogeny { h_source: hb, h_target: ha, degree: 5.0 });
    }
    inputs.extend(pair);
    let mut out = height_inequality_suite(&inputs)?;
    for (r, rec) in out.iter_mut().zip(ctx.records.iter().filter(|r| r.j_rational.is_some())) {
        r.name = format!("{}[{}]", r.name, rec.label);
    }
    Ok(out)
}

pub const STRUCTURAL_G_MAX: u32 = 500;

fn bounds_checks(ctx: &SuiteContext) -> ptk_core::Result<Vec<BoundReport>> {
    let mut out = structural_constants(STRUCTURAL_G_MAX)?;
    out.extend(prop_ell_solver(1.0).constant_checks);
    for r in &ctx.records {
        out.extend(curve_pipeline(r)?);
    }
    Ok(out)
}

pub const LEMMA52_S_MAX: u32 = 12;
pub const U_S_MAX: u32 = 10_000;

fn interpolation_checks() -> ptk_core::Result<Vec<BoundReport>> {
    let mut out = lemma52_checks(LEMMA52_S_MAX)?;
    out.extend(u_sequence(U_S_MAX)?);
    out.extend(schwarz_checks()?);
    let curve = test_curve(0.05);
    let mut hermite = Vec::new();
    for s in 2..=4 {
        for t in 1..=3 {
            let p = InterpolationParams::with_default_epsilon(s, t)?;
            for (k, f) in standard_test_family().iter().enumerate().step_by(5) {
                hermite.push(hermite_identity_check(f, &p, curve[(k * 37) % curve.len()])?);
            }
        }
    }
    out.push(worst("hermite_identity", hermite));
    Ok(out)
}

/// Both forms of the Schwarz-lemma estimate over the test family, one
/// worst-case report per (S, T) and form.
pub fn schwarz_checks() -> ptk_core::Result<Vec<BoundReport>> {
    let family = standard_test_family();
    let mut out = Vec::new();
    for s in 2..=4u32 {
        for t in 1..=3u32 {
            let p = InterpolationParams::with_default_epsilon(s, t)?;
            let (sharp, simple): (Vec<_>, Vec<_>) = family.par_iter().map(|f| schwarz_lemma_check(f, &p)).unzip();
            out.push(worst(format!("schwarz_sharp[S={s},T={t}]"), sharp));
            out.push(worst(format!("schwarz_simplified[S={s},T={t}]"), simple));
        }
    }
    Ok(out)
}

fn isogeny_checks() -> ptk_core::Result<Vec<BoundReport>> {
    let mut out: Vec<BoundReport> = chain_checkpoints().into_iter().map(|c| c.report).collect();
    let closed = |d, h, case, expect: f64, name: &str| -> ptk_core::Result<BoundReport> {
        let b = explicit_bound(&IsogenyBoundInput::new(d, h, case)?).bound;
        Ok(BoundReport::new(name, (b - expect).abs(), 1e-15 * expect).with_input("bound", b))
    };
    out.push(closed(1, 985.0, IsogenyCase::General, 9.70225e12, "closed_form_general")?);
    out.push(closed(1, 1.0, IsogenyCase::Cm, 3.4e4, "closed_form_cm")?);
    out.push(closed(1, 1.0, IsogenyCase::RealPlaceNonCm, 3583.0, "closed_form_real")?);
    let mut dominance = Vec::new();
    let mut solver = Vec::new();
    for d in 1..=100u64 {
        for k in 0..=20 {
            let h_f = f64::from(k) * 5.0;
            let b = explicit_bound(&IsogenyBoundInput::new(d, h_f, IsogenyCase::General)?);
            dominance.push(
                BoundReport::new("", b.bound, b.simplified.expect("general case"))
                    .with_input("d", d as f64)
                    .with_input("h_f", h_f),
            );
            let h = (h_f + 0.5 * PI.ln()).max(H_FLOOR);
            let x = implicit_delta_solver(2.0 * d as f64, h)?;
            solver.push(BoundReport::new("", x * x, b.bound).with_input("d", d as f64).with_input("h_f", h_f));
        }
    }
    out.push(worst("simplified_form_dominates", dominance));
    out.push(worst("implicit_solver_within_closed_form", solver));
    out.push(period_norm_identity(1, &SiegelTau::i())?);
    Ok(out)
}

pub const SERRE_EXPECTED: u64 = 3_094_027;

fn serre_checks() -> ptk_core::Result<Vec<BoundReport>> {
    let t = find_threshold()?;
    let p = t.p_star as f64;
    Ok(vec![
        BoundReport::new("serre_f_at_p_star", 1.0, t.f_at_p_star).with_input("p_star", p),
        BoundReport::new("serre_f_after_p_star", t.f_at_p_star_plus_1, 1.0).with_input("p_star", p),
        BoundReport::new("serre_p_star_exact", (p - SERRE_EXPECTED as f64).abs(), 0.0).with_input("p_star", p),
        BoundReport::new("serre_p_star_below_3.1e6", p, 3.1e6).with_input("p_star", p),
    ])
}
