use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use ptk_cli::manifest::sha256_hex;
use ptk_cli::{emit_report, fixtures_dir, ingest_curves, run_suite, CliError, ReportFormat, Suite, SuiteContext};
use ptk_cli::{CURVES_FILE, EXIT_INPUT, EXIT_OK, EXIT_VIOLATED};
use ptk_core::bounds::{matrix_lemma_report, MatrixLemmaVariant};
use ptk_core::heights::{convert_height, faltings_height_silverman};
use ptk_core::isogeny::{explicit_bound, IsogenyBoundInput, IsogenyCase};
use ptk_core::lattice::{reduce_tau, rho_inverse_squared};
use ptk_core::modular::{delta_tau, j_invariant, DeltaNormalization, QSeriesConfig};
use ptk_core::serre::find_threshold;
use ptk_core::theta::{torus_l2_norm, torus_log_integral};
use ptk_core::{BoundReport, HeightConvention, RiemannTau, SiegelTau};

#[derive(Parser)]
#[command(name = "ptk", version, about = "Period, theta and height toolkit")]
struct Cli {
    /// Tolerance for fundamental-domain and integrality checks.
    #[arg(long, global = true, default_value_t = ptk_core::DEFAULT_TOL)]
    tol: f64,
    /// Quadrature points per torus axis.
    #[arg(long, global = true, default_value_t = 64)]
    quad_points: usize,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct TauArgs {
    #[arg(long, allow_hyphen_values = true)]
    re: f64,
    #[arg(long)]
    im: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a period ratio to the fundamental domain.
    Reduce(TauArgs),
    /// Shortest period norm of the principally polarized elliptic curve.
    Rho(TauArgs),
    /// Discriminant modular form and j at τ.
    Delta {
        #[command(flatten)]
        tau: TauArgs,
        #[arg(long, value_enum, default_value_t = Norm::Ramanujan)]
        normalization: Norm,
    },
    /// Theta function checks.
    #[command(subcommand)]
    Theta(ThetaCommand),
    /// Faltings height of fixture curve records.
    Height {
        /// NDJSON file of curve records (defaults to the bundled fixtures).
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        label: Option<String>,
    },
    /// Closed-form bound evaluators.
    #[command(subcommand)]
    Bound(BoundCommand),
    /// Surjectivity threshold for the mod p representation.
    #[command(subcommand)]
    Serre(SerreCommand),
    /// Run verification suites.
    Verify {
        /// all, lattice, modular, theta, heights, bounds, interpolation, isogeny or serre.
        #[arg(long, default_value = "all")]
        suite: String,
        /// NDJSON file of curve records (defaults to the bundled fixtures).
        #[arg(long)]
        records: Option<PathBuf>,
        /// Write the canonical JSON manifest here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// text or json, printed to stdout.
        #[arg(long, default_value = "text")]
        format: String,
        /// Leave the wall time out of the manifest.
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Subcommand)]
enum ThetaCommand {
    /// L² norm and log integral of the normalized theta function.
    Check(TauArgs),
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Mean ρ⁻² against the matrix-lemma bound.
    MatrixLemma {
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        deg: f64,
        #[arg(long, default_value_t = 1)]
        g: u32,
        #[arg(long, value_enum, default_value_t = Variant::Eleven)]
        variant: Variant,
    },
    /// Explicit isogeny-degree bound.
    Isogeny {
        #[arg(long, value_enum)]
        case: Case,
        /// Degree of the number field.
        #[arg(long, default_value_t = 1)]
        degree: u64,
        #[arg(long, allow_hyphen_values = true)]
        h_f: f64,
    },
}

#[derive(Subcommand)]
enum SerreCommand {
    /// Largest prime bound p with f(p) ≥ 1.
    Threshold,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    Ramanujan,
    TwoPi12,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Eleven,
    Fourteen,
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    General,
    Cm,
    Real,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}

fn verdict(reports: &[BoundReport]) -> i32 {
    for r in reports {
        println!(
            "{} {} lhs={:.16e} rhs={:.16e} margin={:.16e}",
            if r.satisfied { "PASS" } else { "FAIL" },
            r.name,
            r.lhs,
            r.rhs,
            r.margin
        );
    }
    if reports.iter().all(|r| r.satisfied) {
        EXIT_OK
    } else {
        EXIT_VIOLATED
    }
}

fn load_records(path: Option<&PathBuf>, tol: f64) -> ptk_cli::Result<(Vec<ptk_core::CurveRecord>, PathBuf)> {
    let path = path.cloned().unwrap_or_else(|| fixtures_dir().join(CURVES_FILE));
    if !path.exists() {
        return Err(CliError::MissingFixtures(path.display().to_string()));
    }
    let ing = ingest_curves(&path, tol)?;
    for w in &ing.warnings {
        eprintln!("warning: {w}");
    }
    if !ing.errors.is_empty() {
        for e in &ing.errors {
            eprintln!("error: {}: {e}", path.display());
        }
        return Err(CliError::Input(format!("{} invalid record(s)", ing.errors.len())));
    }
    Ok((ing.records, path))
}

fn run(cli: &Cli) -> ptk_cli::Result<i32> {
    let tau_of = |t: &TauArgs| -> ptk_cli::Result<SiegelTau> { Ok(reduce_tau(Complex64::new(t.re, t.im))?.0) };
    match &cli.command {
        Command::Reduce(t) => {
            let (tau, m) = reduce_tau(Complex64::new(t.re, t.im))?;
            let [a, b, c, d] = m.entries();
            println!("tau = {:.17} + {:.17}i", tau.re(), tau.im());
            println!("map = [[{a}, {b}], [{c}, {d}]]");
        }
        Command::Rho(t) => {
            let tau = tau_of(t)?;
            let inv = rho_inverse_squared(tau);
            println!("rho = {:.17}", inv.powf(-0.5));
            println!("rho^-2 = {inv:.17}");
        }
        Command::Delta { tau, normalization } => {
            let tau = tau_of(tau)?;
            let n = match normalization {
                Norm::Ramanujan => DeltaNormalization::Ramanujan,
                Norm::TwoPi12 => DeltaNormalization::TwoPi12,
            };
            let cfg = QSeriesConfig::fundamental_domain();
            let d = delta_tau(tau, &cfg, n)?;
            let j = j_invariant(tau, &cfg)?;
            println!("delta = {:.17e} + {:.17e}i (tail <= {:.3e})", d.value.re, d.value.im, d.tail_bound);
            println!("j = {:.17e} + {:.17e}i (tail <= {:.3e})", j.value.re, j.value.im, j.tail_bound);
        }
        Command::Theta(ThetaCommand::Check(t)) => {
            let tau = RiemannTau::elliptic(tau_of(t)?.to_complex())?;
            let n = cli.quad_points + cli.quad_points % 2;
            let l2 = torus_l2_norm(&tau, n)?;
            println!("l2_norm = {l2:.17}");
            println!("log_integral = {:.17}", torus_log_integral(&tau, n)?);
            return Ok(verdict(&[BoundReport::new("l2_norm", (l2 - 1.0).abs(), 1e-6)]));
        }
        Command::Height { records, label } => {
            let (recs, _) = load_records(records.as_ref(), cli.tol)?;
            let mut found = false;
            for r in recs.iter().filter(|r| label.as_ref().is_none_or(|l| &r.label == l)) {
                found = true;
                let hf = faltings_height_silverman(r)?;
                let h = convert_height(hf, HeightConvention::Normalized, 1);
                let hc = convert_height(hf, HeightConvention::Colmez, 1);
                println!("{} h_F={:.17} h={:.17} h_Colmez={:.17}", r.label, hf.value, h.value, hc.value);
            }
            if !found {
                return Err(CliError::Input("no matching record".into()));
            }
        }
        Command::Bound(BoundCommand::MatrixLemma { t, h, deg, g, variant }) => {
            let v = match variant {
                Variant::Eleven => MatrixLemmaVariant::Eleven,
                Variant::Fourteen => MatrixLemmaVariant::Fourteen,
            };
            return Ok(verdict(&[matrix_lemma_report(*t, *h, *deg, *g, v)?]));
        }
        Command::Bound(BoundCommand::Isogeny { case, degree, h_f }) => {
            let c = match case {
                Case::General => IsogenyCase::General,
                Case::Cm => IsogenyCase::Cm,
                Case::Real => IsogenyCase::RealPlaceNonCm,
            };
            let b = explicit_bound(&IsogenyBoundInput::new(*degree, *h_f, c)?);
            println!("bound = {:.17e}", b.bound);
            if let Some(s) = b.simplified {
                println!("simplified = {s:.17e}");
            }
        }
        Command::Serre(SerreCommand::Threshold) => {
            let t = find_threshold()?;
            println!("p_star = {}", t.p_star);
            println!("f(p_star) = {:.17}", t.f_at_p_star);
            println!("f(p_star + 1) = {:.17}", t.f_at_p_star_plus_1);
        }
        Command::Verify { suite, records, json, format, no_timing } => {
            let suite: Suite = suite.parse()?;
            let format: ReportFormat = format.parse()?;
            let mut ctx = SuiteContext::new(Vec::new());
            if suite.needs_records() || records.is_some() {
                let (recs, path) = load_records(records.as_ref(), cli.tol)?;
                let bytes = std::fs::read(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                ctx.input_digests.insert(name, sha256_hex(&bytes));
                ctx.records = recs;
            }
            ctx.tol = cli.tol;
            ctx.quad_points = cli.quad_points;
            ctx.seed = cli.seed;
            ctx.timing = !no_timing;
            let m = run_suite(suite, &ctx)?;
            if let Some(p) = json {
                emit_report(&m, ReportFormat::Json, Some(p))?;
            }
            emit_report(&m, format, None)?;
            return Ok(if m.all_satisfied() { EXIT_OK } else { EXIT_VIOLATED });
        }
    }
    Ok(EXIT_OK)
}
