//! `weilforge`: build example jets, solve for the flat extended connection, polarize,
//! verify every identity, and estimate the convergence radius.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use weilforge_core::connection::{iota_parity_residuals, sigma_tot_residuals};
use weilforge_core::io::{
    christoffel_from_file, metric_from_file, metric_to_file, polarization_from_file, polarization_to_file,
    report_file, solution_from_file, solution_to_file, Arithmetic,
};
use weilforge_core::polarization::audit_polarization;
use weilforge_core::{
    builtin_example, d2_identity_residual, estimate, flatness_residual, hodge_connection_series,
    holomorphy_residual, kahler_form, kahler_form_reconstruct, levi_civita, linearity_residual, positivity_check,
    solve, solve_polarization, verify_kahlerian, weakly_hodge_audit, ChristoffelJet, ConnectionSolution, Fc,
    JetFile, PayloadKind, PolarizationSolution, Qc, Scalar, WeilError, DEFAULT_TOL,
};

#[derive(Parser)]
#[command(name = "weilforge", version, about = "Flat extended connections and polarizations from Kähler jets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Mode {
    /// Exact rational arithmetic (the default).
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Floating-point arithmetic; the tolerance defaults to $WEILFORGE_TOL or 1e-10.
    #[arg(long, value_name = "TOL", num_args = 0..=1)]
    float: Option<Option<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in metric jet.
    Example {
        /// flat, fubini-study, poincare or product.
        #[arg(long)]
        name: String,
        #[arg(long)]
        dim: u8,
        #[arg(long)]
        order: u32,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        mode: Mode,
    },
    /// Solve for D₂..D_N from a metric or Christoffel jet.
    Solve {
        /// Metric or Christoffel jet file.
        #[arg(long)]
        input: PathBuf,
        /// Truncation order N.
        #[arg(long)]
        order: u32,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Write residuals and norm tables here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        mode: Mode,
    },
    /// Solve for Ω₁..Ω_N from a metric jet and a matching solution.
    Polarize {
        /// Metric jet file; its Kähler form must be parallel for the solution.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        order: u32,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        mode: Mode,
    },
    /// Re-check every identity on stored files; exit 1 names the first failure.
    Verify {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        polarization: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        mode: Mode,
    },
    /// Measure graded norms, check the bounds and estimate the convergence radius.
    EstimateRadius {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        polarization: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        mode: Mode,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<WeilError> for Failure {
    fn from(e: WeilError) -> Self {
        let code = match &e {
            WeilError::NotKahlerian(_) => 3,
            WeilError::FormNotParallel | WeilError::FormNotType11(_) => 4,
            WeilError::InsufficientOrder(_) => 5,
            WeilError::Parse(_) | WeilError::UnknownExample(_) | WeilError::InvalidInput(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_jet(path: &Path) -> CliResult<JetFile> {
    let text = fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    JetFile::from_json(&text).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| fail(2, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_report(path: Option<&Path>, dim: u8, order: u32, report: Value) -> CliResult<()> {
    write_out(path, &report_file(dim, order, report).to_json())
}

fn env_tol() -> CliResult<f64> {
    match std::env::var("WEILFORGE_TOL") {
        Ok(v) => v.trim().parse().map_err(|_| fail(2, format!("WEILFORGE_TOL is not a number: '{v}'"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

/// Resolve the arithmetic: explicit flags win, otherwise follow the input file.
fn resolve(mode: Mode, file: Option<&JetFile>) -> CliResult<(bool, f64)> {
    match mode.float {
        Some(Some(t)) => Ok((false, t)),
        Some(None) => Ok((false, env_tol()?)),
        None if !mode.exact && file.is_some_and(|f| f.arithmetic == Arithmetic::Float) => Ok((false, env_tol()?)),
        None => Ok((true, 0.0)),
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn cmd_example<S: Scalar>(name: &str, dim: u8, order: u32, output: Option<&Path>) -> CliResult<()> {
    let g = builtin_example::<S>(name, dim, order)?;
    write_out(output, &metric_to_file(&g).to_json())
}

fn load_connection_input<S: Scalar>(f: &JetFile, tol: f64) -> CliResult<ChristoffelJet<S>> {
    match f.kind {
        PayloadKind::Metric => Ok(levi_civita(&metric_from_file::<S>(f)?, tol)?),
        PayloadKind::Christoffel => Ok(christoffel_from_file::<S>(f)?),
        other => Err(fail(2, format!("solve needs a metric or christoffel file, got {other:?}").to_lowercase())),
    }
}

fn cmd_solve<S: Scalar>(
    input: &JetFile,
    order: u32,
    tol: f64,
    output: Option<&Path>,
    report: Option<&Path>,
) -> CliResult<()> {
    if input.order < order {
        return Err(fail(5, format!("input jet has order {}, cannot certify order {order}", input.order)));
    }
    let gamma = load_connection_input::<S>(input, tol)?;
    let kahler = verify_kahlerian(&gamma, tol)?;
    if !kahler.pass {
        eprintln!("{}", serde_json::to_string_pretty(&kahler).expect("serializes"));
        return Err(fail(3, format!("input is not Kählerian: {}", kahler.failure.unwrap_or_default())));
    }
    let sol = solve(&gamma, order, tol)?;
    let flat = flatness_residual(&sol)?;
    let lin = linearity_residual(&sol)?;
    let series = hodge_connection_series(&sol)?;
    eprintln!(
        "solved dim {} to order {order}: flatness {:e} (certified), linearity {:e}",
        sol.dim, flat.max_certified, lin
    );
    if let Some(path) = report {
        let diag = json!({
            "kahlerian": to_json(&kahler),
            "stages": to_json(&sol.diagnostics),
            "flatness": to_json(&flat),
            "linearity": lin,
            "hodge_connection_norms": series.norms,
        });
        write_report(Some(path), sol.dim, order, diag)?;
    }
    write_out(output, &solution_to_file(&sol).to_json())
}

fn cmd_polarize<S: Scalar>(
    input: &JetFile,
    solution: &JetFile,
    order: u32,
    tol: f64,
    output: Option<&Path>,
    report: Option<&Path>,
) -> CliResult<()> {
    input.expect_kind(PayloadKind::Metric)?;
    let g = metric_from_file::<S>(input)?;
    let sol = solution_from_file::<S>(solution)?;
    if g.dim != sol.dim {
        return Err(fail(2, format!("metric has dim {}, solution has dim {}", g.dim, sol.dim)));
    }
    if order > sol.order || order > g.order {
        return Err(fail(5, format!("order {order} exceeds the solution ({}) or metric ({}) order", sol.order, g.order)));
    }
    let pol = solve_polarization(&sol, &kahler_form(&g), order, tol)?;
    let hol = holomorphy_residual(&pol)?;
    let positivity = positivity_check(pol.omega(), pol.dim, tol);
    eprintln!("polarized to order {}: holomorphy {:e}, min eigenvalue {}", pol.order, hol.max_certified, positivity.min_eigenvalue);
    if let Some(path) = report {
        let diag = json!({
            "holomorphy": to_json(&hol),
            "audit": to_json(&audit_polarization(&pol, tol)),
            "positivity": to_json(&positivity),
            "diagnostics": to_json(&pol.diagnostics),
        });
        write_report(Some(path), pol.dim, pol.order, diag)?;
    }
    write_out(output, &polarization_to_file(&pol).to_json())
}

/// Run every check; returns the report and the name of the first failing identity.
fn verify_all<S: Scalar>(
    sol: &ConnectionSolution<S>,
    pol: Option<&PolarizationSolution<S>>,
    tol: f64,
) -> CliResult<(Value, Option<String>)> {
    let mut checks: Vec<(&str, bool, Value)> = Vec::new();
    let kahler = verify_kahlerian(&sol.gamma, tol)?;
    checks.push(("kahlerian", kahler.pass, to_json(&kahler)));
    let flat = flatness_residual(sol)?;
    checks.push(("flatness", flat.passes(tol), to_json(&flat)));
    let lin = linearity_residual(sol)?;
    checks.push(("linearity", lin <= tol, json!(lin)));
    let sig = sigma_tot_residuals(sol)?;
    checks.push(("sigma_tot_vanishing", sig.iter().all(|&v| v <= tol), json!(sig)));
    let d2 = d2_identity_residual(sol)?;
    checks.push(("d2_identity", d2 <= tol, json!(d2)));
    let iota = iota_parity_residuals(sol)?;
    checks.push(("iota_parity", iota.iter().all(|&v| v <= tol), json!(iota)));
    let audit = weakly_hodge_audit(sol, tol)?;
    checks.push(("weakly_hodge", audit.passes(), to_json(&audit)));
    if let Some(pol) = pol {
        let hol = holomorphy_residual(pol)?;
        checks.push(("polarization_holomorphy", hol.passes(tol), to_json(&hol)));
        let pa = audit_polarization(pol, tol);
        checks.push(("polarization_shape", pa.passes(tol), to_json(&pa)));
        let (_, kf) = kahler_form_reconstruct(pol)?;
        let kf_ok = kf.h10_residual <= tol && kf.h01_residual <= tol && kf.restriction_matches;
        checks.push(("kahler_form_reconstruction", kf_ok, to_json(&kf)));
        let pos = positivity_check(pol.omega(), pol.dim, tol);
        checks.push(("positivity", pos.positive, to_json(&pos)));
    }
    let first = checks.iter().find(|c| !c.1).map(|c| c.0.to_string());
    let entries: serde_json::Map<String, Value> =
        checks.into_iter().map(|(name, ok, detail)| (name.to_string(), json!({"pass": ok, "detail": detail}))).collect();
    Ok((json!({"pass": first.is_none(), "first_failure": first, "checks": entries}), first))
}

fn cmd_verify<S: Scalar>(sol_file: &JetFile, pol_file: Option<&JetFile>, tol: f64, output: Option<&Path>) -> CliResult<()> {
    let sol = solution_from_file::<S>(sol_file)?;
    let pol = pol_file.map(|f| polarization_from_file::<S>(f, &sol)).transpose()?;
    let (report, first) = verify_all(&sol, pol.as_ref(), tol)?;
    write_report(output, sol.dim, sol.order, report)?;
    match first {
        None => {
            eprintln!("all identities hold");
            Ok(())
        }
        Some(name) => Err(fail(1, format!("verification failed: {name}"))),
    }
}

fn radius_value(r: f64) -> Value {
    if r.is_finite() { json!(r) } else { json!("infinite") }
}

fn cmd_estimate<S: Scalar>(sol_file: &JetFile, pol_file: Option<&JetFile>, tol: f64, output: Option<&Path>) -> CliResult<()> {
    let sol = solution_from_file::<S>(sol_file)?;
    let pol = pol_file.map(|f| polarization_from_file::<S>(f, &sol)).transpose()?;
    let series = hodge_connection_series(&sol)?;
    let rep = estimate(&sol, &series, pol.as_ref(), tol.max(DEFAULT_TOL))?;
    let mut value = to_json(&rep);
    value["estimated_radius"] = radius_value(rep.estimated_radius);
    value["radius_profile"] = Value::Array(rep.radius_profile.iter().map(|&r| radius_value(r)).collect());
    write_report(output, sol.dim, sol.order, value)?;
    let shown = if rep.estimated_radius.is_finite() { format!("{}", rep.estimated_radius) } else { "infinite".into() };
    eprintln!("estimated radius {shown}; theoretical lower bound {}", rep.theoretical_radius);
    if rep.pass {
        Ok(())
    } else {
        Err(fail(1, format!("{} bound violations", rep.bounds.violations.len())))
    }
}

macro_rules! dispatch {
    ($exact:expr, $f:ident($($arg:expr),*)) => {
        if $exact { $f::<Qc>($($arg),*) } else { $f::<Fc>($($arg),*) }
    };
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Example { name, dim, order, output, mode } => {
            let (exact, _) = resolve(mode, None)?;
            dispatch!(exact, cmd_example(&name, dim, order, output.as_deref()))
        }
        Command::Solve { input, order, output, report, mode } => {
            let f = read_jet(&input)?;
            let (exact, tol) = resolve(mode, Some(&f))?;
            dispatch!(exact, cmd_solve(&f, order, tol, output.as_deref(), report.as_deref()))
        }
        Command::Polarize { input, solution, order, output, report, mode } => {
            let f = read_jet(&input)?;
            let s = read_jet(&solution)?;
            let (exact, tol) = resolve(mode, Some(&s))?;
            dispatch!(exact, cmd_polarize(&f, &s, order, tol, output.as_deref(), report.as_deref()))
        }
        Command::Verify { solution, polarization, output, mode } => {
            let s = read_jet(&solution)?;
            let p = polarization.as_deref().map(read_jet).transpose()?;
            let (exact, tol) = resolve(mode, Some(&s))?;
            dispatch!(exact, cmd_verify(&s, p.as_ref(), tol, output.as_deref()))
        }
        Command::EstimateRadius { solution, polarization, output, mode } => {
            let s = read_jet(&solution)?;
            let p = polarization.as_deref().map(read_jet).transpose()?;
            let (exact, tol) = resolve(mode, Some(&s))?;
            dispatch!(exact, cmd_estimate(&s, p.as_ref(), tol, output.as_deref()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
