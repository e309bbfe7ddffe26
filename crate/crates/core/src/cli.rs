//! Command-line front end. Exit codes: 0 success, 1 usage or configuration
//! error, 2 non-convergence, 3 hypothesis failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::certification::{check_positivity, degree_report, DegreeOptions, PositivityCertificate};
use crate::coincidence::{BoundaryCondition, CoincidenceFrame};
use crate::corpus::{self, Family, ProblemSpec};
use crate::error::{invalid, Error, Result};
use crate::nonlinearity::{verify_growth_conditions, GrowthReport, ProbePlan};
use crate::numerics::{Grid, GridFunction, SampledDensity};
use crate::solver::{continuation, solve_inner, HomotopyParams, SolveOptions, SolveReport, Strategy, Sweep};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mixbvp", version, about = "Positive solutions of u'' + f(t,u,u') = 0 under mixed boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve once and write the solution CSV and a report.
    Solve(Flags),
    /// Probe the growth conditions, solve, and certify positivity.
    Verify(Flags),
    /// Degree bookkeeping for the radii --r and --R.
    Degree(Flags),
    /// Continuation in θ ∈ (0, 1].
    SweepTheta(Flags),
    /// Continuation in α ∈ [0, α₀] with forcing profile --v.
    SweepAlpha(Flags),
    /// Solve and export solution (and reference, when known) as CSV only.
    Export(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StrategyFlag {
    Picard,
    Newton,
}

/// Run configuration. Every field is optional; command-line flags override a
/// JSON file given with `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus name (`logistic-bc1`, `mms-bc2`, ...) or inline family
    /// parameters such as `logistic:lambda=2,c=0.5`.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, value_parser = parse_bc)]
    pub bc: Option<BoundaryCondition>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub length: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Forcing profile: `one`, `ramp` (t/T) or `bump` (sin(πt/T)).
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long)]
    pub theta_steps: Option<usize>,
    #[arg(long)]
    pub alpha_steps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyFlag>,
}

#[derive(Debug, Clone, Args)]
struct Flags {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

fn parse_bc(s: &str) -> std::result::Result<BoundaryCondition, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunConfig {
    /// Fields of `over` take precedence.
    pub fn merged(self, over: RunConfig) -> RunConfig {
        RunConfig {
            problem: over.problem.or(self.problem),
            bc: over.bc.or(self.bc),
            length: over.length.or(self.length),
            n: over.n.or(self.n),
            tol: over.tol.or(self.tol),
            r: over.r.or(self.r),
            big_r: over.big_r.or(self.big_r),
            alpha0: over.alpha0.or(self.alpha0),
            v: over.v.or(self.v),
            theta_steps: over.theta_steps.or(self.theta_steps),
            alpha_steps: over.alpha_steps.or(self.alpha_steps),
            out: over.out.or(self.out),
            strategy: over.strategy.or(self.strategy),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
    }
}

/// A configuration with defaults filled in and the problem resolved.
struct Resolved {
    spec: ProblemSpec,
    grid: Grid,
    frame: CoincidenceFrame,
    opts: SolveOptions,
    cfg: RunConfig,
    out: PathBuf,
}

fn parse_inline(text: &str, bc: Option<BoundaryCondition>, length: f64) -> Result<ProblemSpec> {
    let (family, params) = text.split_once(':').expect("caller checked for ':'");
    let bc = bc.ok_or_else(|| invalid("inline problem needs --bc"))?;
    let mut values = std::collections::HashMap::new();
    for kv in params.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| invalid(format!("bad parameter '{kv}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| invalid(format!("bad number in '{kv}'")))?;
        values.insert(k.trim().to_string(), v);
    }
    let mut get = |k: &str, default: f64| values.remove(k).unwrap_or(default);
    let spec = match family {
        "logistic" => corpus::logistic_family(get("lambda", 1.0), get("c", 0.0), length, bc)?,
        "superlinear" => corpus::superlinear_family(get("lambda", 1.0), length, bc)?,
        "mms" => corpus::manufactured_problem_with_anchor(bc, length, get("c", 1.0), get("d", 1.0), get("beta", 1.0))?,
        _ => return Err(Error::UnknownProblem(family.to_string())),
    };
    if let Some(k) = values.keys().next() {
        return Err(invalid(format!("unknown parameter '{k}' for {family}")));
    }
    Ok(spec)
}

fn forcing_profile(name: &str, grid: Grid) -> Result<SampledDensity> {
    let t = grid.length();
    Ok(match name {
        "one" => SampledDensity::constant(grid, 1.0),
        "ramp" => SampledDensity::from_fn(grid, |s| s / t),
        "bump" => SampledDensity::from_fn(grid, |s| (std::f64::consts::PI * s / t).sin().max(0.0)),
        _ => return Err(invalid(format!("unknown forcing profile '{name}' (one, ramp, bump)"))),
    })
}

fn resolve(cfg: RunConfig) -> Result<Resolved> {
    let name = cfg.problem.clone().ok_or_else(|| invalid("--problem is required"))?;
    let length = cfg.length.unwrap_or(1.0);
    let spec = if name.contains(':') {
        parse_inline(&name, cfg.bc, length)?
    } else {
        corpus::by_name(&name, cfg.bc, length)?
    };
    let n = cfg.n.unwrap_or(400);
    if n < 4 {
        return Err(invalid(format!("--n must be at least 4, got {n}")));
    }
    let grid = Grid::new(length, n)?;
    let frame = CoincidenceFrame::new(spec.bc, grid);
    let mut opts = SolveOptions::default();
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(invalid("--tol must be positive"));
        }
        opts.tol = tol;
    }
    opts.strategy = match cfg.strategy {
        Some(StrategyFlag::Picard) => Strategy::PicardThenNewton,
        Some(StrategyFlag::Newton) => Strategy::Newton,
        None => preferred_strategy(&spec),
    };
    for (flag, value) in [("--r", cfg.r), ("--R", cfg.big_r), ("--alpha0", cfg.alpha0)] {
        if value.is_some_and(|x| !(x > 0.0 && x.is_finite())) {
            return Err(invalid(format!("{flag} must be positive")));
        }
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("mixbvp-out"));
    Ok(Resolved { spec, grid, frame, opts, cfg, out })
}

/// Superlinear instances have a positive solution that repels damped Picard.
pub fn preferred_strategy(spec: &ProblemSpec) -> Strategy {
    match spec.family {
        Family::Superlinear { .. } => Strategy::Newton,
        _ => Strategy::PicardThenNewton,
    }
}

/// Initial guess: the kernel element midway between the kernel radii of
/// `r` and `R` when both are known, otherwise that of radius 1.
pub fn initial_guess(spec: &ProblemSpec, frame: &CoincidenceFrame, r: Option<f64>, big_r: Option<f64>) -> GridFunction {
    let length = frame.grid.length();
    let radii = match (r, big_r, &spec.suggested_r_big_r) {
        (Some(r), Some(big_r), _) => Some((r, big_r)),
        (_, _, Some(s)) => Some((s.r, s.big_r)),
        _ => None,
    };
    let a = match radii {
        Some((r, big_r)) => 0.5 * (frame.bc.kernel_radius(r, length) + frame.bc.kernel_radius(big_r, length)),
        None => frame.bc.kernel_radius(1.0, length),
    };
    frame.embed(a)
}

/// Writes `t,u,du` with 17 significant digits and LF line endings.
pub fn write_solution_csv(path: &Path, u: &GridFunction) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Error::Io(e.to_string()))?;
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["t", "u", "du"]).map_err(io)?;
    let grid = u.grid();
    for i in 0..grid.len() {
        w.write_record([
            format!("{:.16e}", grid.node(i)),
            format!("{:.16e}", u.u[i]),
            format!("{:.16e}", u.du[i]),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_solution_csv`]. The grid is rebuilt from
/// the row count and the last `t`.
pub fn read_solution_csv(path: &Path) -> Result<GridFunction> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let headers = r.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "u", "du"] {
        return Err(invalid("expected header t,u,du"));
    }
    let (mut ts, mut us, mut dus) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| invalid("malformed CSV row"))
        };
        ts.push(num(0)?);
        us.push(num(1)?);
        dus.push(num(2)?);
    }
    if ts.len() < 3 {
        return Err(invalid("CSV has too few rows"));
    }
    let grid = Grid::new(*ts.last().expect("nonempty"), ts.len() - 1)?;
    GridFunction::new(grid, us, dus)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn write_sweep_csv(path: &Path, steps: &[crate::solver::SweepStep]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Error::Io(e.to_string()))?;
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["parameter", "sup_norm", "deriv_sup_norm", "min_value", "converged", "iterations", "failure"])
        .map_err(io)?;
    for s in steps {
        w.write_record([
            format!("{:.16e}", s.parameter),
            format!("{:.16e}", s.report.sup_norm),
            format!("{:.16e}", s.report.deriv_sup_norm),
            format!("{:.16e}", s.report.min_value),
            s.report.converged.to_string(),
            s.report.iterations.to_string(),
            s.failure.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    problem: &'a str,
    bc: BoundaryCondition,
    #[serde(rename = "T")]
    length: f64,
    n: usize,
    report: &'a SolveReport,
    failure: Option<String>,
    reference_error: Option<f64>,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    problem: &'a str,
    growth: GrowthReport,
    solve: &'a SolveReport,
    positivity: PositivityCertificate,
    positivity_meets_claim: bool,
}

fn solve_once(res: &Resolved) -> Result<(SolveReport, Option<String>)> {
    let init = initial_guess(&res.spec, &res.frame, res.cfg.r, res.cfg.big_r);
    let (report, failure) =
        solve_inner(&init, &res.spec.extended(), &res.frame, &HomotopyParams::unforced(), &res.opts)?;
    Ok((report, failure.map(|e| e.to_string())))
}

fn run_solve(res: &Resolved, csv_only: bool) -> Result<i32> {
    fs::create_dir_all(&res.out)?;
    let (report, failure) = solve_once(res)?;
    write_solution_csv(&res.out.join("solution.csv"), &report.solution)?;
    let reference = res.spec.known_solution.as_ref().map(|k| k.on_grid(res.grid));
    if csv_only {
        if let Some(reference) = &reference {
            write_solution_csv(&res.out.join("reference.csv"), reference)?;
        }
    } else {
        let output = SolveOutput {
            problem: &res.spec.name,
            bc: res.spec.bc,
            length: res.grid.length(),
            n: res.grid.intervals(),
            report: &report,
            failure,
            reference_error: reference.map(|k| k.value_distance(&report.solution)),
        };
        write_json(&res.out.join("solve_report.json"), &output)?;
    }
    eprintln!(
        "{}: converged={} sup_norm={:.6e} residual={:.3e} iterations={}",
        res.spec.name, report.converged, report.sup_norm, report.residual, report.iterations
    );
    Ok(if report.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn run_verify(res: &Resolved) -> Result<i32> {
    fs::create_dir_all(&res.out)?;
    let growth = verify_growth_conditions(&res.spec.f, res.grid.length(), &ProbePlan::default());
    let (report, _) = solve_once(res)?;
    let positivity = check_positivity(&report.solution, res.spec.bc, 10.0 * res.opts.tol);
    let meets = positivity.meets_claim(res.spec.bc);
    let growth_ok = growth.all_passed();
    write_json(
        &res.out.join("verify_report.json"),
        &VerifyOutput {
            problem: &res.spec.name,
            growth,
            solve: &report,
            positivity,
            positivity_meets_claim: meets,
        },
    )?;
    eprintln!("{}: growth={} converged={} positivity={}", res.spec.name, growth_ok, report.converged, meets);
    Ok(if !report.converged {
        EXIT_NOT_CONVERGED
    } else if !(growth_ok && meets) {
        EXIT_HYPOTHESIS
    } else {
        EXIT_OK
    })
}

fn degree_options(res: &Resolved) -> Result<DegreeOptions> {
    let alpha0 = res.cfg.alpha0.unwrap_or(1.0);
    let mut opts = DegreeOptions::standard(res.grid, alpha0, res.cfg.alpha_steps.unwrap_or(10));
    let theta_steps = res.cfg.theta_steps.unwrap_or(10).max(1);
    opts.theta_schedule = (1..=theta_steps).map(|k| k as f64 / theta_steps as f64).collect();
    opts.v = forcing_profile(res.cfg.v.as_deref().unwrap_or("one"), res.grid)?;
    opts.certify.solve = res.opts.clone();
    Ok(opts)
}

fn run_degree(res: &Resolved) -> Result<i32> {
    let r = res.cfg.r.ok_or_else(|| invalid("degree needs --r"))?;
    let big_r = res.cfg.big_r.ok_or_else(|| invalid("degree needs --R"))?;
    fs::create_dir_all(&res.out)?;
    let opts = degree_options(res)?;
    let report = degree_report(r, big_r, &res.spec.f, &res.spec.extended(), &res.frame, &opts)?;
    write_json(&res.out.join("degree_report.json"), &report)?;
    eprintln!(
        "{}: degrees (Omega_r, Omega_R, annulus) = ({:?}, {:?}, {:?})",
        res.spec.name, report.deg_omega_r, report.deg_omega_big_r, report.deg_annulus
    );
    Ok(if report.theorem_applicable { EXIT_OK } else { EXIT_HYPOTHESIS })
}

fn run_sweep(res: &Resolved, alpha: bool) -> Result<i32> {
    fs::create_dir_all(&res.out)?;
    let opts = degree_options(res)?;
    let (sweep, schedule, file) = if alpha {
        (Sweep::Alpha { v: opts.v.clone() }, opts.alpha_schedule.clone(), "sweep_alpha.csv")
    } else {
        (Sweep::Theta, opts.theta_schedule.clone(), "sweep_theta.csv")
    };
    let init = initial_guess(&res.spec, &res.frame, res.cfg.r, res.cfg.big_r);
    let steps = continuation(&sweep, &schedule, &init, &res.spec.extended(), &res.frame, &res.opts)?;
    write_sweep_csv(&res.out.join(file), &steps)?;
    let converged = steps.iter().filter(|s| s.report.converged).count();
    eprintln!("{}: {converged}/{} steps converged", res.spec.name, steps.len());
    Ok(if converged == steps.len() { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::UnknownProblem(_) | Error::Io(_) => EXIT_USAGE,
        Error::DegenerateEndpoint { .. } | Error::NoBoundFound { .. } => EXIT_HYPOTHESIS,
        _ => EXIT_NOT_CONVERGED,
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (flags, kind) = match cli.command {
        Command::Solve(f) => (f, "solve"),
        Command::Verify(f) => (f, "verify"),
        Command::Degree(f) => (f, "degree"),
        Command::SweepTheta(f) => (f, "sweep-theta"),
        Command::SweepAlpha(f) => (f, "sweep-alpha"),
        Command::Export(f) => (f, "export"),
    };
    let outcome = (|| -> Result<i32> {
        let base = match &flags.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        let res = resolve(base.merged(flags.run))?;
        match kind {
            "solve" => run_solve(&res, false),
            "export" => run_solve(&res, true),
            "verify" => run_verify(&res),
            "degree" => run_degree(&res),
            "sweep-theta" => run_sweep(&res, false),
            _ => run_sweep(&res, true),
        }
    })();
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
