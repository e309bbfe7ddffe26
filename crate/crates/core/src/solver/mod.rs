//! Fixed-point reformulation `u = Φ(u)` of `L u = θ N u + α v` and the
//! iteration and continuation engine built on it.
//!
//! ```text
//! Φ(u) = P u + J Q N_α u + θ K_P (Id − Q) N_α u,    N_α u = N u + α v
//! ```
//!
//! Fixed points satisfy `Q N_α u = 0` and `−u'' = θ N_α u`. The iteration is
//! damped Picard with a switch to matrix-free Newton-GMRES once Picard stops
//! making progress.

mod krylov;

use serde::Serialize;

use crate::coincidence::{right_inverse_unchecked, CoincidenceFrame, BoundaryCondition};
use crate::error::{invalid, Error, Result};
use crate::nonlinearity::{nemytskii, ExtendedFn};
use crate::numerics::{GridFunction, SampledDensity};

/// Homotopy parameters `θ ∈ (0, 1]`, `α ≥ 0` and forcing profile `v ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyParams {
    pub theta: f64,
    pub alpha: f64,
    pub v: Option<SampledDensity>,
}

impl HomotopyParams {
    pub fn new(theta: f64, alpha: f64, v: Option<SampledDensity>) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(invalid(format!("theta must lie in (0, 1], got {theta}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha must be nonnegative, got {alpha}")));
        }
        if let Some(v) = &v {
            if v.w.iter().any(|&x| x < 0.0) {
                return Err(invalid("forcing profile v must be nonnegative"));
            }
            if alpha > 0.0 && v.w.iter().all(|&x| x == 0.0) {
                return Err(invalid("forcing profile v must not vanish identically"));
            }
        } else if alpha > 0.0 {
            return Err(invalid("alpha > 0 requires a forcing profile v"));
        }
        Ok(Self { theta, alpha, v })
    }

    /// `θ = 1`, `α = 0`: the problem itself.
    pub fn unforced() -> Self {
        Self { theta: 1.0, alpha: 0.0, v: None }
    }

    pub fn with_theta(theta: f64) -> Result<Self> {
        Self::new(theta, 0.0, None)
    }

    pub fn forced(alpha: f64, v: SampledDensity) -> Result<Self> {
        Self::new(1.0, alpha, Some(v))
    }

    fn forcing(&self, i: usize) -> f64 {
        match &self.v {
            Some(v) if self.alpha != 0.0 => self.alpha * v.w[i],
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Picard,
    PicardNewton,
    Newton,
}

/// Iteration strategy. Damped Picard only finds fixed points that attract it;
/// `Newton` starts Newton-GMRES from the initial guess and also reaches
/// repelling ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    PicardThenNewton,
    Newton,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: GridFunction,
    /// Max interior `|D²u + θ f̃ + α v|`.
    pub residual: f64,
    /// `‖B(u)‖₁` plus the `|u' − D¹u|` consistency defect.
    pub boundary_defect: f64,
    /// `‖Φ(u) − u‖∞` at the returned iterate.
    pub fixed_point_gap: f64,
    pub sup_norm: f64,
    pub deriv_sup_norm: f64,
    pub max_value: f64,
    pub min_value: f64,
    pub iterations: usize,
    pub method: Method,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Picard damping λ ∈ (0, 1].
    pub damping: f64,
    /// Acceptance threshold for residual and boundary defect.
    pub tol: f64,
    /// Fixed-point increment threshold, relative to `1 + ‖u‖₁`.
    pub step_tol: f64,
    pub divergence_ceiling: f64,
    pub stall_window: usize,
    pub stall_progress: f64,
    pub newton_max_iters: usize,
    pub strategy: Strategy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 400,
            damping: 0.5,
            tol: 1e-4,
            step_tol: 1e-11,
            divergence_ceiling: 1e8,
            stall_window: 10,
            stall_progress: 1e-3,
            newton_max_iters: 40,
            strategy: Strategy::PicardThenNewton,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.tol > 0.0) || !(self.step_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be positive"));
        }
        Ok(())
    }
}

fn forced_density(u: &GridFunction, ft: &ExtendedFn, hp: &HomotopyParams) -> Result<SampledDensity> {
    let mut w = nemytskii(ft, u)?;
    if hp.alpha != 0.0 {
        for (i, x) in w.w.iter_mut().enumerate() {
            *x += hp.forcing(i);
        }
    }
    Ok(w)
}

/// `Φ(u) = P u + J Q N_α u + θ K_P (Id − Q) N_α u`.
pub fn phi_operator(
    u: &GridFunction,
    ft: &ExtendedFn,
    frame: &CoincidenceFrame,
    hp: &HomotopyParams,
) -> Result<GridFunction> {
    if u.grid() != &frame.grid {
        return Err(invalid("grid function does not live on the frame's grid"));
    }
    let w = forced_density(u, ft, hp)?;
    let q = frame.project_q(&w);
    let mut out = frame.project_p(u);
    out.add_scaled(1.0, &frame.embed(q));
    let k = right_inverse_unchecked(&w.shifted(q), frame.bc);
    out.add_scaled(hp.theta, &k);
    Ok(out)
}

/// `(max interior |D²u + θ f̃(t,u,u') + α v|, ‖B(u)‖₁ + max |u' − D¹u|)`.
pub fn residual(
    u: &GridFunction,
    ft: &ExtendedFn,
    bc: BoundaryCondition,
    hp: &HomotopyParams,
) -> Result<(f64, f64)> {
    let grid = *u.grid();
    let n = grid.intervals();
    if n < 4 {
        return Err(invalid("residual needs at least 4 subintervals"));
    }
    let h = grid.step();
    let w = nemytskii(ft, u)?;
    let mut interior = 0.0_f64;
    for i in 1..n {
        let d2 = (u.u[i + 1] - 2.0 * u.u[i] + u.u[i - 1]) / (h * h);
        interior = interior.max((d2 + hp.theta * w.w[i] + hp.forcing(i)).abs());
    }
    let b = bc.defect(u);
    let mut consistency = 0.0_f64;
    for i in 0..=n {
        let d1 = if i == 0 {
            (-3.0 * u.u[0] + 4.0 * u.u[1] - u.u[2]) / (2.0 * h)
        } else if i == n {
            (3.0 * u.u[n] - 4.0 * u.u[n - 1] + u.u[n - 2]) / (2.0 * h)
        } else {
            (u.u[i + 1] - u.u[i - 1]) / (2.0 * h)
        };
        consistency = consistency.max((u.du[i] - d1).abs());
    }
    Ok((interior, b[0].abs() + b[1].abs() + consistency))
}

fn build_report(
    u: GridFunction,
    ft: &ExtendedFn,
    frame: &CoincidenceFrame,
    hp: &HomotopyParams,
    opts: &SolveOptions,
    iterations: usize,
    method: Method,
    settled: bool,
) -> SolveReport {
    let (res, defect) = residual(&u, ft, frame.bc, hp).unwrap_or((f64::INFINITY, f64::INFINITY));
    let gap = phi_operator(&u, ft, frame, hp).map(|p| p.distance(&u)).unwrap_or(f64::INFINITY);
    let converged = settled && res <= opts.tol && defect <= opts.tol && gap <= 10.0 * opts.tol;
    SolveReport {
        residual: res,
        boundary_defect: defect,
        fixed_point_gap: gap,
        sup_norm: u.sup_norm(),
        deriv_sup_norm: u.deriv_sup_norm(),
        max_value: u.max_value(),
        min_value: u.min_value(),
        iterations,
        method,
        converged,
        solution: u,
    }
}

/// Runs the iteration; divergence is returned alongside the last iterate.
pub(crate) fn solve_inner(
    initial: &GridFunction,
    ft: &ExtendedFn,
    frame: &CoincidenceFrame,
    hp: &HomotopyParams,
    opts: &SolveOptions,
) -> Result<(SolveReport, Option<Error>)> {
    opts.validate()?;
    if initial.grid() != &frame.grid {
        return Err(invalid("initial guess does not live on the frame's grid"));
    }
    let lambda = opts.damping;
    let mut u = initial.clone();
    let mut history: Vec<f64> = Vec::new();
    let mut settled = false;
    let mut stalled = false;
    let mut iterations = 0;

    while opts.strategy == Strategy::PicardThenNewton && iterations < opts.max_iters {
        let image = phi_operator(&u, ft, frame, hp)?;
        let increment = image.distance(&u);
        if increment <= opts.step_tol * (1.0 + u.c1_norm()) {
            settled = true;
            break;
        }
        iterations += 1;
        u = u.scaled(1.0 - lambda);
        u.add_scaled(lambda, &image);
        let norm = u.c1_norm();
        if !norm.is_finite() || norm > opts.divergence_ceiling {
            let err = Error::Divergence { iteration: iterations, norm };
            return Ok((build_report(u, ft, frame, hp, opts, iterations, Method::Picard, false), Some(err)));
        }
        history.push(increment);
        let k = history.len();
        if k > opts.stall_window {
            let before = history[k - 1 - opts.stall_window];
            if (before - increment) / before < opts.stall_progress {
                stalled = true;
                break;
            }
        }
    }

    let newton_method = match opts.strategy {
        Strategy::PicardThenNewton => Method::PicardNewton,
        Strategy::Newton => Method::Newton,
    };
    if opts.strategy == Strategy::PicardThenNewton && (settled || (!stalled && iterations < opts.max_iters)) {
        return Ok((build_report(u, ft, frame, hp, opts, iterations, Method::Picard, settled), None));
    }

    // Newton on x − Φ(x), after Picard stalled or ran out of budget.
    let grid = frame.grid;
    let mut x = u.to_state();
    let phi_state = |state: &[f64]| -> Result<Vec<f64>> {
        let v = GridFunction::from_state(grid, state);
        Ok(phi_operator(&v, ft, frame, hp)?.to_state())
    };
    let outcome = krylov::newton_fixed_point(
        &mut x,
        phi_state,
        opts.step_tol,
        opts.newton_max_iters,
        opts.divergence_ceiling,
    )?;
    let u = GridFunction::from_state(grid, &x);
    let total = iterations + outcome.iterations;
    let norm = u.c1_norm();
    if !norm.is_finite() || norm > opts.divergence_ceiling {
        let err = Error::Divergence { iteration: total, norm };
        return Ok((build_report(u, ft, frame, hp, opts, total, newton_method, false), Some(err)));
    }
    Ok((build_report(u, ft, frame, hp, opts, total, newton_method, outcome.converged), None))
}

/// Solves `u = Φ(u)` from `initial`. Exhausting the iteration budget yields a
/// report with `converged = false`; norm escape past the ceiling is an error.
pub fn solve_fixed_point(
    initial: &GridFunction,
    ft: &ExtendedFn,
    frame: &CoincidenceFrame,
    hp: &HomotopyParams,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    match solve_inner(initial, ft, frame, hp, opts)? {
        (_, Some(err)) => Err(err),
        (report, None) => Ok(report),
    }
}

/// Which parameter a continuation sweep moves.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// `L u = θ N u`, `α = 0`.
    Theta,
    /// `L u = N u + α v`, `θ = 1`.
    Alpha { v: SampledDensity },
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepStep {
    pub parameter: f64,
    pub report: SolveReport,
    /// Set when the step diverged or the nonlinearity failed to evaluate.
    pub failure: Option<String>,
}

impl Sweep {
    pub fn params(&self, value: f64) -> Result<HomotopyParams> {
        match self {
            Sweep::Theta => HomotopyParams::with_theta(value),
            Sweep::Alpha { v } => HomotopyParams::new(1.0, value, Some(v.clone())),
        }
    }
}

/// Solves along `schedule`, warm-starting each step from the last converged
/// solution. Failed steps are recorded and the sweep continues.
pub fn continuation(
    family: &Sweep,
    schedule: &[f64],
    initial: &GridFunction,
    ft: &ExtendedFn,
    frame: &CoincidenceFrame,
    opts: &SolveOptions,
) -> Result<Vec<SweepStep>> {
    if schedule.is_empty() {
        return Err(invalid("continuation schedule is empty"));
    }
    let increasing = schedule.windows(2).all(|p| p[0] <= p[1]);
    let decreasing = schedule.windows(2).all(|p| p[0] >= p[1]);
    if !(increasing || decreasing) {
        return Err(invalid("continuation schedule must be monotone"));
    }
    let mut steps = Vec::with_capacity(schedule.len());
    let mut warm = initial.clone();
    for &value in schedule {
        let hp = family.params(value)?;
        let step = match solve_inner(&warm, ft, frame, &hp, opts) {
            Ok((report, failure)) => SweepStep { parameter: value, report, failure: failure.map(|e| e.to_string()) },
            Err(e @ Error::Evaluation { .. }) => SweepStep {
                parameter: value,
                report: build_report(warm.clone(), ft, frame, &hp, opts, 0, Method::Picard, false),
                failure: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        if step.report.converged {
            warm = step.report.solution.clone();
        }
        steps.push(step);
    }
    Ok(steps)
}
