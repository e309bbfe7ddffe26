//! Kernel-reduced degree bookkeeping, Nagumo derivative bounds, positivity
//! certificates and the two hypothesis checks on the radii `r` and `R`.
//!
//! Everything here is numerical evidence gathered on a grid. The sweeps behind
//! the hypothesis checks cannot certify statements quantified over a
//! continuum of parameters, and the reports say so.

use std::sync::Arc;

use serde::Serialize;

use crate::coincidence::{BoundaryCondition, CoincidenceFrame};
use crate::error::{invalid, Error, Result};
use crate::nonlinearity::{nagumo_integral, CarathFn, ExtendedFn, NagumoPair, ScalarFn};
use crate::numerics::{double_cumulative, integrate, Grid, GridFunction, SampledDensity};
use crate::solver::{continuation, solve_fixed_point, HomotopyParams, SolveOptions, Sweep};

/// Endpoint values with `|h| ≤ SIGN_TOL` are treated as zero.
pub const SIGN_TOL: f64 = 1e-12;

const EVIDENCE_NOTE: &str = "sweep evidence on a finite parameter schedule, not a proof";

/// `h(a) = −J Q N (a·e)`: the map induced on ker L ≅ ℝ.
///
/// - Bc1: `−(1/T) ∫₀ᵀ f̃(t, a + a t, a) dt`
/// - Bc2: `−(1/T) ∫₀ᵀ f̃(t, a t, a) dt`
/// - Bc3: `−(2/T²) ∫₀ᵀ ∫₀ˢ f̃(t, a, 0) dt ds`
pub fn kernel_h(a: f64, ft: &ExtendedFn, bc: BoundaryCondition, grid: Grid) -> Result<f64> {
    let length = grid.length();
    let mut w = Vec::with_capacity(grid.len());
    for (i, t) in grid.nodes().enumerate() {
        let (e, de) = bc.kernel_basis(t);
        let value = ft.eval(t, a * e, a * de);
        if !value.is_finite() {
            return Err(Error::Evaluation { node: i, t, value });
        }
        w.push(value);
    }
    let w = SampledDensity::new(grid, w)?;
    Ok(match bc {
        BoundaryCondition::Bc1 | BoundaryCondition::Bc2 => -integrate(&w) / length,
        BoundaryCondition::Bc3 => -2.0 / (length * length) * double_cumulative(&w).last(),
    })
}

/// Degree of a scalar map on `]lo, hi[` from its endpoint values.
pub fn degree_from_endpoints(lo: f64, h_lo: f64, hi: f64, h_hi: f64) -> Result<i32> {
    if h_lo.abs() <= SIGN_TOL || !h_lo.is_finite() {
        return Err(Error::DegenerateEndpoint { at: lo, value: h_lo });
    }
    if h_hi.abs() <= SIGN_TOL || !h_hi.is_finite() {
        return Err(Error::DegenerateEndpoint { at: hi, value: h_hi });
    }
    Ok(((h_hi.signum() - h_lo.signum()) / 2.0) as i32)
}

/// Brouwer degree `d_B(h, ]lo, hi[, 0)` in dimension one.
pub fn brouwer_degree_1d(h: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<i32> {
    degree_from_endpoints(lo, h(lo), hi, h(hi))
}

/// Smallest `M` (to bisection accuracy) with
/// `∫_{2r/T}^{M} ξ^{(p−1)/p}/φ(ξ) dξ > ‖ψ‖_{L^p} (2r)^{(p−1)/p}`, raised if
/// necessary so that `M > r`.
pub fn nagumo_bound(r: f64, pair: &NagumoPair, length: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) || !(length > 0.0 && length.is_finite()) {
        return Err(invalid("nagumo_bound needs positive r and T"));
    }
    let exponent = pair.exponent();
    let start = 2.0 * r / length;
    let target = pair.psi_lp_norm(length) * (2.0 * r).powf(exponent);
    let bump = |m: f64| if m > r { m } else { r * (1.0 + 1e-9) };
    if target <= 0.0 {
        return Ok(bump(start * (1.0 + 1e-9)));
    }
    let integral = |m: f64| nagumo_integral(&pair.phi, exponent, start, m);
    let ceiling = f64::MAX.sqrt();
    let (mut lo, mut hi) = (start, start * 2.0);
    while integral(hi) <= target {
        lo = hi;
        hi *= 2.0;
        if hi > ceiling {
            return Err(Error::NoBoundFound { ceiling });
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if integral(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(bump(hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "positive-on-[0,T]")]
    PositiveClosed,
    #[serde(rename = "positive-on-(0,T]")]
    PositiveHalfOpen,
    #[serde(rename = "nonnegative-only")]
    NonnegativeOnly,
    #[serde(rename = "fails")]
    Fails,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityCertificate {
    pub verdict: Verdict,
    pub min_value: f64,
    pub min_location: f64,
    /// Minimum of `u` over interior nodes.
    pub margin_interior: f64,
}

impl PositivityCertificate {
    /// Whether the verdict is as strong as the maximum principle promises for
    /// `bc`: positive on `[0, T]` for Bc1/Bc3, on `]0, T]` for Bc2.
    pub fn meets_claim(&self, bc: BoundaryCondition) -> bool {
        match bc {
            BoundaryCondition::Bc2 => {
                matches!(self.verdict, Verdict::PositiveHalfOpen | Verdict::PositiveClosed)
            }
            _ => self.verdict == Verdict::PositiveClosed,
        }
    }
}

pub fn check_positivity(u: &GridFunction, bc: BoundaryCondition, tol: f64) -> PositivityCertificate {
    let grid = u.grid();
    let n = grid.intervals();
    let (imin, min_value) = u
        .u
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, x)| if x < acc.1 { (i, x) } else { acc });
    let margin_interior = u.u[1..n].iter().copied().fold(f64::INFINITY, f64::min);
    let min_after_origin = u.u[1..].iter().copied().fold(f64::INFINITY, f64::min);
    let verdict = if min_value > tol {
        Verdict::PositiveClosed
    } else if bc == BoundaryCondition::Bc2 && u.u[0].abs() <= tol && min_after_origin > tol {
        Verdict::PositiveHalfOpen
    } else if min_value >= -tol {
        Verdict::NonnegativeOnly
    } else {
        Verdict::Fails
    };
    PositivityCertificate { verdict, min_value, min_location: grid.node(imin), margin_interior }
}

/// Options shared by the hypothesis checks and the degree report.
#[derive(Debug, Clone, Serialize)]
pub struct CertifyOptions {
    pub solve: SolveOptions,
    /// A sweep norm within `band_fraction · r` of `r` counts as a hit.
    pub band_fraction: f64,
    /// Kernel parameters (as fractions of the kernel radius of `R`) used as
    /// restarts for the nonexistence probe at `α₀`.
    pub restart_fractions: Vec<f64>,
    /// Kernel parameter of the first sweep guess; `None` picks half the
    /// kernel radius.
    pub initial_kernel: Option<f64>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            band_fraction: 0.01,
            restart_fractions: vec![0.1, 0.5, 0.9],
            initial_kernel: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    /// `r` for the integral hypothesis, `R` for the forcing hypothesis.
    pub target: f64,
    /// The frame's integral of `f` over the kernel element of radius `r`;
    /// must be negative. Absent for the forcing hypothesis.
    pub integral_value: Option<f64>,
    pub integral_passes: Option<bool>,
    /// `(parameter, ‖u‖∞)` of every converged sweep step.
    pub sweep_norms: Vec<(f64, f64)>,
    pub failed_steps: Vec<f64>,
    pub norm_avoidance: bool,
    pub nonexistence_at_alpha0: Option<bool>,
    /// `‖u‖∞` reached from each restart at `α₀` (`None`: no convergence).
    pub restart_norms: Vec<Option<f64>>,
    pub passed: bool,
    pub note: String,
}

fn avoids(norms: &[(f64, f64)], target: f64, band_fraction: f64) -> bool {
    let band = band_fraction * target;
    norms.iter().all(|&(_, n)| (n - target).abs() > band)
}

fn sweep_summary(steps: &[crate::solver::SweepStep]) -> (Vec<(f64, f64)>, Vec<f64>) {
    let mut norms = Vec::new();
    let mut failed = Vec::new();
    for s in steps {
        if s.report.converged {
            norms.push((s.parameter, s.report.sup_norm));
        } else {
            failed.push(s.parameter);
        }
    }
    (norms, failed)
}

/// Integral sign plus θ-sweep norm avoidance for the radius `r`.
pub fn check_hr(
    r: f64,
    ft: &ExtendedFn,
    frame: &CoincidenceFrame,
    theta_schedule: &[f64],
    opts: &CertifyOptions,
) -> Result<HypothesisReport> {
    if !(r > 0.0) {
        return Err(invalid("r must be positive"));
    }
    if theta_schedule.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(invalid("theta schedule must lie in (0, 1]"));
    }
    let length = frame.grid.length();
    let a_r = frame.bc.kernel_radius(r, length);
    let h = kernel_h(a_r, ft, frame.bc, frame.grid)?;
    let integral_value = match frame.bc {
        BoundaryCondition::Bc1 | BoundaryCondition::Bc2 => -length * h,
        BoundaryCondition::Bc3 => -0.5 * length * length * h,
    };
    let integral_passes = integral_value < 0.0;

    let initial = frame.embed(opts.initial_kernel.unwrap_or(0.5 * a_r));
    let steps = continuation(&Sweep::Theta, theta_schedule, &initial, ft, frame, &opts.solve)?;
    let (sweep_norms, failed_steps) = sweep_summary(&steps);
    let norm_avoidance = avoids(&sweep_norms, r, opts.band_fraction);
    Ok(HypothesisReport {
        target: r,
        integral_value: Some(integral_value),
        integral_passes: Some(integral_passes),
        passed: integral_passes && norm_avoidance,
        sweep_norms,
        failed_steps,
        norm_avoidance,
        nonexistence_at_alpha0: None,
        restart_norms: Vec::new(),
        note: EVIDENCE_NOTE.into(),
    })
}

/// α-sweep norm avoidance for the radius `R` plus a nonexistence probe at
/// `α₀`: no restart may converge to a solution with `0 ≤ u ≤ R`.
pub fn check_big_r(
    big_r: f64,
    v: &SampledDensity,
    alpha0: f64,
    ft: &ExtendedFn,
    frame: &CoincidenceFrame,
    alpha_schedule: &[f64],
    opts: &CertifyOptions,
) -> Result<HypothesisReport> {
    if !(big_r > 0.0) {
        return Err(invalid("R must be positive"));
    }
    if v.w.iter().any(|&x| x < 0.0) {
        return Err(invalid("forcing profile v must be nonnegative"));
    }
    if v.w.iter().all(|&x| x == 0.0) {
        return Err(invalid("forcing profile v must not vanish identically"));
    }
    if !(alpha0 > 0.0) {
        return Err(invalid("alpha0 must be positive"));
    }
    if alpha_schedule.iter().any(|&a| !(0.0..=alpha0).contains(&a)) {
        return Err(invalid("alpha schedule must lie in [0, alpha0]"));
    }
    let length = frame.grid.length();
    let a_big_r = frame.bc.kernel_radius(big_r, length);
    let initial = frame.embed(opts.initial_kernel.unwrap_or(0.5 * a_big_r));
    let sweep = Sweep::Alpha { v: v.clone() };
    let steps = continuation(&sweep, alpha_schedule, &initial, ft, frame, &opts.solve)?;
    let (sweep_norms, failed_steps) = sweep_summary(&steps);
    let norm_avoidance = avoids(&sweep_norms, big_r, opts.band_fraction);

    let reaches_alpha0 = alpha_schedule.last().is_some_and(|&a| a == alpha0);
    let (nonexistence, restart_norms) = if reaches_alpha0 {
        let hp = HomotopyParams::forced(alpha0, v.clone())?;
        let mut guesses: Vec<GridFunction> =
            opts.restart_fractions.iter().map(|f| frame.embed(f * a_big_r)).collect();
        if let Some(last) = steps.iter().rev().find(|s| s.report.converged) {
            guesses.push(last.report.solution.clone());
        }
        let in_box_tol = 10.0 * opts.solve.tol;
        let mut norms = Vec::with_capacity(guesses.len() + 1);
        let mut box_solution = false;
        let final_step = steps.last().filter(|s| s.parameter == alpha0);
        if let Some(s) = final_step {
            norms.push(s.report.converged.then_some(s.report.sup_norm));
            box_solution |= s.report.converged
                && s.report.min_value >= -in_box_tol
                && s.report.max_value <= big_r;
        }
        for g in guesses {
            match solve_fixed_point(&g, ft, frame, &hp, &opts.solve) {
                Ok(rep) if rep.converged => {
                    norms.push(Some(rep.sup_norm));
                    box_solution |= rep.min_value >= -in_box_tol && rep.max_value <= big_r;
                }
                Ok(_) | Err(Error::Divergence { .. }) | Err(Error::Evaluation { .. }) => norms.push(None),
                Err(e) => return Err(e),
            }
        }
        (Some(!box_solution), norms)
    } else {
        (Some(false), Vec::new())
    };
    let passed = norm_avoidance && nonexistence == Some(true);
    Ok(HypothesisReport {
        target: big_r,
        integral_value: None,
        integral_passes: None,
        sweep_norms,
        failed_steps,
        norm_avoidance,
        nonexistence_at_alpha0: nonexistence,
        restart_norms,
        passed,
        note: format!("{EVIDENCE_NOTE}; nonexistence at alpha0 means no restart converged inside 0 <= u <= R"),
    })
}

/// Linear interpolation of node samples.
fn interpolate(v: &SampledDensity, t: f64) -> f64 {
    let g = v.grid();
    let x = (t / g.step()).clamp(0.0, g.intervals() as f64);
    let i = (x.floor() as usize).min(g.intervals() - 1);
    let frac = x - i as f64;
    v.w[i] * (1.0 - frac) + v.w[i + 1] * frac
}

/// Inputs for [`degree_report`].
#[derive(Debug, Clone)]
pub struct DegreeOptions {
    pub certify: CertifyOptions,
    pub theta_schedule: Vec<f64>,
    pub alpha_schedule: Vec<f64>,
    pub alpha0: f64,
    pub v: SampledDensity,
}

impl DegreeOptions {
    /// `θ ∈ {0.1, …, 1}`, `α` in `steps` equal increments up to `α₀`, `v ≡ 1`.
    pub fn standard(grid: Grid, alpha0: f64, steps: usize) -> Self {
        let steps = steps.max(1);
        Self {
            certify: CertifyOptions::default(),
            theta_schedule: (1..=10).map(|k| k as f64 / 10.0).collect(),
            alpha_schedule: (0..=steps).map(|k| alpha0 * k as f64 / steps as f64).collect(),
            alpha0,
            v: SampledDensity::constant(grid, 1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "M_r")]
    pub m_r: f64,
    #[serde(rename = "M_R")]
    pub m_big_r: f64,
    /// Kernel radius of `r`; the kernel interval is `]−a_r, a_r[`.
    pub a_r: f64,
    pub h_left: f64,
    pub h_right: f64,
    pub deg_kernel: i32,
    pub deg_omega_r: Option<i32>,
    #[serde(rename = "deg_omega_R")]
    pub deg_omega_big_r: Option<i32>,
    pub deg_annulus: Option<i32>,
    pub theorem_applicable: bool,
    pub hypothesis_r: HypothesisReport,
    #[serde(rename = "hypothesis_R")]
    pub hypothesis_big_r: HypothesisReport,
}

/// Degree bookkeeping for the radii `r` (integral hypothesis) and `R`
/// (forcing hypothesis): `D(Ω_r) = d_B(h, ]−a_r, a_r[)`, `D(Ω_R) = 0`, and
/// the annulus degree by additivity.
pub fn degree_report(
    r: f64,
    big_r: f64,
    base: &CarathFn,
    ft: &ExtendedFn,
    frame: &CoincidenceFrame,
    opts: &DegreeOptions,
) -> Result<DegreeReport> {
    if !(r > 0.0 && big_r > 0.0) || r == big_r {
        return Err(invalid("need positive r != R"));
    }
    let length = frame.grid.length();
    let a_r = frame.bc.kernel_radius(r, length);
    let a_big_r = frame.bc.kernel_radius(big_r, length);
    let h_left = kernel_h(-a_r, ft, frame.bc, frame.grid)?;
    let h_right = kernel_h(a_r, ft, frame.bc, frame.grid)?;
    let deg_kernel = degree_from_endpoints(-a_r, h_left, a_r, h_right)?;

    let mut certify = opts.certify.clone();
    if certify.initial_kernel.is_none() {
        certify.initial_kernel = Some(0.5 * (a_r + a_big_r));
    }
    let hypothesis_r = check_hr(r, ft, frame, &opts.theta_schedule, &certify)?;
    let hypothesis_big_r = check_big_r(big_r, &opts.v, opts.alpha0, ft, frame, &opts.alpha_schedule, &certify)?;

    let mut m_r = nagumo_bound(r, &base.nagumo_pair(r), length)?;
    let v = opts.v.clone();
    let v_fn: ScalarFn = Arc::new(move |t| interpolate(&v, t));
    let forced_pair = base.nagumo_pair(big_r).forced(opts.alpha0, v_fn);
    let mut m_big_r = nagumo_bound(big_r, &forced_pair, length)?;
    if r < big_r {
        m_big_r = m_big_r.max(m_r);
    } else {
        m_r = m_r.max(m_big_r);
    }

    let deg_omega_r = hypothesis_r.passed.then_some(deg_kernel);
    let deg_omega_big_r = hypothesis_big_r.passed.then_some(0);
    let deg_annulus = match (deg_omega_r, deg_omega_big_r) {
        (Some(dr), Some(d_big)) if r < big_r => Some(d_big - dr),
        (Some(dr), Some(d_big)) => Some(dr - d_big),
        _ => None,
    };
    Ok(DegreeReport {
        r,
        big_r,
        m_r,
        m_big_r,
        a_r,
        h_left,
        h_right,
        deg_kernel,
        deg_omega_r,
        deg_omega_big_r,
        deg_annulus,
        theorem_applicable: deg_annulus.is_some_and(|d| d != 0),
        hypothesis_r,
        hypothesis_big_r,
    })
}
