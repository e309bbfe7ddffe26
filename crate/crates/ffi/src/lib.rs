//! C interface to `mixbvp`.
//!
//! Problems and solutions are opaque handles created and released by this
//! library. Every fallible function returns a [`BvpStatus`]; on failure the
//! message is available from [`mixbvp_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mixbvp::certification::{self, DegreeOptions, Verdict};
use mixbvp::cli::{initial_guess, preferred_strategy};
use mixbvp::corpus::{self, ProblemSpec};
use mixbvp::solver::solve_fixed_point;
use mixbvp::{BoundaryCondition, CoincidenceFrame, Error, Grid, HomotopyParams, SolveOptions, SolveReport};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownProblem = 3,
    Evaluation = 4,
    Divergence = 5,
    NotConverged = 6,
    DegenerateEndpoint = 7,
    NoBoundFound = 8,
    BufferTooSmall = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvpVerdict {
    PositiveClosed = 0,
    PositiveHalfOpen = 1,
    NonnegativeOnly = 2,
    Fails = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BvpSolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub boundary_defect: f64,
    pub fixed_point_gap: f64,
    pub sup_norm: f64,
    pub deriv_sup_norm: f64,
    pub min_value: f64,
    pub max_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BvpPositivity {
    pub verdict: BvpVerdict,
    pub meets_claim: bool,
    pub min_value: f64,
    pub min_location: f64,
    pub margin_interior: f64,
}

/// Degrees are meaningful only when the matching `has_*` flag is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BvpDegreeSummary {
    pub deg_kernel: i32,
    pub has_omega_r: bool,
    pub deg_omega_r: i32,
    pub has_omega_big_r: bool,
    pub deg_omega_big_r: i32,
    pub has_annulus: bool,
    pub deg_annulus: i32,
    pub theorem_applicable: bool,
    pub m_r: f64,
    pub m_big_r: f64,
}

/// A corpus problem on a fixed grid.
pub struct BvpProblem {
    spec: ProblemSpec,
    frame: CoincidenceFrame,
    opts: SolveOptions,
}

/// A solve result.
pub struct BvpSolution {
    bc: BoundaryCondition,
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> BvpStatus {
    match e {
        Error::InvalidArgument(_) | Error::NotInImage { .. } | Error::Io(_) => BvpStatus::InvalidArgument,
        Error::UnknownProblem(_) => BvpStatus::UnknownProblem,
        Error::Evaluation { .. } => BvpStatus::Evaluation,
        Error::Divergence { .. } => BvpStatus::Divergence,
        Error::DegenerateEndpoint { .. } => BvpStatus::DegenerateEndpoint,
        Error::NoBoundFound { .. } => BvpStatus::NoBoundFound,
        Error::NoBracket { .. } | Error::DegenerateBracket { .. } => BvpStatus::NotConverged,
    }
}

fn guard(f: impl FnOnce() -> Result<BvpStatus, Error>) -> BvpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            BvpStatus::Internal
        }
    }
}

fn null_error(what: &str) -> Result<BvpStatus, Error> {
    set_error(format!("{what} is null"));
    Ok(BvpStatus::NullPointer)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mixbvp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a corpus problem (`"logistic-bc1"`, `"mms-bc2"`, ...) on `[0, T]`
/// with `n` subintervals. `bc` is 1, 2 or 3, or 0 to take it from the name.
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_problem_new(
    name: *const c_char,
    bc: u32,
    length: f64,
    n: usize,
    out: *mut *mut BvpProblem,
) -> BvpStatus {
    guard(|| {
        if name.is_null() {
            return null_error("name");
        }
        if out.is_null() {
            return null_error("out");
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Error::InvalidArgument("name is not UTF-8".into()))?;
        let bc = match bc {
            0 => None,
            k @ 1..=3 => Some(BoundaryCondition::ALL[k as usize - 1]),
            k => return Err(Error::InvalidArgument(format!("boundary condition {k}"))),
        };
        let spec = corpus::by_name(name, bc, length)?;
        if n < 4 {
            return Err(Error::InvalidArgument(format!("need at least 4 subintervals, got {n}")));
        }
        let grid = Grid::new(length, n)?;
        let frame = CoincidenceFrame::new(spec.bc, grid);
        let opts = SolveOptions { strategy: preferred_strategy(&spec), ..SolveOptions::default() };
        *out = Box::into_raw(Box::new(BvpProblem { spec, frame, opts }));
        Ok(BvpStatus::Ok)
    })
}

/// # Safety
/// `problem` must be null or a handle from [`mixbvp_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_problem_free(problem: *mut BvpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Sets the residual and boundary-defect tolerance.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_problem_set_tolerance(problem: *mut BvpProblem, tol: f64) -> BvpStatus {
    guard(|| {
        let Some(p) = problem.as_mut() else { return null_error("problem") };
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        p.opts.tol = tol;
        Ok(BvpStatus::Ok)
    })
}

/// Solves from the default kernel-element guess. A solution handle is
/// returned on `Ok` and on `NotConverged`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_solve(problem: *const BvpProblem, out: *mut *mut BvpSolution) -> BvpStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else { return null_error("problem") };
        if out.is_null() {
            return null_error("out");
        }
        let init = initial_guess(&p.spec, &p.frame, None, None);
        let report = solve_fixed_point(&init, &p.spec.extended(), &p.frame, &HomotopyParams::unforced(), &p.opts)?;
        let converged = report.converged;
        *out = Box::into_raw(Box::new(BvpSolution { bc: p.spec.bc, report }));
        if converged {
            Ok(BvpStatus::Ok)
        } else {
            set_error("iteration did not converge");
            Ok(BvpStatus::NotConverged)
        }
    })
}

/// # Safety
/// `solution` must be null or a handle from [`mixbvp_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_solution_free(solution: *mut BvpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of grid nodes (`n + 1`), or 0 for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_solution_len(solution: *const BvpSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.report.solution.grid().len())
}

/// Copies nodes, values and derivatives into caller buffers of length `len`.
/// Any of `t`, `u`, `du` may be null to skip it.
///
/// # Safety
/// Non-null buffers must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_solution_copy(
    solution: *const BvpSolution,
    t: *mut f64,
    u: *mut f64,
    du: *mut f64,
    len: usize,
) -> BvpStatus {
    guard(|| {
        let Some(s) = solution.as_ref() else { return null_error("solution") };
        let g = s.report.solution.grid();
        if len < g.len() {
            set_error(format!("buffer holds {len} values, need {}", g.len()));
            return Ok(BvpStatus::BufferTooSmall);
        }
        if !t.is_null() {
            for i in 0..g.len() {
                *t.add(i) = g.node(i);
            }
        }
        if !u.is_null() {
            ptr::copy_nonoverlapping(s.report.solution.u.as_ptr(), u, g.len());
        }
        if !du.is_null() {
            ptr::copy_nonoverlapping(s.report.solution.du.as_ptr(), du, g.len());
        }
        Ok(BvpStatus::Ok)
    })
}

/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_solution_summary(solution: *const BvpSolution, out: *mut BvpSolveSummary) -> BvpStatus {
    guard(|| {
        let Some(s) = solution.as_ref() else { return null_error("solution") };
        let Some(out) = out.as_mut() else { return null_error("out") };
        let r = &s.report;
        *out = BvpSolveSummary {
            converged: r.converged,
            iterations: r.iterations,
            residual: r.residual,
            boundary_defect: r.boundary_defect,
            fixed_point_gap: r.fixed_point_gap,
            sup_norm: r.sup_norm,
            deriv_sup_norm: r.deriv_sup_norm,
            min_value: r.min_value,
            max_value: r.max_value,
        };
        Ok(BvpStatus::Ok)
    })
}

/// Positivity certificate of the solution with tolerance `tol`.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_solution_positivity(
    solution: *const BvpSolution,
    tol: f64,
    out: *mut BvpPositivity,
) -> BvpStatus {
    guard(|| {
        let Some(s) = solution.as_ref() else { return null_error("solution") };
        let Some(out) = out.as_mut() else { return null_error("out") };
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
        }
        let cert = certification::check_positivity(&s.report.solution, s.bc, tol);
        *out = BvpPositivity {
            verdict: match cert.verdict {
                Verdict::PositiveClosed => BvpVerdict::PositiveClosed,
                Verdict::PositiveHalfOpen => BvpVerdict::PositiveHalfOpen,
                Verdict::NonnegativeOnly => BvpVerdict::NonnegativeOnly,
                Verdict::Fails => BvpVerdict::Fails,
            },
            meets_claim: cert.meets_claim(s.bc),
            min_value: cert.min_value,
            min_location: cert.min_location,
            margin_interior: cert.margin_interior,
        };
        Ok(BvpStatus::Ok)
    })
}

/// The kernel map `h(a)` of the problem's boundary condition.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_kernel_h(problem: *const BvpProblem, a: f64, out: *mut f64) -> BvpStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else { return null_error("problem") };
        let Some(out) = out.as_mut() else { return null_error("out") };
        *out = certification::kernel_h(a, &p.spec.extended(), p.spec.bc, p.frame.grid)?;
        Ok(BvpStatus::Ok)
    })
}

/// Nagumo derivative bound for solutions with `‖u‖∞ ≤ r`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_nagumo_bound(problem: *const BvpProblem, r: f64, out: *mut f64) -> BvpStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else { return null_error("problem") };
        let Some(out) = out.as_mut() else { return null_error("out") };
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("r must be positive".into()));
        }
        *out = certification::nagumo_bound(r, &p.spec.f.nagumo_pair(r), p.spec.length)?;
        Ok(BvpStatus::Ok)
    })
}

/// Degree report for radii `r` and `R` with forcing `v ≡ 1` up to `alpha0`
/// in ten steps and θ in ten steps.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mixbvp_degree(
    problem: *const BvpProblem,
    r: f64,
    big_r: f64,
    alpha0: f64,
    out: *mut BvpDegreeSummary,
) -> BvpStatus {
    guard(|| {
        let Some(p) = problem.as_ref() else { return null_error("problem") };
        let Some(out) = out.as_mut() else { return null_error("out") };
        let mut opts = DegreeOptions::standard(p.frame.grid, alpha0, 10);
        opts.certify.solve = p.opts.clone();
        let rep = certification::degree_report(r, big_r, &p.spec.f, &p.spec.extended(), &p.frame, &opts)?;
        *out = BvpDegreeSummary {
            deg_kernel: rep.deg_kernel,
            has_omega_r: rep.deg_omega_r.is_some(),
            deg_omega_r: rep.deg_omega_r.unwrap_or(0),
            has_omega_big_r: rep.deg_omega_big_r.is_some(),
            deg_omega_big_r: rep.deg_omega_big_r.unwrap_or(0),
            has_annulus: rep.deg_annulus.is_some(),
            deg_annulus: rep.deg_annulus.unwrap_or(0),
            theorem_applicable: rep.theorem_applicable,
            m_r: rep.m_r,
            m_big_r: rep.m_big_r,
        };
        Ok(BvpStatus::Ok)
    })
}
