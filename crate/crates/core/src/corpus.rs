//! Problem instances: a logistic family, a superlinear family and
//! manufactured-solution problems for each boundary condition, plus a shooting
//! oracle that shares nothing with the fixed-point machinery.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::coincidence::BoundaryCondition;
use crate::error::{invalid, Error, Result};
use crate::nonlinearity::{extend_tilde, CarathFn, ExtendedFn, NagumoPair, ScalarFn};
use crate::numerics::{Grid, GridFunction};

/// Closed-form solution with its first two derivatives.
#[derive(Clone)]
pub struct KnownSolution {
    pub u: ScalarFn,
    pub du: ScalarFn,
    pub ddu: ScalarFn,
}

impl fmt::Debug for KnownSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("KnownSolution")
    }
}

impl KnownSolution {
    pub fn on_grid(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |t| ((self.u)(t), (self.du)(t)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// `f = s(λ − s) − c·s·ξ`
    Logistic { lambda: f64, c: f64 },
    /// `f = s(s − λ)`
    Superlinear { lambda: f64 },
    /// `f = s(g(t) + β(u*(t) − s))` with `g = −u*''/u*`
    Manufactured { c: f64, d: f64, beta: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SuggestedRadii {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub bc: BoundaryCondition,
    pub length: f64,
    pub family: Family,
    pub f: CarathFn,
    pub known_solution: Option<KnownSolution>,
    pub suggested_r_big_r: Option<SuggestedRadii>,
}

impl ProblemSpec {
    pub fn extended(&self) -> ExtendedFn {
        extend_tilde(self.f.clone())
    }
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("T must be positive, got {length}")))
    }
}

pub fn logistic_family(lambda: f64, c: f64, length: f64, bc: BoundaryCondition) -> Result<ProblemSpec> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !c.is_finite() {
        return Err(invalid("c must be finite"));
    }
    check_length(length)?;
    let rho = 1.0;
    let k = lambda + rho + c.abs() * rho;
    let f = CarathFn::new(
        Arc::new(move |_, s, xi| s * (lambda - s) - c * s * xi),
        Arc::new(move |_| k),
        rho,
        Arc::new(move |eta| {
            let psi = eta * (lambda + eta + c.abs());
            NagumoPair::new(eta, Arc::new(|x| 1.0 + x), Arc::new(move |_| psi), 1.0)
                .expect("eta is positive")
        }),
    )?;
    Ok(ProblemSpec {
        name: format!("logistic-{bc}"),
        bc,
        length,
        family: Family::Logistic { lambda, c },
        f,
        known_solution: None,
        suggested_r_big_r: None,
    })
}

/// `f = s(s − λ)`: negative below `λ`, positive above, so that the integral
/// hypothesis holds at small radii and forcing rules out solutions at large
/// ones.
pub fn superlinear_family(lambda: f64, length: f64, bc: BoundaryCondition) -> Result<ProblemSpec> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    check_length(length)?;
    let rho = 1.0;
    let f = CarathFn::new(
        Arc::new(move |_, s, _| s * (s - lambda)),
        Arc::new(move |_| lambda + rho),
        rho,
        Arc::new(move |eta| {
            let psi = eta * (eta + lambda);
            NagumoPair::new(eta, Arc::new(|_| 1.0), Arc::new(move |_| psi), 1.0).expect("eta is positive")
        }),
    )?;
    Ok(ProblemSpec {
        name: format!("superlinear-{bc}"),
        bc,
        length,
        family: Family::Superlinear { lambda },
        f,
        known_solution: None,
        suggested_r_big_r: Some(SuggestedRadii {
            r: 0.5 * lambda,
            big_r: 2.0 * lambda,
            note: "implementation-derived: forcing v = 1, alpha0 = lambda".into(),
        }),
    })
}

/// Manufactured problem with the anchoring weight `β = 1`.
pub fn manufactured_problem(bc: BoundaryCondition, length: f64, c: f64, d: f64) -> Result<ProblemSpec> {
    manufactured_problem_with_anchor(bc, length, c, d, 1.0)
}

/// `u*` per boundary condition, with `τ = t/T`:
///
/// - Bc1: `c(1 + t) + d τ²(1 − τ)²`
/// - Bc2: `t (c + d τ²(1 − τ)²)`
/// - Bc3: `c + d τ²(1 − τ)`
///
/// and `f(t,s,ξ) = s (g(t) + β(u*(t) − s))` with `g = −u*''/u*`, so that
/// `u*'' + f(t, u*, u*') = 0`. With `β = 0` this is the linear form `g·s`,
/// whose solutions come in a one-parameter family `κ u*`.
pub fn manufactured_problem_with_anchor(
    bc: BoundaryCondition,
    length: f64,
    c: f64,
    d: f64,
    beta: f64,
) -> Result<ProblemSpec> {
    check_length(length)?;
    if !(c > 0.0 && c.is_finite()) || !d.is_finite() {
        return Err(invalid("manufactured problem needs c > 0 and finite d"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid("anchor weight must be nonnegative"));
    }
    let tl = length;
    let (u, du, ddu): (ScalarFn, ScalarFn, ScalarFn) = match bc {
        BoundaryCondition::Bc1 => (
            Arc::new(move |t| {
                let x = t / tl;
                c * (1.0 + t) + d * x * x * (1.0 - x) * (1.0 - x)
            }),
            Arc::new(move |t| {
                let x = t / tl;
                c + d * (2.0 * x - 6.0 * x * x + 4.0 * x * x * x) / tl
            }),
            Arc::new(move |t| {
                let x = t / tl;
                d * (2.0 - 12.0 * x + 12.0 * x * x) / (tl * tl)
            }),
        ),
        BoundaryCondition::Bc2 => (
            Arc::new(move |t| {
                let x = t / tl;
                t * (c + d * x * x * (1.0 - x) * (1.0 - x))
            }),
            Arc::new(move |t| {
                let x = t / tl;
                c + d * (3.0 * x * x - 8.0 * x * x * x + 5.0 * x.powi(4))
            }),
            Arc::new(move |t| {
                let x = t / tl;
                d * x * (6.0 - 24.0 * x + 20.0 * x * x) / tl
            }),
        ),
        BoundaryCondition::Bc3 => (
            Arc::new(move |t| {
                let x = t / tl;
                c + d * x * x * (1.0 - x)
            }),
            Arc::new(move |t| {
                let x = t / tl;
                d * (2.0 * x - 3.0 * x * x) / tl
            }),
            Arc::new(move |t| {
                let x = t / tl;
                d * (2.0 - 6.0 * x) / (tl * tl)
            }),
        ),
    };

    // g = −u*''/u*; for Bc2 the factor t cancels.
    let g: ScalarFn = match bc {
        BoundaryCondition::Bc2 => Arc::new(move |t| {
            let x = t / tl;
            let q = c + d * x * x * (1.0 - x) * (1.0 - x);
            -d * (6.0 - 24.0 * x + 20.0 * x * x) / (tl * tl * q)
        }),
        _ => {
            let (u, ddu) = (u.clone(), ddu.clone());
            Arc::new(move |t| -ddu(t) / u(t))
        }
    };

    // positivity of u* (of u*/t for Bc2) on a dense sample
    let samples = 2001;
    let mut g_sup = 0.0_f64;
    let mut u_sup = 0.0_f64;
    for i in 0..samples {
        let t = tl * i as f64 / (samples - 1) as f64;
        let x = t / tl;
        let positive = match bc {
            BoundaryCondition::Bc2 => c + d * x * x * (1.0 - x) * (1.0 - x),
            _ => u(t),
        };
        if !(positive > 0.0) {
            return Err(invalid(format!("manufactured solution vanishes near t = {t}")));
        }
        g_sup = g_sup.max(g(t).abs());
        u_sup = u_sup.max(u(t).abs());
    }
    // sampled suprema of smooth functions, padded
    g_sup *= 1.01;
    u_sup *= 1.01;

    let rho = 1.0;
    let k = g_sup + beta * (u_sup + rho);
    let anchor = u.clone();
    let g_f = g.clone();
    let f = CarathFn::new(
        Arc::new(move |t, s, _| s * (g_f(t) + beta * (anchor(t) - s))),
        Arc::new(move |_| k),
        rho,
        Arc::new(move |eta| {
            let psi = eta * (g_sup + beta * (u_sup + eta));
            NagumoPair::new(eta, Arc::new(|_| 1.0), Arc::new(move |_| psi), 1.0).expect("eta is positive")
        }),
    )?;
    Ok(ProblemSpec {
        name: format!("mms-{bc}"),
        bc,
        length,
        family: Family::Manufactured { c, d, beta },
        f,
        known_solution: Some(KnownSolution { u, du, ddu }),
        suggested_r_big_r: None,
    })
}

/// Resolves `logistic-bcN`, `superlinear-bcN` and `mms-bcN` (or the bare
/// family name together with `bc`) on `[0, length]`.
pub fn by_name(name: &str, bc: Option<BoundaryCondition>, length: f64) -> Result<ProblemSpec> {
    let (family, suffix) = match name.rsplit_once('-') {
        Some((fam, tail)) if tail.parse::<BoundaryCondition>().is_ok() && tail.starts_with("bc") => {
            (fam, Some(tail.parse::<BoundaryCondition>()?))
        }
        _ => (name, None),
    };
    let bc = match (suffix, bc) {
        (Some(a), Some(b)) if a != b => {
            return Err(invalid(format!("problem {name} conflicts with boundary condition {b}")))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::UnknownProblem(format!("{name} (no boundary condition given)"))),
    };
    match family {
        "logistic" => logistic_family(1.0, 0.0, length, bc),
        "superlinear" => superlinear_family(1.0, length, bc),
        "mms" => {
            let d = if bc == BoundaryCondition::Bc2 { 2.0 } else { 1.0 };
            manufactured_problem(bc, length, 1.0, d)
        }
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}

pub const CORPUS_NAMES: [&str; 9] = [
    "logistic-bc1",
    "logistic-bc2",
    "logistic-bc3",
    "superlinear-bc1",
    "superlinear-bc2",
    "superlinear-bc3",
    "mms-bc1",
    "mms-bc2",
    "mms-bc3",
];

#[derive(Debug, Clone, Serialize)]
pub struct ShootOptions {
    /// Number of RK4 steps on `[0, T]`; rounded up to a multiple of the
    /// working grid's interval count. At least `10⁴`.
    pub n_dense: usize,
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_points: usize,
    pub bisection_iters: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { n_dense: 100_000, scan_lo: 1e-3, scan_hi: 10.0, scan_points: 200, bisection_iters: 200 }
    }
}

/// Initial data for the shooting parameter `a`.
fn initial_state(bc: BoundaryCondition, a: f64) -> (f64, f64) {
    match bc {
        BoundaryCondition::Bc1 => (a, a),
        BoundaryCondition::Bc2 => (0.0, a),
        BoundaryCondition::Bc3 => (a, 0.0),
    }
}

/// Integrates `u'' = −f̃(t, u, u')` with classical RK4, recording every
/// `stride`-th state.
fn integrate_ivp(ft: &ExtendedFn, length: f64, steps: usize, u0: (f64, f64), stride: usize) -> Vec<(f64, f64)> {
    let h = length / steps as f64;
    let rhs = |t: f64, u: f64, p: f64| (p, -ft.eval(t, u, p));
    let (mut u, mut p) = u0;
    let mut out = Vec::with_capacity(steps / stride + 1);
    out.push((u, p));
    for i in 0..steps {
        let t = i as f64 * h;
        let (k1u, k1p) = rhs(t, u, p);
        let (k2u, k2p) = rhs(t + 0.5 * h, u + 0.5 * h * k1u, p + 0.5 * h * k1p);
        let (k3u, k3p) = rhs(t + 0.5 * h, u + 0.5 * h * k2u, p + 0.5 * h * k2p);
        let (k4u, k4p) = rhs(t + h, u + h * k3u, p + h * k3p);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !(u.is_finite() && p.is_finite()) {
            out.push((f64::NAN, f64::NAN));
            return out;
        }
        if (i + 1) % stride == 0 {
            out.push((u, p));
        }
    }
    out
}

/// The remaining boundary row as a function of the shooting parameter.
fn boundary_miss(bc: BoundaryCondition, a: f64, end: (f64, f64)) -> f64 {
    match bc {
        BoundaryCondition::Bc1 | BoundaryCondition::Bc2 => end.1 - a,
        BoundaryCondition::Bc3 => end.0 - a,
    }
}

/// Shooting oracle: scans positive `a` for the first sign change of the
/// boundary miss, bisects it, and samples the dense trajectory on `grid`.
pub fn oracle_shoot(spec: &ProblemSpec, grid: Grid, opts: &ShootOptions) -> Result<GridFunction> {
    if opts.n_dense < 10_000 {
        return Err(invalid("n_dense must be at least 1e4"));
    }
    if (grid.length() - spec.length).abs() > 1e-12 * spec.length {
        return Err(invalid("grid length differs from problem length"));
    }
    if !(opts.scan_lo < opts.scan_hi) || opts.scan_points < 2 {
        return Err(invalid("empty scan interval"));
    }
    let n = grid.intervals();
    let stride = opts.n_dense.div_ceil(n);
    let steps = stride * n;
    let ft = spec.extended();
    let bc = spec.bc;
    let miss = |a: f64| {
        let traj = integrate_ivp(&ft, spec.length, steps, initial_state(bc, a), steps);
        boundary_miss(bc, a, *traj.last().expect("nonempty"))
    };

    let scan: Vec<f64> = (0..opts.scan_points)
        .map(|i| opts.scan_lo + (opts.scan_hi - opts.scan_lo) * i as f64 / (opts.scan_points - 1) as f64)
        .collect();
    let values: Vec<f64> = scan.iter().map(|&a| miss(a)).collect();
    let degenerate_tol = |a: f64| 1e-10 * (1.0 + a.abs());
    if scan.iter().zip(&values).all(|(&a, &m)| m.abs() <= degenerate_tol(a)) {
        return Err(Error::DegenerateBracket { lo: opts.scan_lo, hi: opts.scan_hi });
    }

    let mut root = None;
    for i in 0..scan.len() {
        if values[i] == 0.0 {
            root = Some(scan[i]);
            break;
        }
        if i + 1 < scan.len() && values[i].is_finite() && values[i + 1].is_finite() && values[i] * values[i + 1] < 0.0
        {
            let (mut lo, mut hi, mut m_lo) = (scan[i], scan[i + 1], values[i]);
            for _ in 0..opts.bisection_iters {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let m = miss(mid);
                if m == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if m * m_lo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    m_lo = m;
                }
            }
            root = Some(0.5 * (lo + hi));
            break;
        }
    }
    let a = root.ok_or(Error::NoBracket { lo: opts.scan_lo, hi: opts.scan_hi })?;
    let traj = integrate_ivp(&ft, spec.length, steps, initial_state(bc, a), stride);
    if traj.len() != n + 1 {
        return Err(Error::Evaluation { node: traj.len() - 1, t: f64::NAN, value: f64::NAN });
    }
    let (u, du): (Vec<f64>, Vec<f64>) = traj.into_iter().unzip();
    GridFunction::new(grid, u, du)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{verify_growth_conditions, ProbePlan};

    #[test]
    fn logistic_examples() {
        let spec = logistic_family(1.0, 0.0, 1.0, BoundaryCondition::Bc1).unwrap();
        assert!(verify_growth_conditions(&spec.f, 1.0, &ProbePlan::default()).all_passed());
        assert_eq!(spec.f.eval(0.3, 0.0, 5.0), 0.0);
        let spec = logistic_family(2.0, 0.5, 1.0, BoundaryCondition::Bc2).unwrap();
        assert_eq!((spec.f.k)(0.4), 3.5);
        assert_eq!(spec.f.eval(0.2, 1.0, 1.0).abs(), 0.5);
        assert!(logistic_family(0.0, 0.0, 1.0, BoundaryCondition::Bc1).is_err());
    }

    #[test]
    fn every_corpus_entry_passes_growth_checks() {
        for name in CORPUS_NAMES {
            for t in [0.5, 1.0, 2.0] {
                let spec = by_name(name, None, t).unwrap();
                let rep = verify_growth_conditions(&spec.f, t, &ProbePlan::default());
                assert!(rep.all_passed(), "{name} T={t}: {rep:?}");
            }
        }
    }

    #[test]
    fn manufactured_boundary_rows_vanish() {
        for bc in BoundaryCondition::ALL {
            for (t, c, d) in [(1.0, 1.0, 1.0), (2.5, 0.7, -0.4), (0.6, 2.0, 3.0)] {
                let spec = manufactured_problem(bc, t, c, d).unwrap();
                let ks = spec.known_solution.clone().unwrap();
                let g = Grid::new(t, 8).unwrap();
                let defect = bc.defect(&ks.on_grid(g));
                assert!(defect[0].abs() < 1e-13 && defect[1].abs() < 1e-13, "{bc} {defect:?}");
                // u*'' + f(t, u*, u*') = 0 on a probe set away from t = 0
                for i in 1..=20 {
                    let x = t * i as f64 / 20.0;
                    let r = (ks.ddu)(x) + spec.f.eval(x, (ks.u)(x), (ks.du)(x));
                    assert!(r.abs() < 1e-11, "{bc} t={x} r={r}");
                }
            }
        }
    }

    #[test]
    fn manufactured_derivatives_match_finite_differences() {
        let h = 1e-5;
        for bc in BoundaryCondition::ALL {
            let ks = manufactured_problem(bc, 1.7, 1.3, 0.8).unwrap().known_solution.unwrap();
            for x in [0.2, 0.9, 1.4] {
                let fd1 = ((ks.u)(x + h) - (ks.u)(x - h)) / (2.0 * h);
                let fd2 = ((ks.du)(x + h) - (ks.du)(x - h)) / (2.0 * h);
                assert!((fd1 - (ks.du)(x)).abs() < 1e-8, "{bc}");
                assert!((fd2 - (ks.ddu)(x)).abs() < 1e-8, "{bc}");
            }
        }
    }

    #[test]
    fn manufactured_examples() {
        let zero = manufactured_problem(BoundaryCondition::Bc1, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(zero.f.eval(0.5, 1.5, 3.0), 0.0);
        let ks = manufactured_problem(BoundaryCondition::Bc1, 1.0, 1.0, 1.0).unwrap().known_solution.unwrap();
        assert_eq!((ks.du)(0.0), 1.0);
        assert_eq!((ks.du)(1.0), 1.0);
        assert_eq!((ks.u)(0.0), 1.0);
        assert!(((ks.ddu)(0.5) - (2.0 - 6.0 + 3.0)).abs() < 1e-15);
        let ks = manufactured_problem(BoundaryCondition::Bc2, 1.0, 1.0, 2.0).unwrap().known_solution.unwrap();
        assert_eq!((ks.u)(0.0), 0.0);
        assert_eq!((ks.du)(0.0), 1.0);
        assert!(((ks.du)(1.0) - 1.0).abs() < 1e-15);
        assert!((1..=100).all(|i| (ks.u)(i as f64 / 100.0) > 0.0));
    }

    #[test]
    fn manufactured_rejects_vanishing_solution() {
        assert!(manufactured_problem(BoundaryCondition::Bc3, 1.0, 1.0, -10.0).is_err());
        assert!(manufactured_problem(BoundaryCondition::Bc2, 1.0, 1.0, -20.0).is_err());
        assert!(manufactured_problem(BoundaryCondition::Bc1, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn names_resolve() {
        assert_eq!(by_name("mms-bc2", None, 1.0).unwrap().bc, BoundaryCondition::Bc2);
        assert_eq!(by_name("logistic", Some(BoundaryCondition::Bc3), 1.0).unwrap().name, "logistic-bc3");
        assert!(matches!(by_name("nope-bc1", None, 1.0), Err(Error::UnknownProblem(_))));
        assert!(by_name("mms-bc1", Some(BoundaryCondition::Bc2), 1.0).is_err());
        assert!(by_name("mms", None, 1.0).is_err());
    }

    #[test]
    fn oracle_recovers_manufactured_bc1() {
        let spec = manufactured_problem(BoundaryCondition::Bc1, 1.0, 1.0, 1.0).unwrap();
        let g = Grid::new(1.0, 100).unwrap();
        let u = oracle_shoot(&spec, g, &ShootOptions::default()).unwrap();
        let exact = spec.known_solution.as_ref().unwrap().on_grid(g);
        assert!(u.distance(&exact) < 1e-8, "{}", u.distance(&exact));
    }

    #[test]
    fn oracle_reports_degenerate_kernel() {
        let zero = CarathFn::new(
            Arc::new(|_, _, _| 0.0),
            Arc::new(|_| 0.0),
            1.0,
            Arc::new(|eta| NagumoPair::new(eta, Arc::new(|_| 1.0), Arc::new(|_| 0.0), 1.0).unwrap()),
        )
        .unwrap();
        let mut spec = logistic_family(1.0, 0.0, 1.0, BoundaryCondition::Bc2).unwrap();
        spec.f = zero;
        let g = Grid::new(1.0, 10).unwrap();
        let err = oracle_shoot(&spec, g, &ShootOptions { scan_points: 20, ..Default::default() });
        assert!(matches!(err, Err(Error::DegenerateBracket { .. })));
    }

    #[test]
    fn oracle_no_bracket() {
        let spec = logistic_family(1.0, 0.0, 1.0, BoundaryCondition::Bc3).unwrap();
        let g = Grid::new(1.0, 10).unwrap();
        let opts = ShootOptions { scan_lo: 2.0, scan_hi: 3.0, scan_points: 5, ..Default::default() };
        assert!(matches!(oracle_shoot(&spec, g, &opts), Err(Error::NoBracket { .. })));
    }
}
