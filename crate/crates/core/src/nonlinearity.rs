//! The Carathéodory nonlinearity `f(t, s, ξ)`, its extension `f̃` to negative
//! states, the Nemytskii operator, and probe-based checks of the growth
//! conditions (f₁) to (f₃).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate, Grid, GridFunction, SampledDensity};

pub type StateFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type NagumoFamily = Arc<dyn Fn(f64) -> NagumoPair + Send + Sync>;

/// Bernstein-Nagumo data for states in `[0, η]`:
/// `|f(t,s,ξ)| ≤ ψ(t)·φ(|ξ|)` with `∫^∞ ξ^{(p−1)/p}/φ(ξ) dξ = ∞`.
#[derive(Clone)]
pub struct NagumoPair {
    pub eta: f64,
    pub phi: ScalarFn,
    pub psi: ScalarFn,
    /// Integrability exponent of `ψ`, finite and `≥ 1`.
    pub p: f64,
}

impl fmt::Debug for NagumoPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NagumoPair").field("eta", &self.eta).field("p", &self.p).finish()
    }
}

impl NagumoPair {
    pub fn new(eta: f64, phi: ScalarFn, psi: ScalarFn, p: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid(format!("Nagumo range bound must be positive, got {eta}")));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(invalid(format!("Nagumo exponent must be finite and >= 1, got {p}")));
        }
        Ok(Self { eta, phi, psi, p })
    }

    /// `(p − 1)/p`
    pub fn exponent(&self) -> f64 {
        (self.p - 1.0) / self.p
    }

    /// `‖ψ‖_{L^p(0,T)}` by Simpson on a fine uniform grid.
    pub fn psi_lp_norm(&self, length: f64) -> f64 {
        let grid = Grid::new(length, 4096).expect("positive length");
        let p = self.p;
        let w = SampledDensity::from_fn(grid, |t| (self.psi)(t).abs().powf(p));
        integrate(&w).max(0.0).powf(1.0 / p)
    }

    /// Pair for the forced equation `f + α₀ v`: `ψ + α₀ v` and `φ + 1`.
    pub fn forced(&self, alpha0: f64, v: ScalarFn) -> NagumoPair {
        let phi = self.phi.clone();
        let psi = self.psi.clone();
        NagumoPair {
            eta: self.eta,
            phi: Arc::new(move |x| phi(x) + 1.0),
            psi: Arc::new(move |t| psi(t) + alpha0 * v(t)),
            p: self.p,
        }
    }
}

/// `f` together with its (f₂) data `k`, `ρ` and its family of Nagumo pairs.
#[derive(Clone)]
pub struct CarathFn {
    pub f: StateFn,
    pub k: ScalarFn,
    pub rho: f64,
    pub nagumo: NagumoFamily,
}

impl fmt::Debug for CarathFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CarathFn").field("rho", &self.rho).finish_non_exhaustive()
    }
}

impl CarathFn {
    pub fn new(f: StateFn, k: ScalarFn, rho: f64, nagumo: NagumoFamily) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(invalid(format!("rho must be positive, got {rho}")));
        }
        Ok(Self { f, k, rho, nagumo })
    }

    pub fn eval(&self, t: f64, s: f64, xi: f64) -> f64 {
        (self.f)(t, s, xi)
    }

    pub fn nagumo_pair(&self, eta: f64) -> NagumoPair {
        (self.nagumo)(eta)
    }
}

/// `f̃(t,s,ξ) = f(t,s,ξ)` for `s ≥ 0`, `−s` for `s < 0`.
#[derive(Clone, Debug)]
pub struct ExtendedFn {
    pub base: CarathFn,
}

impl ExtendedFn {
    pub fn eval(&self, t: f64, s: f64, xi: f64) -> f64 {
        if s >= 0.0 {
            self.base.eval(t, s, xi)
        } else {
            -s
        }
    }
}

pub fn extend_tilde(base: CarathFn) -> ExtendedFn {
    ExtendedFn { base }
}

/// `(Nu)(t_i) = f̃(t_i, u_i, u'_i)`.
pub fn nemytskii(ft: &ExtendedFn, u: &GridFunction) -> Result<SampledDensity> {
    let grid = *u.grid();
    let mut w = Vec::with_capacity(grid.len());
    for (i, t) in grid.nodes().enumerate() {
        let value = ft.eval(t, u.u[i], u.du[i]);
        if !value.is_finite() {
            return Err(Error::Evaluation { node: i, t, value });
        }
        w.push(value);
    }
    SampledDensity::new(grid, w)
}

/// Probe density and thresholds for [`verify_growth_conditions`].
#[derive(Debug, Clone, Serialize)]
pub struct ProbePlan {
    pub t_nodes: usize,
    pub s_nodes: usize,
    pub xi_nodes: usize,
    /// Half-width of the probed ξ range for (f₁) and (f₃).
    pub xi_range: f64,
    /// Range bound η at which the Nagumo pair is checked; `None` uses ρ.
    pub eta: Option<f64>,
    /// Start of the divergence integral and of the liminf tail.
    pub xi_start: f64,
    /// Upper limit X of the divergence surrogate.
    pub cutoff: f64,
    pub divergence_threshold: f64,
    /// `φ` must stay above this on the tail `[√X, X]`.
    pub phi_floor: f64,
    pub tolerance: f64,
}

impl Default for ProbePlan {
    fn default() -> Self {
        Self {
            t_nodes: 33,
            s_nodes: 33,
            xi_nodes: 33,
            xi_range: 10.0,
            eta: None,
            xi_start: 1.0,
            cutoff: 1e6,
            divergence_threshold: 10.0,
            phi_floor: 1e-8,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConditionCheck {
    pub passed: bool,
    /// Largest violation found (positive means violated); for the divergence
    /// check this is the surrogate integral value, for liminf the tail minimum.
    pub worst_margin: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GrowthReport {
    pub f1: ConditionCheck,
    pub f2: ConditionCheck,
    pub f3_bound: ConditionCheck,
    pub f3_liminf: ConditionCheck,
    pub f3_divergence: ConditionCheck,
    pub probe_density: String,
}

impl GrowthReport {
    pub fn all_passed(&self) -> bool {
        [&self.f1, &self.f2, &self.f3_bound, &self.f3_liminf, &self.f3_divergence]
            .iter()
            .all(|c| c.passed)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

/// `∫_{a}^{b} ξ^e/φ(ξ) dξ` by Simpson in the variable `ln ξ`.
pub(crate) fn nagumo_integral(phi: &ScalarFn, exponent: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    const PANELS: usize = 4096;
    let (la, lb) = (a.ln(), b.ln());
    let h = (lb - la) / PANELS as f64;
    let g = |x: f64| {
        let xi = x.exp();
        xi * xi.powf(exponent) / phi(xi)
    };
    let mut acc = g(la) + g(lb);
    for i in 1..PANELS {
        let x = la + h * i as f64;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(x);
    }
    acc * h / 3.0
}

/// Probe (f₁), (f₂) and (f₃) on finite sample sets over `[0, length]`.
/// Failures are report entries, never errors.
pub fn verify_growth_conditions(base: &CarathFn, length: f64, plan: &ProbePlan) -> GrowthReport {
    let ts = linspace(0.0, length, plan.t_nodes.max(2));
    let xis = linspace(-plan.xi_range, plan.xi_range, plan.xi_nodes.max(2));
    let tol = plan.tolerance;

    // (f₁): f(t, 0, ξ) = 0
    let mut f1_worst = 0.0_f64;
    for &t in &ts {
        for &xi in &xis {
            f1_worst = f1_worst.max(base.eval(t, 0.0, xi).abs());
        }
    }
    let f1 = ConditionCheck {
        passed: f1_worst <= tol,
        worst_margin: f1_worst,
        note: "max |f(t,0,xi)|".into(),
    };

    // (f₂): |f| ≤ k(t)(|s| + |ξ|) on s ∈ [0, ρ], |ξ| ≤ ρ
    let ss = linspace(0.0, base.rho, plan.s_nodes.max(2));
    let xis_rho = linspace(-base.rho, base.rho, plan.xi_nodes.max(2));
    let mut f2_worst = f64::NEG_INFINITY;
    for &t in &ts {
        let k = (base.k)(t);
        for &s in &ss {
            for &xi in &xis_rho {
                let slack = base.eval(t, s, xi).abs() - k * (s.abs() + xi.abs());
                f2_worst = f2_worst.max(slack);
            }
        }
    }
    let f2 = ConditionCheck {
        passed: f2_worst <= tol,
        worst_margin: f2_worst,
        note: format!("max |f| - k(|s|+|xi|) with rho = {}", base.rho),
    };

    // (f₃): Nagumo bound on s ∈ [0, η]
    let eta = plan.eta.unwrap_or(base.rho);
    let pair = base.nagumo_pair(eta);
    let ss_eta = linspace(0.0, eta, plan.s_nodes.max(2));
    let mut f3_worst = f64::NEG_INFINITY;
    for &t in &ts {
        let psi = (pair.psi)(t);
        for &s in &ss_eta {
            for &xi in &xis {
                let slack = base.eval(t, s, xi).abs() - psi * (pair.phi)(xi.abs());
                f3_worst = f3_worst.max(slack);
            }
        }
    }
    let f3_bound = ConditionCheck {
        passed: f3_worst <= tol && pair.p >= 1.0 && pair.p.is_finite(),
        worst_margin: f3_worst,
        note: format!("max |f| - psi(t) phi(|xi|) with eta = {eta}, p = {}", pair.p),
    };

    let tail = logspace(plan.cutoff.sqrt().max(plan.xi_start), plan.cutoff, 64);
    let tail_min = tail.iter().map(|&x| (pair.phi)(x)).fold(f64::INFINITY, f64::min);
    let f3_liminf = ConditionCheck {
        passed: tail_min >= plan.phi_floor,
        worst_margin: tail_min,
        note: format!("min phi on [{:.3e}, {:.3e}]", tail[0], plan.cutoff),
    };

    let surrogate = nagumo_integral(&pair.phi, pair.exponent(), plan.xi_start, plan.cutoff);
    let f3_divergence = ConditionCheck {
        passed: surrogate >= plan.divergence_threshold,
        worst_margin: surrogate,
        note: format!(
            "surrogate {} at cutoff X = {:e} (threshold {}); finite cutoff, not a proof of divergence",
            if surrogate >= plan.divergence_threshold { "passed" } else { "failed" },
            plan.cutoff,
            plan.divergence_threshold
        ),
    };

    GrowthReport {
        f1,
        f2,
        f3_bound,
        f3_liminf,
        f3_divergence,
        probe_density: format!(
            "{} t-nodes x {} s-nodes x {} xi-nodes",
            ts.len(),
            plan.s_nodes,
            plan.xi_nodes
        ),
    }
}
