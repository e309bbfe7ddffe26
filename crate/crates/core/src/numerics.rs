//! Uniform grids on `[0, T]`, sampled C¹ functions and densities, and the
//! quadrature primitives the coincidence frames are built from.
//!
//! Cumulative integrals use the trapezoid rule, so every construction that
//! goes through [`cumulative_integral`] is second order in `h = T/n`. The
//! definite integral [`integrate`] is composite Simpson (trapezoid when `n`
//! is odd).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform partition `t_i = i·T/n`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    intervals: usize,
}

impl Grid {
    pub fn new(length: f64, intervals: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(format!("interval length must be positive, got {length}")));
        }
        if intervals < 2 {
            return Err(invalid(format!("need at least 2 subintervals, got {intervals}")));
        }
        Ok(Self { length, intervals })
    }

    /// Interval length `T`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of subintervals `n`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `n + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.length / self.intervals as f64
    }

    /// Node `t_i`; the last node is `T` exactly.
    pub fn node(&self, i: usize) -> f64 {
        if i >= self.intervals {
            self.length
        } else {
            self.length * i as f64 / self.intervals as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Same grid with a different resolution.
    pub fn refined(&self, intervals: usize) -> Result<Self> {
        Self::new(self.length, intervals)
    }
}

/// Shorthand for [`Grid::new`].
pub fn make_grid(length: f64, intervals: usize) -> Result<Grid> {
    Grid::new(length, intervals)
}

fn check_samples(grid: &Grid, what: &str, v: &[f64]) -> Result<()> {
    if v.len() != grid.len() {
        return Err(invalid(format!(
            "{what} has {} samples, grid has {} nodes",
            v.len(),
            grid.len()
        )));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(invalid(format!("{what} sample {i} is not finite")));
    }
    Ok(())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// A C¹ candidate represented by its values and derivative values at the
/// grid nodes. Derivative samples are carried explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Grid,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, u: Vec<f64>, du: Vec<f64>) -> Result<Self> {
        check_samples(&grid, "u", &u)?;
        check_samples(&grid, "du", &du)?;
        Ok(Self { grid, u, du })
    }

    /// Samples `t ↦ (u(t), u'(t))` at every node.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> (f64, f64)) -> Self {
        let (u, du) = grid.nodes().map(&mut f).unzip();
        Self { grid, u, du }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, u: vec![0.0; grid.len()], du: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `‖u‖∞`
    pub fn sup_norm(&self) -> f64 {
        sup(&self.u)
    }

    /// `‖u'‖∞`
    pub fn deriv_sup_norm(&self) -> f64 {
        sup(&self.du)
    }

    /// `‖u‖₁ = ‖u‖∞ + ‖u'‖∞`
    pub fn c1_norm(&self) -> f64 {
        self.sup_norm() + self.deriv_sup_norm()
    }

    pub fn max_value(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max_i max(|u_i − v_i|, |du_i − dv_i|)`.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.du.iter().zip(&other.du))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `max_i |u_i − v_i|`.
    pub fn value_distance(&self, other: &GridFunction) -> f64 {
        self.u.iter().zip(&other.u).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `self ← self + a·other`.
    pub fn add_scaled(&mut self, a: f64, other: &GridFunction) {
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += a * y;
        }
        for (x, y) in self.du.iter_mut().zip(&other.du) {
            *x += a * y;
        }
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            u: self.u.iter().map(|x| a * x).collect(),
            du: self.du.iter().map(|x| a * x).collect(),
        }
    }

    /// Flattened `[u…, du…]` state vector.
    pub fn to_state(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.u.len());
        x.extend_from_slice(&self.u);
        x.extend_from_slice(&self.du);
        x
    }

    pub fn from_state(grid: Grid, x: &[f64]) -> Self {
        let m = grid.len();
        Self { grid, u: x[..m].to_vec(), du: x[m..2 * m].to_vec() }
    }

    /// The value samples as a density (for quadrature of `u`).
    pub fn values(&self) -> SampledDensity {
        SampledDensity { grid: self.grid, w: self.u.clone() }
    }
}

/// Node samples of an integrable right-hand side `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledDensity {
    grid: Grid,
    pub w: Vec<f64>,
}

impl SampledDensity {
    pub fn new(grid: Grid, w: Vec<f64>) -> Result<Self> {
        check_samples(&grid, "w", &w)?;
        Ok(Self { grid, w })
    }

    pub fn from_fn(grid: Grid, f: impl FnMut(f64) -> f64) -> Self {
        Self { grid, w: grid.nodes().map(f).collect() }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, w: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.w)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.w[i]
    }

    pub fn last(&self) -> f64 {
        self.w[self.w.len() - 1]
    }

    /// `self − c` nodewise.
    pub fn shifted(&self, c: f64) -> SampledDensity {
        SampledDensity { grid: self.grid, w: self.w.iter().map(|x| x - c).collect() }
    }

    /// `self + a·other` nodewise.
    pub fn plus_scaled(&self, a: f64, other: &SampledDensity) -> SampledDensity {
        SampledDensity {
            grid: self.grid,
            w: self.w.iter().zip(&other.w).map(|(x, y)| x + a * y).collect(),
        }
    }
}

/// `∫₀ᵀ w` by composite Simpson; trapezoid when `n` is odd.
pub fn integrate(w: &SampledDensity) -> f64 {
    let n = w.grid.intervals();
    let h = w.grid.step();
    let v = &w.w;
    if n % 2 == 0 {
        let mut odd = 0.0;
        let mut even = 0.0;
        for i in 1..n {
            if i % 2 == 1 {
                odd += v[i];
            } else {
                even += v[i];
            }
        }
        h / 3.0 * (v[0] + v[n] + 4.0 * odd + 2.0 * even)
    } else {
        let inner: f64 = v[1..n].iter().sum();
        h * (0.5 * (v[0] + v[n]) + inner)
    }
}

/// `s ↦ ∫₀ˢ w`, cumulative trapezoid, zero at node 0.
pub fn cumulative_integral(w: &SampledDensity) -> SampledDensity {
    let h = w.grid.step();
    let mut out = Vec::with_capacity(w.w.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in w.w.windows(2) {
        acc += 0.5 * h * (pair[0] + pair[1]);
        out.push(acc);
    }
    SampledDensity { grid: w.grid, w: out }
}

/// `s ↦ ∫₀ˢ ∫₀ᵗ w(τ) dτ dt`, i.e. [`cumulative_integral`] applied twice.
pub fn double_cumulative(w: &SampledDensity) -> SampledDensity {
    cumulative_integral(&cumulative_integral(w))
}
