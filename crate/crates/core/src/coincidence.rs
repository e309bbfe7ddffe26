//! The three boundary-condition frames for `L u = −u''`.
//!
//! | frame | boundary rows                 | ker L      | Im L                  |
//! |-------|-------------------------------|------------|-----------------------|
//! | `Bc1` | `u'(0) = u'(T) = u(0)`        | `a(1 + t)` | `∫₀ᵀ w = 0`           |
//! | `Bc2` | `u'(0) = u'(T)`, `u(0) = 0`   | `a t`      | `∫₀ᵀ w = 0`           |
//! | `Bc3` | `u(0) = u(T)`, `u'(0) = 0`    | `a`        | `∫₀ᵀ ∫₀ˢ w = 0`       |
//!
//! Each frame provides the projections `P` (onto ker L) and `Q` (onto the
//! constants, a complement of Im L), the right inverse `K_P` and the
//! identification `J` of coker L with ker L. Kernel and cokernel are both
//! one-dimensional and are handled through their real coordinate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    cumulative_integral, double_cumulative, integrate, Grid, GridFunction, SampledDensity,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// `u'(0) = u'(T) = u(0)`
    Bc1,
    /// `u'(0) = u'(T)`, `u(0) = 0`
    Bc2,
    /// `u(0) = u(T)`, `u'(0) = 0`
    Bc3,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 3] = [Self::Bc1, Self::Bc2, Self::Bc3];

    /// `B(u) ∈ ℝ²`, evaluated from the endpoint samples.
    pub fn defect(&self, u: &GridFunction) -> [f64; 2] {
        let n = u.grid().intervals();
        let (u0, ut, du0, dut) = (u.u[0], u.u[n], u.du[0], u.du[n]);
        match self {
            Self::Bc1 => [dut - u0, du0 - u0],
            Self::Bc2 => [dut - du0, u0],
            Self::Bc3 => [ut - u0, du0],
        }
    }

    /// `(e(t), e'(t))` for the kernel generator `e`.
    pub fn kernel_basis(&self, t: f64) -> (f64, f64) {
        match self {
            Self::Bc1 => (1.0 + t, 1.0),
            Self::Bc2 => (t, 1.0),
            Self::Bc3 => (1.0, 0.0),
        }
    }

    /// Kernel parameter `a` such that `‖a·e‖∞ = r` on `[0, T]`; the kernel
    /// part of the ball of radius `r` is `]−a, a[`.
    pub fn kernel_radius(&self, r: f64, length: f64) -> f64 {
        match self {
            Self::Bc1 => r / (1.0 + length),
            Self::Bc2 => r / length,
            Self::Bc3 => r,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bc1 => "bc1",
            Self::Bc2 => "bc2",
            Self::Bc3 => "bc3",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bc1" | "1" => Ok(Self::Bc1),
            "bc2" | "2" => Ok(Self::Bc2),
            "bc3" | "3" => Ok(Self::Bc3),
            other => Err(invalid(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// An element `a·e` of ker L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelElement {
    pub a: f64,
    pub bc: BoundaryCondition,
}

pub fn kernel_embed(e: KernelElement, grid: Grid) -> GridFunction {
    GridFunction::from_fn(grid, |t| {
        let (v, dv) = e.bc.kernel_basis(t);
        (e.a * v, e.a * dv)
    })
}

/// Linear functional whose zero set is Im L: `∫₀ᵀ w` (Bc1, Bc2) or
/// `∫₀ᵀ ∫₀ˢ w` (Bc3).
pub fn image_defect(w: &SampledDensity, bc: BoundaryCondition) -> f64 {
    match bc {
        BoundaryCondition::Bc1 | BoundaryCondition::Bc2 => integrate(w),
        BoundaryCondition::Bc3 => double_cumulative(w).last(),
    }
}

/// Kernel coordinate of `P u`.
pub fn kernel_coordinate(u: &GridFunction, bc: BoundaryCondition) -> f64 {
    let grid = u.grid();
    match bc {
        BoundaryCondition::Bc1 => (u.u[grid.intervals()] - u.u[0]) / grid.length(),
        BoundaryCondition::Bc2 => u.du[0],
        BoundaryCondition::Bc3 => integrate(&u.values()) / grid.length(),
    }
}

pub fn project_p(u: &GridFunction, bc: BoundaryCondition) -> GridFunction {
    kernel_embed(KernelElement { a: kernel_coordinate(u, bc), bc }, *u.grid())
}

/// Coker-L coordinate of `Q w`; `Q w` itself is the constant function with
/// this value.
pub fn project_q(w: &SampledDensity, bc: BoundaryCondition) -> f64 {
    let length = w.grid().length();
    match bc {
        BoundaryCondition::Bc1 | BoundaryCondition::Bc2 => image_defect(w, bc) / length,
        BoundaryCondition::Bc3 => 2.0 / (length * length) * image_defect(w, bc),
    }
}

/// Default image-membership tolerance, `10·h²·‖w‖∞` scaled with `T`.
pub fn image_tolerance(w: &SampledDensity) -> f64 {
    let g = w.grid();
    let h = g.step();
    let scale = g.length().max(g.length() * g.length()).max(1.0);
    10.0 * h * h * w.sup_norm() * scale
}

/// `K_P w`: the solution of `−u'' = w` in dom L ∩ ker P.
///
/// With `V = ∫₀ˢ w` and `W = ∫₀ˢ V`:
/// - Bc1: `u = (W(T)/T)(1 + s) − W`, `u' = W(T)/T − V`
/// - Bc2: `u = −W`, `u' = −V`
/// - Bc3: `u = (1/T)∫₀ᵀ W − W`, `u' = −V`
pub fn right_inverse_kp(w: &SampledDensity, bc: BoundaryCondition) -> Result<GridFunction> {
    let defect = image_defect(w, bc);
    let tolerance = image_tolerance(w);
    if defect.abs() > tolerance {
        return Err(Error::NotInImage { defect, tolerance });
    }
    Ok(right_inverse_unchecked(w, bc))
}

pub(crate) fn right_inverse_unchecked(w: &SampledDensity, bc: BoundaryCondition) -> GridFunction {
    let grid = *w.grid();
    let length = grid.length();
    let v = cumulative_integral(w);
    let big_w = cumulative_integral(&v);
    let (u, du): (Vec<f64>, Vec<f64>) = match bc {
        BoundaryCondition::Bc1 => {
            let slope = big_w.last() / length;
            grid.nodes()
                .enumerate()
                .map(|(i, s)| (slope * (1.0 + s) - big_w.w[i], slope - v.w[i]))
                .unzip()
        }
        BoundaryCondition::Bc2 => big_w.w.iter().zip(&v.w).map(|(a, b)| (-a, -b)).unzip(),
        BoundaryCondition::Bc3 => {
            let mean = integrate(&big_w) / length;
            big_w.w.iter().zip(&v.w).map(|(a, b)| (mean - a, -b)).unzip()
        }
    };
    GridFunction::new(grid, u, du).expect("finite samples from finite density")
}

/// `J`: identity on the real coordinates of coker L and ker L.
pub fn iso_j(c: f64, bc: BoundaryCondition) -> KernelElement {
    KernelElement { a: c, bc }
}

/// A boundary condition bound to a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceFrame {
    pub bc: BoundaryCondition,
    pub grid: Grid,
}

impl CoincidenceFrame {
    pub fn new(bc: BoundaryCondition, grid: Grid) -> Self {
        Self { bc, grid }
    }

    pub fn embed(&self, a: f64) -> GridFunction {
        kernel_embed(KernelElement { a, bc: self.bc }, self.grid)
    }

    pub fn project_p(&self, u: &GridFunction) -> GridFunction {
        project_p(u, self.bc)
    }

    pub fn project_q(&self, w: &SampledDensity) -> f64 {
        project_q(w, self.bc)
    }

    pub fn image_defect(&self, w: &SampledDensity) -> f64 {
        image_defect(w, self.bc)
    }

    /// `(Id − Q) w`
    pub fn complement(&self, w: &SampledDensity) -> SampledDensity {
        w.shifted(self.project_q(w))
    }

    pub fn right_inverse(&self, w: &SampledDensity) -> Result<GridFunction> {
        right_inverse_kp(w, self.bc)
    }
}
