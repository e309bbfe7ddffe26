//! Positive solutions of `u'' + f(t, u, u') = 0` on `[0, T]` under three
//! mixed boundary conditions, via Mawhin's coincidence-degree framework.
//!
//! - [`numerics`]: uniform grids, sampled functions, quadrature.
//! - [`nonlinearity`]: `f`, its extension `f̃`, the Nemytskii operator and
//!   growth-condition probes.
//! - [`coincidence`]: per-boundary-condition `P`, `Q`, `K_P`, `J`.
//! - [`solver`]: the fixed-point operator `Φ`, damped Picard / Newton-GMRES
//!   iteration and parameter continuation.
//! - [`certification`]: kernel-reduced degree, Nagumo bounds, positivity and
//!   hypothesis checks.
//! - [`corpus`]: concrete problems and an independent shooting oracle.
//! - [`cli`]: the command-line front end.

pub mod certification;
pub mod cli;
pub mod coincidence;
pub mod corpus;
pub mod error;
pub mod nonlinearity;
pub mod numerics;
pub mod solver;

pub use coincidence::{BoundaryCondition, CoincidenceFrame, KernelElement};
pub use error::{Error, Result};
pub use nonlinearity::{CarathFn, ExtendedFn, NagumoPair};
pub use numerics::{Grid, GridFunction, SampledDensity};
pub use solver::{HomotopyParams, SolveOptions, SolveReport, Strategy};
