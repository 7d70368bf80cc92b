//! First-order orthonormal-frame evolution of the Einstein-Euler system with
//! entropy on a periodic 3-torus.
//!
//! The formulation evolves a 52-component state per grid point: the spatial
//! frame coefficients of a fluid-comoving tetrad, the connection coefficients
//! in a Fermi-propagated gauge, the electric and magnetic parts of the Weyl
//! tensor, and the matter variables (energy density, rest-mass density,
//! entropy, entropy gradient). The time axis of the tetrad is the fluid
//! 4-velocity, so the Euler equations reduce to transport equations and the
//! full system is symmetric hyperbolic: `M^0 dz/dt + M^A d_A z + L(z) = 0`
//! with symmetric `M^A` and positive-definite `M^0`.
//!
//! Modules:
//! - [`frame`]: frame metric, Levi-Civita symbols, projectors, index maps.
//! - [`eos`]: two-parameter equations of state `rho = P(r, s)` and derived
//!   thermodynamic coefficients (pressure, sound speed).
//! - [`state`]: the per-point state vector, its packing, and expansion of the
//!   stored connection components to the full symbol.
//! - [`grid`]: periodic structure-of-points field storage and centered
//!   finite-difference / Kreiss-Oliger stencils.
//! - [`geometry`]: coordinate-space curvature helpers (Christoffel symbols,
//!   Riemann/Ricci of the induced metric) used by initial data and oracles.
//! - [`initial`]: construction of the full evolution state from geometric
//!   Cauchy data `(g0, k, r0, s0, v)` on the initial slice.
//! - [`rhs`]: the reduced evolution equations, principal-matrix assembly,
//!   and the block solver for `M^0 zdot = -(M^A d_A z + L)`.
//! - [`evolve`]: RK4 time integrator with CFL control.
//! - [`diag`]: residual diagnostics (torsion, Weyl decomposition defect,
//!   divergence of the Friedrich tensor, Euler residual), characteristic
//!   speeds, and uniformly-local Sobolev norms.
//! - [`scenario`], [`config`], [`driver`], [`output`]: simulation front
//!   end — scenario library, run configuration, orchestration, and file
//!   output.

pub mod config;
pub mod diag;
pub mod driver;
pub mod eos;
pub mod evolve;
pub mod frame;
pub mod geometry;
pub mod grid;
pub mod initial;
pub mod output;
pub mod rhs;
pub mod scenario;
pub mod state;

pub use eos::{BarotropicFluid, EntropicPolytrope, EquationOfState, ThermoPoint};
pub use grid::{FieldSet, Grid};
pub use state::{State, NFIELDS};

/// Library error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("inadmissible state at point {index}: {reason}")]
    Inadmissible { index: usize, reason: String },
    #[error("degenerate spatial frame: {0}")]
    DegenerateFrame(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
