//! Entropy-bounded discontinuous Galerkin (EBDG) solver for the compressible
//! Euler equations.
//!
//! High-order modal DG on 1D intervals and 2D straight/curved quads and
//! triangles, kept admissible by an entropy-constrained linear-scaling
//! limiter. The time step obeys a per-element-type CFL number obtained once
//! per (shape, order) from a small linear program, which makes the limited
//! element means provably entropy-bounded.
//!
//! Layout:
//! - [`euler`]: point-wise gas dynamics (states, fluxes, entropy, wave speeds)
//! - [`quadrature`], [`basis`]: reference-element rules and modal bases
//! - [`geometry`]: meshes, mappings, Jacobians, Gmsh input
//! - [`dg`]: the semi-discrete residual
//! - [`limiter`]: entropy-bound estimation and the scaling limiter
//! - [`cfl`]: the CFL optimization and the time-step rule
//! - [`timeint`], [`driver`]: RK steppers and the main loop
//! - [`cases`], [`config`], [`output`]: built-in problems, run configs, VTK/CSV

pub mod basis;
pub mod cases;
pub mod cfl;
pub mod config;
pub mod dg;
pub mod driver;
pub mod error;
pub mod euler;
pub mod geometry;
pub mod limiter;
pub mod output;
pub mod quadrature;
pub mod timeint;

pub use error::{Error, Result};
pub use euler::{GasModel, Primitive, State};
