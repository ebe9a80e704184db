//! Explicit monotone finite-difference scheme on a box grid.
//!
//! Horizontal derivatives are taken along group flows `p·(s e)`, whose
//! endpoints fall off the grid and are read by trilinear interpolation.
//! Diffusion uses second differences along the eigendirections of the
//! diffusion matrix; the Hamiltonian is treated with Lax–Friedrichs.

mod export;
mod grid;
mod scheme;

use thiserror::Error;

use crate::hgroup::Point;

pub use export::{read_grid, write_grid, write_slice_csv, ExportedGrid};
pub use grid::{GridField, GridFunction, GridSpec};
pub use scheme::{monotonicity_probe, run, step, MonotonicityReport, SchemeConfig, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("CFL number {cfl} exceeds one")]
    CflViolation { cfl: f64 },
    #[error("Lax-Friedrichs coefficient {sigma} below the Hamiltonian's Lipschitz constant {lip_w}")]
    InsufficientDissipation { sigma: f64, lip_w: f64 },
    #[error("non-finite value at {point:?}, t = {time}")]
    NanDetected { point: Point, time: f64 },
    #[error("stencil point {point:?} lies outside the grid")]
    OutOfDomain { point: Point },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid scheme configuration: {0}")]
    InvalidConfig(&'static str),
}
