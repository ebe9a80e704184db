//! Numerical toolkit for semilinear parabolic and Hamilton–Jacobi equations
//! on the first Heisenberg group.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ccmetric;
pub mod doubling;
pub mod hcalc;
pub mod hgroup;
pub mod hopflax;
pub mod oracles;
pub mod regularity;
pub mod sampling;
pub mod solver;

pub use hgroup::{HorizontalElement, Point};
