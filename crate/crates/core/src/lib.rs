//! Discrete laboratory for dyadic harmonic analysis on `[0,1)^d`, `d ∈ {1, 2}`.
//!
//! Functions are piecewise constant on the cells of a dyadic grid, so every
//! average, supremum over cubes and norm is an exact finite computation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compactness;
pub mod error;
pub mod exponent;
pub mod extrapolation;
pub mod grid;
pub mod maximal;
pub mod opnorm;
pub mod quadrature;
pub mod sampling;
pub mod spaces;
pub mod sparse;
pub mod weights;

pub use error::{Error, Result};
pub use exponent::{Exponent, Rational};
pub use grid::{Cube, DyadicCube, Grid, GridFunction, Lattice, Shift};
pub use maximal::{bilinear_maximal, iterate_maximal, maximal, GridOperator, Identity, MaximalOperator};
pub use sampling::Sampler;
pub use spaces::{SpaceKind, SpaceSpec};
pub use sparse::{cz_sparse_family, sparse_operator, verify_sparse, SparseFamily};
pub use weights::{ainf_constant, ap_constant, limited_range_constant, power_weight, Weight};
