//! Numerical verification of a family of locally conformally Kähler
//! metrics g_ε on Hopf manifolds S^(2n−1)×S¹ and on S³×S³ with the
//! Calabi-Eckmann complex structure.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod arrays;
pub mod charts;
pub mod complexgeom;
pub mod convergence;
pub mod error;
pub mod exec;
pub mod field;
pub mod jet;
pub mod metrics;
pub mod sampling;
pub mod stability;
pub mod tensor;

pub use error::{GeometryError, Result};
