//! Numerical laboratory for the convolution-translation mollifier on
//! half-space grids.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commutator;
mod conv;
pub mod energy;
pub mod error;
pub mod exponents;
pub mod field;
pub mod lemma_lab;
pub mod mollifier;
pub mod sum;
pub mod synth;

pub use error::{LabError, Result};
pub use field::{Field, HalfSpaceGrid, ScalarField, TensorField, VectorField3};

/// Library version, as recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
