#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::collapsible_match)]

pub mod catalog;
pub mod error;
pub mod expr;
pub mod numerics;
pub mod symmetry;
pub mod system;
pub mod trajectory;
pub mod invariant_solutions;
pub mod linear;
pub mod solver;
pub mod validate;

pub use error::{Error, Result};
pub use expr::{Dual, Expr, Mode};
pub use system::{DODSystem, DelayRelation, JetPoint, LinearDODS, SampleBox, VectorField};
