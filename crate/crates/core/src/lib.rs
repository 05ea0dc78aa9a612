// Negated comparisons are used deliberately so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::field_reassign_with_default))]

pub mod assembly;
pub mod diffusion;
pub mod error;
pub mod grid;
pub mod laws;
pub mod linalg;
pub mod loading;
pub mod mechanics;
pub mod numdiff;
pub mod operators;
pub mod simulation;
pub mod tensor;

pub use error::{Error, Result};
