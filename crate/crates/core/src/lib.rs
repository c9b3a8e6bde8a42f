#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod circuits;
pub mod error;
pub mod geometry;
pub mod gradients;
pub mod observables;
pub mod optimizer;
pub mod problems;
pub mod statevector;

pub use error::{Error, Result};
