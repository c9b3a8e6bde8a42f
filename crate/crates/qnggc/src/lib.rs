//! Experiment runner on top of `qnggc-core`: TOML configs, seeded multi-run
//! benchmarks, grid search and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod error;
pub mod output;

pub use error::{BenchError, Result};
