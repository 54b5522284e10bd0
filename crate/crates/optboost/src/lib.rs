//! File formats, reports and the command-line front end for `optboost-core`.
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod data;
pub mod error;
pub mod report;
pub mod synthetic;
pub mod trace_file;

pub use error::{Error, Result};
