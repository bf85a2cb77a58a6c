//! Boundary triples for Laplacians on metric graphs and their discretizations.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod config;
pub mod dirac;
pub mod discrete;
pub mod error;
pub mod exec;
pub mod graph;
pub mod numeric;
pub mod report;

pub use error::{Error, Result};
pub use exec::Execution;
