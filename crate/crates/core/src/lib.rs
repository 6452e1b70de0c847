//! Robust three-field topology optimization with boundary padding for the
//! density filter: mesh mirroring, approximate volume, or a real extension
//! of the design domain.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod filter;
pub mod geometry;
pub mod mesh;
pub mod optimizer;
pub mod physics;
pub mod problems;
pub mod projection;

pub use error::{Error, Result};
