//! Numerical conformal maps: lightning Laplace solves compressed by AAA rational approximation.

// NaN must fail range checks, so `!(x > t)` is used on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate lapack_src;

pub mod aaa;
pub mod basis;
pub mod conformal;
pub mod error;
pub mod geometry;
pub mod lightning;

pub use error::{Error, Result};
