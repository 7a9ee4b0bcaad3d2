//! Quasi-arithmetic means and averages induced by gradient maps of convex
//! generators, with the dually flat constructions built on them, geometric
//! means of SPD matrices and quasi-arithmetic mixtures of discrete densities.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averages;
pub mod cli;
pub mod divergences;
pub mod dually_flat;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod mixtures;
pub mod sampling;
pub mod spd;

pub use error::{Error, Result};
pub use linalg::Point;
