//! Spectral gaps of mean-field O(n) spin models.

// `!(x > 0.0)` guards are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod error;
pub mod funcineq;
pub mod ising_chain;
pub mod linalg;
pub mod logspace;
pub mod measures;
pub mod oscillator;
pub mod potential;
pub mod quad;
pub mod scaling;
pub mod schrodinger;
pub mod specialfn;

pub use error::{Error, Result};
