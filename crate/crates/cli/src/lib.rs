//! Command-line front end for meanfield-spectra: potential tables, gap
//! sweeps, figure data, functional-inequality constants and the acceptance
//! suite, all driven by one [`config::RunConfig`].

// NaN must fail these range checks too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
