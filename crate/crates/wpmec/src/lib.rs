//! Standard-library companion of `wpmec-core`: flat config files, CSV
//! output, parallel sweeps and the `wpmec` command line.

// `!(x > 0.0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::Config;
pub use error::{Error, Result};
