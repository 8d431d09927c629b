use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid instance: {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),

    #[error("slot `{slot}` has zero duration but {energy} J assigned")]
    Inconsistent { slot: &'static str, energy: f64 },

    #[error("inner solve failed at z = {z}: {reason}")]
    SolverFailure { z: f64, reason: String },

    #[error("raw-constraint audit failed: {0}")]
    AuditFailure(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
