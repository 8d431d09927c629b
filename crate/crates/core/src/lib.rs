//! Joint communication and computation cooperation for a two-user
//! wireless-powered mobile-edge computing system.
//!
//! An energy node charges two users over the air. User 1 has no direct link
//! to the edge server, so user 2 relays its offloaded bits and may also
//! compute part of them itself. The crate finds the time, energy, CPU and
//! task-split allocation maximizing the weighted sum computation rate:
//!
//! * [`model`] holds parameters and the raw link/energy formulas,
//! * [`transform`] builds the convex subproblem for a fixed helper compute time,
//! * [`solver`] solves it with a barrier method and searches that time by golden section,
//! * [`benchmarks`] and [`experiments`] compare against restricted cooperation modes,
//! * [`oracle`] verifies solutions independently of the solver.
//!
//! The crate is `no_std` (it needs `alloc`).
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod linalg;
mod math;

pub mod benchmarks;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use model::{
    ChannelGains, CooperationMode, CpuFreqs, Instance, OperatingPoint, PathLossModel, SystemParams, TaskSplit,
    TimeAllocation, TransmitPowers, Violation,
};
pub use solver::{solve, solve_with, GoldenSectionConfig, Solution, SolveOptions, SubSolution};
pub use transform::{Allocation, ConvexProgram, EnergyVars};
