//! Inner convex solve at fixed `z` and the outer golden-section search.

mod barrier;
mod golden;

use alloc::format;
use alloc::string::String;

pub use barrier::{BarrierSettings, BarrierStatus};
pub use golden::{is_unimodal, maximize, GoldenOutcome, GoldenSectionConfig, GoldenStep, GoldenTrace, Prescan};

use crate::error::{Error, Result};
use crate::model::{CooperationMode, Instance, OperatingPoint, TransmitPowers};
use crate::oracle::{audit_raw_feasibility, FeasibilityReport, RAW_TOLERANCE};
use crate::transform::{assemble_subproblem, Allocation, ConvexProgram, NUM_VARS};

/// Optimum of one subproblem.
#[derive(Debug, Clone)]
pub struct SubSolution {
    pub z: f64,
    pub mode: CooperationMode,
    /// Weighted bits per frame.
    pub objective: f64,
    pub allocation: Allocation,
    pub x: [f64; NUM_VARS],
    pub status: BarrierStatus,
    /// Largest constraint violation, in each constraint's own units.
    pub residual: f64,
    /// Duality gap bound in objective units.
    pub gap: f64,
    pub rel_gap: f64,
    pub newton_steps: usize,
    /// Variables presolve held at zero.
    pub fixed: [bool; NUM_VARS],
    pub message: String,
}

impl SubSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == BarrierStatus::Optimal
    }
}

/// Solves one subproblem to relative gap `settings.gap_tol`.
pub fn solve_subproblem(prog: &ConvexProgram, settings: &BarrierSettings) -> SubSolution {
    let out = barrier::solve(prog, settings);
    let objective = prog.objective_value(&out.x);
    SubSolution {
        z: prog.z,
        mode: prog.mode,
        objective,
        allocation: Allocation::from_vector(&out.x, prog.z),
        x: out.x,
        status: out.status,
        residual: prog.max_residual(&out.x),
        gap: out.gap,
        rel_gap: if objective > 0.0 { out.gap / objective } else { out.gap },
        newton_steps: out.newton_steps,
        fixed: out.fixed,
        message: out.message,
    }
}

/// Maximum weighted bits at `t2c = z`, failing unless the solve is optimal.
pub fn evaluate(inst: &Instance, z: f64, mode: CooperationMode, settings: &BarrierSettings) -> Result<SubSolution> {
    let prog = assemble_subproblem(inst, z, mode)?;
    let sub = solve_subproblem(&prog, settings);
    if !sub.is_optimal() {
        let reason = format!("{:?} after {} Newton steps {}", sub.status, sub.newton_steps, sub.message);
        return Err(Error::SolverFailure { z, reason });
    }
    if sub.residual > RAW_TOLERANCE * prog.frame.max(1.0) {
        return Err(Error::SolverFailure { z, reason: format!("residual {:e}", sub.residual) });
    }
    Ok(sub)
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub mode: CooperationMode,
    pub z_star: f64,
    pub sub: SubSolution,
    pub point: OperatingPoint,
    /// Bits per frame of each user.
    pub b1: f64,
    pub b2: f64,
    /// Computation rates (bits/s).
    pub x1: f64,
    pub x2: f64,
    pub wscr: f64,
    pub trace: GoldenTrace,
    pub audit: FeasibilityReport,
}

impl Solution {
    pub fn powers(&self) -> &TransmitPowers {
        &self.point.powers
    }

    /// True if a pre-scan ran and its samples were not unimodal.
    pub fn unimodality_warning(&self) -> bool {
        self.trace.prescan.as_ref().is_some_and(|p| !p.unimodal)
    }
}

fn finish(inst: &Instance, sub: SubSolution, trace: GoldenTrace) -> Result<Solution> {
    let point = sub.allocation.operating_point()?;
    let audit = audit_raw_feasibility(inst, sub.mode, &point);
    if !audit.passed() {
        return Err(Error::AuditFailure(format!("{} at z = {}", audit.summary(), sub.z)));
    }
    let p = inst.params();
    let (b1, b2) = (point.split.b1(), point.split.b2());
    let (x1, x2) = (b1 / p.frame, b2 / p.frame);
    Ok(Solution {
        mode: sub.mode,
        z_star: sub.z,
        wscr: p.w1 * x1 + p.w2 * x2,
        sub,
        point,
        b1,
        b2,
        x1,
        x2,
        trace,
        audit,
    })
}

/// Golden-section search of the helper computing time for any mode.
pub fn golden_section(
    inst: &Instance,
    mode: CooperationMode,
    cfg: &GoldenSectionConfig,
    settings: &BarrierSettings,
) -> Result<Solution> {
    let f = |z: f64| evaluate(inst, z, mode, settings).map(|s| (s.objective, s));
    let out = maximize(f, cfg, inst.params().frame)?;
    finish(inst, out.payload, out.trace)
}

/// Search and inner-solve settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    /// Search settings; `upper` is clamped to the frame length.
    pub golden: GoldenSectionConfig,
    pub barrier: BarrierSettings,
}

impl SolveOptions {
    pub fn with_prescan(mut self, points: usize) -> Self {
        self.golden.prescan_points = points;
        self
    }
}

/// Optimal allocation for `mode` with default settings.
pub fn solve(inst: &Instance, mode: CooperationMode) -> Result<Solution> {
    solve_with(inst, mode, &SolveOptions::default())
}

/// Relay-only cooperation has no helper computing, so it is a single
/// subproblem at `z = 0`; the other modes run the search.
pub fn solve_with(inst: &Instance, mode: CooperationMode, opts: &SolveOptions) -> Result<Solution> {
    match mode {
        CooperationMode::CommOnly => {
            let sub = evaluate(inst, 0.0, mode, &opts.barrier)?;
            finish(inst, sub, GoldenTrace { evaluations: 1, ..GoldenTrace::default() })
        }
        _ => {
            let mut cfg = opts.golden;
            cfg.upper = cfg.upper.min(inst.params().frame);
            golden_section(inst, mode, &cfg, &opts.barrier)
        }
    }
}
