//! Parallel sweep execution and the verification pass.

use rayon::prelude::*;
use wpmec_core::experiments::{region_point, RegionPoint, SweepRow, SweepSpec, REGION_MODES};
use wpmec_core::oracle::{
    audit_raw_feasibility, perturbation_audit, sample_lower_bounds, scan_s, uniform_grid, FeasibilityReport,
    PerturbationReport, SampleReport, ScanReport, PERTURBATION_STEPS,
};
use wpmec_core::{solve_with, CooperationMode, Instance, PathLossModel, Solution, SolveOptions, SystemParams};

use crate::error::{Error, Result};

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} workers: {e}")))
}

/// Worker count when `--jobs` is absent.
pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs the sweep on `jobs` threads; rows come back in grid order.
pub fn sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(pool(jobs)?.install(|| (0..spec.values.len()).into_par_iter().map(|i| spec.point(i)).collect()))
}

/// Rate-region points ordered by exponent, then weight, then mode.
pub fn region(
    params: &SystemParams,
    pl: &PathLossModel,
    lambdas: &[f64],
    w1_grid: &[f64],
    opts: &SolveOptions,
    jobs: usize,
) -> Result<Vec<RegionPoint>> {
    let tasks: Vec<(f64, f64, CooperationMode)> = lambdas
        .iter()
        .flat_map(|&l| w1_grid.iter().flat_map(move |&w| REGION_MODES.iter().map(move |&m| (l, w, m))))
        .collect();
    let points: Vec<wpmec_core::Result<RegionPoint>> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(l, w, m)| region_point(params, &PathLossModel { exponent: l, ..*pl }, w, m, opts))
            .collect()
    });
    Ok(points.into_iter().collect::<wpmec_core::Result<Vec<_>>>()?)
}

/// Grid size of the inner-optimum scan.
pub const SCAN_POINTS: usize = 21;

/// Outcome of the four independent checks on one solution.
#[derive(Debug, Clone)]
pub struct Verification {
    pub feasibility: FeasibilityReport,
    pub samples: SampleReport,
    pub perturbation: PerturbationReport,
    pub scan: ScanReport,
    pub wscr: f64,
}

impl Verification {
    pub fn feasible(&self) -> bool {
        self.feasibility.passed()
    }

    /// No sampled feasible point beats the solution.
    pub fn samples_below(&self) -> bool {
        self.samples.best <= self.wscr + 1e-9
    }

    pub fn locally_optimal(&self) -> bool {
        !self.perturbation.improved()
    }

    /// The grid maximum of the inner optimum does not beat the search.
    pub fn scan_below(&self) -> bool {
        self.scan.max().is_some_and(|(_, v)| v <= self.wscr * (1.0 + 1e-4))
    }

    pub fn passed(&self) -> bool {
        self.feasible() && self.samples_below() && self.locally_optimal() && self.scan_below()
    }
}

/// Checks `sol` against the raw constraints, random feasible points,
/// local moves and an inner-optimum grid scan.
pub fn verify(inst: &Instance, sol: &Solution, samples: usize, seed: u64) -> Result<Verification> {
    let mode = sol.mode;
    let frame = inst.params().frame;
    let grid = uniform_grid(frame, SCAN_POINTS, 1e-4 * frame);
    Ok(Verification {
        feasibility: audit_raw_feasibility(inst, mode, &sol.point),
        samples: sample_lower_bounds(inst, mode, samples, seed),
        perturbation: perturbation_audit(inst, mode, &sol.point, &PERTURBATION_STEPS),
        scan: scan_s(inst, mode, &grid)?,
        wscr: sol.wscr,
    })
}

/// Solves and, with `inject_fault`, inflates the relayed bits so that
/// the audit must fail. Only for exercising the failure path.
pub fn solve_for_verify(
    inst: &Instance,
    mode: CooperationMode,
    opts: &SolveOptions,
    inject_fault: bool,
) -> Result<Solution> {
    let mut sol = solve_with(inst, mode, opts)?;
    if inject_fault {
        let s = &mut sol.point.split;
        s.b10 = s.b10 * 1.1 + 1.0;
        s.b20 = s.b20 * 1.1 + 1.0;
        sol.wscr = wpmec_core::oracle::wscr(inst, &sol.point);
    }
    Ok(sol)
}
