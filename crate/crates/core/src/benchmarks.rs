//! Full cooperation against the relay-only and helper-only benchmarks.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{CooperationMode, Instance};
use crate::solver::{solve_with, Solution, SolveOptions};

/// Relative improvement of full cooperation over a benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gain {
    Finite(f64),
    /// The benchmark computes nothing while full cooperation does.
    Infinite,
}

impl Gain {
    fn between(full: f64, bench: f64) -> Self {
        if bench > 0.0 {
            Gain::Finite(full / bench - 1.0)
        } else if full > 0.0 {
            Gain::Infinite
        } else {
            Gain::Finite(0.0)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Gain::Finite(g) => Some(g),
            Gain::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub instance: Instance,
    pub full: Result<Solution>,
    /// Benchmark 1: relaying only.
    pub comm_only: Result<Solution>,
    /// Benchmark 2: helper computing only.
    pub comp_only: Result<Solution>,
}

impl ComparisonRow {
    pub fn get(&self, mode: CooperationMode) -> &Result<Solution> {
        match mode {
            CooperationMode::Full => &self.full,
            CooperationMode::CommOnly => &self.comm_only,
            CooperationMode::CompOnly => &self.comp_only,
        }
    }

    pub fn wscr(&self, mode: CooperationMode) -> Option<f64> {
        self.get(mode).as_ref().ok().map(|s| s.wscr)
    }

    pub fn failed(&self) -> bool {
        CooperationMode::ALL.iter().any(|&m| self.get(m).is_err())
    }

    pub fn failures(&self) -> Vec<(CooperationMode, &Error)> {
        CooperationMode::ALL.iter().filter_map(|&m| self.get(m).as_ref().err().map(|e| (m, e))).collect()
    }

    fn gain_over(&self, bench: CooperationMode) -> Option<Gain> {
        Some(Gain::between(self.wscr(CooperationMode::Full)?, self.wscr(bench)?))
    }

    pub fn gain1(&self) -> Option<Gain> {
        self.gain_over(CooperationMode::CommOnly)
    }

    pub fn gain2(&self) -> Option<Gain> {
        self.gain_over(CooperationMode::CompOnly)
    }
}

/// Solves the instance in all three modes.
pub fn run_comparison(inst: &Instance, opts: &SolveOptions) -> ComparisonRow {
    ComparisonRow {
        instance: *inst,
        full: solve_with(inst, CooperationMode::Full, opts),
        comm_only: solve_with(inst, CooperationMode::CommOnly, opts),
        comp_only: solve_with(inst, CooperationMode::CompOnly, opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSummary {
    /// Mean of the per-row finite gains.
    pub mean_gain1: f64,
    pub mean_gain2: f64,
    /// Mean full objective over mean benchmark objective, minus one.
    pub ratio_gain1: f64,
    pub ratio_gain2: f64,
    pub rows: usize,
    pub infinite1: usize,
    pub infinite2: usize,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Averages of the gains over `rows`; infinite gains are counted, not averaged.
pub fn average_gains<'a, I>(rows: I) -> Result<GainSummary>
where
    I: IntoIterator<Item = &'a ComparisonRow>,
{
    let (mut g1, mut g2) = (Vec::new(), Vec::new());
    let (mut full, mut b1, mut b2) = (Vec::new(), Vec::new(), Vec::new());
    let (mut inf1, mut inf2) = (0, 0);
    let mut n = 0;
    for row in rows {
        if let Some((m, e)) = row.failures().first() {
            return Err(Error::SolverFailure {
                z: f64::NAN,
                reason: alloc::format!("row with failed {} solve: {e}", m.name()),
            });
        }
        n += 1;
        full.push(row.wscr(CooperationMode::Full).unwrap_or_default());
        b1.push(row.wscr(CooperationMode::CommOnly).unwrap_or_default());
        b2.push(row.wscr(CooperationMode::CompOnly).unwrap_or_default());
        match row.gain1() {
            Some(Gain::Finite(g)) => g1.push(g),
            _ => inf1 += 1,
        }
        match row.gain2() {
            Some(Gain::Finite(g)) => g2.push(g),
            _ => inf2 += 1,
        }
    }
    if n == 0 {
        return Err(Error::Empty("comparison rows"));
    }
    let (mf, m1, m2) = (mean(&full), mean(&b1), mean(&b2));
    Ok(GainSummary {
        mean_gain1: mean(&g1),
        mean_gain2: mean(&g2),
        ratio_gain1: Gain::between(mf, m1).as_f64(),
        ratio_gain2: Gain::between(mf, m2).as_f64(),
        rows: n,
        infinite1: inf1,
        infinite2: inf2,
    })
}
