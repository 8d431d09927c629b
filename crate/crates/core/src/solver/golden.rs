//! Golden-section maximization over the helper computing time.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSectionConfig {
    pub lower: f64,
    pub upper: f64,
    /// Section factor.
    pub sigma: f64,
    /// Stop once the interval is no longer than this.
    pub epsilon: f64,
    /// Grid points evaluated before the search; 0 disables the pre-scan.
    pub prescan_points: usize,
}

impl Default for GoldenSectionConfig {
    fn default() -> Self {
        Self { lower: 0.0, upper: 1.0, sigma: 0.618, epsilon: 1e-4, prescan_points: 0 }
    }
}

impl GoldenSectionConfig {
    pub fn with_prescan(mut self, points: usize) -> Self {
        self.prescan_points = points;
        self
    }

    pub fn validate(&self, frame: f64) -> Result<()> {
        if !(self.lower >= 0.0 && self.lower < self.upper && self.upper <= frame) {
            return Err(Error::Domain { what: "search interval", value: self.upper - self.lower });
        }
        if !(self.sigma > 0.5 && self.sigma < 1.0) {
            return Err(Error::Domain { what: "section factor", value: self.sigma });
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain { what: "accuracy", value: self.epsilon });
        }
        if self.prescan_points != 0 && self.prescan_points < 3 {
            return Err(Error::Domain { what: "pre-scan points", value: self.prescan_points as f64 });
        }
        Ok(())
    }

    /// Worst-case number of interval updates for a search over `[a0, a1]`.
    pub fn iteration_bound(&self, a0: f64, a1: f64) -> usize {
        let ratio = self.epsilon / (a1 - a0);
        if ratio >= 1.0 {
            return 0;
        }
        math::ceil(math::ln(ratio) / math::ln(self.sigma)) as usize + 2
    }
}

/// State at the start of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenStep {
    pub a0: f64,
    pub a1: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub s_lambda: f64,
    pub s_gamma: f64,
    /// Objective evaluations spent reaching this state.
    pub new_evaluations: usize,
}

impl GoldenStep {
    pub fn width(&self) -> f64 {
        self.a1 - self.a0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prescan {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub unimodal: bool,
    /// Interval the search was restarted on.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GoldenTrace {
    /// One entry per iteration plus the terminal state.
    pub steps: Vec<GoldenStep>,
    pub evaluations: usize,
    pub prescan: Option<Prescan>,
}

impl GoldenTrace {
    /// Number of interval updates performed.
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

pub struct GoldenOutcome<P> {
    pub z: f64,
    pub value: f64,
    pub payload: P,
    pub trace: GoldenTrace,
}

/// Increases then decreases, with plateaus allowed within `tol` relative.
pub fn is_unimodal(values: &[f64], tol: f64) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300);
    let mut falling = false;
    for w in values.windows(2) {
        if close(w[0], w[1]) {
            continue;
        }
        if w[1] > w[0] {
            if falling {
                return false;
            }
        } else {
            falling = true;
        }
    }
    true
}

/// Plain search on `[a0, a1]`: probes reused, one new evaluation per
/// iteration, ties keep the left part.
fn search<P, F>(mut f: F, a0: f64, a1: f64, cfg: &GoldenSectionConfig) -> Result<GoldenOutcome<P>>
where
    F: FnMut(f64) -> Result<(f64, P)>,
{
    let sigma = cfg.sigma;
    let (mut a0, mut a1) = (a0, a1);
    let mut lambda = a0 + (1.0 - sigma) * (a1 - a0);
    let mut gamma = a0 + sigma * (a1 - a0);
    let (mut s_lambda, mut p_lambda) = f(lambda)?;
    let (mut s_gamma, mut p_gamma) = f(gamma)?;
    let mut trace = GoldenTrace { steps: Vec::new(), evaluations: 2, prescan: None };
    let mut fresh = 2;
    loop {
        trace.steps.push(GoldenStep { a0, a1, lambda, gamma, s_lambda, s_gamma, new_evaluations: fresh });
        if (a1 - a0).abs() <= cfg.epsilon {
            break;
        }
        if s_lambda < s_gamma {
            a0 = lambda;
            lambda = gamma;
            s_lambda = s_gamma;
            p_lambda = p_gamma;
            gamma = a0 + sigma * (a1 - a0);
            (s_gamma, p_gamma) = f(gamma)?;
        } else {
            a1 = gamma;
            gamma = lambda;
            s_gamma = s_lambda;
            p_gamma = p_lambda;
            lambda = a0 + (1.0 - sigma) * (a1 - a0);
            (s_lambda, p_lambda) = f(lambda)?;
        }
        trace.evaluations += 1;
        fresh = 1;
    }
    Ok(if s_lambda < s_gamma {
        GoldenOutcome { z: gamma, value: s_gamma, payload: p_gamma, trace }
    } else {
        GoldenOutcome { z: lambda, value: s_lambda, payload: p_lambda, trace }
    })
}

/// Maximizes `f` over `[cfg.lower, cfg.upper]`, optionally after a grid
/// pre-scan that narrows the interval to the best grid point's neighbours.
/// Grid points at or beyond `frame` are pulled back to `frame - epsilon`.
pub fn maximize<P, F>(mut f: F, cfg: &GoldenSectionConfig, frame: f64) -> Result<GoldenOutcome<P>>
where
    F: FnMut(f64) -> Result<(f64, P)>,
{
    cfg.validate(frame)?;
    if cfg.prescan_points == 0 {
        return search(f, cfg.lower, cfg.upper, cfg);
    }
    let n = cfg.prescan_points;
    let step = (cfg.upper - cfg.lower) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            let z = cfg.lower + step * i as f64;
            if z >= frame {
                frame - cfg.epsilon
            } else {
                z
            }
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    let mut best: Option<(usize, f64, P)> = None;
    for (i, &z) in grid.iter().enumerate() {
        let (v, p) = f(z)?;
        values.push(v);
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((i, v, p));
        }
    }
    let (i_best, v_best, p_best) = best.expect("grid has at least three points");
    let lo = grid[i_best.saturating_sub(1)];
    let hi = grid[(i_best + 1).min(n - 1)];
    let unimodal = is_unimodal(&values, 1e-8);
    let inner = search(&mut f, lo, hi, cfg)?;
    let mut trace = inner.trace;
    trace.evaluations += n;
    trace.prescan = Some(Prescan { grid: grid.clone(), values, unimodal, bracket: (lo, hi) });
    Ok(if inner.value >= v_best {
        GoldenOutcome { z: inner.z, value: inner.value, payload: inner.payload, trace }
    } else {
        GoldenOutcome { z: grid[i_best], value: v_best, payload: p_best, trace }
    })
}
