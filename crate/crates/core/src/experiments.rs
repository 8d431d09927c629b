//! Parameter sweeps, the figure presets and rate regions.

use alloc::vec::Vec;

use crate::benchmarks::{run_comparison, ComparisonRow};
use crate::error::{Error, Result};
use crate::model::{CooperationMode, Instance, PathLossModel, SystemParams};
use crate::solver::{solve_with, SolveOptions};

/// Field varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKey {
    DE1,
    DE2,
    D12,
    D20,
    Lambda,
    P0,
    W1,
}

impl SweepKey {
    pub const ALL: [SweepKey; 7] = [Self::DE1, Self::DE2, Self::D12, Self::D20, Self::Lambda, Self::P0, Self::W1];

    pub fn name(self) -> &'static str {
        match self {
            Self::DE1 => "d_e1",
            Self::DE2 => "d_e2",
            Self::D12 => "d_12",
            Self::D20 => "d_20",
            Self::Lambda => "lambda",
            Self::P0 => "p0",
            Self::W1 => "w1",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// True for the four distances.
    pub fn is_distance(self) -> bool {
        matches!(self, Self::DE1 | Self::DE2 | Self::D12 | Self::D20)
    }

    fn apply(self, params: &mut SystemParams, pl: &mut PathLossModel, v: f64) {
        match self {
            Self::DE1 => pl.d_e1 = v,
            Self::DE2 => pl.d_e2 = v,
            Self::D12 => pl.d_12 = v,
            Self::D20 => pl.d_20 = v,
            Self::Lambda => pl.exponent = v,
            Self::P0 => params.p0 = v,
            Self::W1 => *params = params.with_w1(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub params: SystemParams,
    pub path_loss: PathLossModel,
    pub key: SweepKey,
    pub values: Vec<f64>,
    pub options: SolveOptions,
}

/// `start, start + step, ...` up to `stop` inclusive.
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9) as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// `n` evenly spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl SweepSpec {
    pub fn new(key: SweepKey, values: Vec<f64>) -> Self {
        Self {
            params: SystemParams::default(),
            path_loss: PathLossModel::default(),
            key,
            values,
            options: SolveOptions::default(),
        }
    }

    /// Grid non-empty, finite and strictly monotone.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Empty("sweep grid"));
        }
        if let Some(&v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain { what: "sweep value", value: v });
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Domain { what: "sweep grid (not strictly monotone)", value: self.values[0] });
        }
        Ok(())
    }

    /// Instance at one grid value, with gains recomputed from the distances.
    pub fn instance_at(&self, value: f64) -> Result<Instance> {
        let mut params = self.params;
        let mut pl = self.path_loss;
        self.key.apply(&mut params, &mut pl, value);
        Instance::from_path_loss(params, &pl)
    }

    /// Row for grid index `i`; failures stay inside the row.
    pub fn point(&self, i: usize) -> SweepRow {
        let value = self.values[i];
        let comparison = self.instance_at(value).map(|inst| run_comparison(&inst, &self.options));
        SweepRow { key: self.key, value, comparison }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub key: SweepKey,
    pub value: f64,
    /// `Err` if the grid value gave an invalid instance.
    pub comparison: Result<ComparisonRow>,
}

impl SweepRow {
    pub fn wscr(&self, mode: CooperationMode) -> Option<f64> {
        self.comparison.as_ref().ok()?.wscr(mode)
    }
}

/// Figure setups. Grid steps are 1 m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Self::Fig4, Self::Fig5, Self::Fig6, Self::Fig7];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// The sweep of a distance figure, starting from `params` and `pl`.
    /// `None` for the rate-region figure.
    pub fn sweep(self, params: SystemParams, pl: PathLossModel, options: SolveOptions) -> Option<SweepSpec> {
        let (key, values, pl) = match self {
            Self::Fig4 => (SweepKey::D20, linspace_step(5.0, 20.0, 1.0), pl),
            Self::Fig5 => (SweepKey::D12, linspace_step(4.0, 8.0, 1.0), PathLossModel { d_e2: 3.0, d_20: 8.0, ..pl }),
            Self::Fig6 => (SweepKey::DE2, linspace_step(4.0, 8.0, 1.0), pl),
            Self::Fig7 => return None,
        };
        Some(SweepSpec { params, path_loss: pl, key, values, options })
    }

    /// The default-parameter sweep.
    pub fn default_sweep(self) -> Option<SweepSpec> {
        self.sweep(SystemParams::default(), PathLossModel::default(), SolveOptions::default())
    }
}

/// Path-loss exponents of the rate-region figure.
pub const REGION_LAMBDAS: [f64; 2] = [2.5, 3.0];

/// The 21-point weight grid of the rate-region figure.
pub fn region_w1_grid() -> Vec<f64> {
    linspace(0.0, 1.0, 21)
}

/// Sweeps every grid value in order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok((0..spec.values.len()).map(|i| spec.point(i)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    pub lambda: f64,
    pub w1: f64,
    pub mode: CooperationMode,
    /// Rates at the weighted optimum (bits/s).
    pub x1: f64,
    pub x2: f64,
}

impl RegionPoint {
    /// Support value `w1 x1 + (1 - w1) x2`.
    pub fn weighted(&self) -> f64 {
        self.w1 * self.x1 + (1.0 - self.w1) * self.x2
    }
}

/// Modes traced by [`rate_region`].
pub const REGION_MODES: [CooperationMode; 2] = [CooperationMode::Full, CooperationMode::CommOnly];

/// One rate-region point; the path-loss exponent is taken from `pl`.
pub fn region_point(
    params: &SystemParams,
    pl: &PathLossModel,
    w1: f64,
    mode: CooperationMode,
    opts: &SolveOptions,
) -> Result<RegionPoint> {
    if !(0.0..=1.0).contains(&w1) {
        return Err(Error::Domain { what: "w1", value: w1 });
    }
    let inst = Instance::from_path_loss(params.with_w1(w1), pl)?;
    let sol = solve_with(&inst, mode, opts)?;
    Ok(RegionPoint { lambda: pl.exponent, w1, mode, x1: sol.x1, x2: sol.x2 })
}

/// Full and relay-only optima over `w1_grid` at exponent `lambda`,
/// ordered by weight then mode.
pub fn rate_region(
    params: &SystemParams,
    pl: &PathLossModel,
    lambda: f64,
    w1_grid: &[f64],
    opts: &SolveOptions,
) -> Vec<Result<RegionPoint>> {
    let pl = PathLossModel { exponent: lambda, ..*pl };
    w1_grid
        .iter()
        .flat_map(|&w1| REGION_MODES.iter().map(move |&m| (w1, m)))
        .map(|(w1, m)| region_point(params, &pl, w1, m, opts))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Constant,
    Nonincreasing,
    Nondecreasing,
    Mixed,
}

/// Direction of a column, steps within `tol` relative counting as flat.
pub fn trend(values: &[f64], tol: f64) -> Trend {
    let (mut up, mut down) = (false, false);
    for w in values.windows(2) {
        let slack = tol * w[0].abs().max(w[1].abs());
        if w[1] > w[0] + slack {
            up = true;
        } else if w[1] < w[0] - slack {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Trend::Constant,
        (false, true) => Trend::Nonincreasing,
        (true, false) => Trend::Nondecreasing,
        (true, true) => Trend::Mixed,
    }
}

/// Trend of each mode's objective along the sweep; `None` if a row failed.
pub fn monotonicity_report(rows: &[SweepRow]) -> Vec<(CooperationMode, Option<Trend>)> {
    CooperationMode::ALL
        .iter()
        .map(|&m| {
            let col: Option<Vec<f64>> = rows.iter().map(|r| r.wscr(m)).collect();
            (m, col.map(|c| trend(&c, 1e-6)))
        })
        .collect()
}

/// `(max - min) / max` of a column.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max > 0.0 {
        (max - min) / max
    } else {
        0.0
    }
}
