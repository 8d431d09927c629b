//! System parameters, channel model and the raw per-slot formulas.
//!
//! Everything here is in natural units: seconds, bits, watts, joules, hertz.
//! The frame is split as WPT (`t0`), user 1 to user 2 offload (`t1`), the
//! helper slot (`t2`, holding the relay `t2_1` and user 2's own offload
//! `t2_2`, overlapped with helper computing `t2c`) and result feedback (`t3`).

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;

const SPEED_OF_LIGHT: f64 = 3e8;

/// Physical constants of one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Energy node transmit power (W).
    pub p0: f64,
    /// Harvesting efficiency.
    pub mu: f64,
    /// Receiver noise power (W).
    pub n0: f64,
    /// Capacity gap, at least 1.
    pub gamma: f64,
    /// Bandwidth (Hz).
    pub bandwidth: f64,
    /// Result-to-input size ratio.
    pub nu: f64,
    /// CPU cycles per input bit.
    pub phi: f64,
    /// Effective capacitance of user 1's chip.
    pub k1: f64,
    /// Effective capacitance of user 2's chip.
    pub k2: f64,
    /// Capacitance used for user 2's cycles spent on user 1's task.
    pub k2c: f64,
    /// Maximum CPU frequency of user 1 (cycles/s).
    pub f1_max: f64,
    /// Maximum CPU frequency of user 2 (cycles/s).
    pub f2_max: f64,
    /// Frame length (s).
    pub frame: f64,
    pub w1: f64,
    pub w2: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            p0: 3.0,
            mu: 0.7,
            n0: 1e-10,
            gamma: 1.0,
            bandwidth: 1e4,
            nu: 0.5,
            phi: 100.0,
            k1: 1e-26,
            k2: 1e-26,
            k2c: 1e-26,
            f1_max: 3e6,
            f2_max: 3e6,
            frame: 1.0,
            w1: 0.7,
            w2: 0.3,
        }
    }
}

impl SystemParams {
    /// Sets `w1` and `w2 = 1 - w1`.
    pub fn with_w1(mut self, w1: f64) -> Self {
        self.w1 = w1;
        self.w2 = 1.0 - w1;
        self
    }
}

/// Distance based power gain `GA * (c / (4 pi d fc))^lambda` for the four links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub antenna_gain: f64,
    /// Carrier frequency (Hz).
    pub carrier_hz: f64,
    /// Path-loss exponent.
    pub exponent: f64,
    /// Energy node to user 1 (m).
    pub d_e1: f64,
    /// Energy node to user 2 (m).
    pub d_e2: f64,
    /// User 1 to user 2 (m).
    pub d_12: f64,
    /// User 2 to edge server (m).
    pub d_20: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self { antenna_gain: 2.0, carrier_hz: 915e6, exponent: 2.5, d_e1: 6.0, d_e2: 4.0, d_12: 4.0, d_20: 10.0 }
    }
}

impl PathLossModel {
    /// Distance at which the power term has base one and the gain equals `GA`.
    pub fn unit_base_distance(&self) -> f64 {
        SPEED_OF_LIGHT / (4.0 * PI * self.carrier_hz)
    }

    pub fn gains(&self) -> Result<ChannelGains> {
        Ok(ChannelGains {
            g1: path_loss_gain(self.d_e1, self)?,
            g2: path_loss_gain(self.d_e2, self)?,
            h1: path_loss_gain(self.d_12, self)?,
            h2: path_loss_gain(self.d_20, self)?,
        })
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        check(out, "ga", self.antenna_gain, "> 0", self.antenna_gain > 0.0);
        check(out, "fc", self.carrier_hz, "> 0", self.carrier_hz > 0.0);
        check(out, "lambda", self.exponent, "> 0", self.exponent > 0.0);
        for (field, d) in [("d_e1", self.d_e1), ("d_e2", self.d_e2), ("d_12", self.d_12), ("d_20", self.d_20)] {
            check(out, field, d, "> 0", d > 0.0);
        }
    }

    pub fn validate(&self) -> core::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        self.violations(&mut out);
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}

/// Link power gains: `g1`, `g2` from the energy node, `h1` between the
/// users, `h2` from user 2 to the edge server.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelGains {
    pub g1: f64,
    pub g2: f64,
    pub h1: f64,
    pub h2: f64,
}

/// Which kind of help user 2 gives user 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CooperationMode {
    /// Relaying and helper computing.
    Full,
    /// Relaying only (`b12 = 0`).
    CommOnly,
    /// Helper computing only (`b10 = 0`).
    CompOnly,
}

impl CooperationMode {
    pub const ALL: [CooperationMode; 3] = [Self::Full, Self::CommOnly, Self::CompOnly];

    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::CommOnly => "comm_only",
            Self::CompOnly => "comp_only",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "full" => Some(Self::Full),
            "comm_only" => Some(Self::CommOnly),
            "comp_only" => Some(Self::CompOnly),
            _ => None,
        }
    }
}

/// Bits of each user's task processed per frame, indexed (owner, executor),
/// executor 0 being the edge server.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaskSplit {
    pub b11: f64,
    pub b12: f64,
    pub b10: f64,
    pub b22: f64,
    pub b20: f64,
}

impl TaskSplit {
    pub fn b1(&self) -> f64 {
        self.b11 + self.b12 + self.b10
    }

    pub fn b2(&self) -> f64 {
        self.b22 + self.b20
    }

    pub fn weighted(&self, params: &SystemParams) -> f64 {
        params.w1 * self.b1() + params.w2 * self.b2()
    }
}

/// Slot durations of one frame (s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimeAllocation {
    pub t0: f64,
    pub t1: f64,
    pub t2_1: f64,
    pub t2_2: f64,
    pub t2c: f64,
    pub t3: f64,
}

impl TimeAllocation {
    /// User 2's total offloading time.
    pub fn t2a(&self) -> f64 {
        self.t2_1 + self.t2_2
    }

    /// The helper slot lasts until both computing and offloading finish.
    pub fn t2(&self) -> f64 {
        self.t2c.max(self.t2a())
    }

    pub fn total(&self) -> f64 {
        self.t0 + self.t1 + self.t2() + self.t3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CpuFreqs {
    pub f1: f64,
    pub f2: f64,
    /// User 2's frequency while computing user 1's bits.
    pub f2c: f64,
}

/// Transmit powers (W) of the four data slots.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransmitPowers {
    pub p1: f64,
    pub p2_1: f64,
    pub p2_2: f64,
    pub p3: f64,
}

/// A complete decision in physical form: times, powers, frequencies, bits.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatingPoint {
    pub times: TimeAllocation,
    pub powers: TransmitPowers,
    pub freqs: CpuFreqs,
    pub split: TaskSplit,
}

impl OperatingPoint {
    /// Nothing transmitted or computed, the whole frame spent charging.
    pub fn idle(frame: f64) -> Self {
        Self { times: TimeAllocation { t0: frame, ..TimeAllocation::default() }, ..Self::default() }
    }
}

/// A failed invariant: the field, the bound it must satisfy, and the value seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub bound: &'static str,
    pub value: f64,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "`{}` must be {} (got {:e})", self.field, self.bound, self.value)
    }
}

/// Parameters and gains that passed [`validate_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instance {
    params: SystemParams,
    gains: ChannelGains,
}

impl Instance {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn gains(&self) -> &ChannelGains {
        &self.gains
    }

    /// Validated instance with gains computed from the path-loss model.
    pub fn from_path_loss(params: SystemParams, pl: &PathLossModel) -> Result<Self> {
        let mut out = Vec::new();
        pl.violations(&mut out);
        if !out.is_empty() {
            return Err(Error::Invalid(out));
        }
        validate_instance(params, pl.gains()?)
    }

    /// The default parameter set at the default distances.
    pub fn reference() -> Self {
        Self::from_path_loss(SystemParams::default(), &PathLossModel::default()).expect("reference instance is valid")
    }
}

fn check(out: &mut Vec<Violation>, field: &'static str, value: f64, bound: &'static str, ok: bool) {
    if !ok || value.is_nan() {
        out.push(Violation { field, bound, value });
    }
}

/// Checks every parameter and gain invariant and reports all violations.
pub fn validate_instance(params: SystemParams, gains: ChannelGains) -> Result<Instance> {
    let p = &params;
    let mut out = Vec::new();
    check(&mut out, "p0", p.p0, ">= 0", p.p0 >= 0.0);
    check(&mut out, "mu", p.mu, "in (0, 1)", p.mu > 0.0 && p.mu < 1.0);
    check(&mut out, "n0", p.n0, "> 0", p.n0 > 0.0);
    check(&mut out, "gamma", p.gamma, ">= 1", p.gamma >= 1.0);
    check(&mut out, "bandwidth", p.bandwidth, "> 0", p.bandwidth > 0.0);
    check(&mut out, "nu", p.nu, "in (0, 1)", p.nu > 0.0 && p.nu < 1.0);
    check(&mut out, "phi", p.phi, "> 0", p.phi > 0.0);
    check(&mut out, "k1", p.k1, "> 0", p.k1 > 0.0);
    check(&mut out, "k2", p.k2, "> 0", p.k2 > 0.0);
    check(&mut out, "k2c", p.k2c, "> 0", p.k2c > 0.0);
    check(&mut out, "f1max", p.f1_max, "> 0", p.f1_max > 0.0);
    check(&mut out, "f2max", p.f2_max, "> 0", p.f2_max > 0.0);
    check(&mut out, "frame", p.frame, "> 0", p.frame > 0.0);
    check(&mut out, "w1", p.w1, ">= 0", p.w1 >= 0.0);
    check(&mut out, "w2", p.w2, ">= 0", p.w2 >= 0.0);
    let wsum = p.w1 + p.w2;
    check(&mut out, "w1", wsum, "such that w1 + w2 = 1", (wsum - 1.0).abs() <= 1e-12);
    for (field, g) in [("g1", gains.g1), ("g2", gains.g2), ("h1", gains.h1), ("h2", gains.h2)] {
        check(&mut out, field, g, ">= 0 and finite", g >= 0.0 && g.is_finite());
    }
    if out.is_empty() {
        Ok(Instance { params, gains })
    } else {
        Err(Error::Invalid(out))
    }
}

pub fn path_loss_gain(d: f64, pl: &PathLossModel) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain { what: "distance", value: d });
    }
    let base = pl.unit_base_distance() / d;
    Ok(pl.antenna_gain * math::powf(base, pl.exponent))
}

/// Energy collected during `t0` over a link of gain `g`.
pub fn harvested_energy(params: &SystemParams, g: f64, t0: f64) -> f64 {
    params.mu * g * t0 * params.p0
}

pub fn local_bits(f: f64, t: f64, phi: f64) -> f64 {
    f * t / phi
}

pub fn local_energy(k: f64, f: f64, t: f64) -> f64 {
    k * f * f * f * t
}

/// Bits deliverable in `t` seconds at power `p` over gain `h`.
pub fn link_capacity_bits(t: f64, p: f64, h: f64, params: &SystemParams) -> f64 {
    if t <= 0.0 || p <= 0.0 || h <= 0.0 {
        return 0.0;
    }
    let snr = h * p / (params.gamma * params.n0);
    t * params.bandwidth * math::ln_1p(snr) / core::f64::consts::LN_2
}
