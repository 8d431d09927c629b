//! Energy-variable substitution and the convex subproblem at fixed `t2c`.
//!
//! Writing every transmit energy as `tau = t * p` turns each capacity bound
//! into `bits <= t B log2(1 + rho tau / t)`, the perspective of a concave
//! function, so all rate constraints become jointly convex in time, energy
//! and bits. The helper's computing time `z = t2c` multiplies `f2` and `f2c`,
//! so it is held fixed and searched over separately.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{
    link_capacity_bits, ChannelGains, CooperationMode, CpuFreqs, Instance, OperatingPoint, SystemParams, TaskSplit,
    TimeAllocation, TransmitPowers,
};

/// Slot energies `tau = t * p` (J).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyVars {
    pub tau0: f64,
    pub tau1: f64,
    pub tau2_1: f64,
    pub tau2_2: f64,
    pub tau3: f64,
}

/// SNR slopes `rho1 = h1/(Gamma N0)`, `rho2 = h2/(Gamma N0)` and harvesting
/// slopes `rho3 = mu g1`, `rho4 = mu g2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeConstants {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
}

pub fn cone_constants(params: &SystemParams, gains: &ChannelGains) -> ConeConstants {
    let noise = params.gamma * params.n0;
    ConeConstants {
        rho1: gains.h1 / noise,
        rho2: gains.h2 / noise,
        rho3: params.mu * gains.g1,
        rho4: params.mu * gains.g2,
    }
}

/// `t B log2(1 + rho tau / t)`, extended by 0 at `t = 0`.
pub fn perspective_rate(t: f64, tau: f64, rho: f64, bandwidth: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t * bandwidth * math::ln_1p(rho * tau / t) / LN_2
}

/// Energy assigned to a slot of zero length. The rate is still 0 there.
pub fn is_wasted_energy(t: f64, tau: f64) -> bool {
    t <= 0.0 && tau > 0.0
}

/// Decision variables of the subproblem, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T0,
    T1,
    T2_1,
    T2_2,
    T2,
    T3,
    Tau0,
    Tau1,
    Tau2_1,
    Tau2_2,
    Tau3,
    F1,
    F2,
    F2c,
    B11,
    B12,
    B10,
    B22,
    B20,
}

pub const NUM_VARS: usize = 19;

impl Var {
    pub const ALL: [Var; NUM_VARS] = [
        Var::T0,
        Var::T1,
        Var::T2_1,
        Var::T2_2,
        Var::T2,
        Var::T3,
        Var::Tau0,
        Var::Tau1,
        Var::Tau2_1,
        Var::Tau2_2,
        Var::Tau3,
        Var::F1,
        Var::F2,
        Var::F2c,
        Var::B11,
        Var::B12,
        Var::B10,
        Var::B22,
        Var::B20,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::T0 => "t0",
            Var::T1 => "t1",
            Var::T2_1 => "t2_1",
            Var::T2_2 => "t2_2",
            Var::T2 => "t2",
            Var::T3 => "t3",
            Var::Tau0 => "tau0",
            Var::Tau1 => "tau1",
            Var::Tau2_1 => "tau2_1",
            Var::Tau2_2 => "tau2_2",
            Var::Tau3 => "tau3",
            Var::F1 => "f1",
            Var::F2 => "f2",
            Var::F2c => "f2c",
            Var::B11 => "b11",
            Var::B12 => "b12",
            Var::B10 => "b10",
            Var::B22 => "b22",
            Var::B20 => "b20",
        }
    }
}

/// What a constraint stands for in the physical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintRole {
    /// User 1 to user 2 offload capacity.
    U1Uplink,
    /// Feedback of user 1's results from user 2.
    ResultFeedback,
    /// Relay of user 1's bits to the server.
    RelayUplink,
    /// User 2's own offload to the server.
    U2Uplink,
    /// User 1's harvested energy budget.
    U1Energy,
    /// User 2's harvested energy budget.
    U2Energy,
    /// WPT energy `tau0 = p0 t0`.
    WptEnergy,
    U1LocalBits,
    U2LocalBits,
    HelperBits,
    /// `t2 >= t2c`.
    SlotCoversHelperCompute,
    /// `t2 >= t2_1 + t2_2`.
    SlotCoversOffload,
    FrameTime,
    CpuLimit,
    /// Mode restriction fixing a variable to zero.
    ModeRestriction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    Equal,
}

/// Solver-agnostic constraint shapes. Every variable is also implicitly
/// nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    /// `sum a_i x_i (<= | =) rhs`.
    Linear { terms: Vec<(Var, f64)>, relation: Relation, rhs: f64 },
    /// `sum a_i x_i <= time * B * log2(1 + rho * energy / time)`.
    PerspectiveLog { terms: Vec<(Var, f64)>, time: Var, energy: Var, rho: f64, bandwidth: f64 },
    /// `sum a_i x_i + sum c_j x_j^3 <= 0` with `c_j >= 0`.
    CubicBound { linear: Vec<(Var, f64)>, cubic: Vec<(Var, f64)> },
    /// `lower <= x <= upper`.
    Box { var: Var, lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub role: ConstraintRole,
    pub kind: ConstraintKind,
}

fn dot(terms: &[(Var, f64)], x: &[f64; NUM_VARS]) -> f64 {
    terms.iter().map(|&(v, a)| a * x[v.index()]).sum()
}

impl Constraint {
    /// Signed violation in the constraint's own units; positive means violated.
    /// Equalities report the absolute mismatch.
    pub fn residual(&self, x: &[f64; NUM_VARS]) -> f64 {
        match &self.kind {
            ConstraintKind::Linear { terms, relation, rhs } => {
                let g = dot(terms, x) - rhs;
                match relation {
                    Relation::LessEq => g,
                    Relation::Equal => g.abs(),
                }
            }
            ConstraintKind::PerspectiveLog { terms, time, energy, rho, bandwidth } => {
                dot(terms, x) - perspective_rate(x[time.index()], x[energy.index()], *rho, *bandwidth)
            }
            ConstraintKind::CubicBound { linear, cubic } => {
                dot(linear, x)
                    + cubic
                        .iter()
                        .map(|&(v, c)| {
                            let y = x[v.index()];
                            c * y * y * y
                        })
                        .sum::<f64>()
            }
            ConstraintKind::Box { var, lower, upper } => {
                let v = x[var.index()];
                (lower - v).max(v - upper)
            }
        }
    }

    /// Variables the constraint touches.
    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = match &self.kind {
            ConstraintKind::Linear { terms, .. } => terms.iter().map(|t| t.0).collect(),
            ConstraintKind::PerspectiveLog { terms, time, energy, .. } => {
                let mut v: Vec<Var> = terms.iter().map(|t| t.0).collect();
                v.push(*time);
                v.push(*energy);
                v
            }
            ConstraintKind::CubicBound { linear, cubic } => linear.iter().chain(cubic.iter()).map(|t| t.0).collect(),
            ConstraintKind::Box { var, .. } => vec![*var],
        };
        out.sort();
        out.dedup();
        out
    }
}

/// The subproblem with the helper computing time fixed to `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexProgram {
    /// Fixed helper computing time `t2c` (s).
    pub z: f64,
    pub mode: CooperationMode,
    pub frame: f64,
    pub p0: f64,
    /// Maximization weights per variable.
    pub objective: [f64; NUM_VARS],
    pub constraints: Vec<Constraint>,
    /// Nominal magnitude of each variable, used for conditioning.
    pub scales: [f64; NUM_VARS],
}

impl ConvexProgram {
    pub fn objective_value(&self, x: &[f64; NUM_VARS]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation over all constraints and the nonnegativity bounds.
    pub fn max_residual(&self, x: &[f64; NUM_VARS]) -> f64 {
        let bounds = x.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
        self.constraints.iter().map(|c| c.residual(x)).fold(bounds, f64::max)
    }

    /// The same program with the objective multiplied by `c`.
    pub fn with_objective_scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for w in out.objective.iter_mut() {
            *w *= c;
        }
        out
    }

    /// Feasible point of every program in the family: nothing computed or
    /// sent, the helper slot covering `z`, the rest of the frame charging.
    pub fn idle_witness(&self) -> [f64; NUM_VARS] {
        let mut x = [0.0; NUM_VARS];
        x[Var::T2.index()] = self.z;
        x[Var::T0.index()] = self.frame - self.z;
        x[Var::Tau0.index()] = self.p0 * (self.frame - self.z);
        x
    }

    pub fn constraints_with_role(&self, role: ConstraintRole) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(move |c| c.role == role)
    }
}

fn linear(role: ConstraintRole, terms: Vec<(Var, f64)>, relation: Relation, rhs: f64) -> Constraint {
    Constraint { role, kind: ConstraintKind::Linear { terms, relation, rhs } }
}

fn fix_zero(var: Var) -> Constraint {
    linear(ConstraintRole::ModeRestriction, vec![(var, 1.0)], Relation::Equal, 0.0)
}

/// Builds the subproblem at `t2c = z` for the given cooperation mode.
pub fn assemble_subproblem(inst: &Instance, z: f64, mode: CooperationMode) -> Result<ConvexProgram> {
    let p = inst.params();
    let frame = p.frame;
    if !(z >= 0.0 && z < frame) {
        return Err(Error::Domain { what: "helper compute time z", value: z });
    }
    let rho = cone_constants(p, inst.gains());
    let b = p.bandwidth;
    use ConstraintRole as R;
    use Relation::{Equal, LessEq};

    let mut cs = vec![
        Constraint {
            role: R::U1Uplink,
            kind: ConstraintKind::PerspectiveLog {
                terms: vec![(Var::B10, 1.0), (Var::B12, 1.0)],
                time: Var::T1,
                energy: Var::Tau1,
                rho: rho.rho1,
                bandwidth: b,
            },
        },
        Constraint {
            role: R::ResultFeedback,
            kind: ConstraintKind::PerspectiveLog {
                terms: vec![(Var::B10, p.nu), (Var::B12, p.nu)],
                time: Var::T3,
                energy: Var::Tau3,
                rho: rho.rho1,
                bandwidth: b,
            },
        },
        Constraint {
            role: R::RelayUplink,
            kind: ConstraintKind::PerspectiveLog {
                terms: vec![(Var::B10, 1.0)],
                time: Var::T2_1,
                energy: Var::Tau2_1,
                rho: rho.rho2,
                bandwidth: b,
            },
        },
        Constraint {
            role: R::U2Uplink,
            kind: ConstraintKind::PerspectiveLog {
                terms: vec![(Var::B20, 1.0)],
                time: Var::T2_2,
                energy: Var::Tau2_2,
                rho: rho.rho2,
                bandwidth: b,
            },
        },
        Constraint {
            role: R::U1Energy,
            kind: ConstraintKind::CubicBound {
                linear: vec![(Var::Tau1, 1.0), (Var::Tau0, -rho.rho3)],
                cubic: vec![(Var::F1, p.k1 * frame)],
            },
        },
        Constraint {
            role: R::U2Energy,
            kind: ConstraintKind::CubicBound {
                linear: vec![(Var::Tau2_1, 1.0), (Var::Tau2_2, 1.0), (Var::Tau3, 1.0), (Var::Tau0, -rho.rho4)],
                cubic: vec![(Var::F2, p.k2 * (frame - z)), (Var::F2c, p.k2c * z)],
            },
        },
        linear(R::WptEnergy, vec![(Var::Tau0, 1.0), (Var::T0, -p.p0)], Equal, 0.0),
        linear(R::U1LocalBits, vec![(Var::B11, 1.0), (Var::F1, -frame / p.phi)], Equal, 0.0),
        linear(R::U2LocalBits, vec![(Var::B22, 1.0), (Var::F2, -(frame - z) / p.phi)], Equal, 0.0),
        linear(R::HelperBits, vec![(Var::B12, 1.0), (Var::F2c, -z / p.phi)], Equal, 0.0),
        linear(R::SlotCoversHelperCompute, vec![(Var::T2, -1.0)], LessEq, -z),
        linear(R::SlotCoversOffload, vec![(Var::T2_1, 1.0), (Var::T2_2, 1.0), (Var::T2, -1.0)], LessEq, 0.0),
        linear(R::FrameTime, vec![(Var::T0, 1.0), (Var::T1, 1.0), (Var::T2, 1.0), (Var::T3, 1.0)], LessEq, frame),
        Constraint { role: R::CpuLimit, kind: ConstraintKind::Box { var: Var::F1, lower: 0.0, upper: p.f1_max } },
        Constraint { role: R::CpuLimit, kind: ConstraintKind::Box { var: Var::F2, lower: 0.0, upper: p.f2_max } },
        Constraint { role: R::CpuLimit, kind: ConstraintKind::Box { var: Var::F2c, lower: 0.0, upper: p.f2_max } },
    ];
    match mode {
        CooperationMode::Full => {}
        CooperationMode::CommOnly => {
            cs.push(fix_zero(Var::B12));
            cs.push(fix_zero(Var::F2c));
        }
        CooperationMode::CompOnly => {
            cs.push(fix_zero(Var::B10));
            cs.push(fix_zero(Var::T2_1));
            cs.push(fix_zero(Var::Tau2_1));
        }
    }

    let mut objective = [0.0; NUM_VARS];
    for v in [Var::B11, Var::B12, Var::B10] {
        objective[v.index()] = p.w1;
    }
    for v in [Var::B22, Var::B20] {
        objective[v.index()] = p.w2;
    }

    Ok(ConvexProgram { z, mode, frame, p0: p.p0, objective, constraints: cs, scales: variable_scales(p, &rho) })
}

fn variable_scales(p: &SystemParams, rho: &ConeConstants) -> [f64; NUM_VARS] {
    let frame = p.frame;
    let positive = |v: f64, fallback: f64| if v > 0.0 && v.is_finite() { v } else { fallback };
    let e1 = positive(rho.rho3 * p.p0 * frame, 1.0);
    let e2 = positive(rho.rho4 * p.p0 * frame, 1.0);
    let f1 = positive(p.f1_max.min(math::cbrt(e1 / p.k1)), p.f1_max);
    let f2 = positive(p.f2_max.min(math::cbrt(e2 / p.k2)), p.f2_max);
    let f2c = positive(p.f2_max.min(math::cbrt(e2 / p.k2c)), p.f2_max);
    let link = |r: f64, e: f64| positive(perspective_rate(frame, e, r, p.bandwidth), 1.0);
    let b_u1 = link(rho.rho1, e1).max(f2c * frame / p.phi);
    let mut s = [frame; NUM_VARS];
    s[Var::Tau0.index()] = positive(p.p0 * frame, 1.0);
    s[Var::Tau1.index()] = e1;
    s[Var::Tau2_1.index()] = e2;
    s[Var::Tau2_2.index()] = e2;
    s[Var::Tau3.index()] = e2;
    s[Var::F1.index()] = f1;
    s[Var::F2.index()] = f2;
    s[Var::F2c.index()] = f2c;
    s[Var::B11.index()] = f1 * frame / p.phi;
    s[Var::B22.index()] = f2 * frame / p.phi;
    s[Var::B12.index()] = f2c * frame / p.phi;
    s[Var::B10.index()] = b_u1.min(link(rho.rho2, e2));
    s[Var::B20.index()] = link(rho.rho2, e2);
    s
}

/// Every quantity of the subproblem at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Allocation {
    pub times: TimeAllocation,
    /// Helper slot length as carried by the program (`>= times.t2()`).
    pub t2: f64,
    pub energy: EnergyVars,
    pub freqs: CpuFreqs,
    pub split: TaskSplit,
}

impl Allocation {
    pub fn from_vector(x: &[f64; NUM_VARS], z: f64) -> Self {
        let g = |v: Var| x[v.index()];
        Allocation {
            times: TimeAllocation {
                t0: g(Var::T0),
                t1: g(Var::T1),
                t2_1: g(Var::T2_1),
                t2_2: g(Var::T2_2),
                t2c: z,
                t3: g(Var::T3),
            },
            t2: g(Var::T2),
            energy: EnergyVars {
                tau0: g(Var::Tau0),
                tau1: g(Var::Tau1),
                tau2_1: g(Var::Tau2_1),
                tau2_2: g(Var::Tau2_2),
                tau3: g(Var::Tau3),
            },
            freqs: CpuFreqs { f1: g(Var::F1), f2: g(Var::F2), f2c: g(Var::F2c) },
            split: TaskSplit {
                b11: g(Var::B11),
                b12: g(Var::B12),
                b10: g(Var::B10),
                b22: g(Var::B22),
                b20: g(Var::B20),
            },
        }
    }

    pub fn to_vector(&self) -> [f64; NUM_VARS] {
        let mut x = [0.0; NUM_VARS];
        let mut set = |v: Var, val: f64| x[v.index()] = val;
        set(Var::T0, self.times.t0);
        set(Var::T1, self.times.t1);
        set(Var::T2_1, self.times.t2_1);
        set(Var::T2_2, self.times.t2_2);
        set(Var::T2, self.t2);
        set(Var::T3, self.times.t3);
        set(Var::Tau0, self.energy.tau0);
        set(Var::Tau1, self.energy.tau1);
        set(Var::Tau2_1, self.energy.tau2_1);
        set(Var::Tau2_2, self.energy.tau2_2);
        set(Var::Tau3, self.energy.tau3);
        set(Var::F1, self.freqs.f1);
        set(Var::F2, self.freqs.f2);
        set(Var::F2c, self.freqs.f2c);
        set(Var::B11, self.split.b11);
        set(Var::B12, self.split.b12);
        set(Var::B10, self.split.b10);
        set(Var::B22, self.split.b22);
        set(Var::B20, self.split.b20);
        x
    }

    /// Slots holding energy while having zero length.
    pub fn wasted_energy_slots(&self) -> Vec<&'static str> {
        let t = &self.times;
        let e = &self.energy;
        [("t1", t.t1, e.tau1), ("t2_1", t.t2_1, e.tau2_1), ("t2_2", t.t2_2, e.tau2_2), ("t3", t.t3, e.tau3)]
            .into_iter()
            .filter(|&(_, t, tau)| is_wasted_energy(t, tau))
            .map(|(n, _, _)| n)
            .collect()
    }

    /// Physical form with powers recovered from the energies.
    pub fn operating_point(&self) -> Result<OperatingPoint> {
        Ok(OperatingPoint {
            times: self.times,
            powers: recover_powers(&self.energy, &self.times)?,
            freqs: self.freqs,
            split: self.split,
        })
    }
}

/// Inverts `tau = t * p` slot by slot; empty slots get zero power.
pub fn recover_powers(tau: &EnergyVars, times: &TimeAllocation) -> Result<TransmitPowers> {
    let power = |slot: &'static str, t: f64, e: f64| -> Result<f64> {
        if t > 0.0 {
            Ok(e / t)
        } else if e > 0.0 {
            Err(Error::Inconsistent { slot, energy: e })
        } else {
            Ok(0.0)
        }
    };
    Ok(TransmitPowers {
        p1: power("t1", times.t1, tau.tau1)?,
        p2_1: power("t2_1", times.t2_1, tau.tau2_1)?,
        p2_2: power("t2_2", times.t2_2, tau.tau2_2)?,
        p3: power("t3", times.t3, tau.tau3)?,
    })
}

/// Capacities of the four data slots computed from powers, in the order
/// (user 1 uplink, relay, user 2 uplink, feedback).
pub fn capacities_from_powers(
    params: &SystemParams,
    gains: &ChannelGains,
    times: &TimeAllocation,
    powers: &TransmitPowers,
) -> [f64; 4] {
    [
        link_capacity_bits(times.t1, powers.p1, gains.h1, params),
        link_capacity_bits(times.t2_1, powers.p2_1, gains.h2, params),
        link_capacity_bits(times.t2_2, powers.p2_2, gains.h2, params),
        link_capacity_bits(times.t3, powers.p3, gains.h1, params),
    ]
}
