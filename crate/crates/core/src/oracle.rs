//! Checks that do not trust the solver: raw-constraint audits, random
//! feasible samples, local perturbations and scans of `S(z)`.
//!
//! Everything here works on [`OperatingPoint`]s and the [`model`] formulas
//! only. [`scan_s`] is the exception: it samples the inner optimum itself.
//!
//! [`model`]: crate::model

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;
use crate::model::{
    harvested_energy, link_capacity_bits, local_bits, local_energy, CooperationMode, CpuFreqs, Instance,
    OperatingPoint, TaskSplit, TimeAllocation, TransmitPowers,
};

/// Largest residual, in J, s or bits, that counts as satisfied.
pub const RAW_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Left-hand side in natural units.
    pub value: f64,
    pub bound: f64,
    /// `value - bound` for inequalities, `|value - bound|` for equalities.
    pub residual: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= RAW_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub checks: Vec<Check>,
}

impl FeasibilityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().max_by(|a, b| a.residual.total_cmp(&b.residual))
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        let bad: Vec<String> = self.failures().map(|c| format!("{} by {:e}", c.name, c.residual)).collect();
        if bad.is_empty() {
            String::from("all checks pass")
        } else {
            bad.join(", ")
        }
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed() { "pass" } else { "FAIL" };
            writeln!(f, "{:<22} {:>24e} {:>24e} {}", c.name, c.value, c.bound, verdict)?;
        }
        Ok(())
    }
}

/// Audits `point` against the untransformed constraints of `mode`.
pub fn audit_raw_feasibility(inst: &Instance, mode: CooperationMode, point: &OperatingPoint) -> FeasibilityReport {
    let p = inst.params();
    let g = inst.gains();
    let t = &point.times;
    let w = &point.powers;
    let f = &point.freqs;
    let b = &point.split;
    let frame = p.frame;
    let mut checks = Vec::new();
    let mut le = |name, value: f64, bound: f64| checks.push(Check { name, value, bound, residual: value - bound });

    let nonneg: [(&str, f64); 18] = [
        ("t0", t.t0),
        ("t1", t.t1),
        ("t2_1", t.t2_1),
        ("t2_2", t.t2_2),
        ("t2c", t.t2c),
        ("t3", t.t3),
        ("p1", w.p1),
        ("p2_1", w.p2_1),
        ("p2_2", w.p2_2),
        ("p3", w.p3),
        ("f1", f.f1),
        ("f2", f.f2),
        ("f2c", f.f2c),
        ("b11", b.b11),
        ("b12", b.b12),
        ("b10", b.b10),
        ("b22", b.b22),
        ("b20", b.b20),
    ];
    for (name, v) in nonneg {
        le(name, -v, 0.0);
    }
    le("frame time", t.t0 + t.t1 + t.t2() + t.t3, frame);
    le("f1 limit", f.f1, p.f1_max);
    le("f2 limit", f.f2, p.f2_max);
    le("f2c limit", f.f2c, p.f2_max);

    let u1_spent = w.p1 * t.t1 + local_energy(p.k1, f.f1, frame);
    le("user 1 energy", u1_spent, harvested_energy(p, g.g1, t.t0));
    let u2_spent = w.p2_1 * t.t2_1
        + w.p2_2 * t.t2_2
        + w.p3 * t.t3
        + local_energy(p.k2, f.f2, frame - t.t2c)
        + local_energy(p.k2c, f.f2c, t.t2c);
    le("user 2 energy", u2_spent, harvested_energy(p, g.g2, t.t0));

    let offloaded = b.b10 + b.b12;
    le("user 1 uplink", offloaded, link_capacity_bits(t.t1, w.p1, g.h1, p));
    le("result feedback", p.nu * offloaded, link_capacity_bits(t.t3, w.p3, g.h1, p));
    le("relay uplink", b.b10, link_capacity_bits(t.t2_1, w.p2_1, g.h2, p));
    le("user 2 uplink", b.b20, link_capacity_bits(t.t2_2, w.p2_2, g.h2, p));

    let mut eq =
        |name, value: f64, bound: f64| checks.push(Check { name, value, bound, residual: (value - bound).abs() });
    eq("user 1 local bits", b.b11, local_bits(f.f1, frame, p.phi));
    eq("user 2 local bits", b.b22, local_bits(f.f2, frame - t.t2c, p.phi));
    eq("helper bits", b.b12, local_bits(f.f2c, t.t2c, p.phi));
    match mode {
        CooperationMode::Full => {}
        CooperationMode::CommOnly => eq("no helper computing", b.b12, 0.0),
        CooperationMode::CompOnly => {
            eq("no relaying", b.b10, 0.0);
            eq("no relay slot", t.t2_1, 0.0);
        }
    }
    FeasibilityReport { checks }
}

/// Objective `w1 x1 + w2 x2` of a physical point.
pub fn wscr(inst: &Instance, point: &OperatingPoint) -> f64 {
    let p = inst.params();
    (p.w1 * point.split.b1() + p.w2 * point.split.b2()) / p.frame
}

/// Largest bit split the energies, times and frequencies of `point` allow,
/// with helper computing cut back if the inter-user links cannot carry it.
fn tighten(inst: &Instance, mode: CooperationMode, point: &mut OperatingPoint) {
    let p = inst.params();
    let g = inst.gains();
    let t = point.times;
    let w = point.powers;
    let frame = p.frame;
    if mode == CooperationMode::CommOnly {
        point.freqs.f2c = 0.0;
    }
    let f = &mut point.freqs;
    let u1_link = link_capacity_bits(t.t1, w.p1, g.h1, p).min(link_capacity_bits(t.t3, w.p3, g.h1, p) / p.nu);
    let mut b12 = local_bits(f.f2c, t.t2c, p.phi);
    if b12 > u1_link {
        b12 = u1_link;
        f.f2c = if t.t2c > 0.0 { b12 * p.phi / t.t2c } else { 0.0 };
    }
    let b10 = match mode {
        CooperationMode::CompOnly => 0.0,
        _ => link_capacity_bits(t.t2_1, w.p2_1, g.h2, p).min(u1_link - b12).max(0.0),
    };
    point.split = TaskSplit {
        b11: local_bits(f.f1, frame, p.phi),
        b12,
        b10,
        b22: local_bits(f.f2, frame - t.t2c, p.phi),
        b20: link_capacity_bits(t.t2_2, w.p2_2, g.h2, p),
    };
}

fn power(energy: f64, t: f64) -> f64 {
    if t > 0.0 {
        energy / t
    } else {
        0.0
    }
}

/// Frequency spending `energy` over `t`, capped at `fmax`.
fn freq_for(energy: f64, k: f64, t: f64, fmax: f64) -> f64 {
    if t > 0.0 && energy > 0.0 {
        fmax.min(math::cbrt(energy / (k * t)))
    } else {
        0.0
    }
}

/// Dirichlet(1, ..., 1) weights.
fn simplex<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    let mut e = [0.0; N];
    for v in e.iter_mut() {
        *v = -math::ln(1.0 - rng.random::<f64>());
    }
    let s: f64 = e.iter().sum();
    if s > 0.0 {
        for v in e.iter_mut() {
            *v /= s;
        }
        e
    } else {
        let mut flat = [0.0; N];
        flat[0] = 1.0;
        flat
    }
}

/// One random point of `mode`'s feasible set, built constraint by constraint.
pub fn sample_point(inst: &Instance, mode: CooperationMode, rng: &mut ChaCha8Rng) -> OperatingPoint {
    let p = inst.params();
    let g = inst.gains();
    let frame = p.frame;
    let [s0, s1, s2, s3] = simplex::<4>(rng);
    let t2 = s2 * frame;
    let t2c = match mode {
        CooperationMode::CommOnly => 0.0,
        // strictly below the frame
        _ => (rng.random::<f64>() * t2).min(frame * (1.0 - 1e-12)),
    };
    let t2_1 = match mode {
        CooperationMode::CompOnly => 0.0,
        _ => rng.random::<f64>() * t2,
    };
    let t2_2 = rng.random::<f64>() * (t2 - t2_1);
    let times = TimeAllocation { t0: s0 * frame, t1: s1 * frame, t2_1, t2_2, t2c, t3: s3 * frame };

    let e1 = harvested_energy(p, g.g1, times.t0);
    let e2 = harvested_energy(p, g.g2, times.t0);
    let [a1, a_cpu1, _] = simplex::<3>(rng);
    let [c21, c22, c3, c_cpu2, c_cpu2c, _] = simplex::<6>(rng);
    let relay_share = if mode == CooperationMode::CompOnly { 0.0 } else { c21 };
    let helper_share = if mode == CooperationMode::CommOnly { 0.0 } else { c_cpu2c };
    let powers = TransmitPowers {
        p1: power(a1 * e1, times.t1),
        p2_1: power(relay_share * e2, times.t2_1),
        p2_2: power(c22 * e2, times.t2_2),
        p3: power(c3 * e2, times.t3),
    };
    let freqs = CpuFreqs {
        f1: freq_for(a_cpu1 * e1, p.k1, frame, p.f1_max),
        f2: freq_for(c_cpu2 * e2, p.k2, frame - t2c, p.f2_max),
        f2c: freq_for(helper_share * e2, p.k2c, t2c, p.f2_max),
    };
    let mut point = OperatingPoint { times, powers, freqs, split: TaskSplit::default() };
    tighten(inst, mode, &mut point);
    point
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub seed: u64,
    pub samples: usize,
    pub best: f64,
    pub best_point: OperatingPoint,
}

/// Best objective over `n` random feasible points drawn from `seed`.
/// Longer runs with the same seed extend the same stream, so the bound
/// never decreases with `n`.
pub fn sample_lower_bounds(inst: &Instance, mode: CooperationMode, n: usize, seed: u64) -> SampleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_point = OperatingPoint::idle(inst.params().frame);
    let mut best = wscr(inst, &best_point);
    for _ in 0..n {
        let point = sample_point(inst, mode, &mut rng);
        let v = wscr(inst, &point);
        if v > best {
            best = v;
            best_point = point;
        }
    }
    SampleReport { seed, samples: n, best, best_point }
}

/// Relative coordinate steps used by default.
pub const PERTURBATION_STEPS: [f64; 2] = [1e-3, 1e-4];

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub base: f64,
    pub best: f64,
    pub tried: usize,
    pub feasible: usize,
    /// Coordinate and signed step of the best improving move.
    pub best_move: Option<(&'static str, f64)>,
}

impl PerturbationReport {
    /// True if some move beat the base objective by more than 1e-6 relative.
    pub fn improved(&self) -> bool {
        self.best_move.is_some()
    }
}

#[derive(Clone, Copy)]
enum Coord {
    Time(usize),
    Energy(usize),
    Freq(usize),
}

const COORDS: [(&str, Coord); 13] = [
    ("t0", Coord::Time(0)),
    ("t1", Coord::Time(1)),
    ("t2_1", Coord::Time(2)),
    ("t2_2", Coord::Time(3)),
    ("t2c", Coord::Time(4)),
    ("t3", Coord::Time(5)),
    ("tau1", Coord::Energy(0)),
    ("tau2_1", Coord::Energy(1)),
    ("tau2_2", Coord::Energy(2)),
    ("tau3", Coord::Energy(3)),
    ("f1", Coord::Freq(0)),
    ("f2", Coord::Freq(1)),
    ("f2c", Coord::Freq(2)),
];

struct Raw {
    t: [f64; 6],
    e: [f64; 4],
    f: [f64; 3],
}

impl Raw {
    fn of(point: &OperatingPoint) -> Self {
        let t = &point.times;
        let w = &point.powers;
        Raw {
            t: [t.t0, t.t1, t.t2_1, t.t2_2, t.t2c, t.t3],
            e: [w.p1 * t.t1, w.p2_1 * t.t2_1, w.p2_2 * t.t2_2, w.p3 * t.t3],
            f: [point.freqs.f1, point.freqs.f2, point.freqs.f2c],
        }
    }

    fn point(&self) -> OperatingPoint {
        let t = &self.t;
        let times = TimeAllocation { t0: t[0], t1: t[1], t2_1: t[2], t2_2: t[3], t2c: t[4], t3: t[5] };
        OperatingPoint {
            times,
            powers: TransmitPowers {
                p1: power(self.e[0], t[1]),
                p2_1: power(self.e[1], t[2]),
                p2_2: power(self.e[2], t[3]),
                p3: power(self.e[3], t[5]),
            },
            freqs: CpuFreqs { f1: self.f[0], f2: self.f[1], f2c: self.f[2] },
            split: TaskSplit::default(),
        }
    }
}

/// Pulls a perturbed point back into the feasible set: the charging slot
/// absorbs a time overrun (or all times shrink together), then energies and
/// frequencies shrink uniformly to fit each budget.
fn repair(inst: &Instance, mode: CooperationMode, raw: &mut Raw) {
    let p = inst.params();
    let g = inst.gains();
    let frame = p.frame;
    if mode == CooperationMode::CompOnly {
        raw.t[2] = 0.0;
        raw.e[1] = 0.0;
    }
    if mode == CooperationMode::CommOnly {
        raw.t[4] = 0.0;
        raw.f[2] = 0.0;
    }
    raw.t[4] = raw.t[4].min(frame * (1.0 - 1e-12));
    let used = |t: &[f64; 6]| t[0] + t[1] + t[4].max(t[2] + t[3]) + t[5];
    let over = used(&raw.t) - frame;
    if over > 0.0 {
        if raw.t[0] > over {
            raw.t[0] -= over;
        } else {
            let c = frame / used(&raw.t);
            for v in raw.t.iter_mut() {
                *v *= c;
            }
        }
    }
    for i in 0..3 {
        raw.f[i] = raw.f[i].min(if i == 0 { p.f1_max } else { p.f2_max });
    }
    let (t0, t2c) = (raw.t[0], raw.t[4]);
    let budget1 = harvested_energy(p, g.g1, t0);
    let spent1 = raw.e[0] + local_energy(p.k1, raw.f[0], frame);
    if spent1 > budget1 {
        // c * tau + k (c f)^3 T <= budget for c <= 1
        let c = budget1 / spent1;
        raw.e[0] *= c;
        raw.f[0] *= c;
    }
    let budget2 = harvested_energy(p, g.g2, t0);
    let spent2 =
        raw.e[1] + raw.e[2] + raw.e[3] + local_energy(p.k2, raw.f[1], frame - t2c) + local_energy(p.k2c, raw.f[2], t2c);
    if spent2 > budget2 {
        let c = budget2 / spent2;
        for v in raw.e[1..].iter_mut() {
            *v *= c;
        }
        raw.f[1] *= c;
        raw.f[2] *= c;
    }
}

/// Tries `±step` relative moves on every time, energy and frequency of
/// `point`, repairing feasibility and re-tightening the bits after each.
pub fn perturbation_audit(
    inst: &Instance,
    mode: CooperationMode,
    point: &OperatingPoint,
    steps: &[f64],
) -> PerturbationReport {
    let p = inst.params();
    let g = inst.gains();
    let base = wscr(inst, point);
    let scale_time = p.frame;
    let scale_energy = (p.mu * g.g1.max(g.g2) * p.p0 * p.frame).max(1e-300);
    let mut report = PerturbationReport { base, best: base, tried: 0, feasible: 0, best_move: None };
    let start = Raw::of(point);
    for &(name, coord) in COORDS.iter() {
        for &s in steps {
            for sign in [1.0, -1.0] {
                let mut raw = Raw { t: start.t, e: start.e, f: start.f };
                let (v, scale) = match coord {
                    Coord::Time(i) => (&mut raw.t[i], scale_time),
                    Coord::Energy(i) => (&mut raw.e[i], scale_energy),
                    Coord::Freq(i) => (&mut raw.f[i], if i == 0 { p.f1_max } else { p.f2_max }),
                };
                if *v > 0.0 {
                    *v *= 1.0 + sign * s;
                } else if sign > 0.0 {
                    *v = s * scale;
                } else {
                    continue;
                }
                report.tried += 1;
                repair(inst, mode, &mut raw);
                let mut cand = raw.point();
                tighten(inst, mode, &mut cand);
                if !audit_raw_feasibility(inst, mode, &cand).passed() {
                    continue;
                }
                report.feasible += 1;
                let value = wscr(inst, &cand);
                if value > report.best && value > base + 1e-6 * base.abs().max(1e-300) {
                    report.best = value;
                    report.best_move = Some((name, sign * s));
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub grid: Vec<f64>,
    /// `S(z)` per grid point, `None` where the inner solve failed.
    pub values: Vec<Option<f64>>,
    pub unimodal: bool,
}

impl ScanReport {
    pub fn max(&self) -> Option<(f64, f64)> {
        self.grid.iter().zip(&self.values).filter_map(|(&z, v)| v.map(|v| (z, v))).max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// True if every sampled value is within `tol` relative of the largest.
    pub fn is_flat(&self, tol: f64) -> bool {
        let Some((_, top)) = self.max() else { return false };
        self.values.iter().flatten().all(|v| (top - v).abs() <= tol * top.abs().max(1e-300))
    }
}

/// Inner optimum on `grid` (all points in `[0, T)`, at least three).
pub fn scan_s(inst: &Instance, mode: CooperationMode, grid: &[f64]) -> crate::Result<ScanReport> {
    if grid.len() < 3 {
        return Err(crate::Error::Domain { what: "scan grid size", value: grid.len() as f64 });
    }
    let settings = crate::solver::BarrierSettings::default();
    let values: Vec<Option<f64>> = grid
        .iter()
        .map(|&z| crate::solver::evaluate(inst, z, mode, &settings).ok().map(|s| s.objective / inst.params().frame))
        .collect();
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    let unimodal = ok.len() == values.len() && crate::solver::is_unimodal(&ok, 1e-8);
    Ok(ScanReport { grid: grid.to_vec(), values, unimodal })
}

/// `n` evenly spaced points on `[0, T)`, the last one pulled in by `margin`.
pub fn uniform_grid(frame: f64, n: usize, margin: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let z = frame * i as f64 / (n - 1).max(1) as f64;
            if z >= frame {
                frame - margin
            } else {
                z
            }
        })
        .collect()
}
