//! Acceptance gate. Runs every criterion, prints one line each, and exits
//! non-zero if any failed.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpmec_core::benchmarks::{average_gains, run_comparison, ComparisonRow, Gain};
use wpmec_core::experiments::{
    monotonicity_report, rate_region, region_w1_grid, run_sweep, Preset, RegionPoint, SweepRow, Trend,
};
use wpmec_core::model::{validate_instance, ChannelGains};
use wpmec_core::oracle::{
    audit_raw_feasibility, perturbation_audit, sample_lower_bounds, scan_s, uniform_grid, PERTURBATION_STEPS,
};
use wpmec_core::solver::{golden_section, BarrierSettings};
use wpmec_core::{CooperationMode, GoldenSectionConfig, Instance, PathLossModel, Solution, SolveOptions, SystemParams};

const MODES: [CooperationMode; 3] = CooperationMode::ALL;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Every solution produced by the criteria, for the audit criterion.
#[derive(Default)]
struct Ledger {
    audited: usize,
    failures: Vec<String>,
}

impl Ledger {
    fn record(&mut self, inst: &Instance, sol: &Solution) {
        self.audited += 1;
        let r = audit_raw_feasibility(inst, sol.mode, &sol.point);
        if !r.passed() {
            self.failures.push(format!("{} z={:e}: {}", sol.mode.name(), sol.z_star, r.summary()));
        }
    }

    fn record_row(&mut self, row: &ComparisonRow) {
        for m in MODES {
            if let Ok(s) = row.get(m) {
                self.record(&row.instance, s);
            }
        }
    }
}

fn options() -> SolveOptions {
    SolveOptions::default().with_prescan(21)
}

fn sweep(preset: Preset) -> (Vec<SweepRow>, Duration) {
    let spec = preset.sweep(SystemParams::default(), PathLossModel::default(), options()).expect("distance preset");
    let start = Instant::now();
    let rows = run_sweep(&spec).expect("valid preset");
    (rows, start.elapsed())
}

fn comparisons(rows: &[SweepRow]) -> Result<Vec<&ComparisonRow>, String> {
    rows.iter()
        .map(|r| match &r.comparison {
            Ok(c) if !c.failed() => Ok(c),
            Ok(c) => Err(format!("{}={}: {:?}", r.key.name(), r.value, c.failures())),
            Err(e) => Err(format!("{}={}: {e}", r.key.name(), r.value)),
        })
        .collect()
}

fn gains_criterion(rows: &[SweepRow], elapsed: Duration, g1: (f64, f64), g2: (f64, f64), limit: Duration) -> Outcome {
    let cmp = match comparisons(rows) {
        Ok(c) => c,
        Err(e) => return Outcome { pass: false, detail: format!("solve failed: {e}") },
    };
    let s = average_gains(cmp.iter().copied()).expect("non-empty sweep");
    let ok1 = (s.mean_gain1 - g1.0).abs() <= g1.1;
    let ok2 = (s.mean_gain2 - g2.0).abs() <= g2.1;
    let fast = elapsed <= limit;
    Outcome {
        pass: ok1 && ok2 && fast && s.infinite1 == 0 && s.infinite2 == 0,
        detail: format!(
            "mean gain1 {:.2}% (target {:.1} +- {:.0} pp), mean gain2 {:.2}% (target {:.1} +- {:.0} pp), \
             ratio-of-means {:.2}% / {:.2}%, {} rows in {:.2?}",
            100.0 * s.mean_gain1,
            100.0 * g1.0,
            100.0 * g1.1,
            100.0 * s.mean_gain2,
            100.0 * g2.0,
            100.0 * g2.1,
            100.0 * s.ratio_gain1,
            100.0 * s.ratio_gain2,
            s.rows,
            elapsed
        ),
    }
}

/// Benchmark ordering at the default instance: gain1 > 0 and gain2 > gain1.
fn default_ordering(ledger: &mut Ledger) -> Outcome {
    let row = run_comparison(&Instance::reference(), &options());
    ledger.record_row(&row);
    match (row.gain1(), row.gain2()) {
        (Some(Gain::Finite(g1)), Some(g2)) => {
            let g2 = g2.as_f64();
            Outcome { pass: g1 > 0.0 && g2 > g1, detail: format!("gain1 {:.3}%, gain2 {:.3}%", 100.0 * g1, 100.0 * g2) }
        }
        _ => Outcome { pass: false, detail: format!("failed: {:?}", row.failures()) },
    }
}

fn region(ledger: &mut Ledger) -> Outcome {
    let params = SystemParams::default();
    let pl = PathLossModel::default();
    let grid = region_w1_grid();
    let mut by_lambda: Vec<Vec<RegionPoint>> = Vec::new();
    for lambda in [2.5, 3.0] {
        let pts: Result<Vec<RegionPoint>, _> =
            rate_region(&params, &pl, lambda, &grid, &options()).into_iter().collect();
        match pts {
            Ok(p) => by_lambda.push(p),
            Err(e) => return Outcome { pass: false, detail: format!("lambda {lambda}: {e}") },
        }
    }
    // re-solve for the audit ledger
    for lambda in [2.5, 3.0] {
        for &w1 in &grid {
            let inst = Instance::from_path_loss(params.with_w1(w1), &PathLossModel { exponent: lambda, ..pl }).unwrap();
            for m in [CooperationMode::Full, CooperationMode::CommOnly] {
                if let Ok(s) = wpmec_core::solve_with(&inst, m, &options()) {
                    ledger.record(&inst, &s);
                }
            }
        }
    }
    let mut worst_full = f64::NEG_INFINITY;
    let mut worst_lambda = f64::NEG_INFINITY;
    for pts in &by_lambda {
        for pair in pts.chunks(2) {
            let (full, comm) = (&pair[0], &pair[1]);
            worst_full = worst_full.max((comm.weighted() - full.weighted()) / full.weighted());
        }
    }
    for (a, b) in by_lambda[0].iter().zip(&by_lambda[1]) {
        worst_lambda = worst_lambda.max((b.weighted() - a.weighted()) / a.weighted());
    }
    Outcome {
        pass: worst_full <= 1e-6 && worst_lambda <= 1e-6,
        detail: format!(
            "{} points; worst relay-only excess {:.2e}, worst lambda 3.0 excess {:.2e} (tolerance 1e-6 relative)",
            by_lambda.iter().map(Vec::len).sum::<usize>(),
            worst_full,
            worst_lambda
        ),
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let pl = PathLossModel {
        exponent: rng.random_range(2.0..=4.0),
        d_e1: rng.random_range(2.0..=20.0),
        d_e2: rng.random_range(2.0..=20.0),
        d_12: rng.random_range(2.0..=20.0),
        d_20: rng.random_range(2.0..=20.0),
        ..PathLossModel::default()
    };
    Instance::from_path_loss(SystemParams::default(), &pl).expect("distances are positive")
}

fn dominance(ledger: &mut Ledger) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::NEG_INFINITY;
    let mut failed = Vec::new();
    for i in 0..100 {
        let row = run_comparison(&random_instance(&mut rng), &options());
        ledger.record_row(&row);
        let w = |m| row.wscr(m);
        match (w(CooperationMode::Full), w(CooperationMode::CommOnly), w(CooperationMode::CompOnly)) {
            (Some(f), Some(b1), Some(b2)) => worst = worst.max((b1.max(b2) - f) / f.max(f64::MIN_POSITIVE)),
            _ => failed.push(i),
        }
    }
    Outcome {
        pass: failed.is_empty() && worst <= 1e-6,
        detail: format!("100 instances, worst benchmark excess {worst:.2e} relative, failed {failed:?}"),
    }
}

fn oracles(ledger: &mut Ledger) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut notes = String::new();
    let mut pass = true;
    let (mut worst_sample, mut worst_scan) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut improved = 0;
    for i in 0..20 {
        let inst = random_instance(&mut rng);
        let sol = match wpmec_core::solve_with(&inst, CooperationMode::Full, &options()) {
            Ok(s) => s,
            Err(e) => {
                pass = false;
                let _ = write!(notes, " instance {i}: {e};");
                continue;
            }
        };
        ledger.record(&inst, &sol);
        let lb = sample_lower_bounds(&inst, CooperationMode::Full, 100_000, 1000 + i);
        worst_sample = worst_sample.max(lb.best - sol.wscr);
        if lb.best > sol.wscr + 1e-9 {
            pass = false;
        }
        let pa = perturbation_audit(&inst, CooperationMode::Full, &sol.point, &PERTURBATION_STEPS);
        if pa.improved() {
            improved += 1;
            pass = false;
            let _ = write!(notes, " instance {i} improvable by {:?};", pa.best_move);
        }
        let grid = uniform_grid(inst.params().frame, 21, 1e-4);
        match scan_s(&inst, CooperationMode::Full, &grid).map(|r| r.max()) {
            Ok(Some((_, top))) => {
                let excess = (top - sol.wscr) / sol.wscr;
                worst_scan = worst_scan.max(excess);
                if excess > 1e-4 {
                    pass = false;
                }
            }
            other => {
                pass = false;
                let _ = write!(notes, " instance {i} scan: {other:?};");
            }
        }
    }
    Outcome {
        pass,
        detail: format!(
            "20 instances; best sample minus solver {worst_sample:.3e} bits/s, {improved} improvable, \
             worst scan excess {worst_scan:.2e} relative{notes}"
        ),
    }
}

fn closed_form(ledger: &mut Ledger) -> Outcome {
    let p = SystemParams::default();
    let reference = *Instance::reference().gains();
    let mut lines = Vec::new();
    let mut pass = true;
    // the second pair is far enough that neither CPU clips
    for (g1, g2) in [(reference.g1, reference.g2), (1e-9, 4e-9)] {
        let inst = validate_instance(p, ChannelGains { g1, g2, h1: 0.0, h2: 0.0 }).unwrap();
        let fstar = |g: f64, k: f64, fmax: f64| fmax.min((p.mu * g * p.p0 / k).cbrt());
        let expect = (p.w1 * fstar(g1, p.k1, p.f1_max) + p.w2 * fstar(g2, p.k2, p.f2_max)) / p.phi;
        if g1 == reference.g1 {
            // both CPUs clip at the defaults
            pass &= (expect - 3e4).abs() <= 1e-9;
        }
        match wpmec_core::solve_with(&inst, CooperationMode::Full, &options()) {
            Ok(sol) => {
                ledger.record(&inst, &sol);
                let err = (sol.wscr - expect).abs() / expect;
                pass &= err <= 1e-6;
                lines.push(format!("{:.6} vs {:.6} ({err:.1e})", sol.wscr, expect));
            }
            Err(e) => {
                pass = false;
                lines.push(e.to_string());
            }
        }
    }
    Outcome { pass, detail: format!("defaults {}; unclipped {}", lines[0], lines[1]) }
}

fn audits(ledger: &Ledger) -> Outcome {
    Outcome {
        pass: ledger.failures.is_empty() && ledger.audited > 0,
        detail: format!(
            "{} solutions audited, {} failed{}",
            ledger.audited,
            ledger.failures.len(),
            ledger.failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    }
}

fn fidelity(ledger: &mut Ledger) -> Outcome {
    let inst = Instance::reference();
    let cfg = GoldenSectionConfig::default();
    let sol = match golden_section(&inst, CooperationMode::Full, &cfg, &BarrierSettings::default()) {
        Ok(s) => s,
        Err(e) => return Outcome { pass: false, detail: e.to_string() },
    };
    ledger.record(&inst, &sol);
    let steps = &sol.trace.steps;
    let ratios: Vec<f64> = steps.windows(2).map(|w| w[1].width() / w[0].width()).collect();
    let worst = ratios.iter().map(|r| (r - cfg.sigma).abs()).fold(0.0, f64::max);
    let one_each = steps[0].new_evaluations == 2 && steps[1..].iter().all(|s| s.new_evaluations == 1);
    let last = steps.last().unwrap().width();
    let prev = steps[steps.len() - 2].width();
    let terminated = last <= cfg.epsilon && prev > cfg.epsilon;
    let exact = worst <= 1e-9;
    Outcome {
        pass: exact && one_each && terminated,
        detail: format!(
            "{} iterations, {} evaluations; contraction in [{:.5}, {:.5}], max |ratio - sigma| {:.2e} (tolerance 1e-9); \
             one new solve per iteration: {one_each}; final width {last:.3e}",
            sol.trace.iterations(),
            sol.trace.evaluations,
            ratios.iter().copied().fold(f64::INFINITY, f64::min),
            ratios.iter().copied().fold(0.0, f64::max),
            worst
        ),
    }
}

fn monotone(sweeps: &[(&str, &[SweepRow])]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rows) in sweeps {
        let report = monotonicity_report(rows);
        let ok = report.iter().all(|(_, t)| matches!(t, Some(Trend::Nonincreasing | Trend::Constant)));
        pass &= ok;
        let verdicts: Vec<String> = report.iter().map(|(m, t)| format!("{}={t:?}", m.name())).collect();
        parts.push(format!("{name}: {}", verdicts.join(" ")));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn main() -> ExitCode {
    let mut ledger = Ledger::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let (fig4, t4) = sweep(Preset::Fig4);
    let (fig5, t5) = sweep(Preset::Fig5);
    let (fig6, t6) = sweep(Preset::Fig6);
    for rows in [&fig4, &fig5, &fig6] {
        for r in rows.iter() {
            if let Ok(c) = &r.comparison {
                ledger.record_row(c);
            }
        }
    }
    let limit = Duration::from_secs(300);
    results.push(("1  fig4 mean gains", gains_criterion(&fig4, t4, (0.279, 0.05), (1.378, 0.20), limit)));
    results.push(("1b default benchmark ordering", default_ordering(&mut ledger)));
    results.push(("2  fig5 mean gains", gains_criterion(&fig5, t5, (0.098, 0.04), (0.478, 0.10), limit)));
    results.push(("3  fig6 mean gains", gains_criterion(&fig6, t6, (0.243, 0.05), (1.729, 0.25), limit)));
    results.push(("4  rate region dominance", region(&mut ledger)));
    results.push(("5  mode dominance", dominance(&mut ledger)));
    results.push(("6  oracle agreement", oracles(&mut ledger)));
    results.push(("7  closed-form degenerate case", closed_form(&mut ledger)));
    let search = fidelity(&mut ledger);
    results.push(("8  raw feasibility audits", audits(&ledger)));
    results.push(("9  search fidelity", search));
    results.push(("10 monotone in distance", monotone(&[("fig4", &fig4), ("fig6", &fig6)])));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
