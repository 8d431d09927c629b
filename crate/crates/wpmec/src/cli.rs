//! Command-line frontend.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wpmec_core::benchmarks::{average_gains, run_comparison, ComparisonRow, Gain, GainSummary};
use wpmec_core::experiments::{linspace, linspace_step, Preset, SweepKey, SweepRow, SweepSpec, REGION_LAMBDAS};
use wpmec_core::{CooperationMode, Solution};

use crate::config::{self, Config};
use crate::error::{Error, Result};
use crate::output::{self, num};
use crate::run;

#[derive(Debug, Parser)]
#[command(name = "wpmec", version, about = "Cooperative wireless-powered edge computing allocation")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat TOML file of parameters.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Parameter override applied after the file, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Cooperation mode, overriding the config.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps; defaults to the available parallelism.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    Full,
    CommOnly,
    CompOnly,
}

impl From<ModeArg> for CooperationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => CooperationMode::Full,
            ModeArg::CommOnly => CooperationMode::CommOnly,
            ModeArg::CompOnly => CooperationMode::CompOnly,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal allocation in one mode.
    Solve,
    /// Full cooperation against both benchmarks.
    Compare,
    /// Sweep one parameter, or run a figure preset.
    Sweep(SweepArgs),
    /// Rate region by weighted optimization over w1.
    Region(RegionArgs),
    /// Solve and check the result with the independent oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Preset name (fig4, fig5, fig6, fig7).
    #[arg(value_name = "PRESET", conflicts_with = "preset")]
    pub name: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Swept key for a custom sweep (d_e1, d_e2, d_12, d_20, lambda, p0, w1).
    #[arg(long, conflicts_with_all = ["name", "preset"], requires = "grid")]
    pub key: Option<String>,
    /// Grid as comma separated values or START:STOP:STEP.
    #[arg(long = "values", id = "grid")]
    pub values: Option<String>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Path-loss exponents, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = REGION_LAMBDAS)]
    pub lambdas: Vec<f64>,
    /// Points of the w1 grid on [0, 1].
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corrupts the solution before checking it.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// What a command produced: text for standard output, optional CSV,
/// and whether it should count as a failure.
#[derive(Debug, Default)]
pub struct Outcome {
    pub report: String,
    pub csv: Option<Vec<u8>>,
    pub failed: bool,
}

impl Common {
    fn config(&self) -> Result<Config> {
        let mut cfg = config::load(self.config.as_deref(), &self.overrides)?;
        if let Some(m) = self.mode {
            cfg.mode = m.into();
        }
        Ok(cfg)
    }

    fn jobs(&self) -> Result<usize> {
        match self.jobs {
            Some(0) => Err(Error::Usage("--jobs must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(run::default_jobs()),
        }
    }
}

fn pct(g: f64) -> String {
    format!("{:.4}%", 100.0 * g)
}

fn solution_report(out: &mut String, sol: &Solution) {
    let (t, p, f, b) = (sol.point.times, sol.point.powers, sol.point.freqs, sol.point.split);
    let _ = writeln!(out, "mode      {}", sol.mode.name());
    let _ = writeln!(out, "wscr      {} bits/s", num(sol.wscr));
    let _ = writeln!(out, "rates     x1 {}  x2 {}", num(sol.x1), num(sol.x2));
    let _ = writeln!(out, "z*        {} s", num(sol.z_star));
    let _ = writeln!(
        out,
        "time      t0 {}  t1 {}  t2_1 {}  t2_2 {}  t2c {}  t3 {}",
        num(t.t0),
        num(t.t1),
        num(t.t2_1),
        num(t.t2_2),
        num(t.t2c),
        num(t.t3)
    );
    let _ = writeln!(out, "power     p1 {}  p2_1 {}  p2_2 {}  p3 {}", num(p.p1), num(p.p2_1), num(p.p2_2), num(p.p3));
    let _ = writeln!(out, "cpu       f1 {}  f2 {}  f2c {}", num(f.f1), num(f.f2), num(f.f2c));
    let _ = writeln!(
        out,
        "bits      b11 {}  b12 {}  b10 {}  b22 {}  b20 {}",
        num(b.b11),
        num(b.b12),
        num(b.b10),
        num(b.b22),
        num(b.b20)
    );
    let _ = writeln!(out, "search    {} inner solves, {} iterations", sol.trace.evaluations, sol.trace.iterations());
    if sol.unimodality_warning() {
        let _ = writeln!(out, "warning   inner optimum is not unimodal on the pre-scan grid");
    }
    let _ = writeln!(out, "audit     {}", sol.audit.summary());
}

pub fn cmd_solve(common: &Common) -> Result<Outcome> {
    let cfg = common.config()?;
    let (inst, opts) = cfg.checked()?;
    let sol = wpmec_core::solve_with(&inst, cfg.mode, &opts)?;
    let mut report = String::new();
    solution_report(&mut report, &sol);
    let csv = match common.out {
        Some(_) => {
            let mut buf = Vec::new();
            output::write_solution(&mut buf, &sol)?;
            Some(buf)
        }
        None => None,
    };
    Ok(Outcome { report, csv, failed: !sol.audit.passed() })
}

fn gain_text(g: Option<Gain>) -> String {
    match g {
        Some(Gain::Finite(v)) => pct(v),
        Some(Gain::Infinite) => "unbounded".into(),
        None => "n/a".into(),
    }
}

fn comparison_report(out: &mut String, row: &ComparisonRow) {
    for m in CooperationMode::ALL {
        match row.get(m) {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "{:<10} wscr {}  x1 {}  x2 {}  z* {}",
                    m.name(),
                    num(s.wscr),
                    num(s.x1),
                    num(s.x2),
                    num(s.z_star)
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{:<10} failed: {e}", m.name());
            }
        }
    }
    let _ = writeln!(out, "gain over comm_only  {}", gain_text(row.gain1()));
    let _ = writeln!(out, "gain over comp_only  {}", gain_text(row.gain2()));
}

pub fn cmd_compare(common: &Common) -> Result<Outcome> {
    let cfg = common.config()?;
    let (inst, opts) = cfg.checked()?;
    let row = run_comparison(&inst, &opts);
    let mut report = String::new();
    comparison_report(&mut report, &row);
    let csv = match common.out {
        Some(_) => {
            let mut buf = Vec::new();
            output::write_comparison(&mut buf, &row)?;
            Some(buf)
        }
        None => None,
    };
    Ok(Outcome { report, csv, failed: row.failed() })
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |s: &str| Error::BadValue { key: "values".into(), reason: format!("`{s}` is not a number") };
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|s| s.trim().parse().map_err(|_| bad(s))).collect::<Result<_>>()?;
        if !(v[2] > 0.0) || v[1] < v[0] {
            return Err(Error::BadValue { key: "values".into(), reason: "need START <= STOP and STEP > 0".into() });
        }
        return Ok(linspace_step(v[0], v[1], v[2]));
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad(s))).collect()
}

fn preset(name: &str) -> Result<Preset> {
    Preset::from_name(name).ok_or_else(|| Error::UnknownPreset {
        given: name.into(),
        valid: Preset::ALL.iter().map(|p| p.name()).collect::<Vec<_>>().join(", "),
    })
}

fn summary_report(out: &mut String, s: &GainSummary) {
    let _ = writeln!(out, "rows                 {}", s.rows);
    let _ = writeln!(out, "mean gain over comm_only  {}", pct(s.mean_gain1));
    let _ = writeln!(out, "mean gain over comp_only  {}", pct(s.mean_gain2));
    let _ = writeln!(out, "gain of mean wscr over comm_only  {}", pct(s.ratio_gain1));
    let _ = writeln!(out, "gain of mean wscr over comp_only  {}", pct(s.ratio_gain2));
    if s.infinite1 + s.infinite2 > 0 {
        let _ = writeln!(out, "rows with unbounded gain  {} / {}", s.infinite1, s.infinite2);
    }
}

fn sweep_outcome(rows: &[SweepRow]) -> Result<Outcome> {
    let mut buf = Vec::new();
    output::write_sweep(&mut buf, rows)?;
    let mut report = String::new();
    let comparisons: Vec<&ComparisonRow> = rows.iter().filter_map(|r| r.comparison.as_ref().ok()).collect();
    let invalid = rows.len() - comparisons.len();
    let failed = match average_gains(comparisons.iter().copied()) {
        Ok(s) if invalid == 0 => {
            summary_report(&mut report, &s);
            false
        }
        Ok(_) => {
            let _ = writeln!(report, "{invalid} grid values gave invalid instances; no averages");
            true
        }
        Err(e) => {
            let _ = writeln!(report, "no averages: {e}");
            true
        }
    };
    Ok(Outcome { report, csv: Some(buf), failed })
}

fn region_outcome(cfg: &Config, lambdas: &[f64], points: usize, jobs: usize) -> Result<Outcome> {
    let opts = cfg.solve_options()?;
    if points < 2 {
        return Err(Error::Usage("--points must be at least 2".into()));
    }
    let pts = run::region(&cfg.params, &cfg.path_loss, lambdas, &linspace(0.0, 1.0, points), &opts, jobs)?;
    let mut buf = Vec::new();
    output::write_region(&mut buf, &pts)?;
    let report = format!("{} region points over {} exponents\n", pts.len(), lambdas.len());
    Ok(Outcome { report, csv: Some(buf), failed: false })
}

pub fn cmd_sweep(common: &Common, args: &SweepArgs) -> Result<Outcome> {
    let cfg = common.config()?;
    // the base instance must be valid even if the sweep overwrites one key
    cfg.checked()?;
    let jobs = common.jobs()?;
    let opts = cfg.solve_options()?;
    let spec = match (args.name.as_ref().or(args.preset.as_ref()), &args.key) {
        (Some(name), _) => match preset(name)? {
            Preset::Fig7 => return region_outcome(&cfg, &REGION_LAMBDAS, 21, jobs),
            p => p.sweep(cfg.params, cfg.path_loss, opts).expect("distance preset has a sweep"),
        },
        (None, Some(key)) => {
            let key = SweepKey::from_name(key).ok_or_else(|| Error::BadValue {
                key: "key".into(),
                reason: format!(
                    "`{key}` is not one of {}",
                    SweepKey::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
                ),
            })?;
            let values = parse_grid(args.values.as_deref().unwrap_or_default())?;
            SweepSpec { params: cfg.params, path_loss: cfg.path_loss, key, values, options: opts }
        }
        (None, None) => return Err(Error::Usage("sweep needs a preset or --key with --values".into())),
    };
    sweep_outcome(&run::sweep(&spec, jobs)?)
}

pub fn cmd_region(common: &Common, args: &RegionArgs) -> Result<Outcome> {
    let cfg = common.config()?;
    cfg.checked()?;
    region_outcome(&cfg, &args.lambdas, args.points, common.jobs()?)
}

pub fn cmd_verify(common: &Common, args: &VerifyArgs) -> Result<Outcome> {
    let cfg = common.config()?;
    let (inst, opts) = cfg.checked()?;
    let sol = match run::solve_for_verify(&inst, cfg.mode, &opts, args.inject_fault) {
        Ok(s) => s,
        // a failed audit inside the solver is a verification failure too
        Err(Error::Core(e @ wpmec_core::Error::AuditFailure(_))) => {
            return Ok(Outcome { report: format!("solve        FAIL ({e})\n"), csv: None, failed: true })
        }
        Err(e) => return Err(e),
    };
    let v = run::verify(&inst, &sol, args.samples, args.seed)?;
    let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
    let mut report = String::new();
    let _ = writeln!(report, "mode         {}", sol.mode.name());
    let _ = writeln!(report, "wscr         {} bits/s", num(sol.wscr));
    let _ = writeln!(report, "feasibility  {} ({})", verdict(v.feasible()), v.feasibility.summary());
    let _ = writeln!(
        report,
        "sampling     {} (best of {} with seed {}: {})",
        verdict(v.samples_below()),
        v.samples.samples,
        v.samples.seed,
        num(v.samples.best)
    );
    let moved = match v.perturbation.best_move {
        Some((name, step)) => format!("{name} by {step:+e} reaches {}", num(v.perturbation.best)),
        None => format!("{} moves, {} feasible, none better", v.perturbation.tried, v.perturbation.feasible),
    };
    let _ = writeln!(report, "perturbation {} ({moved})", verdict(v.locally_optimal()));
    let scan = v
        .scan
        .max()
        .map_or_else(|| "no point solved".to_string(), |(z, s)| format!("max {} at z = {}", num(s), num(z)));
    let _ = writeln!(report, "scan         {} ({scan})", verdict(v.scan_below()));
    if !v.feasible() {
        let _ = write!(report, "{}", v.feasibility);
    }
    Ok(Outcome { report, csv: None, failed: !v.passed() })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Solve => cmd_solve(&cli.common),
        Command::Compare => cmd_compare(&cli.common),
        Command::Sweep(a) => cmd_sweep(&cli.common, a),
        Command::Region(a) => cmd_region(&cli.common, a),
        Command::Verify(a) => cmd_verify(&cli.common, a),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io { path: path.into(), source };
    let mut f = BufWriter::new(File::create(path).map_err(io_err)?);
    f.write_all(bytes).map_err(io_err)?;
    f.flush().map_err(io_err)
}

/// Exit status: 0 on success, 1 on a failed solve or check, 2 on bad input.
pub fn main_with(cli: &Cli) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_config() { 2 } else { 1 };
        }
    };
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    let printed = match (&outcome.csv, &cli.common.out) {
        (Some(csv), Some(path)) => write_file(path, csv).map(|_| {
            let _ = stdout.write_all(outcome.report.as_bytes());
        }),
        // CSV owns standard output; the summary moves to standard error
        (Some(csv), None) => {
            eprint!("{}", outcome.report);
            stdout.write_all(csv).map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
        _ => {
            let _ = stdout.write_all(outcome.report.as_bytes());
            Ok(())
        }
    };
    if let Err(e) = printed {
        eprintln!("error: {e}");
        return 1;
    }
    i32::from(outcome.failed)
}
