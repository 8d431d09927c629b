//! CSV schemas and number formatting.

use std::io::Write;

use wpmec_core::benchmarks::{ComparisonRow, Gain};
use wpmec_core::experiments::{RegionPoint, SweepRow};
use wpmec_core::{CooperationMode, Solution};

use crate::error::Result;

pub const SWEEP_HEADER: [&str; 17] = [
    "swept_key",
    "value",
    "wscr_full",
    "wscr_b1",
    "wscr_b2",
    "gain1",
    "gain2",
    "x1_full",
    "x2_full",
    "z_star",
    "t0",
    "t1",
    "t2_1",
    "t2_2",
    "t2c",
    "t3",
    "status",
];

pub const REGION_HEADER: [&str; 5] = ["w1", "mode", "x1", "x2", "lambda"];

pub const SOLVE_HEADER: [&str; 24] = [
    "mode", "wscr", "x1", "x2", "z_star", "t0", "t1", "t2_1", "t2_2", "t2c", "t3", "p1", "p2_1", "p2_2", "p3", "f1",
    "f2", "f2c", "b11", "b12", "b10", "b22", "b20", "status",
];

/// Shortest scientific form that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn gain(g: Option<Gain>) -> String {
    match g {
        Some(Gain::Finite(v)) => num(v),
        Some(Gain::Infinite) => "inf".into(),
        None => "NaN".into(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".into(), num)
}

/// `ok`, `nonunimodal` when the pre-scan saw several peaks, or the error.
pub fn solution_status(sol: &Solution) -> &'static str {
    if sol.unimodality_warning() {
        "nonunimodal"
    } else {
        "ok"
    }
}

fn comparison_status(row: &ComparisonRow) -> String {
    let failures = row.failures();
    if let Some((m, e)) = failures.first() {
        return format!("{} failed: {e}", m.name());
    }
    match &row.full {
        Ok(s) => solution_status(s).into(),
        Err(_) => unreachable!(),
    }
}

/// Sweep-schema fields for one comparison.
pub fn comparison_fields(key: &str, value: &str, row: &ComparisonRow) -> Vec<String> {
    let full = row.full.as_ref().ok();
    let t = full.map(|s| s.point.times);
    let mut out = vec![
        key.to_string(),
        value.to_string(),
        opt(row.wscr(CooperationMode::Full)),
        opt(row.wscr(CooperationMode::CommOnly)),
        opt(row.wscr(CooperationMode::CompOnly)),
        gain(row.gain1()),
        gain(row.gain2()),
        opt(full.map(|s| s.x1)),
        opt(full.map(|s| s.x2)),
        opt(full.map(|s| s.z_star)),
    ];
    out.extend(
        [t.map(|t| t.t0), t.map(|t| t.t1), t.map(|t| t.t2_1), t.map(|t| t.t2_2), t.map(|t| t.t2c), t.map(|t| t.t3)]
            .into_iter()
            .map(opt),
    );
    out.push(comparison_status(row));
    out
}

fn sweep_fields(row: &SweepRow) -> Vec<String> {
    match &row.comparison {
        Ok(c) => comparison_fields(row.key.name(), &num(row.value), c),
        Err(e) => {
            let mut out = vec![row.key.name().to_string(), num(row.value)];
            out.extend(std::iter::repeat_n("NaN".to_string(), SWEEP_HEADER.len() - 3));
            out.push(format!("invalid: {e}"));
            out
        }
    }
}

pub fn write_sweep<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for row in rows {
        out.write_record(sweep_fields(row))?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_comparison<W: Write>(w: W, row: &ComparisonRow) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    out.write_record(comparison_fields("none", "NaN", row))?;
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_region<W: Write>(w: W, points: &[RegionPoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REGION_HEADER)?;
    for p in points {
        out.write_record([num(p.w1), p.mode.name().into(), num(p.x1), num(p.x2), num(p.lambda)])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_solution<W: Write>(w: W, sol: &Solution) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SOLVE_HEADER)?;
    let (t, p, f, b) = (sol.point.times, sol.point.powers, sol.point.freqs, sol.point.split);
    let mut rec = vec![sol.mode.name().to_string()];
    rec.extend(
        [
            sol.wscr, sol.x1, sol.x2, sol.z_star, t.t0, t.t1, t.t2_1, t.t2_2, t.t2c, t.t3, p.p1, p.p2_1, p.p2_2, p.p3,
            f.f1, f.f2, f.f2c, b.b11, b.b12, b.b10, b.b22, b.b20,
        ]
        .into_iter()
        .map(num),
    );
    rec.push(solution_status(sol).into());
    out.write_record(rec)?;
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
