use std::path::Path;
use std::process::{Command, Output};

use wpmec_core::experiments::Preset;
use wpmec_core::{solve_with, CooperationMode, Instance, SolveOptions};

fn wpmec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpmec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn records(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn field(line: &str) -> f64 {
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

fn opts() -> SolveOptions {
    SolveOptions::default().with_prescan(21)
}

#[test]
fn default_solve_prints_wscr() {
    let o = wpmec(&["solve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("wscr")).unwrap();
    let want = solve_with(&Instance::reference(), CooperationMode::Full, &opts()).unwrap().wscr;
    assert_eq!(field(line), want);
    for key in ["z*", "time", "power", "rates"] {
        assert!(text.lines().any(|l| l.starts_with(key)), "missing {key}");
    }
}

#[test]
fn bad_mu_names_the_key_and_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "mu = 1.5\n");
    let o = wpmec(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`mu`"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "typo.toml", "d_2O = 10\n");
    let o = wpmec(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`d_2O`"));
}

#[test]
fn inline_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "d_20 = 15\nmode = \"comp_only\"\n");
    let out = dir.path().join("s.csv");
    let o = wpmec(&["solve", "--config", &cfg, "--set", "d_20=12", "--mode", "full", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = records(&out);
    assert_eq!(rows[0][0], "full");
    let inst =
        Instance::from_path_loss(Default::default(), &wpmec_core::PathLossModel { d_20: 12.0, ..Default::default() })
            .unwrap();
    let want = solve_with(&inst, CooperationMode::Full, &opts()).unwrap();
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), want.wscr);
}

#[test]
fn comm_only_mode_is_benchmark_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = wpmec(&["solve", "--mode", "comm_only", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (header, rows) = records(&out);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows[0][col("mode")], "comm_only");
    assert_eq!(rows[0][col("z_star")].parse::<f64>().unwrap(), 0.0);
    let want = solve_with(&Instance::reference(), CooperationMode::CommOnly, &opts()).unwrap();
    assert_eq!(rows[0][col("wscr")].parse::<f64>().unwrap(), want.wscr);
    assert_eq!(rows[0][col("b12")].parse::<f64>().unwrap(), want.point.split.b12);
}

#[test]
fn fig4_sweep_has_sixteen_rows_and_averages() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f4.csv");
    let o = wpmec(&["sweep", "fig4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = records(&out);
    assert_eq!(header.len(), 17);
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r[0] == "d_20" && r[16] == "ok"));
    let text = stdout(&o);
    assert!(text.contains("mean gain over comm_only"));
    assert!(text.contains("mean gain over comp_only"));
}

#[test]
fn sweep_is_deterministic_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |p: &Path, jobs: &str| {
        let o = wpmec(&["sweep", "--preset", "fig5", "--jobs", jobs, "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    run(&a, "1");
    run(&b, "3");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    run(&b, "1");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_numbers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f6.csv");
    assert!(wpmec(&["sweep", "fig6", "--out", out.to_str().unwrap()]).status.success());
    let (_, rows) = records(&out);
    let spec = Preset::Fig6.sweep(Default::default(), Default::default(), opts()).unwrap();
    for (row, &v) in rows.iter().zip(&spec.values) {
        let inst = spec.instance_at(v).unwrap();
        let full = solve_with(&inst, CooperationMode::Full, &opts()).unwrap();
        assert_eq!(row[1].parse::<f64>().unwrap(), v);
        assert_eq!(row[2].parse::<f64>().unwrap().to_bits(), full.wscr.to_bits());
        assert_eq!(row[9].parse::<f64>().unwrap().to_bits(), full.z_star.to_bits());
    }
}

#[test]
fn fig7_writes_the_region() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f7.csv");
    let o = wpmec(&["sweep", "fig7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = records(&out);
    assert_eq!(header, ["w1", "mode", "x1", "x2", "lambda"]);
    assert_eq!(rows.len(), 21 * 2 * 2);
    for pair in rows.chunks(2) {
        assert_eq!((pair[0][1].as_str(), pair[1][1].as_str()), ("full", "comm_only"));
        let w: f64 = pair[0][0].parse().unwrap();
        let obj = |r: &Vec<String>| w * r[2].parse::<f64>().unwrap() + (1.0 - w) * r[3].parse::<f64>().unwrap();
        assert!(obj(&pair[0]) >= obj(&pair[1]) * (1.0 - 1e-6));
    }
}

#[test]
fn region_subcommand_takes_a_grid() {
    let o = wpmec(&["region", "--lambdas", "2.5", "--points", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines[1].starts_with("0e0,full,"));
}

#[test]
fn unknown_preset_lists_the_valid_ones() {
    let o = wpmec(&["sweep", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    for p in ["fig4", "fig5", "fig6", "fig7"] {
        assert!(e.contains(p), "{e}");
    }
}

#[test]
fn custom_sweep_by_key() {
    let o = wpmec(&["sweep", "--key", "lambda", "--values", "2.5,3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("lambda,2.5e0,"));
    assert!(!wpmec(&["sweep", "--key", "frame", "--values", "1"]).status.success());
}

#[test]
fn compare_reports_all_modes() {
    let o = wpmec(&["compare"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for m in ["full", "comm_only", "comp_only", "gain over comm_only", "gain over comp_only"] {
        assert!(text.contains(m));
    }
}

#[test]
fn verify_is_reproducible() {
    let args = ["verify", "--samples", "100000", "--seed", "7"];
    let a = wpmec(&args);
    let b = wpmec(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let line = text.lines().find(|l| l.starts_with("sampling")).unwrap();
    let best = wpmec_core::oracle::sample_lower_bounds(&Instance::reference(), CooperationMode::Full, 100_000, 7).best;
    assert!(line.contains(&format!("{best:e}")), "{line}");
    let verdicts: Vec<&str> = text.lines().skip(2).map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    assert_eq!(verdicts, ["pass"; 4]);
}

#[test]
fn injected_fault_fails_verification() {
    let o = wpmec(&["verify", "--samples", "1000", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("feasibility  FAIL"));
}
