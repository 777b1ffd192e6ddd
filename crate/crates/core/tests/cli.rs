use std::path::Path;
use std::process::{Command, Output};

use flocsim::experiment::{load_preset, run_config, summary_header, summary_row, sweep, sweep_summary};

fn flocsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flocsim")).args(args).output().expect("binary runs")
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn run_writes_csv_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = flocsim(&["run", "--preset", "fig2", "--grid-n", "65", "--t-end", "2", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(text(&o).starts_with("fig2b: "));
    let monitors = read(dir.path(), "monitors.csv");
    assert!(monitors.starts_with("t,sup_S,sup_u1,sup_v1,l1_S,l1_u1,l1_v1,mass,Q,dt,clamp\n0,"));
    let index = read(dir.path(), "snapshots.csv");
    assert!(index.starts_with("k,t\n0,0\n"));
    let count = index.lines().count() - 1;
    assert!(count >= 2 && count <= 200);
    let last = read(dir.path(), &format!("snapshot_{}.csv", count - 1));
    assert!(last.starts_with("x,S,u1,v1\n0,"));
    assert_eq!(last.lines().count(), 66);
    assert!(read(dir.path(), "steady.csv").starts_with("x,S,u1,v1\n"));
    assert!(read(dir.path(), "summary.csv").starts_with(&summary_header(1)));
}

#[test]
fn outputs_are_bitwise_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = flocsim(&["run", "--preset", "fig3a", "--grid-n", "49", "--t-end", "3", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["monitors.csv", "snapshots.csv", "snapshot_1.csv", "summary.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = flocsim(&["run", "--preset", "blowup_demo", "--grid-n", "65", "--out", out]);
    assert_eq!(o.status.code(), Some(4));
    assert!(text(&o).contains("blow-up at t ="));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[model]\nm = 1\nyu = [-1.0]\n").unwrap();
    let o = flocsim(&["run", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("missing key model.d0") && err.contains("[kinetics]"), "{err}");

    let o = flocsim(&["run", "--preset", "nope", "--out", out]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = load_preset("fig1a").unwrap().to_toml().replace("steady = \"none\"", "steady = \"coexistence\"")
        .replace("steady_max_iter = 20000", "steady_max_iter = 2");
    let path = dir.path().join("stall.toml");
    std::fs::write(&path, cfg).unwrap();
    let o = flocsim(&["steady", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o));
}

#[test]
fn negative_yield_is_rejected_with_positivity_reason() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.toml");
    std::fs::write(&path, load_preset("fig1a").unwrap().to_toml().replace("yu = [0.1]", "yu = [-1.0]")).unwrap();
    let o = flocsim(&["check", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(A1)"));
}

#[test]
fn eigen_check_and_steady_verbs() {
    let o = flocsim(&["eigen", "--d", "0.1,1"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = text(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "d,grid_n,lambda,bracket_lower,bracket_upper,residual,iterations");
    let row: Vec<&str> = lines[1].split(',').collect();
    let lambda: f64 = row[2].parse().unwrap();
    assert!(lambda > row[3].parse::<f64>().unwrap() && lambda < row[4].parse::<f64>().unwrap());
    assert!(lines[2].contains(",1,inf,"));

    let o = flocsim(&["eigen", "--preset", "fig2"]);
    assert_eq!(text(&o).lines().count(), 4);

    let o = flocsim(&["check", "--preset", "fig2"]);
    assert_eq!(o.status.code(), Some(0));
    let t = text(&o);
    assert!(t.contains("quasi-positivity: satisfied") && t.contains("R_u ="), "{t}");

    let dir = tempfile::tempdir().unwrap();
    let o = flocsim(&["steady", "--preset", "fig2", "--grid-n", "101", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let t = text(&o);
    assert!(t.contains("extinction Attached: hypotheses fail") && t.contains("converged"), "{t}");
    assert_eq!(read(dir.path(), "steady.csv").lines().count(), 102);

    let o = flocsim(&["presets"]);
    assert!(text(&o).lines().any(|l| l.starts_with("washout_demo\t")));
}

#[test]
fn sweep_verb_writes_summary_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = flocsim(&[
        "sweep", "--preset", "blowup_demo", "--axis", "model.yu[0], model.yv[0]", "--values", "0.9,1.5",
        "--grid-n", "65", "--t-end", "5", "--threads", "2", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let summary = read(dir.path(), "summary.csv");
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0.9,coexistence,5,") && rows[2].starts_with("1.5,blow-up,"), "{summary}");
    assert!(dir.path().join("point_0/monitors.csv").exists() && dir.path().join("point_1/monitors.csv").exists());
}

#[test]
fn sweep_records_point_failures() {
    let mut base = load_preset("fig2a").unwrap();
    base.controls.grid_n = 33;
    base.controls.t_end = 0.5;
    base.controls.steady = None;
    let points = sweep(&base, &["model.yu[0]".into()], &[-1.0, 0.2], None);
    assert!(points[0].outcome.as_ref().unwrap_err().contains("(A1)"));
    assert!(points[1].outcome.is_ok());
    let csv = sweep_summary(1, &points);
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[1].starts_with("-1,error,"));
    assert_eq!(rows[1].matches(',').count(), rows[0].matches(',').count());
    assert_eq!(rows[2].matches(',').count(), rows[0].matches(',').count());
}

#[test]
fn single_point_sweep_matches_run() {
    let mut base = load_preset("fig3a").unwrap();
    base.controls.grid_n = 41;
    base.controls.t_end = 4.0;
    let value = base.params.du()[0];
    let points = sweep(&base, &["model.du[0]".into()], &[value], None);
    let direct = run_config(&base).unwrap();
    let a = summary_row("x", 1, &points[0].outcome);
    let b = summary_row("x", 1, &Ok(direct));
    assert_eq!(a, b);
}
