use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatial-sde"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code and the single stderr line of a failing run.
fn fails(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = run(dir, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "stderr not one line: {err:?}");
    assert!(err.starts_with("error: "), "{err}");
    (out.status.code().unwrap(), err.trim_end().to_string())
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_string)
        .collect()
}

#[test]
fn synth_wafer_row_count_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "wafer", "--seed", "1", "--out", "w.csv"]);
    let n = data_rows(&dir.path().join("w.csv")).len();
    assert!((5700..=6300).contains(&n), "{n}");
    let manifest = fs::read_to_string(dir.path().join("w.csv.manifest.toml")).unwrap();
    assert!(manifest.contains("command = \"synth-wafer\""));
    assert!(manifest.contains("seed = 1"));
    assert!(manifest.contains("seed_source = \"flag\""));
}

#[test]
fn synth_fpga_writes_one_file_per_path() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "fpga", "--paths", "32", "--devices", "1", "--seed", "3", "--out", "fpga"]);
    let files: Vec<_> = fs::read_dir(dir.path().join("fpga/fpga-01")).unwrap().collect();
    assert_eq!(files.len(), 32);
    assert_eq!(data_rows(&dir.path().join("fpga/fpga-01/path-17.csv")).len(), 3173);
}

#[test]
fn usage_errors_are_single_lines() {
    let dir = tempfile::tempdir().unwrap();
    let (code, msg) = fails(dir.path(), &["synth", "wafer", "--seed", "1"]);
    assert_eq!(code, 2);
    assert!(msg.starts_with("error: usage:") && msg.contains("--out"), "{msg}");
    let (code, msg) = fails(dir.path(), &["predict", "missing.csv", "--plan", "p", "--out", "o", "--metrics", "m"]);
    assert_eq!(code, 1);
    assert!(msg.starts_with("error: io:"), "{msg}");
}

fn small_wafer(dir: &Path, devices: &str, seed: &str, out: &str) {
    ok(dir, &["synth", "wafer", "--devices", devices, "--seed", seed, "--out", out]);
}

#[test]
fn sample_plan_contents_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "fpga", "--paths", "1", "--devices", "1", "--seed", "5", "--out", "f"]);
    ok(d, &["sample", "f/fpga-01/path-01.csv", "--method", "k-sde", "--alpha", "2", "--beta", "2", "--p", "0.1", "--seed", "9", "--out", "plan.csv"]);
    let text = fs::read_to_string(d.join("plan.csv")).unwrap();
    assert!(text.contains("index,x,y,role,provenance,group"));
    let rows = data_rows(&d.join("plan.csv"));
    assert_eq!(rows.len(), 3173);
    let train: Vec<_> = rows.iter().filter(|r| r.contains(",train,")).collect();
    assert_eq!(train.len(), 317);
    assert!(train.iter().any(|r| r.contains(",primary,")));
    assert!(train.iter().all(|r| r.contains(",primary,") || r.contains(",backfill,")));

    let (_, msg) = fails(d, &["sample", "f/fpga-01/path-01.csv", "--method", "k-sde", "--alpha", "0", "--beta", "0", "--seed", "1", "--out", "p0.csv"]);
    assert!(msg.starts_with("error: invalid-input:"), "{msg}");
    assert!(!d.join("p0.csv").exists());
    let (_, msg) = fails(d, &["sample", "f/fpga-01/path-01.csv", "--method", "magic", "--seed", "1", "--out", "p1.csv"]);
    assert!(msg.contains("magic"), "{msg}");
}

#[test]
fn strict_mode_and_entropy_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, msg) = fails(d, &["--strict", "synth", "wafer", "--devices", "200", "--out", "w.csv"]);
    assert_eq!(code, 1);
    assert!(msg.starts_with("error: usage:") && msg.contains("--seed"), "{msg}");
    ok(d, &["synth", "wafer", "--devices", "200", "--out", "w.csv"]);
    let manifest = fs::read_to_string(d.join("w.csv.manifest.toml")).unwrap();
    assert!(manifest.contains("seed_source = \"entropy\""), "{manifest}");
    assert!(manifest.lines().any(|l| l.starts_with("seed = ")), "{manifest}");

    // Replaying an entropy-seeded run reproduces it.
    let before = fs::read(d.join("w.csv")).unwrap();
    fs::remove_file(d.join("w.csv")).unwrap();
    ok(d, &["replay", "w.csv.manifest.toml"]);
    assert_eq!(fs::read(d.join("w.csv")).unwrap(), before);
    assert_eq!(fs::read_to_string(d.join("w.csv.manifest.toml")).unwrap(), manifest);
}

#[test]
fn predict_metrics_mismatch_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_wafer(d, "400", "2", "w.csv");
    ok(d, &["sample", "w.csv", "--method", "s-sde", "--seed", "4", "--out", "plan.csv"]);
    ok(d, &["predict", "w.csv", "--plan", "plan.csv", "--out", "pred.csv", "--metrics", "m.csv"]);
    let metrics = data_rows(&d.join("m.csv"));
    assert_eq!(metrics.len(), 1);
    assert!(metrics[0].contains(",s-sde,4,"), "{}", metrics[0]);
    let n = data_rows(&d.join("w.csv")).len();
    assert_eq!(data_rows(&d.join("pred.csv")).len(), n - (n as f64 * 0.1).round() as usize);

    let pred = fs::read(d.join("pred.csv")).unwrap();
    let m = fs::read(d.join("m.csv")).unwrap();
    fs::remove_file(d.join("pred.csv")).unwrap();
    ok(d, &["replay", "pred.csv.manifest.toml"]);
    assert_eq!(fs::read(d.join("pred.csv")).unwrap(), pred);
    assert_eq!(fs::read(d.join("m.csv")).unwrap(), m);

    // A plan row pointing past the dataset.
    let text = fs::read_to_string(d.join("plan.csv")).unwrap();
    let bad = text.replacen("\n0,", &format!("\n{n},"), 1);
    assert_ne!(bad, text);
    fs::write(d.join("bad.csv"), bad).unwrap();
    let (_, msg) = fails(d, &["predict", "w.csv", "--plan", "bad.csv", "--out", "x.csv", "--metrics", "y.csv"]);
    assert!(msg.starts_with("error: plan-mismatch:"), "{msg}");

    // A plan made for a different dataset.
    small_wafer(d, "300", "2", "w2.csv");
    let (_, msg) = fails(d, &["predict", "w2.csv", "--plan", "plan.csv", "--out", "x.csv", "--metrics", "y.csv"]);
    assert!(msg.starts_with("error: plan-mismatch:"), "{msg}");
}

#[test]
fn sweep_grid_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_wafer(d, "300", "3", "w.csv");
    ok(d, &["sweep", "w.csv", "--seed", "1", "--reps", "1", "--restarts", "1", "--out", "sweep.csv", "--out-normalized", "sweep_n.csv"]);
    let text = fs::read_to_string(d.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0], ["alpha\\beta", "0", "1", "2", "3", "4"]);
    let cells: Vec<&str> = rows[1..].iter().flat_map(|r| r[1..].iter().copied()).collect();
    assert_eq!(cells.len(), 25);
    assert_eq!(cells.iter().filter(|c| **c == "—").count(), 1);
    assert_eq!(rows[1][1], "—");
    assert!(cells.iter().filter(|c| **c != "—").all(|c| c.parse::<f64>().unwrap() >= 0.0));
    assert!(d.join("sweep_n.csv").exists());
}

#[test]
fn compare_reports_and_reps_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::create_dir(d.join("wafers")).unwrap();
    small_wafer(d, "150", "1", "wafers/a.csv");
    small_wafer(d, "150", "2", "wafers/b.csv");
    ok(d, &["compare", "wafers", "--seed", "3", "--reps", "20", "--restarts", "1", "--out-dir", "cmp"]);
    let summary = data_rows(&d.join("cmp/summary.csv"));
    assert_eq!(summary.len(), 5);
    assert!(summary.iter().all(|r| r.starts_with("wafers,") && r.contains(",40,")));
    assert_eq!(data_rows(&d.join("cmp/per_dataset.csv")).len(), 10);
    assert_eq!(data_rows(&d.join("cmp/runs.csv")).len(), 2 * 5 * 20);
    let manifest = fs::read_to_string(d.join("cmp/manifest.toml")).unwrap();
    assert!(manifest.contains("reps = 20"), "{manifest}");

    // Improvements recompute from the stored means.
    for row in data_rows(&d.join("cmp/improvements.csv")) {
        let f: Vec<&str> = row.split(',').collect();
        let (b, i, pct): (f64, f64, f64) = (f[4].parse().unwrap(), f[5].parse().unwrap(), f[6].parse().unwrap());
        assert!(((b - i) / b * 100.0 - pct).abs() < 1e-9);
    }
}

#[test]
fn heatmap_cells_overlay_and_constant_values() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_wafer(d, "300", "4", "w.csv");
    let n = data_rows(&d.join("w.csv")).len();
    ok(d, &["heatmap", "w.csv", "--out", "h.svg"]);
    let svg = fs::read_to_string(d.join("h.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<svg"));
    assert_eq!(svg.matches("class=\"cell\"").count(), n);
    assert!(svg.contains(">max ") && svg.contains(">min "));

    ok(d, &["sample", "w.csv", "--method", "random", "--seed", "1", "--out", "plan.csv"]);
    ok(d, &["heatmap", "w.csv", "--plan", "plan.csv", "--out", "h2.svg"]);
    let svg = fs::read_to_string(d.join("h2.svg")).unwrap();
    assert_eq!(svg.matches("class=\"train\"").count(), (n as f64 * 0.1).round() as usize);

    fs::write(d.join("flat.csv"), "x,y,value\n0,0,2.5\n1,0,2.5\n0,1,2.5\n").unwrap();
    ok(d, &["heatmap", "flat.csv", "--out", "flat.svg"]);
    let svg = fs::read_to_string(d.join("flat.svg")).unwrap();
    assert_eq!(svg.matches("class=\"cell\"").count(), 3);
    assert!(svg.contains("min = max = 2.5"));
    let colors: std::collections::BTreeSet<&str> = svg
        .lines()
        .filter(|l| l.contains("class=\"cell\""))
        .map(|l| l.split("fill=\"").nth(1).unwrap().split('"').next().unwrap())
        .collect();
    assert_eq!(colors.len(), 1);

    fs::write(d.join("empty.csv"), "x,y,value\n").unwrap();
    let (_, msg) = fails(d, &["heatmap", "empty.csv", "--out", "e.svg"]);
    assert!(msg.starts_with("error: invalid-input:"), "{msg}");
}
