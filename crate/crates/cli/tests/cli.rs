use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diamantine"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_doc(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn analyze_standard_is_incapable_at_maximum() {
    let out = run(&["analyze", p(&data("standard2.json"))]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["capability"]["verdict"], "incapable");
    let v = report["volume"].as_f64().unwrap().abs();
    let vmax = report["critical"]["max_abs_volume"].as_f64().unwrap();
    assert!((v - vmax).abs() < 1e-8 * vmax);
    assert_eq!(report["planar_unit"]["halfspace_verdict"], "incapable");
    assert_eq!(report["planar_unit"]["pointedness"], "not-pointed");
}

#[test]
fn analyze_critical_max_lists_interlaced_roots() {
    let out = run(&["analyze", p(&data("critical123.json"))]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let alphas = report["critical"]["alphas"].as_array().unwrap();
    assert_eq!(alphas.len(), 3);
    let bracket = |i: usize| {
        let b = alphas[i]["bracket"].as_array().unwrap();
        (b[0].as_f64().unwrap(), b[1].as_f64().unwrap())
    };
    assert!(bracket(0).1 <= 0.0);
    assert_eq!(bracket(1), (1.0, 2.0));
    assert_eq!(bracket(2), (2.0, 3.0));
    assert_eq!(alphas[0]["kind"], "negative-extremum");
    assert_eq!(alphas[1]["kind"], "positive-saddle-candidate");
    assert!(report["critical"]["saddle_config"].is_object());
    assert!(report["current"]["lagrange_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn analyze_output_is_deterministic() {
    let a = run(&["analyze", p(&data("reentrant.json"))]);
    let b = run(&["analyze", p(&data("reentrant.json"))]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["capability"]["verdict"], "capable");
}

#[test]
fn degenerate_spec_exits_with_precondition_code() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_doc(
        dir.path(),
        "flat.json",
        r#"{"dimension":2,"edge_vectors":[[1,0],[2,0],[3,0]]}"#,
    );
    let out = run(&["analyze", p(&spec)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn parse_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_doc(
        dir.path(),
        "u.json",
        r#"{"dimension":2,"preset":"standard","extra":true}"#,
    );
    let out = run(&["analyze", p(&unknown)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.extra"));

    let broken = write_doc(dir.path(), "b.json", "{\"dimension\": 2,");
    assert_eq!(run(&["analyze", p(&broken)]).status.code(), Some(2));

    let out = run(&["probe-topology", "--s", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shape_error_for_missing_vector() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_doc(
        dir.path(),
        "s.json",
        r#"{"dimension":2,"edge_vectors":[[1,0],[0,1]]}"#,
    );
    let out = run(&["analyze", p(&spec)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape"));
}

#[test]
fn trace_reentrant_writes_all_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(&[
        "trace",
        p(&data("reentrant.json")),
        "--steps",
        "100",
        "--step-size",
        "1e-3",
        "-o",
        p(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 102);
    let width = 1 + 6 + 3 + 2;
    assert!(lines.iter().all(|l| l.split(',').count() == width));
    let vol = |l: &str| {
        l.split(',')
            .nth(width - 2)
            .unwrap()
            .parse::<f64>()
            .unwrap()
            .abs()
    };
    assert!(vol(lines[101]) > vol(lines[1]));
    assert!(lines[1].ends_with(",NaN"));
    let taus: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(taus.windows(2).all(|w| w[1] > w[0]));

    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("initial |V|"));
    assert!(summary.contains("final |V|"));
    assert!(summary.contains("min increment eigenvalue"));
}

#[test]
fn trace_with_zero_steps_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(&[
        "trace",
        p(&data("reentrant.json")),
        "--steps",
        "0",
        "-o",
        p(&csv),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 2);
}

#[test]
fn trace_with_strain_policy() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(&[
        "trace",
        p(&data("reentrant.json")),
        "--steps",
        "10",
        "--policy",
        "strain:1,0,1",
        "-o",
        p(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bad = run(&[
        "trace",
        p(&data("reentrant.json")),
        "--policy",
        "strain:1,0",
        "-o",
        p(&csv),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn trace_from_standard_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = run(&["trace", p(&data("standard2.json")), "-o", p(&csv)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("incapable"));
    assert!(!csv.exists());
}

#[test]
fn render_svg_has_one_line_per_edge() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("h.svg");
    let out = run(&[
        "render",
        p(&data("standard2.json")),
        "--reps",
        "2",
        "--format",
        "svg",
        "-o",
        p(&svg),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&svg).unwrap();
    // 3x3 cells: 9 edges along p0, 6 each along p1 and p2 stay inside the box
    assert_eq!(text.matches("<line ").count(), 21);
    assert!(text.contains("viewBox"));

    let out = run(&[
        "render",
        p(&data("standard3.json")),
        "--format",
        "svg",
        "-o",
        p(&svg),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn render_segments_in_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let seg = dir.path().join("d.txt");
    let out = run(&[
        "render",
        p(&data("standard3.json")),
        "--reps",
        "1",
        "--format",
        "segments",
        "-o",
        p(&seg),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&seg).unwrap();
    let dirs: Vec<Vec<f64>> = text
        .lines()
        .map(|l| {
            let (a, b) = l.split_once("  ").unwrap();
            let a: Vec<f64> = a.split(' ').map(|x| x.parse().unwrap()).collect();
            let b: Vec<f64> = b.split(' ').map(|x| x.parse().unwrap()).collect();
            let v: Vec<f64> = b.iter().zip(&a).map(|(y, x)| y - x).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();
    // the 4 edges of the first vertex
    for i in 0..4 {
        for j in i + 1..4 {
            let c: f64 = dirs[i].iter().zip(&dirs[j]).map(|(a, b)| a * b).sum();
            assert!((c + 1.0 / 3.0).abs() < 1e-12, "cos = {c}");
        }
    }
}

#[test]
fn probe_topology_reports_cylinders() {
    let out = run(&["probe-topology", "--s", "1,2,3", "--grid", "128"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let comps = report["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert!(comps.iter().all(|c| c["euler_characteristic"] == 0));
    assert_eq!(report["saddle_present"], true);
}

#[test]
fn omega_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["omega", "to", p(&data("reentrant.json"))]);
    assert!(out.status.success());
    let omega = write_doc(
        dir.path(),
        "o.json",
        std::str::from_utf8(&out.stdout).unwrap(),
    );
    let back = run(&["omega", "from", p(&omega)]);
    assert!(
        back.status.success(),
        "{}",
        String::from_utf8_lossy(&back.stderr)
    );
    let spec = write_doc(
        dir.path(),
        "s.json",
        std::str::from_utf8(&back.stdout).unwrap(),
    );
    let again = run(&["omega", "to", p(&spec)]);
    let a: Value = serde_json::from_slice(&out.stdout).unwrap();
    let b: Value = serde_json::from_slice(&again.stdout).unwrap();
    for (x, y) in a["omega"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .zip(
            b["omega"]
                .as_array()
                .unwrap()
                .iter()
                .flat_map(|r| r.as_array().unwrap()),
        )
    {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-12);
    }
}
