use std::path::Path;
use std::process::{Command, Output};

fn shapes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapes")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_data(path: &Path) {
    let mut text = String::from("x,y\n");
    for i in 0..60 {
        let x = 2.0 + i as f64 * 0.05;
        let y = (3.0 * x).sin() * 8.0 + ((i * 37) % 11) as f64 * 0.05;
        text.push_str(&format!("{x},{y}\n"));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn fit_writes_estimate_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write_data(&data);
    let out = dir.path().join("est");
    let o = shapes(&[
        "fit", "--label", "LP_100_0.1_20_FKM", "--models", "5,6", "--in", data.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let est = std::fs::read_to_string(out.join("estimate.csv")).unwrap();
    let lines: Vec<&str> = est.lines().collect();
    assert_eq!(lines[0], "x,f_hat");
    assert_eq!(lines.len(), 61);
    let x0: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    assert_eq!(x0, 2.0);
    let model: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["transform"]["x_min"], 2.0);
    assert!(model["m_best"] == 5 || model["m_best"] == 6);
    assert_eq!(model["aic_table"].as_array().unwrap().len(), 2);
    assert!(model["scale"].as_f64().unwrap() > 0.0);
    let knots_x = model["knots_x"].as_array().unwrap();
    assert_eq!(knots_x[0], 2.0);
}

#[test]
fn fit_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write_data(&data);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = shapes(&["fit", "--iterations", "10", "--models", "5", "--in", data.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out.join("estimate.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("est");
    let o = shapes(&["fit", "--in", "/nonexistent/data.csv", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert_eq!(stderr(&o).trim().lines().count(), 1);
    assert!(!out.exists());

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n0,1\n0.5,oops\n1,2\n").unwrap();
    let o = shapes(&["fit", "--in", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));
    assert!(!out.exists());

    let data = dir.path().join("data.csv");
    write_data(&data);
    let o = shapes(&["fit", "--label", "XX_100_0.1_50_FKM", "--in", data.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("pso variant"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn failed_fit_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // too few points for any model in the set
    let data = dir.path().join("tiny.csv");
    std::fs::write(&data, "0,1\n1,2\n2,0\n").unwrap();
    let out = dir.path().join("est");
    let o = shapes(&["fit", "--in", data.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn label_conflicts_with_explicit_flags() {
    let o = shapes(&["fit", "--label", "LP_100_0.1_50_FKM", "--lambda", "1", "--in", "a", "--out", "b"]);
    assert!(!o.status.success());
}

#[test]
fn simulate_small_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("camp");
    let o = shapes(&[
        "simulate", "--benchmark", "f1", "--snr", "100", "--n", "2", "--label", "LP_100_0.1_5_FKM", "--models", "5,6",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["records"].as_array().unwrap().len(), 2);
    assert!(report["summary"]["rmse"].as_f64().unwrap() > 0.0);
    assert_eq!(report["spec"]["label"], "LP_100_0.1_5_FKM");
    let csv = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("index,m_best,fitness,squared_error"));

    let o = shapes(&["simulate", "--benchmark", "f1", "--snr", "10", "--n", "1", "--label", "LP_100_0.1_5_FKM"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("disagrees"));
}

#[test]
fn simulate_from_spec_file_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("c.toml");
    std::fs::write(&spec, "benchmark = \"f7\"\nlabel = \"LP_10_5_5_FKM\"\nnum_realizations = 1\n").unwrap();
    let o = shapes(&["simulate", "--spec", spec.to_str().unwrap(), "--models", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["spec"]["benchmark"], "f7");
    assert_eq!(report["spec"]["config"]["model_set"], serde_json::json!([5]));
}

#[test]
fn benchmarks_list_and_dump() {
    let o = shapes(&["benchmarks"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 10);

    let o = shapes(&["benchmarks", "--dump", "f10", "--points", "256"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 257);
    let mid: Vec<f64> = rows[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(mid[0], 0.0);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f1.csv");
    let o = shapes(&["benchmarks", "--dump", "f1", "--points", "11", "--out", file.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&file).unwrap();
    let v: f64 = text.lines().nth(5).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 45.0).abs() < 1e-12);

    let o = shapes(&["benchmarks", "--dump", "f11"]);
    assert!(!o.status.success());
}
