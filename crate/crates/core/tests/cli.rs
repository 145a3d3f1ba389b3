//! Black-box tests of the `redescend` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redescend")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn fit_reports_estimate() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "x.csv", "# triplet\n-1\n0\n1\n");
    let v = json(&run(&["fit", "--input", &input]));
    assert!(v["estimate"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(v["effective_scale"].as_f64().unwrap(), 1.0);
    assert!(v["local_minima"].is_array());

    let v = json(&run(&["fit", "--family", "huber", "--input", &input]));
    assert_eq!(v["estimate"].as_f64().unwrap(), 0.0);
}

#[test]
fn numbers_are_printed_in_scientific_notation() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "x.csv", "0\n100\n200\n");
    let out = run(&["breakdown", "--c", "0.01", "--input", &input, "--empirical"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"epsilon_star\": 2.5e-1"), "{text}");
    let v = json(&out);
    assert_eq!(v["report"]["A"].as_f64().unwrap(), 2.0);
    assert_eq!(v["predicted_first_breaking_m"], 2);
    assert_eq!(v["empirical"]["first_breaking_m"], 2);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["fit", "--input", missing.to_str().unwrap()]).status.code(), Some(4));

    let bad = write(&dir, "bad.csv", "1\nabc\n");
    let out = run(&["fit", "--input", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let flat = write(&dir, "flat.csv", "7\n7\n7\n");
    assert_eq!(run(&["fit", "--scale", "mad:1", "--input", &flat]).status.code(), Some(3));

    let good = write(&dir, "good.csv", "1\n2\n3\n");
    assert_eq!(run(&["kde", "--family", "huber", "--c", "1", "--input", &good, "--grid", "0:1:3"]).status.code(), Some(2));
    assert_eq!(run(&["fit", "--family", "tukey", "--input", &good]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--component", "0.5:0:1", "--component", "0.4:1:1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let cloud = write(&dir, "cloud.csv", "3,1\n-2,0.5\n1,-1\n-1,-0.3\n0.5,0.2\n");
    assert_eq!(run(&["pca", "--input", &cloud]).status.code(), Some(0));
    let axis = write(&dir, "axis.csv", "1,0\n-1,0\n2,0\n-2,0\n");
    assert_eq!(run(&["pca", "--input", &axis]).status.code(), Some(3));
}

#[test]
fn kde_writes_csv() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "x.csv", "0\n");
    let out = run(&["kde", "--c", "1", "--input", &input, "--grid", "-3:3:7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,density");
    assert_eq!(lines.len(), 8);
    let center: Vec<f64> = lines[4].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(center[0], 0.0);
    assert!((center[1] - 0.398942).abs() < 1e-6);
}

#[test]
fn duality_pca_steer_and_stress() {
    let dir = TempDir::new().unwrap();
    let triplet = write(&dir, "t.csv", "-1\n0\n1\n");
    let v = json(&run(&["duality", "--c", "1", "--input", &triplet]));
    assert!(v["gap"].as_f64().unwrap() <= 1e-8);

    let cloud = write(&dir, "cloud.csv", "10,0.5\n-10,-0.5\n5,0\n-5,0.2\n0,-0.2\n3,0.1\n");
    let v = json(&run(&["pca", "--input", &cloud]));
    for key in ["S_n", "V_n", "eigenvalues", "eigenvectors", "robust_variances", "top_pc", "top_pc_robust"] {
        assert!(!v[key].is_null(), "{key}");
    }
    let v = json(&run(&["steer", "--input", &cloud, "--target", "0,1"]));
    assert!(v["angle_to_target"].as_f64().unwrap() < 0.01);

    let spherical = write(&dir, "s.csv", "1,0\n-1,0\n0,1\n0,-1\n");
    let v = json(&run(&["pca", "--input", &spherical]));
    assert_eq!(v["top_pc"], "full_space");

    let good = write(&dir, "g.csv", "0\n0\n0\n0\n");
    let v = json(&run(&["stress", "--input", &good, "--m", "5", "--site", "1e6"]));
    assert_eq!(v["broke"], true);
    let v = json(&run(&["stress", "--input", &good, "--m", "4", "--site", "1e6"]));
    assert_eq!(v["broke"], false);
}

fn fig1_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn fig1_is_deterministic_and_satisfies_the_duality_identity() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out_a = run(&["fig1", "--output-dir", a.to_str().unwrap()]);
    let out_b = run(&["fig1", "--output-dir", b.to_str().unwrap()]);
    assert!(out_a.status.success());
    assert_eq!(out_a.stdout, out_b.stdout);
    let files = fig1_files(&a);
    assert_eq!(files, fig1_files(&b));
    let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["fig1_c0.15.csv", "fig1_c1.csv", "fig1_c10.csv", "fig1_summary.json"]);

    let n = 200.0;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    for (name, bytes) in &files[..3] {
        let c: f64 = name.trim_start_matches("fig1_c").trim_end_matches(".csv").parse().unwrap();
        let text = std::str::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,kde_density,m_objective"));
        let mut rows = 0;
        for line in lines {
            let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            // Solved for the objective, the identity is well conditioned on every row.
            let objective = n - v[1] * n * c / norm;
            assert!((v[2] - objective).abs() <= 1e-10 * v[2].abs().max(objective.abs()), "{name}: {line}");
            // Solved for the density it is too, wherever n − objective keeps its leading digits.
            if n - v[2] >= 1e-3 * n {
                let density = norm / (n * c) * (n - v[2]);
                assert!((v[1] - density).abs() <= 1e-10 * v[1].abs().max(density.abs()), "{name}: {line}");
            }
            rows += 1;
        }
        assert_eq!(rows, 1101);
    }

    let summary: Value = serde_json::from_slice(&files[3].1).unwrap();
    assert_eq!(summary["seed"], 42);
    assert_eq!(summary["regimes"].as_array().unwrap().len(), 3);
}

#[test]
fn gen_matches_golden_file() {
    let out = run(&["gen"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), include_str!("golden/mixture_seed42.csv"));

    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.csv");
    let out = run(&["gen", "--n", "5", "--component", "1:0:0", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(path).unwrap(), "0e0\n0e0\n0e0\n0e0\n0e0\n");
}
