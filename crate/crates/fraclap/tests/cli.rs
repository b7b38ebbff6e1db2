use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn fraclap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .env_remove("FRACLAP_OUTPUT_DIR")
        .output()
        .expect("run fraclap")
}

/// Data rows of a CSV file, skipping `#` comments and the header.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn sidecar(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn kernel_alpha_one_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(dir.path(), &["kernel", "--alpha", "1", "--h", "1", "--max-index", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = rows(&dir.path().join("kernel_alpha1_h1_max8.csv"));
    let c: Vec<f64> = data.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(c.len(), 9);
    assert!((c[0] - PI / 2.0).abs() < 1e-15);
    assert!((c[1] + 2.0 / PI).abs() < 1e-15);
    assert_eq!(c[2], 0.0);
    assert!((c[3] + 2.0 / (9.0 * PI)).abs() < 1e-15);
    assert_eq!(data[0][2], "");
    let meta = sidecar(&dir.path().join("kernel_alpha1_h1_max8.meta.json"));
    assert_eq!(meta["parameters"]["alpha"], 1.0);
    assert!(meta["created_unix"].as_u64().unwrap() > 0);
}

#[test]
fn kernel_alpha_two_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(dir.path(), &["kernel", "--alpha", "2", "--h", "1", "--max-index", "4"]);
    assert!(out.status.success());
    let c: Vec<f64> = rows(&dir.path().join("kernel_alpha2_h1_max4.csv"))
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    let want = [PI * PI / 3.0, -2.0, 0.5, -2.0 / 9.0, 0.125];
    for (a, b) in c.iter().zip(want) {
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }
}

#[test]
fn invalid_alpha_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(dir.path(), &["kernel", "--alpha", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
    // Unknown flags are rejected by the parser with the same code.
    assert_eq!(fraclap(dir.path(), &["kernel", "--beta", "1"]).status.code(), Some(2));
}

#[test]
fn three_d_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(dir.path(), &["verify", "--three-d", "--N", "2", "--M", "4"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.matches("PASS").count(), 8);
    let data = rows(&dir.path().join("verify3d_N2_M4.csv"));
    assert!(data.iter().all(|r| r[3] == "pass"));
}

#[test]
fn scaling_figure_reports_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(
        dir.path(),
        &["figure", "scaling", "--alpha", "1.5", "--N", "64", "--M-list", "128,256,512,1024"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stem = "scaling_alpha1.5_h1_N64_M128-256-512-1024";
    let data = rows(&dir.path().join(format!("{stem}.csv")));
    assert_eq!(data.len(), 4);
    for r in &data {
        let norm: f64 = r[2].parse().unwrap();
        let bound: f64 = r[3].parse().unwrap();
        assert!(norm <= bound);
    }
    let meta = sidecar(&dir.path().join(format!("{stem}.meta.json")));
    let slope = meta["summary"]["fitted_slope"].as_f64().unwrap();
    assert!((slope + 1.577).abs() < 0.01, "{slope}");
    assert_eq!(meta["summary"]["predicted_slope"], -1.0);
    assert_eq!(meta["summary"]["bounds_hold"], true);
}

#[test]
fn heatmap_figure_has_three_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(dir.path(), &["figure", "heatmap", "--alpha", "1.5", "--N", "64"]);
    assert!(out.status.success());
    let data = rows(&dir.path().join("heatmap_alpha1.5_h1_N64.csv"));
    assert_eq!(data.len(), 64 * 64);
    assert_eq!(data[0].len(), 5);
    let meta = sidecar(&dir.path().join("heatmap_alpha1.5_h1_N64.meta.json"));
    assert_eq!(meta["summary"]["corner_blocks_dominate"], true);
}

#[test]
fn corner_figure_contains_nearest_image() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(dir.path(), &["figure", "corner", "--alpha", "1", "--N", "8"]);
    assert!(out.status.success());
    let data = rows(&dir.path().join("corner_alpha1_h1_N8.csv"));
    let c1: f64 = data[0][4].parse().unwrap();
    assert!((c1 + 2.0 / PI).abs() < 1e-15);
}

#[test]
fn remaining_figures_write_datasets() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, file) in [
        ("functional", "functional_alpha1.5_h1_N64_M128.csv"),
        ("gaussian", "gaussian_alpha1.5_h1_N64_j0.csv"),
        ("sweep", "sweep_alpha1.5_h1_N64.csv"),
    ] {
        let out = fraclap(dir.path(), &["figure", kind]);
        assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(file).exists(), "{file}");
    }
    let sweep = rows(&dir.path().join("sweep_alpha1.5_h1_N64.csv"));
    let centers: Vec<&str> = sweep.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(centers, ["0", "8", "16", "24", "32"]);
    let meta = sidecar(&dir.path().join("functional_alpha1.5_h1_N64_M128.meta.json"));
    assert!(meta["summary"]["functions"].as_str().unwrap().contains("stand-in"));
}

#[test]
fn plan_prints_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(dir.path(), &["plan", "--alpha", "1", "--h", "1", "--N", "64", "--eps", "1e-3"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("certified"));
    let data = rows(&dir.path().join("plan_alpha1_h1_N64_eps1e-3.csv"));
    let m: u64 = data[0][1].parse().unwrap();
    assert!(m.is_power_of_two() && m >= 128);
    let normalized: f64 = data[0][3].parse().unwrap();
    assert!(normalized <= 1e-3);
}

#[test]
fn plan_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fraclap(dir.path(), &["plan", "--eps", "0"]).status.code(), Some(2));
    let out = fraclap(dir.path(), &["plan", "--alpha", "0.5", "--N", "64", "--eps", "1e-6"]);
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("required size"), "{stderr}");
}

#[test]
fn csv_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["figure", "sweep", "--alpha", "1", "--N", "32"];
    assert!(fraclap(a.path(), &args).status.success());
    assert!(fraclap(b.path(), &args).status.success());
    let name = "sweep_alpha1_h1_N32.csv";
    assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
}

#[test]
fn json_format_and_config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "alpha = 1.0\nN = 16\nformat = \"json\"\n").unwrap();
    let env_dir = dir.path().join("env");
    let out = Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(["figure", "corner", "--N", "8", "--config"])
        .arg(&cfg)
        .env("FRACLAP_OUTPUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // alpha from the file, N from the flag, directory from the environment.
    let data: serde_json::Value =
        serde_json::from_slice(&std::fs::read(env_dir.join("corner_alpha1_h1_N8.json")).unwrap()).unwrap();
    assert!((data[0]["dominant_image"].as_f64().unwrap() + 2.0 / PI).abs() < 1e-15);
}
