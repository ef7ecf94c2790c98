use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use xnls_core::field::gaussian;
use xnls_core::io::{read_snapshot, snapshot_path, write_snapshot};
use xnls_core::{Field2D, GridSpec};

fn xnls(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xnls")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = r#"
[grid]
n = 64
l = 20.0

[time]
dt = 0.001
t_end = 0.4
output_every = 20

[virial]
radii = [2.0]
every = 10

[output]
directory = "out"
"#;

fn write_config(dir: &Path, extra: &str) -> String {
    fs::write(dir.join("run.toml"), format!("{SMALL}{extra}")).unwrap();
    "run.toml".into()
}

#[test]
fn zero_initial_data_gives_zero_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "\n[initial]\nfamily = \"zero\"\n");
    let o = xnls(&["evolve", &cfg], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let series = fs::read_to_string(tmp.path().join("out/series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,mass,hamiltonian,grad_l2,l4,l8,linf,orlicz_tilde,v_r,dv_r,d2v_r,local_g,boundary_mass"
    );
    for line in lines {
        let vals: Vec<f64> = line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert!(vals.iter().all(|&v| v == 0.0), "{line}");
    }
}

#[test]
fn small_gaussian_run_conserves_mass_and_hashes_its_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let o = xnls(&["evolve", &cfg], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = tmp.path().join("out");
    let summary = json(&out.join("summary.json"));
    assert!(summary["mass_drift"].as_f64().unwrap() < 1e-10);
    assert_eq!(summary["completed"], true);
    let manifest = json(&out.join("manifest.json"));
    let echo = fs::read(out.join("config.echo")).unwrap();
    use sha2::Digest;
    let digest: String = sha2::Sha256::digest(&echo).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest["config_hash"].as_str().unwrap(), digest);
    assert_eq!(manifest["suites"]["completed"], true);
    // 21 outputs, every one a snapshot
    assert!(snapshot_path(&out, 20).exists());
    assert!(!snapshot_path(&out, 21).exists());
}

#[test]
fn identical_configs_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    assert_eq!(code(&xnls(&["evolve", &cfg, "--set", "output.directory=a"], tmp.path())), 0);
    assert_eq!(code(&xnls(&["evolve", &cfg, "--set", "output.directory=b"], tmp.path())), 0);
    for f in ["series.csv", "virial.csv", "summary.json", "snapshots/t_20.bin"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let o = xnls(&["evolve", &cfg, "--set", "time.dt=0"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("dt"), "{}", stderr(&o));
    let bad = write_config(tmp.path(), "\n[bank]\nsize = 3\n");
    let o = xnls(&["evolve", &bad], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("size"), "{}", stderr(&o));
    assert_eq!(code(&xnls(&["evolve", "missing.toml"], tmp.path())), 1);
    assert_eq!(code(&xnls(&["no-such-command"], tmp.path())), 1);
}

#[test]
fn boundary_abort_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "\n[initial]\nfamily = \"gaussian\"\nwidth = 1.0\ncenter = [8.0, 0.0]\n",
    );
    let o = xnls(&["evolve", &cfg, "--set", "time.boundary_policy=abort"], tmp.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("boundary"), "{}", stderr(&o));
}

#[test]
fn linear_run_scatters_to_roundoff() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let o = xnls(&["evolve", &cfg, "--set", "time.nonlinear=false"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = xnls(&["diagnose", "out", "--window-start", "0.1"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&tmp.path().join("out/report.json"));
    assert!(report["scattering"]["max_pairwise"].as_f64().unwrap() < 1e-12, "{}", report["scattering"]);
    assert!(report["intervals"][0]["st_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(report["pass"]["scattering_converged"], true);
}

#[test]
fn small_data_run_diagnoses_below_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    assert_eq!(code(&xnls(&["evolve", &cfg], tmp.path())), 0);
    let o = xnls(&["diagnose", "out", "--interval", "0,0.4", "--interval", "0.2,0.4"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&tmp.path().join("out/report.json"));
    assert_eq!(report["intervals"].as_array().unwrap().len(), 2);
    assert!(report["intervals"][0]["bootstrap"]["r1"].as_f64().unwrap().is_finite());
    assert_eq!(report["pass"]["scattering_converged"], true);
    assert!(tmp.path().join("out/slices.csv").exists());
}

#[test]
fn truncated_run_directories_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    assert_eq!(code(&xnls(&["evolve", &cfg], tmp.path())), 0);
    assert_eq!(code(&xnls(&["diagnose", "nowhere"], tmp.path())), 2);
    fs::remove_file(snapshot_path(&tmp.path().join("out"), 20)).unwrap();
    let o = xnls(&["diagnose", "out"], tmp.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let echo = tmp.path().join("out/config.echo");
    let text = fs::read_to_string(&echo).unwrap();
    fs::write(&echo, text.replace("t_end = 0.4", "t_end = 0.2")).unwrap();
    let o = xnls(&["diagnose", "out"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("hash"), "{}", stderr(&o));
}

#[test]
fn orlicz_of_constant_on_disk_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = GridSpec::new(128, 8.0).unwrap();
    let (c, rho) = (0.7, 1.5);
    let u = Field2D::from_radial(grid, |r| if r <= rho { c } else { 0.0 });
    let area = (0..grid.len()).filter(|&i| grid.radius(i) <= rho).count() as f64 * grid.cell_area();
    write_snapshot(&tmp.path().join("disk.bin"), 0.0, &u).unwrap();
    // area·(e^{c²/λ²} − 1) = 1
    let expect = c / (1.0 + 1.0 / area).ln().sqrt();
    let o = xnls(&["orlicz", "disk.bin", "--variant", "L"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let norm = v["norm"].as_f64().unwrap();
    assert!((norm - expect).abs() / expect < 1e-5, "{norm} vs {expect}");
    assert_eq!(code(&xnls(&["orlicz", "absent.bin"], tmp.path())), 1);
}

#[test]
fn moser_table_has_unit_gradient() {
    let tmp = tempfile::tempdir().unwrap();
    let o = xnls(&["moser", "--alpha", "4", "8", "16"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "alpha,grad_l2,l2,orlicz_L,orlicz_Ltilde");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!((r[1] - 1.0).abs() <= 1e-3, "{r:?}");
    }
    assert!(rows.windows(2).all(|w| w[1][3] < w[0][3]));
}

#[test]
fn rearranging_a_radial_decreasing_field_is_the_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = GridSpec::new(64, 16.0).unwrap();
    let u = gaussian(grid, 1.0, 1.0, (0.0, 0.0));
    write_snapshot(&tmp.path().join("g.bin"), 0.5, &u).unwrap();
    let o = xnls(&["rearrange", "g.bin", "--output", "star.bin"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (t, star) = read_snapshot(&tmp.path().join("star.bin")).unwrap();
    assert_eq!(t, 0.5);
    let diff = u.values().iter().zip(star.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-15, "{diff}");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["grad_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn inequalities_write_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[grid]\nn = 128\nl = 40.0\n[bank]\nseed = 7\nrandom_count = 2\n[output]\ndirectory = \"ineq\"\n";
    fs::write(tmp.path().join("ineq.toml"), text).unwrap();
    let o = xnls(&["inequalities", "ineq.toml"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&tmp.path().join("ineq/inequalities.json"));
    assert!(report["reports"].as_array().unwrap().len() > 10);
    let csv = fs::read_to_string(tmp.path().join("ineq/inequalities.csv")).unwrap();
    assert!(csv.starts_with("id,max_ratio,"));
    assert!(json(&tmp.path().join("ineq/manifest.json"))["suites"]["dichotomy"].is_boolean());
}

#[test]
fn fulltest_runs_selected_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let o = xnls(&["fulltest", "--only", "2,3,6", "--out", "acc"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("PASS")).count(), 3, "{text}");
    assert_eq!(json(&tmp.path().join("acc/acceptance.json")).as_array().unwrap().len(), 3);
    assert_eq!(code(&xnls(&["fulltest", "--only", "11"], tmp.path())), 1);
}

#[test]
fn thread_variable_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_xnls"))
        .args(["moser", "--alpha", "4"])
        .env("XNLS_THREADS", "zero")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_xnls"))
        .args(["moser", "--alpha", "4"])
        .env("XNLS_THREADS", "1")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}
