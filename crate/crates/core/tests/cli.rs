use std::path::Path;
use std::process::{Command, Output};

use swapgate::io::{read_any, read_scan_csv, RunConfig};
use swapgate::run::{CheckRow, GateRow, MarginalRow, ScaleCsvRow, RESOLVED_CONFIG};

const SMALL: &str = r#"
[grid]
extent_um = 4.8
n = 96

[tweezers]
depth_uK = 20.38
waist_nm = 700
separation_um = 2.329

[central]
kind = "harmonic"
frequency_Hz = 22898

[interaction]
schedule = "ideal"
scale = 0.8
"#;

fn swapgate(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swapgate"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fast_gate_writes_report_snapshots_and_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{SMALL}\n[protocol]\nsnapshot_times_us = [0.0, 10.0, 21.8]\nmarginal_times_us = [0.0, 21.8]\nphase_snapshot = true\n"
    );
    let cfg = write_config(tmp.path(), "run.toml", &text);
    let o = swapgate(tmp.path(), &["fast-gate", "--config", &cfg, "--out", "res"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("res");

    let (header, rows): (_, Vec<GateRow>) = read_scan_csv(&out.join("fidelity.csv")).unwrap();
    assert_eq!(header[0], "protocol");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].scale_s, 0.8);
    assert!(rows[0].f_min > 0.0 && rows[0].f_min <= 1.0);

    for (k, t) in [0.0, 10e-6, 21.8e-6].into_iter().enumerate() {
        let s = read_any(&out.join(format!("snapshot_{k:02}.txt"))).unwrap();
        assert!((s.time - t).abs() < 1e-15);
        assert_eq!(s.label, "fast-gate");
        assert_eq!(s.field.grid().n(), 96);
        assert!((s.field.norm_sq() - 1.0).abs() < 1e-8);
    }
    assert!(out.join("phase.txt").exists());
    let (_, m): (_, Vec<MarginalRow>) = read_scan_csv(&out.join("marginals.csv")).unwrap();
    assert_eq!(m.len(), 2 * 96);

    // The echoed config reproduces the run.
    let resolved = RunConfig::load(&out.join(RESOLVED_CONFIG)).unwrap();
    assert_eq!(resolved.resolved().unwrap(), resolved);
    assert_eq!(resolved.interaction.scale, Some(0.8));
    assert!(resolved.interaction.epsilon_nm.is_some());
}

#[test]
fn binary_snapshots_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[protocol]\nsnapshot_times_us = [5.0]\n[output]\ndir = \"bin\"\nsnapshot_format = \"binary\"\n",
        SMALL.replace("n = 96", "n = 64")
    );
    let cfg = write_config(tmp.path(), "run.toml", &text);
    let o = swapgate(tmp.path(), &["fast-gate", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = read_any(&tmp.path().join("bin/snapshot_00.bin")).unwrap();
    assert!((s.time - 5e-6).abs() < 1e-18);
}

#[test]
fn scans_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[protocol]\nscales = [0.5, 0.6, 0.7, 0.8]\n");
    let cfg = write_config(tmp.path(), "scan.toml", &text);
    for dir in ["a", "b"] {
        let o = swapgate(tmp.path(), &["scan-gamma", "--config", &cfg, "--out", dir, "--threads", "1"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(tmp.path().join("a/scan_gamma.csv")).unwrap();
    assert_eq!(a, std::fs::read(tmp.path().join("b/scan_gamma.csv")).unwrap());
    let (_, rows): (_, Vec<ScaleCsvRow>) = read_scan_csv(&tmp.path().join("a/scan_gamma.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.scale_s).collect::<Vec<_>>(), [0.5, 0.6, 0.7, 0.8]);
    assert!(rows.iter().all(|r| r.engine == "relative"));
}

#[test]
fn overrides_reach_the_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", SMALL);
    let o = swapgate(tmp.path(), &["scan-gamma", "--config", &cfg, "--out", "o", "--grid-n", "64", "--dt", "2e-9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = RunConfig::load(&tmp.path().join("o").join(RESOLVED_CONFIG)).unwrap();
    assert_eq!(r.grid.n, 64);
    assert!((r.protocol.dt_us.unwrap() - 2e-3).abs() < 1e-15);
}

#[test]
fn schema_violations_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        SMALL.replace("scale = 0.8", "scale = 0.8\nstrength = 3"),
        SMALL.replace("separation_um = 2.329", ""),
        SMALL.replace("kind = \"harmonic\"", "kind = \"lattice\""),
        SMALL.replace("n = 96", "n = -4"),
    ];
    for (k, text) in cases.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("bad{k}.toml"), text);
        let o = swapgate(tmp.path(), &["fast-gate", "--config", &cfg]);
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", stderr(&o));
        assert!(stderr(&o).contains("category: config"), "case {k}: {}", stderr(&o));
    }
    let o = swapgate(tmp.path(), &["fast-gate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = swapgate(tmp.path(), &["preset", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn divergence_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("depth_uK = 20.38", "depth_uK = 1e13\ninit = \"relaxed\"")
        .replace("n = 96", "n = 64");
    let cfg = write_config(tmp.path(), "div.toml", &text);
    let o = swapgate(tmp.path(), &["fast-gate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("category: diverged"));
}

const DRIVEN: &str = r#"
[central]
kind = "driven"
a2 = 1.684
b1 = -1.808
b2 = 0.199
beta1 = 2.548
beta2 = 6.227
t_gate_us = 21.84
"#;

fn driven_config() -> String {
    let start = SMALL.find("[central]").unwrap();
    let end = SMALL.find("[interaction]").unwrap();
    format!("{}{DRIVEN}\n{}", &SMALL[..start], &SMALL[end..]).replace("schedule = \"ideal\"", "schedule = \"sta\"")
}

#[test]
fn infeasible_drives_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = driven_config().replace("beta1 = 2.548", "beta1 = 1.5");
    let cfg = write_config(tmp.path(), "bad.toml", &bad);
    let o = swapgate(tmp.path(), &["sta", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("category: infeasible"));

    let strict = format!("{}\n[protocol]\nstrict_conditions = true\n", driven_config());
    let cfg = write_config(tmp.path(), "strict.toml", &strict);
    let o = swapgate(tmp.path(), &["sta", "--config", &cfg, "--out", "strict"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let (_, rows): (_, Vec<CheckRow>) = read_scan_csv(&tmp.path().join("strict/conditions.csv")).unwrap();
    assert_eq!(rows.len(), 5);
}

#[test]
fn sta_tabulation_only() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{}\n[protocol]\ntabulate_only = true\ntabulate_points = 11\n", driven_config());
    let cfg = write_config(tmp.path(), "sta.toml", &text);
    let o = swapgate(tmp.path(), &["sta", "--config", &cfg, "--out", "t"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("t/driving.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("t_s,theta,"));
    assert!(!tmp.path().join("t/fidelity.csv").exists());
}

#[test]
fn validate_passes_on_the_reference_setup() {
    let tmp = tempfile::tempdir().unwrap();
    let o = swapgate(tmp.path(), &["validate", "--out", "v"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    for check in ["norm_drift", "separability_l2", "jump_condition", "ermakov_residual", "invariant_drift"] {
        assert!(stdout.lines().any(|l| l.starts_with(check) && l.ends_with("PASS")), "{stdout}");
    }
    let (_, rows): (_, Vec<CheckRow>) = read_scan_csv(&tmp.path().join("v/validate.csv")).unwrap();
    assert!(rows.iter().all(|r| r.pass));
}

#[test]
fn adiabatic_preset_meets_the_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    let o = swapgate(tmp.path(), &["preset", "adiabatic-baseline", "--out", "ab"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("ab/adiabatic.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let tun = std::fs::read_to_string(tmp.path().join("ab/tunneling.csv")).unwrap();
    assert!(tun.starts_with("d_m,j_over_hbar_per_s\n"));
}

#[test]
fn preset_print_is_loadable() {
    let tmp = tempfile::tempdir().unwrap();
    let o = swapgate(tmp.path(), &["preset", "sta-paper", "--print"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cfg = RunConfig::from_toml_str(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(cfg.protocol.comparison_depth_uk, Some(694.0));
}
