use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use swapgate_ffi::*;

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
scale = 0.6
"#;

fn last_error() -> String {
    let p = sg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config(text: &str) -> *mut SgRunConfig {
    let text = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { sg_config_from_toml(text.as_ptr(), &mut cfg) }, SgStatus::SgOk);
    assert!(!cfg.is_null());
    cfg
}

#[test]
fn schema_errors_map_to_config_status() {
    let bad = CString::new(SMALL.replace("n = 96", "n = 96\nwidth = 1")).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { sg_config_from_toml(bad.as_ptr(), &mut cfg) }, SgStatus::SgConfig);
    assert!(cfg.is_null());
    assert!(last_error().contains("width"), "{}", last_error());

    let name = CString::new("fig7").unwrap();
    assert_eq!(unsafe { sg_config_from_preset(name.as_ptr(), &mut cfg) }, SgStatus::SgConfig);
}

#[test]
fn null_pointers_are_reported_not_dereferenced() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { sg_config_from_toml(ptr::null(), &mut cfg) }, SgStatus::SgNullPointer);
    let mut t = 0.0;
    assert_eq!(unsafe { sg_config_t_gate(ptr::null(), &mut t) }, SgStatus::SgNullPointer);
    let mut r = SgReport::default();
    assert_eq!(unsafe { sg_run_relative(ptr::null(), &mut r) }, SgStatus::SgNullPointer);
    unsafe {
        sg_config_free(ptr::null_mut());
        sg_field_free(ptr::null_mut());
        sg_string_free(ptr::null_mut());
    }
}

#[test]
fn preset_round_trips_through_toml() {
    let name = CString::new("fig2").unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(sg_config_from_preset(name.as_ptr(), &mut cfg), SgStatus::SgOk);
        let mut t = 0.0;
        assert_eq!(sg_config_t_gate(cfg, &mut t), SgStatus::SgOk);
        assert!((t / 21.84e-6 - 1.0).abs() < 2e-3);
        assert_eq!(sg_config_set_grid_n(cfg, 7), SgStatus::SgConfig);
        assert_eq!(sg_config_set_grid_n(cfg, 128), SgStatus::SgOk);
        let mut text = ptr::null_mut();
        assert_eq!(sg_config_to_toml(cfg, &mut text), SgStatus::SgOk);
        let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
        sg_string_free(text);
        assert!(s.contains("n = 128"));
        let again = config(&s);
        sg_config_free(again);
        sg_config_free(cfg);
    }
}

#[test]
fn relative_estimate_needs_a_scale() {
    let cfg = config(SMALL);
    unsafe {
        let mut r = SgReport::default();
        assert_eq!(sg_run_relative(cfg, &mut r), SgStatus::SgOk);
        assert!(r.f_min > 0.0 && r.f_min <= 1.0 && r.f_parallel > 0.99, "{r:?}");
        assert_eq!(r.scale, 0.6);
        assert_eq!(sg_config_set_scale(cfg, -1.0), SgStatus::SgOk);
        assert_eq!(sg_run_relative(cfg, &mut r), SgStatus::SgConfig);
        sg_config_free(cfg);
    }
}

#[test]
fn fast_gate_returns_report_and_field() {
    let cfg = config(&SMALL.replace("n = 96", "n = 64"));
    unsafe {
        let mut r = SgReport::default();
        let mut field = ptr::null_mut();
        assert_eq!(sg_run_fast_gate(cfg, &mut r, &mut field), SgStatus::SgOk);
        assert!(r.steps > 0 && r.f_min > 0.0 && r.f_min <= 1.0, "{r:?}");
        assert_eq!(r.branch_sign, -1);
        let (mut n, mut dim, mut extent) = (0, 0, 0.0);
        assert_eq!(sg_field_shape(field, &mut n, &mut dim, &mut extent), SgStatus::SgOk);
        assert_eq!((n, dim), (64, 2));
        assert!((extent - 4.8e-6).abs() < 1e-18);
        let mut buf = vec![0.0; 2 * n * n];
        assert_eq!(sg_field_copy(field, buf.as_mut_ptr(), buf.len() - 1), SgStatus::SgInvalidInput);
        assert_eq!(sg_field_copy(field, buf.as_mut_ptr(), buf.len()), SgStatus::SgOk);
        let h = extent / n as f64;
        let norm: f64 = buf.iter().map(|v| v * v).sum::<f64>() * h * h;
        let mut want = 0.0;
        assert_eq!(sg_field_norm(field, &mut want), SgStatus::SgOk);
        assert!((norm - want).abs() < 1e-12 && (want - 1.0).abs() < 1e-8);
        sg_field_free(field);
        sg_config_free(cfg);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(sg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_current_and_compiles() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/swapgate.h")).unwrap();
    for sym in ["sg_config_from_toml", "sg_run_fast_gate", "sg_field_copy", "SG_INFEASIBLE = 4", "typedef struct SgField SgField"] {
        assert!(header.contains(sym), "missing {sym}");
    }
    let Ok(tmp) = tempfile::tempdir() else { return };
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"swapgate.h\"\nint main(void) { SgReport r; (void)r; return sg_last_error_message() != 0; }\n",
    )
    .unwrap();
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
