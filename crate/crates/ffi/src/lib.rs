//! C ABI for the swapgate simulator.
//!
//! Objects cross the boundary as opaque handles created and destroyed here.
//! Every call returns an [`SgStatus`]; on failure [`sg_last_error_message`]
//! describes what went wrong on the calling thread. Panics are caught and
//! reported as `SG_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use swapgate::error::Category;
use swapgate::gate::{calibrate_scale, relative_coordinate_oracle, run_gate, FidelityReport};
use swapgate::grid::ComplexField;
use swapgate::io::{Preset, RunConfig};
use swapgate::Error;

/// Result of every call. Values are stable across releases.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    SgOk = 0,
    SgInvalidInput = 1,
    SgConfig = 2,
    SgDiverged = 3,
    SgInfeasible = 4,
    SgNumerical = 5,
    SgIo = 6,
    SgNullPointer = 7,
    SgPanic = 8,
}

/// Run configuration.
pub struct SgRunConfig {
    inner: RunConfig,
}

/// Complex field on a grid, values in row-major order with x1 fastest.
pub struct SgField {
    inner: ComplexField,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SgReport {
    pub f_opposite: f64,
    pub f_parallel: f64,
    pub f_min: f64,
    pub swap_overlap: f64,
    /// Interaction scale the run used.
    pub scale: f64,
    pub norm_drift: f64,
    pub edge_mass: f64,
    pub steps: u64,
    /// +1 or -1: which sqrt-SWAP branch was targeted.
    pub branch_sign: i32,
}

impl From<&FidelityReport> for SgReport {
    fn from(r: &FidelityReport) -> Self {
        SgReport {
            f_opposite: r.f_opposite,
            f_parallel: r.f_parallel,
            f_min: r.f_min,
            swap_overlap: r.swap_overlap,
            scale: r.scale,
            norm_drift: r.norm_drift,
            edge_mass: r.edge_mass,
            steps: r.steps as u64,
            branch_sign: r.branch.sign() as i32,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SgStatus {
    match e.category() {
        Category::Input => SgStatus::SgInvalidInput,
        Category::Config => SgStatus::SgConfig,
        Category::Diverged => SgStatus::SgDiverged,
        Category::Infeasible => SgStatus::SgInfeasible,
        Category::Numerical => SgStatus::SgNumerical,
        Category::Io => SgStatus::SgIo,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SgStatus::SgOk
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            SgStatus::SgNullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SgStatus::SgPanic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Lib(Error::InvalidInput(format!("{what} is not UTF-8"))))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a TOML run configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_config_from_toml(toml: *const c_char, out: *mut *mut SgRunConfig) -> SgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(toml, "toml")?;
        let cfg = RunConfig::from_toml_str(text)?;
        *out = Box::into_raw(Box::new(SgRunConfig { inner: cfg }));
        Ok(())
    })
}

/// Configuration of a built-in experiment such as `"fig2"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_config_from_preset(name: *const c_char, out: *mut *mut SgRunConfig) -> SgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let preset: Preset = str_arg(name, "name")?.parse()?;
        *out = Box::into_raw(Box::new(SgRunConfig { inner: preset.config() }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sg_config_free(cfg: *mut SgRunConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_config_set_grid_n(cfg: *mut SgRunConfig, n: usize) -> SgStatus {
    guard(|| {
        let c = out_arg(cfg, "cfg")?;
        let mut next = c.inner.clone();
        next.grid.n = n;
        next.check()?;
        c.inner = next;
        Ok(())
    })
}

/// Fixes the interaction scale; a negative value clears it so runs calibrate.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_config_set_scale(cfg: *mut SgRunConfig, scale: f64) -> SgStatus {
    guard(|| {
        let c = out_arg(cfg, "cfg")?;
        if scale.is_nan() {
            return Err(Error::InvalidInput("scale is NaN".into()).into());
        }
        c.inner.interaction.scale = (scale >= 0.0).then_some(scale);
        Ok(())
    })
}

/// Gate duration in seconds.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_config_t_gate(cfg: *const SgRunConfig, out: *mut f64) -> SgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = handle(cfg, "cfg")?.inner.gate_config()?.t_gate()?;
        Ok(())
    })
}

/// Resolved configuration as TOML. Release it with [`sg_string_free`].
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_config_to_toml(cfg: *const SgRunConfig, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = handle(cfg, "cfg")?.inner.resolved()?.to_toml_string()?;
        *out = CString::new(text).map_err(|_| Error::InvalidInput("interior NUL".into()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Full 2D gate. Calibrates the scale first when the config leaves it open.
/// `final_field` may be null; otherwise it receives the opposite-spin state
/// at the end of the gate.
///
/// # Safety
/// `cfg` must be a live handle, `report` a valid pointer and `final_field`
/// null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_run_fast_gate(
    cfg: *const SgRunConfig,
    report: *mut SgReport,
    final_field: *mut *mut SgField,
) -> SgStatus {
    guard(|| {
        let report = out_arg(report, "report")?;
        let rc = &handle(cfg, "cfg")?.inner;
        let mut gate = rc.gate_config()?;
        if rc.needs_calibration() {
            gate.scale = calibrate_scale(&gate, &rc.calibration())?.scale;
        }
        let run = run_gate(&gate)?;
        *report = SgReport::from(&run.report);
        if let Some(f) = final_field.as_mut() {
            *f = Box::into_raw(Box::new(SgField { inner: run.final_opposite }));
        }
        Ok(())
    })
}

/// Cheap relative-coordinate estimate of the gate in the harmonic
/// approximation. Needs a fixed scale.
///
/// # Safety
/// `cfg` must be a live handle and `report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_run_relative(cfg: *const SgRunConfig, report: *mut SgReport) -> SgStatus {
    guard(|| {
        let report = out_arg(report, "report")?;
        let rc = &handle(cfg, "cfg")?.inner;
        if rc.needs_calibration() {
            return Err(Error::Config("sg_run_relative needs a fixed interaction scale".into()).into());
        }
        let gate = rc.gate_config()?;
        let o = relative_coordinate_oracle(&gate)?;
        *report = SgReport {
            f_opposite: o.f_opposite,
            f_parallel: o.f_parallel,
            f_min: o.f_min(),
            scale: gate.scale,
            steps: o.steps as u64,
            branch_sign: o.branch.sign() as i32,
            ..SgReport::default()
        };
        Ok(())
    })
}

/// Points per axis, dimension and extent in metres.
///
/// # Safety
/// `field` must be a live handle; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sg_field_shape(
    field: *const SgField,
    n: *mut usize,
    dim: *mut usize,
    extent: *mut f64,
) -> SgStatus {
    guard(|| {
        let g = *handle(field, "field")?.inner.grid();
        *out_arg(n, "n")? = g.n();
        *out_arg(dim, "dim")? = g.dim();
        *out_arg(extent, "extent")? = g.extent();
        Ok(())
    })
}

/// Copies the values as interleaved (re, im) pairs. `len` is the number of
/// doubles in `buf` and must be at least twice the number of grid points.
///
/// # Safety
/// `field` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sg_field_copy(field: *const SgField, buf: *mut f64, len: usize) -> SgStatus {
    guard(|| {
        let v = handle(field, "field")?.inner.values();
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        if len < 2 * v.len() {
            return Err(Error::InvalidInput(format!("buffer holds {len} doubles, need {}", 2 * v.len())).into());
        }
        let out = std::slice::from_raw_parts_mut(buf, 2 * v.len());
        for (pair, z) in out.chunks_exact_mut(2).zip(v) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// `∫|psi|^2`.
///
/// # Safety
/// `field` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_field_norm(field: *const SgField, out: *mut f64) -> SgStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(field, "field")?.inner.norm_sq();
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sg_field_free(field: *mut SgField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
