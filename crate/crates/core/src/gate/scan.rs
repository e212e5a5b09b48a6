use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use super::config::GateConfig;
use super::fast::{run_fast_gate, FidelityReport};
use super::oracle::relative_coordinate_oracle;
use crate::error::{invalid, Result};
use crate::numerics::brent_min;

/// How a single point of a scan is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Engine {
    /// Full 2D split-step run.
    Grid2d,
    /// Relative-coordinate run in the harmonic approximation; much cheaper.
    Relative1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleRow {
    pub scale: f64,
    pub f_opposite: f64,
    pub f_parallel: f64,
    pub f_min: f64,
}

impl ScaleRow {
    fn from_report(r: &FidelityReport) -> Self {
        ScaleRow { scale: r.scale, f_opposite: r.f_opposite, f_parallel: r.f_parallel, f_min: r.f_min }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleScan {
    pub rows: Vec<ScaleRow>,
    pub best: ScaleRow,
    /// Number of strict interior local maxima of `f_min`.
    pub local_maxima: usize,
    /// Sign of the discrete second difference at the best point, when it is interior.
    pub concave_at_best: Option<bool>,
}

pub fn evaluate_scale(cfg: &GateConfig, scale: f64, engine: Engine) -> Result<ScaleRow> {
    let cfg = cfg.with_scale(scale);
    match engine {
        Engine::Grid2d => Ok(ScaleRow::from_report(&run_fast_gate(&cfg)?.1)),
        Engine::Relative1d => {
            let o = relative_coordinate_oracle(&cfg)?;
            Ok(ScaleRow { scale, f_opposite: o.f_opposite, f_parallel: o.f_parallel, f_min: o.f_min() })
        }
    }
}

/// Fidelity at every scale, evaluated concurrently.
pub fn scan_interaction_scale(cfg: &GateConfig, scales: &[f64], engine: Engine) -> Result<ScaleScan> {
    if scales.len() < 3 {
        return Err(invalid("a scale scan needs at least three points"));
    }
    if scales.iter().any(|s| !(*s >= 0.0)) {
        return Err(invalid("interaction scales must be >= 0"));
    }
    let rows = scales.par_iter().map(|&s| evaluate_scale(cfg, s, engine)).collect::<Result<Vec<_>>>()?;
    Ok(summarize(rows))
}

fn summarize(rows: Vec<ScaleRow>) -> ScaleScan {
    let f: Vec<f64> = rows.iter().map(|r| r.f_min).collect();
    let (ib, _) = f.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let local_maxima = (1..f.len().saturating_sub(1)).filter(|&i| f[i] > f[i - 1] && f[i] > f[i + 1]).count();
    let concave_at_best = (ib > 0 && ib + 1 < f.len()).then(|| f[ib - 1] - 2.0 * f[ib] + f[ib + 1] < 0.0);
    if local_maxima > 1 {
        log::warn!("scale scan has {local_maxima} local maxima; the optimum may not be unique");
    }
    ScaleScan { best: rows[ib], rows, local_maxima, concave_at_best }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationOptions {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Refine the coarse optimum with 2D runs.
    pub refine: bool,
    /// Absolute tolerance on the scale during refinement.
    pub tol: f64,
    /// Half-width of the refinement bracket, in coarse steps.
    pub bracket_steps: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions { lo: 0.2, hi: 1.0, points: 41, refine: true, tol: 2e-3, bracket_steps: 2.0 }
    }
}

impl CalibrationOptions {
    pub fn scales(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub scale: f64,
    pub report: FidelityReport,
    /// Coarse scan in the relative coordinate.
    pub coarse: ScaleScan,
    /// Every 2D evaluation, in the order made.
    pub evaluations: Vec<ScaleRow>,
}

/// Picks the interaction scale: a coarse relative-coordinate scan, then a
/// Brent search with full 2D runs around its optimum.
pub fn calibrate_scale(cfg: &GateConfig, opts: &CalibrationOptions) -> Result<Calibration> {
    if !(opts.hi > opts.lo && opts.lo >= 0.0) {
        return Err(invalid("calibration window must satisfy 0 <= lo < hi"));
    }
    let coarse = scan_interaction_scale(cfg, &opts.scales(), Engine::Relative1d)?;
    let s0 = coarse.best.scale;
    let runs: Mutex<Vec<FidelityReport>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<crate::Error>> = Mutex::new(None);
    let eval = |s: f64| -> f64 {
        match run_fast_gate(&cfg.with_scale(s)) {
            Ok((_, r)) => {
                let f = r.f_min;
                runs.lock().expect("no poisoned lock").push(r);
                1.0 - f
            }
            Err(e) => {
                failure.lock().expect("no poisoned lock").get_or_insert(e);
                f64::INFINITY
            }
        }
    };
    if opts.refine {
        let step = (opts.hi - opts.lo) / (opts.points.max(2) - 1) as f64;
        let a = (s0 - opts.bracket_steps * step).max(0.0);
        let b = s0 + opts.bracket_steps * step;
        brent_min(eval, a, b, opts.tol)?;
    } else {
        eval(s0);
    }
    if let Some(e) = failure.into_inner().expect("no poisoned lock") {
        return Err(e);
    }
    let runs = runs.into_inner().expect("no poisoned lock");
    let evaluations: Vec<ScaleRow> = runs.iter().map(ScaleRow::from_report).collect();
    let report = runs
        .into_iter()
        .max_by(|a, b| a.f_min.total_cmp(&b.f_min))
        .ok_or_else(|| invalid("calibration made no evaluations"))?;
    log::info!("calibrated scale {:.4}: F_min = {:.5} after {} 2D runs", report.scale, report.f_min, evaluations.len());
    Ok(Calibration { scale: report.scale, report, coarse, evaluations })
}

#[derive(Debug, Clone, Serialize)]
pub struct SqueezeRow {
    pub w0_m: f64,
    pub tanh_r: f64,
    pub scale_s: f64,
    pub fidelity: f64,
    pub f_opposite: f64,
    pub f_parallel: f64,
    /// False when the narrowest packet width is below `MIN_POINTS_PER_WIDTH` grid spacings.
    pub resolved: bool,
}

/// Grid spacings per packet half-width below which a run is flagged.
pub const MIN_POINTS_PER_WIDTH: f64 = 4.0;

/// Calibrated fidelity for each initial packet width.
pub fn scan_squeezing(cfg: &GateConfig, w0_list: &[f64], opts: &CalibrationOptions) -> Result<Vec<SqueezeRow>> {
    let mut rows = Vec::with_capacity(w0_list.len());
    for &w0 in w0_list {
        if !(w0 > 0.0) {
            return Err(invalid("packet widths must be positive"));
        }
        let c = cfg.with_w0(w0);
        let p = c.squeezed_params()?;
        // Narrowest amplitude half-width over the gate: w0 or ell^2 / w0 scaled.
        let narrowest = p.w0().min(2.0 * p.ell() * p.ell() / p.w0());
        let resolved = narrowest >= MIN_POINTS_PER_WIDTH * c.grid.spacing();
        if !resolved {
            log::warn!("w0 = {w0:e} m: packet width {narrowest:e} m is under-resolved on this grid");
        }
        let cal = calibrate_scale(&c, opts)?;
        rows.push(SqueezeRow {
            w0_m: w0,
            tanh_r: p.tanh_r(),
            scale_s: cal.scale,
            fidelity: cal.report.f_min,
            f_opposite: cal.report.f_opposite,
            f_parallel: cal.report.f_parallel,
            resolved,
        });
    }
    Ok(rows)
}
