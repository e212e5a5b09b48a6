//! Pipelines behind the subcommands. Each one writes its tables into the
//! output directory next to `resolved.toml` and returns a few summary lines.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{jump_residual, Branch, SqueezedParams};
use crate::error::{Error, Result};
use crate::gate::{
    calibrate_dmin, calibrate_scale, evolve_with_snapshots, reconstruct_2d, relative_coordinate_oracle,
    run_adiabatic_gate, run_fast_gate, run_gate, scan_interaction_scale, scan_squeezing, Central, Engine,
    FidelityReport, GateConfig, ScaleRow, ScheduleKind, TunnelingTable,
};
use crate::grid::Grid;
use crate::io::config::{CentralSection, Objective, ScanEngine, DEFAULT_CENTRAL_WAIST_UM};
use crate::io::presets::{reference_config, Preset};
use crate::io::{write_binary, write_phase, write_scan_csv, write_text, CsvRow, Pipeline, RunConfig, Snapshot, SnapshotFormat};
use crate::potentials::GaussianTrap;
use crate::sta::{invariant_drift, optimize_driving, ConditionTolerances, ThetaDriving};
use crate::units::{from_si, to_si, Unit, HBAR};

pub const RESOLVED_CONFIG: &str = "resolved.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRow {
    pub protocol: String,
    pub t_gate_s: f64,
    pub omega0_rad_per_s: f64,
    pub scale_s: f64,
    pub epsilon_m: f64,
    pub f_opposite: f64,
    pub f_parallel: f64,
    pub f_min: f64,
    pub swap_overlap: f64,
    pub norm_drift: f64,
    pub edge_mass: f64,
    pub invariant_drift: Option<f64>,
    pub steps: usize,
}

impl CsvRow for GateRow {
    const HEADER: &'static [&'static str] = &[
        "protocol",
        "t_gate_s",
        "omega0_rad_per_s",
        "scale_s",
        "epsilon_m",
        "f_opposite",
        "f_parallel",
        "f_min",
        "swap_overlap",
        "norm_drift",
        "edge_mass",
        "invariant_drift",
        "steps",
    ];
}

impl GateRow {
    pub fn new(protocol: &str, cfg: &GateConfig, r: &FidelityReport) -> Result<Self> {
        Ok(GateRow {
            protocol: protocol.to_string(),
            t_gate_s: cfg.t_gate()?,
            omega0_rad_per_s: cfg.omega0()?,
            scale_s: r.scale,
            epsilon_m: cfg.epsilon(),
            f_opposite: r.f_opposite,
            f_parallel: r.f_parallel,
            f_min: r.f_min,
            swap_overlap: r.swap_overlap,
            norm_drift: r.norm_drift,
            edge_mass: r.edge_mass,
            invariant_drift: r.invariant_drift,
            steps: r.steps,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleCsvRow {
    /// `relative` or `grid`.
    pub engine: String,
    pub scale_s: f64,
    pub f_opposite: f64,
    pub f_parallel: f64,
    pub f_min: f64,
}

impl CsvRow for ScaleCsvRow {
    const HEADER: &'static [&'static str] = &["engine", "scale_s", "f_opposite", "f_parallel", "f_min"];
}

impl ScaleCsvRow {
    fn new(engine: Engine, r: &ScaleRow) -> Self {
        let engine = match engine {
            Engine::Relative1d => "relative",
            Engine::Grid2d => "grid",
        };
        ScaleCsvRow {
            engine: engine.into(),
            scale_s: r.scale,
            f_opposite: r.f_opposite,
            f_parallel: r.f_parallel,
            f_min: r.f_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub t_s: f64,
    pub x_m: f64,
    pub rho1_per_m: f64,
    pub rho2_per_m: f64,
}

impl CsvRow for MarginalRow {
    const HEADER: &'static [&'static str] = &["t_s", "x_m", "rho1_per_m", "rho2_per_m"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezeCsvRow {
    pub w0_m: f64,
    pub tanh_r: f64,
    pub scale_s: f64,
    pub fidelity: f64,
    pub f_opposite: f64,
    pub f_parallel: f64,
    pub resolved: bool,
}

impl CsvRow for SqueezeCsvRow {
    const HEADER: &'static [&'static str] =
        &["w0_m", "tanh_r", "scale_s", "fidelity", "f_opposite", "f_parallel", "resolved"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingRow {
    pub t_s: f64,
    pub theta: f64,
    pub theta_dot_per_s: f64,
    pub omega_sq_rad2_per_s2: f64,
    /// `omega(t)^2 / omega0^2`.
    pub omega_sq_rel: f64,
    pub tau_s: f64,
}

impl CsvRow for DrivingRow {
    const HEADER: &'static [&'static str] =
        &["t_s", "theta", "theta_dot_per_s", "omega_sq_rad2_per_s2", "omega_sq_rel", "tau_s"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CsvRow for CheckRow {
    const HEADER: &'static [&'static str] = &["check", "value", "tolerance", "pass"];
}

impl CheckRow {
    fn below(check: &str, value: f64, tolerance: f64) -> Self {
        CheckRow { check: check.into(), value, tolerance, pass: value.abs() <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticRow {
    pub policy: String,
    pub period_s: f64,
    pub dmin_m: f64,
    /// `∫ J dt / hbar`.
    pub action: f64,
    pub f_min: f64,
    pub leakage: f64,
    pub singlet_phase_rad: f64,
    pub j_mean_j: f64,
    pub u_mean_j: f64,
    pub stationary_t_gate_s: f64,
}

impl CsvRow for AdiabaticRow {
    const HEADER: &'static [&'static str] = &[
        "policy",
        "period_s",
        "dmin_m",
        "action",
        "f_min",
        "leakage",
        "singlet_phase_rad",
        "j_mean_J",
        "u_mean_J",
        "stationary_t_gate_s",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelingRow {
    pub d_m: f64,
    pub j_over_hbar_per_s: f64,
}

impl CsvRow for TunnelingRow {
    const HEADER: &'static [&'static str] = &["d_m", "j_over_hbar_per_s"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCsvRow {
    pub seed: usize,
    pub evaluation: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub cost: Option<f64>,
}

impl CsvRow for TraceCsvRow {
    const HEADER: &'static [&'static str] = &["seed", "evaluation", "beta1", "beta2", "cost"];
}

/// Creates `out`, writes the resolved config there and returns it.
pub fn prepare_output(cfg: &RunConfig, out: &Path) -> Result<RunConfig> {
    let resolved = cfg.resolved()?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(RESOLVED_CONFIG), resolved.to_toml_string()?)?;
    Ok(resolved)
}

pub fn run_pipeline(pipeline: Pipeline, cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let cfg = prepare_output(cfg, out)?;
    match pipeline {
        Pipeline::FastGate => fast_gate(&cfg, out),
        Pipeline::Sta => sta(&cfg, out),
        Pipeline::Adiabatic => adiabatic(&cfg, out),
        Pipeline::ScanGamma => scan_gamma(&cfg, out),
        Pipeline::ScanSqueezing => squeezing(&cfg, out),
        Pipeline::OptimizeDriving => optimize(&cfg, out),
    }
}

pub fn run_preset(preset: Preset, out: Option<&Path>) -> Result<Vec<String>> {
    let cfg = preset.config();
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone());
    run_pipeline(preset.pipeline(), &cfg, &dir)
}

/// Calibrates when the config leaves the scale open, otherwise runs once.
fn calibrated_gate(cfg: &RunConfig, gate: &mut GateConfig, out: &Path) -> Result<FidelityReport> {
    if !cfg.needs_calibration() {
        return Ok(run_fast_gate(gate)?.1);
    }
    let cal = calibrate_scale(gate, &cfg.calibration())?;
    let mut rows: Vec<ScaleCsvRow> = cal.coarse.rows.iter().map(|r| ScaleCsvRow::new(Engine::Relative1d, r)).collect();
    rows.extend(cal.evaluations.iter().map(|r| ScaleCsvRow::new(Engine::Grid2d, r)));
    write_scan_csv(&out.join("calibration.csv"), &rows)?;
    gate.scale = cal.scale;
    Ok(cal.report)
}

fn gate_summary(label: &str, gate: &GateConfig, r: &FidelityReport) -> Result<String> {
    Ok(format!(
        "{label}: t_gate = {:.4} us, scale = {:.4}, F_opposite = {:.5}, F_parallel = {:.5}, F_min = {:.5}",
        from_si(gate.t_gate()?, Unit::Microsecond),
        r.scale,
        r.f_opposite,
        r.f_parallel,
        r.f_min
    ))
}

fn micro_to_gate_times(times_us: &[f64], t_gate: f64) -> Result<Vec<f64>> {
    times_us
        .iter()
        .map(|&t| {
            let t = to_si(t, Unit::Microsecond);
            // Times written as fractions of the gate may overshoot it by rounding.
            if t > t_gate && t <= t_gate * (1.0 + 1e-9) {
                Ok(t_gate)
            } else if (0.0..=t_gate).contains(&t) {
                Ok(t)
            } else {
                Err(Error::Config(format!("snapshot time {t:e} s is outside the gate [0, {t_gate:e}] s")))
            }
        })
        .collect()
}

fn write_snapshots(cfg: &RunConfig, gate: &GateConfig, protocol: &str, out: &Path) -> Result<Vec<String>> {
    let p = &cfg.protocol;
    let phase = p.phase_snapshot.unwrap_or(false);
    if p.snapshot_times_us.is_empty() && p.marginal_times_us.is_empty() && !phase {
        return Ok(Vec::new());
    }
    let t_gate = gate.t_gate()?;
    let snaps = micro_to_gate_times(&p.snapshot_times_us, t_gate)?;
    let marg = micro_to_gate_times(&p.marginal_times_us, t_gate)?;
    let mut all: Vec<f64> = snaps.iter().chain(&marg).copied().collect();
    if phase {
        all.push(t_gate);
    }
    all.sort_by(f64::total_cmp);
    all.dedup();
    let fields = evolve_with_snapshots(gate, &all)?;
    let at = |t: f64| &fields.iter().find(|(s, _)| *s == t).expect("requested time").1;
    let mut lines = Vec::new();
    for (k, &t) in snaps.iter().enumerate() {
        let snap = Snapshot { field: at(t).clone(), time: t, label: protocol.to_string() };
        match cfg.output.snapshot_format {
            SnapshotFormat::Text => write_text(&out.join(format!("snapshot_{k:02}.txt")), &snap)?,
            SnapshotFormat::Binary => write_binary(&out.join(format!("snapshot_{k:02}.bin")), &snap)?,
        }
    }
    if !snaps.is_empty() {
        lines.push(format!("wrote {} snapshots", snaps.len()));
    }
    if phase {
        write_phase(&out.join("phase.txt"), at(t_gate), t_gate)?;
        lines.push("wrote phase map at t_gate".into());
    }
    if !marg.is_empty() {
        let xs = gate.grid.coords();
        let mut rows = Vec::with_capacity(marg.len() * xs.len());
        for &t in &marg {
            let f = at(t);
            let (r1, r2) = (f.marginal(0), f.marginal(1));
            for (i, &x) in xs.iter().enumerate() {
                rows.push(MarginalRow { t_s: t, x_m: x, rho1_per_m: r1[i], rho2_per_m: r2[i] });
            }
        }
        write_scan_csv(&out.join("marginals.csv"), &rows)?;
        lines.push(format!("wrote single-particle densities at {} times", marg.len()));
    }
    Ok(lines)
}

fn fast_gate(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let mut gate = cfg.gate_config()?;
    let report = calibrated_gate(cfg, &mut gate, out)?;
    write_scan_csv(&out.join("fidelity.csv"), &[GateRow::new("fast-gate", &gate, &report)?])?;
    let mut lines = vec![gate_summary("fast gate", &gate, &report)?];
    lines.extend(report.warnings.iter().map(|w| format!("warning: {w}")));
    lines.extend(write_snapshots(cfg, &gate, "fast-gate", out)?);
    Ok(lines)
}

fn central_waist(cfg: &RunConfig) -> f64 {
    let um = match &cfg.central {
        CentralSection::Gaussian { waist_um, .. } => *waist_um,
        CentralSection::Driven { waist_um, .. } => waist_um.unwrap_or(DEFAULT_CENTRAL_WAIST_UM),
        CentralSection::Harmonic { .. } => DEFAULT_CENTRAL_WAIST_UM,
    };
    to_si(um, Unit::Micrometre)
}

fn condition_rows(d: &ThetaDriving) -> Result<(Vec<CheckRow>, bool, f64)> {
    let tol = ConditionTolerances::FOUR_DIGIT;
    let c = d.check_conditions(&tol)?;
    let rows = vec![
        CheckRow { check: "slope_end".into(), value: c.slope_end, tolerance: tol.slope, pass: c.cond1 },
        CheckRow { check: "omega_sq_start".into(), value: c.omega_sq_start, tolerance: tol.endpoint_omega, pass: c.cond2 },
        CheckRow { check: "omega_sq_end".into(), value: c.omega_sq_end, tolerance: tol.endpoint_omega, pass: c.cond2 },
        CheckRow { check: "swap_phase_rel".into(), value: c.swap_phase / PI - 1.0, tolerance: tol.swap, pass: c.cond3 },
        CheckRow { check: "min_omega_sq".into(), value: c.min_omega_sq, tolerance: -tol.floor, pass: c.cond4 },
    ];
    Ok((rows, c.all_pass(), c.min_omega_sq))
}

fn sta(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let drive = cfg
        .driving()?
        .ok_or_else(|| Error::Config("sta needs central.kind = \"driven\"".into()))?;
    let (rows, ok, min_w) = condition_rows(&drive)?;
    write_scan_csv(&out.join("conditions.csv"), &rows)?;
    let mut lines = Vec::new();
    for r in rows.iter().filter(|r| !r.pass) {
        lines.push(format!("warning: condition {} = {:.4e} outside tolerance {:.1e}", r.check, r.value, r.tolerance));
    }
    if !ok && cfg.protocol.strict_conditions.unwrap_or(false) {
        return Err(Error::Infeasible {
            reason: "driving violates the boundary conditions".into(),
            min_omega_sq: Some(min_w * drive.omega0().powi(2)),
        });
    }
    let points = cfg.protocol.tabulate_points.unwrap_or(crate::io::config::DEFAULT_TABULATE_POINTS);
    let tab = drive.tabulate(points)?;
    let w0sq = drive.omega0().powi(2);
    let drows: Vec<DrivingRow> = (0..tab.time.len())
        .map(|i| DrivingRow {
            t_s: tab.time[i],
            theta: tab.theta[i],
            theta_dot_per_s: tab.theta_dot[i],
            omega_sq_rad2_per_s2: tab.omega_sq[i],
            omega_sq_rel: tab.omega_sq[i] / w0sq,
            tau_s: tab.tau[i],
        })
        .collect();
    write_scan_csv(&out.join("driving.csv"), &drows)?;
    let depth = drive.peak_depth(central_waist(cfg), 4001)?;
    lines.push(format!(
        "drive: omega0/2pi = {:.1} Hz, omega0 tau(T) / pi = {:.6}, peak depth {:.1} uK",
        from_si(drive.omega0(), Unit::Hertz),
        drive.omega0() * drive.tau(drive.t_gate)? / PI,
        from_si(depth, Unit::Microkelvin)
    ));
    if cfg.protocol.tabulate_only.unwrap_or(false) {
        return Ok(lines);
    }
    let mut gate = cfg.gate_config()?;
    let report = calibrated_gate(cfg, &mut gate, out)?;
    let mut rows = vec![GateRow::new("sta", &gate, &report)?];
    lines.push(gate_summary("sta gate", &gate, &report)?);
    if let Some(depth_uk) = cfg.protocol.comparison_depth_uk {
        let trap = GaussianTrap::new(to_si(depth_uk, Unit::Microkelvin), central_waist(cfg), 0.0)?;
        let mut cmp = GateConfig { central: Central::Gaussian(trap), schedule: ScheduleKind::Ideal, ..gate.clone() };
        let sub = out.join("comparison");
        std::fs::create_dir_all(&sub)?;
        let r = calibrated_gate(cfg, &mut cmp, &sub)?;
        rows.push(GateRow::new("stationary-comparison", &cmp, &r)?);
        lines.push(gate_summary("stationary comparison", &cmp, &r)?);
    }
    write_scan_csv(&out.join("fidelity.csv"), &rows)?;
    lines.extend(write_snapshots(cfg, &gate, "sta", out)?);
    Ok(lines)
}

fn adiabatic(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let a = &cfg.protocol.adiabatic;
    let d0 = to_si(cfg.tweezers.separation_um, Unit::Micrometre);
    let lo = to_si(a.table_lo_um.unwrap_or(crate::io::config::DEFAULT_TABLE_LO_UM), Unit::Micrometre);
    let points = a.table_points.unwrap_or(crate::io::config::DEFAULT_TABLE_POINTS);
    let table = TunnelingTable::new(lo, d0, points, &cfg.tweezer()?, cfg.mass())?;
    let trows: Vec<TunnelingRow> =
        table.d.iter().zip(&table.j).map(|(&d, &j)| TunnelingRow { d_m: d, j_over_hbar_per_s: j / HBAR }).collect();
    write_scan_csv(&out.join("tunneling.csv"), &trows)?;
    let policy = format!("{:?}", cfg.u_policy()).to_lowercase();
    let mut rows = Vec::new();
    let mut lines = vec![format!(
        "tunneling table: {} points, resolved up to {:.3} um",
        table.d.len(),
        from_si(table.resolved_up_to(), Unit::Micrometre)
    )];
    for period in cfg.adiabatic_periods() {
        let dmin = match a.dmin_um {
            Some(d) => to_si(d, Unit::Micrometre),
            None => calibrate_dmin(&table, d0, period)?,
        };
        let r = run_adiabatic_gate(&cfg.adiabatic_config(period, dmin)?, &table)?;
        lines.push(format!(
            "T = {:.1} us: dmin = {:.4} um, action = {:.5}, F = {:.6}",
            from_si(period, Unit::Microsecond),
            from_si(dmin, Unit::Micrometre),
            r.action,
            r.fidelity.f_min
        ));
        rows.push(AdiabaticRow {
            policy: policy.clone(),
            period_s: period,
            dmin_m: dmin,
            action: r.action,
            f_min: r.fidelity.f_min,
            leakage: r.fidelity.leakage,
            singlet_phase_rad: r.fidelity.singlet_phase,
            j_mean_j: r.j_mean,
            u_mean_j: r.u_mean,
            stationary_t_gate_s: r.stationary_t_gate,
        });
    }
    write_scan_csv(&out.join("adiabatic.csv"), &rows)?;
    Ok(lines)
}

fn engine(cfg: &RunConfig) -> Engine {
    match cfg.protocol.scan_engine.unwrap_or(ScanEngine::Relative) {
        ScanEngine::Relative => Engine::Relative1d,
        ScanEngine::Grid => Engine::Grid2d,
    }
}

fn scan_gamma(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let gate = cfg.gate_config()?;
    let scales = if cfg.protocol.scales.is_empty() { cfg.calibration().scales() } else { cfg.protocol.scales.clone() };
    let e = engine(cfg);
    let scan = scan_interaction_scale(&gate, &scales, e)?;
    let rows: Vec<ScaleCsvRow> = scan.rows.iter().map(|r| ScaleCsvRow::new(e, r)).collect();
    write_scan_csv(&out.join("scan_gamma.csv"), &rows)?;
    Ok(vec![format!(
        "best scale {:.4}: F_min = {:.5} ({} local maxima)",
        scan.best.scale, scan.best.f_min, scan.local_maxima
    )])
}

fn squeezing(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let list = &cfg.protocol.w0_list_um;
    if list.is_empty() {
        return Err(Error::Config("scan-squeezing needs protocol.w0_list_um".into()));
    }
    let gate = cfg.gate_config()?;
    let w0: Vec<f64> = list.iter().map(|&w| to_si(w, Unit::Micrometre)).collect();
    let rows = scan_squeezing(&gate, &w0, &cfg.calibration())?;
    let mut csv: Vec<SqueezeCsvRow> = rows
        .iter()
        .map(|r| SqueezeCsvRow {
            w0_m: r.w0_m,
            tanh_r: r.tanh_r,
            scale_s: r.scale_s,
            fidelity: r.fidelity,
            f_opposite: r.f_opposite,
            f_parallel: r.f_parallel,
            resolved: r.resolved,
        })
        .collect();
    csv.sort_by(|a, b| a.tanh_r.total_cmp(&b.tanh_r));
    write_scan_csv(&out.join("squeezing.csv"), &csv)?;
    Ok(csv.iter().map(|r| format!("tanh r = {:+.3}: scale {:.4}, F = {:.5}", r.tanh_r, r.scale_s, r.fidelity)).collect())
}

fn optimize(cfg: &RunConfig, out: &Path) -> Result<Vec<String>> {
    let gate = cfg.gate_config()?;
    let t_gate = match &cfg.central {
        CentralSection::Driven { t_gate_us, .. } => to_si(*t_gate_us, Unit::Microsecond),
        _ => gate.t_gate()?,
    };
    let omega0 = match cfg.protocol.optimizer.frequency_hz {
        Some(f) => to_si(f, Unit::Hertz),
        None => gate.omega0()?,
    };
    let waist = central_waist(cfg);
    let objective = cfg.protocol.optimizer.objective.unwrap_or(Objective::Depth);
    let scale = cfg.interaction.scale;
    if objective == Objective::Relative && scale.is_none() {
        return Err(Error::Config("objective \"relative\" needs interaction.scale".into()));
    }
    let cost = |d: &ThetaDriving| -> Result<f64> {
        match objective {
            Objective::Depth => Ok(from_si(d.peak_depth(waist, 2001)?, Unit::Microkelvin)),
            Objective::Relative => {
                let c = GateConfig {
                    central: Central::Driven(*d),
                    schedule: ScheduleKind::Sta,
                    scale: scale.unwrap_or(0.0),
                    ..gate.clone()
                };
                Ok(1.0 - relative_coordinate_oracle(&c)?.f_min())
            }
        }
    };
    let res = optimize_driving(cost, &cfg.optimizer_seeds(), t_gate, omega0, cfg.mass(), &cfg.optimize_options())?;
    let trace: Vec<TraceCsvRow> = res
        .trace
        .iter()
        .map(|r| TraceCsvRow { seed: r.seed, evaluation: r.evaluation, beta1: r.beta1, beta2: r.beta2, cost: r.cost })
        .collect();
    write_scan_csv(&out.join("trace.csv"), &trace)?;
    let b = res.best;
    #[derive(Serialize)]
    struct Best {
        central: CentralSection,
    }
    let best = Best {
        central: CentralSection::Driven {
            a2: b.a2,
            b1: b.b1,
            b2: b.b2,
            beta1: b.beta1,
            beta2: b.beta2,
            t_gate_us: from_si(b.t_gate, Unit::Microsecond),
            frequency_hz: Some(from_si(b.omega0(), Unit::Hertz)),
            waist_um: Some(from_si(waist, Unit::Micrometre)),
        },
    };
    let text = toml::to_string(&best).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(out.join("best_driving.toml"), text)?;
    Ok(vec![format!(
        "best driving: beta = ({:.4}, {:.4}), a2 = {:.4}, b1 = {:.4}, b2 = {:.4}, cost = {:.6}",
        b.beta1, b.beta2, b.a2, b.b1, b.b2, res.cost
    )])
}

/// Built-in base for `validate` when no config is given: the reference
/// setup on a 128^2 grid.
pub fn validate_base() -> RunConfig {
    let mut c = reference_config();
    c.grid.n = 128;
    c
}

/// Invariant suite. Returns the table; failures are reported by `pass`.
pub fn validate_checks(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    let mut gate = cfg.gate_config()?.harmonic_approximation()?;
    if gate.scale == 0.0 && gate.schedule != ScheduleKind::Zero {
        gate.scale = 0.5;
    }
    let mut rows = Vec::new();
    let run = run_gate(&gate)?;
    rows.push(CheckRow::below("norm_drift", run.report.norm_drift, 1e-10));
    let oracle = relative_coordinate_oracle(&gate)?;
    let rebuilt = reconstruct_2d(&gate, &oracle.final_field, gate.t_gate()?)?;
    rows.push(CheckRow::below("separability_l2", rebuilt.distance(&run.final_opposite)?, 5e-3));

    let omega0 = gate.omega0()?;
    let mut jump: f64 = 0.0;
    for q in [-0.7f64, -0.3, 0.0] {
        let p = SqueezedParams::new(gate.mass, omega0, q.atanh(), gate.d)?;
        for b in [Branch::Plus, Branch::Minus] {
            for k in 0..64 {
                let t = (k as f64 + 0.5) / 64.0 * PI / omega0;
                jump = jump.max(jump_residual(t, &p, b)?);
            }
        }
    }
    rows.push(CheckRow::below("jump_condition", jump, 1e-6));

    let drive = match cfg.driving()? {
        Some(d) => d,
        None => Preset::StaPaper.config().driving()?.expect("preset is driven"),
    };
    let ermakov = (0..=100)
        .map(|k| drive.ermakov_residual(drive.t_gate * k as f64 / 100.0))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rows.push(CheckRow::below("ermakov_residual", ermakov, 1e-9));
    let g1 = Grid::new(6e-6, 256, 1)?;
    rows.push(CheckRow::below("invariant_drift", invariant_drift(&drive, &g1, 0.8e-6, 4000, 8)?, 1e-4));
    Ok(rows)
}

/// Runs [`validate_checks`] and formats the table; the count is the number of failures.
pub fn validate(cfg: &RunConfig, out: &Path) -> Result<(Vec<String>, usize)> {
    let cfg = prepare_output(cfg, out)?;
    let rows = validate_checks(&cfg)?;
    write_scan_csv(&out.join("validate.csv"), &rows)?;
    let lines = rows
        .iter()
        .map(|r| {
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            format!("{:<18} {:>12.4e}  (tol {:.0e})  {verdict}", r.check, r.value, r.tolerance)
        })
        .collect();
    Ok((lines, rows.iter().filter(|r| !r.pass).count()))
}
