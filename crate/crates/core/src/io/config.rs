//! Run configuration files.
//!
//! Physical keys are required and carry their unit in the name. Numerical
//! knobs are optional; [`RunConfig::resolved`] fills them with the defaults
//! below, and that resolved form is what gets echoed next to the results.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::Branch;
use crate::error::{Error, Result};
use crate::gate::{AdiabaticConfig, CalibrationOptions, Central, GateConfig, InitKind, ScheduleKind, UPolicy};
use crate::grid::{Grid, DEFAULT_PHASE_PER_STEP};
use crate::potentials::GaussianTrap;
use crate::sta::{OptimizeOptions, ThetaDriving};
use crate::units::{from_si, to_si, Unit, ATOMIC_MASS, LI6_MASS_U};

pub const DEFAULT_PERIODS_US: [f64; 5] = [285.0, 300.0, 320.0, 350.0, 400.0];
pub const DEFAULT_TABLE_LO_UM: f64 = 0.5;
pub const DEFAULT_TABLE_POINTS: usize = 32;
pub const DEFAULT_CENTRAL_WAIST_UM: f64 = 11.857;
pub const DEFAULT_TABULATE_POINTS: usize = 201;
pub const DEFAULT_OPTIMIZER_SEEDS: [[f64; 2]; 3] = [[2.548, 6.227], [3.0, 5.0], [4.0, 8.0]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub tweezers: TweezerSection,
    pub central: CentralSection,
    pub interaction: InteractionSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub extent_um: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TweezerSection {
    #[serde(rename = "depth_uK")]
    pub depth_uk: f64,
    pub waist_nm: f64,
    pub separation_um: f64,
    /// Initial packet half-width; defaults to the tweezer ground state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w0_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CentralSection {
    Gaussian {
        #[serde(rename = "depth_uK")]
        depth_uk: f64,
        waist_um: f64,
    },
    Harmonic {
        #[serde(rename = "frequency_Hz")]
        frequency_hz: f64,
    },
    /// Scale-invariant drive `theta(t)`.
    Driven {
        a2: f64,
        b1: f64,
        b2: f64,
        beta1: f64,
        beta2: f64,
        t_gate_us: f64,
        /// Reference trap frequency; when absent it is fixed by `omega0 tau(T) = pi`.
        #[serde(rename = "frequency_Hz", skip_serializing_if = "Option::is_none")]
        frequency_hz: Option<f64>,
        /// Beam waist used to quote the peak trap depth.
        #[serde(skip_serializing_if = "Option::is_none")]
        waist_um: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSection {
    pub schedule: ScheduleKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    /// Multiplier on the schedule; absent means calibrate it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Contact kernel width; defaults to two grid spacings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_nm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_phase_rad: Option<f64>,
    /// Times for two-particle snapshots.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times_us: Vec<f64>,
    /// Times for single-particle marginals.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marginal_times_us: Vec<f64>,
    /// Also write `arg(psi)` at the end of the gate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_snapshot: Option<bool>,
    /// Scales for `scan-gamma`; defaults to the calibration grid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scales: Vec<f64>,
    /// `relative` (1D, harmonic approximation) or `grid` (full 2D).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_engine: Option<ScanEngine>,
    /// Packet widths for `scan-squeezing`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub w0_list_um: Vec<f64>,
    /// Stationary reference run at this central depth, for `sta`.
    #[serde(rename = "comparison_depth_uK", skip_serializing_if = "Option::is_none")]
    pub comparison_depth_uk: Option<f64>,
    /// Treat a drive that misses its boundary conditions as infeasible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_conditions: Option<bool>,
    /// Skip the gate and only tabulate the drive, for `sta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tabulate_only: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tabulate_points: Option<usize>,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub adiabatic: AdiabaticSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanEngine {
    Relative,
    Grid,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Refine the coarse optimum with full 2D runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub periods_us: Vec<f64>,
    /// Closest approach; calibrated per period when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dmin_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_lo_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_policy: Option<UPolicyKey>,
    /// Only with `u_policy = "fixed"`.
    #[serde(rename = "u_fixed_uK", skip_serializing_if = "Option::is_none")]
    pub u_fixed_uk: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UPolicyKey {
    Proportional,
    MeanJ,
    Fixed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
    /// Seeds the jitter of the starting simplex.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// Reference trap frequency the candidates are solved at.
    #[serde(rename = "frequency_Hz", skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Peak trap depth over the gate.
    Depth,
    /// Infidelity of the relative-coordinate run at a fixed scale.
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default)]
    pub snapshot_format: SnapshotFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), snapshot_format: SnapshotFormat::Text }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotFormat {
    #[default]
    Text,
    Binary,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| config_err(e.message().to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Range checks that the type system cannot express.
    pub fn check(&self) -> Result<()> {
        positive("grid.extent_um", self.grid.extent_um)?;
        if self.grid.n < 8 || self.grid.n % 2 != 0 {
            return Err(config_err("grid.n must be an even number >= 8"));
        }
        let t = &self.tweezers;
        positive("tweezers.depth_uK", t.depth_uk)?;
        positive("tweezers.waist_nm", t.waist_nm)?;
        positive("tweezers.separation_um", t.separation_um)?;
        if let Some(w) = t.w0_um {
            positive("tweezers.w0_um", w)?;
        }
        if let Some(m) = t.mass_u {
            positive("tweezers.mass_u", m)?;
        }
        match &self.central {
            CentralSection::Gaussian { depth_uk, waist_um } => {
                positive("central.depth_uK", *depth_uk)?;
                positive("central.waist_um", *waist_um)?;
            }
            CentralSection::Harmonic { frequency_hz } => positive("central.frequency_Hz", *frequency_hz)?,
            CentralSection::Driven { t_gate_us, frequency_hz, waist_um, .. } => {
                positive("central.t_gate_us", *t_gate_us)?;
                if let Some(f) = frequency_hz {
                    positive("central.frequency_Hz", *f)?;
                }
                if let Some(w) = waist_um {
                    positive("central.waist_um", *w)?;
                }
            }
        }
        if let Some(s) = self.interaction.scale {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(config_err("interaction.scale must be >= 0"));
            }
        }
        if let Some(e) = self.interaction.epsilon_nm {
            positive("interaction.epsilon_nm", e)?;
        }
        let p = &self.protocol;
        if let Some(dt) = p.dt_us {
            positive("protocol.dt_us", dt)?;
        }
        if let Some(m) = p.max_phase_rad {
            positive("protocol.max_phase_rad", m)?;
        }
        for (name, list) in [
            ("protocol.snapshot_times_us", &p.snapshot_times_us),
            ("protocol.marginal_times_us", &p.marginal_times_us),
        ] {
            if list.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(config_err(format!("{name} must be non-negative")));
            }
        }
        for w in &p.w0_list_um {
            positive("protocol.w0_list_um", *w)?;
        }
        for p in &p.adiabatic.periods_us {
            positive("protocol.adiabatic.periods_us", *p)?;
        }
        if p.adiabatic.u_policy == Some(UPolicyKey::Fixed) && p.adiabatic.u_fixed_uk.is_none() {
            return Err(config_err("u_policy = \"fixed\" needs protocol.adiabatic.u_fixed_uK"));
        }
        let c = &p.calibration;
        if let (Some(lo), Some(hi)) = (c.scale_lo, c.scale_hi) {
            if !(hi > lo && lo >= 0.0) {
                return Err(config_err("calibration window must satisfy 0 <= scale_lo < scale_hi"));
            }
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.tweezers.mass_u.unwrap_or(LI6_MASS_U) * ATOMIC_MASS
    }

    fn grid(&self) -> Result<Grid> {
        Grid::new(to_si(self.grid.extent_um, Unit::Micrometre), self.grid.n, 2)
    }

    pub fn tweezer(&self) -> Result<GaussianTrap> {
        GaussianTrap::new(
            to_si(self.tweezers.depth_uk, Unit::Microkelvin),
            to_si(self.tweezers.waist_nm, Unit::Nanometre),
            0.0,
        )
    }

    pub fn driving(&self) -> Result<Option<ThetaDriving>> {
        let CentralSection::Driven { a2, b1, b2, beta1, beta2, t_gate_us, frequency_hz, .. } = self.central else {
            return Ok(None);
        };
        let mass = self.mass();
        let t_gate = to_si(t_gate_us, Unit::Microsecond);
        let d = match frequency_hz {
            Some(f) => {
                let w = to_si(f, Unit::Hertz);
                ThetaDriving::new(a2, b1, b2, beta1, beta2, t_gate, mass * w * w, mass)?
            }
            None => ThetaDriving::new(a2, b1, b2, beta1, beta2, t_gate, mass, mass)?.with_swap_condition()?,
        };
        Ok(Some(d))
    }

    /// Gate parameters. An unset scale comes out as 0 and is meant to be
    /// replaced by calibration.
    pub fn gate_config(&self) -> Result<GateConfig> {
        let mass = self.mass();
        let central = match &self.central {
            CentralSection::Gaussian { depth_uk, waist_um } => Central::Gaussian(GaussianTrap::new(
                to_si(*depth_uk, Unit::Microkelvin),
                to_si(*waist_um, Unit::Micrometre),
                0.0,
            )?),
            CentralSection::Harmonic { frequency_hz } => Central::Harmonic { omega: to_si(*frequency_hz, Unit::Hertz) },
            CentralSection::Driven { .. } => Central::Driven(self.driving()?.expect("driven central trap")),
        };
        let cfg = GateConfig {
            mass,
            d: to_si(self.tweezers.separation_um, Unit::Micrometre),
            tweezer: self.tweezer()?,
            central,
            schedule: self.interaction.schedule,
            branch: self.interaction.branch.unwrap_or(Branch::Minus),
            scale: self.interaction.scale.unwrap_or(0.0),
            epsilon: self.interaction.epsilon_nm.map(|e| to_si(e, Unit::Nanometre)),
            grid: self.grid()?,
            dt: self.protocol.dt_us.map(|dt| to_si(dt, Unit::Microsecond)),
            max_phase: self.protocol.max_phase_rad.unwrap_or(DEFAULT_PHASE_PER_STEP),
            init: self.tweezers.init.unwrap_or(InitKind::Analytic),
            w0: self.tweezers.w0_um.map(|w| to_si(w, Unit::Micrometre)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn needs_calibration(&self) -> bool {
        self.interaction.scale.is_none() && self.interaction.schedule != ScheduleKind::Zero
    }

    pub fn calibration(&self) -> CalibrationOptions {
        let d = CalibrationOptions::default();
        let c = &self.protocol.calibration;
        CalibrationOptions {
            lo: c.scale_lo.unwrap_or(d.lo),
            hi: c.scale_hi.unwrap_or(d.hi),
            points: c.points.unwrap_or(d.points),
            refine: c.refine.unwrap_or(d.refine),
            tol: c.tol.unwrap_or(d.tol),
            ..d
        }
    }

    pub fn u_policy(&self) -> UPolicy {
        let a = &self.protocol.adiabatic;
        match a.u_policy.unwrap_or(UPolicyKey::Proportional) {
            UPolicyKey::Proportional => UPolicy::Proportional,
            UPolicyKey::MeanJ => UPolicy::MeanJ,
            UPolicyKey::Fixed => UPolicy::Fixed(to_si(a.u_fixed_uk.unwrap_or(0.0), Unit::Microkelvin)),
        }
    }

    pub fn adiabatic_periods(&self) -> Vec<f64> {
        let p = &self.protocol.adiabatic.periods_us;
        let us = if p.is_empty() { DEFAULT_PERIODS_US.to_vec() } else { p.clone() };
        us.into_iter().map(|t| to_si(t, Unit::Microsecond)).collect()
    }

    /// Adiabatic run for one period; `dmin` must already be known.
    pub fn adiabatic_config(&self, period: f64, dmin: f64) -> Result<AdiabaticConfig> {
        Ok(AdiabaticConfig {
            d0: to_si(self.tweezers.separation_um, Unit::Micrometre),
            dmin,
            period,
            trap: self.tweezer()?,
            mass: self.mass(),
            policy: self.u_policy(),
        })
    }

    pub fn optimize_options(&self) -> OptimizeOptions {
        let d = OptimizeOptions::default();
        let o = &self.protocol.optimizer;
        OptimizeOptions {
            max_iters: o.max_iters.unwrap_or(d.max_iters),
            step: o.step.unwrap_or(d.step),
            rng_seed: o.rng_seed.unwrap_or(d.rng_seed),
            ..d
        }
    }

    pub fn optimizer_seeds(&self) -> Vec<(f64, f64)> {
        let s = &self.protocol.optimizer.seeds;
        let s: &[[f64; 2]] = if s.is_empty() { &DEFAULT_OPTIMIZER_SEEDS } else { s };
        s.iter().map(|p| (p[0], p[1])).collect()
    }

    /// Copy with every optional key set to the value a run will use.
    pub fn resolved(&self) -> Result<RunConfig> {
        let gate = self.gate_config()?;
        let mut r = self.clone();
        r.tweezers.w0_um.get_or_insert(from_si(gate.w0()?, Unit::Micrometre));
        r.tweezers.mass_u.get_or_insert(LI6_MASS_U);
        r.tweezers.init.get_or_insert(gate.init);
        if let CentralSection::Driven { frequency_hz, waist_um, .. } = &mut r.central {
            frequency_hz.get_or_insert(from_si(gate.omega0()?, Unit::Hertz));
            waist_um.get_or_insert(DEFAULT_CENTRAL_WAIST_UM);
        }
        r.interaction.branch.get_or_insert(gate.branch);
        r.interaction.epsilon_nm.get_or_insert(from_si(gate.epsilon(), Unit::Nanometre));
        let p = &mut r.protocol;
        p.max_phase_rad.get_or_insert(gate.max_phase);
        p.phase_snapshot.get_or_insert(false);
        p.scan_engine.get_or_insert(ScanEngine::Relative);
        p.tabulate_only.get_or_insert(false);
        p.strict_conditions.get_or_insert(false);
        p.tabulate_points.get_or_insert(DEFAULT_TABULATE_POINTS);
        let cal = self.calibration();
        let c = &mut p.calibration;
        c.scale_lo = Some(cal.lo);
        c.scale_hi = Some(cal.hi);
        c.points = Some(cal.points);
        c.refine = Some(cal.refine);
        c.tol = Some(cal.tol);
        let a = &mut p.adiabatic;
        if a.periods_us.is_empty() {
            a.periods_us = DEFAULT_PERIODS_US.to_vec();
        }
        a.table_lo_um.get_or_insert(DEFAULT_TABLE_LO_UM);
        a.table_points.get_or_insert(DEFAULT_TABLE_POINTS);
        a.u_policy.get_or_insert(UPolicyKey::Proportional);
        let opt = self.optimize_options();
        let o = &mut p.optimizer;
        if o.seeds.is_empty() {
            o.seeds = DEFAULT_OPTIMIZER_SEEDS.to_vec();
        }
        o.max_iters = Some(opt.max_iters);
        o.step = Some(opt.step);
        o.rng_seed = Some(opt.rng_seed);
        o.objective.get_or_insert(Objective::Depth);
        o.frequency_hz.get_or_insert(from_si(gate.omega0()?, Unit::Hertz));
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
extent_um = 4.8
n = 64

[tweezers]
depth_uK = 20.38
waist_nm = 700
separation_um = 2.329

[central]
kind = "gaussian"
depth_uK = 525
waist_um = 11.857

[interaction]
schedule = "ideal"
scale = 0.47
"#;

    #[test]
    fn minimal_config_parses() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        let g = c.gate_config().unwrap();
        assert_eq!(g.grid.n(), 64);
        assert!((g.d - 2.329e-6).abs() < 1e-18);
        assert_eq!(g.branch, Branch::Minus);
        assert_eq!(g.scale, 0.47);
        assert!(!c.needs_calibration());
        assert_eq!(c.output.dir, PathBuf::from("out"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for (from, to) in [
            ("n = 64", "n = 64\nspacing_nm = 3"),
            ("[interaction]", "[bogus]\nx = 1\n[interaction]"),
            ("waist_um = 11.857", "waist_um = 11.857\nfrequency_Hz = 1"),
        ] {
            let e = RunConfig::from_toml_str(&MINIMAL.replace(from, to)).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{e}");
        }
    }

    #[test]
    fn missing_physical_keys_are_rejected() {
        let e = RunConfig::from_toml_str(&MINIMAL.replace("separation_um = 2.329", "")).unwrap_err();
        assert!(e.to_string().contains("separation_um"), "{e}");
        assert!(RunConfig::from_toml_str(&MINIMAL.replace("extent_um = 4.8", "extent_um = -1")).is_err());
    }

    #[test]
    fn resolved_round_trips_and_is_stable() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        let r = c.resolved().unwrap();
        let text = r.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.resolved().unwrap(), r);
        let (a, b) = (c.gate_config().unwrap(), back.gate_config().unwrap());
        assert_eq!(a.grid, b.grid);
        assert!((a.epsilon() / b.epsilon() - 1.0).abs() < 1e-12);
        assert!((a.w0().unwrap() / b.w0().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(a.mass, b.mass);
    }

    #[test]
    fn driven_trap_defaults_to_the_swap_condition() {
        let text = MINIMAL.replace(
            "kind = \"gaussian\"\ndepth_uK = 525\nwaist_um = 11.857",
            "kind = \"driven\"\na2 = 1.684\nb1 = -1.808\nb2 = 0.199\nbeta1 = 2.548\nbeta2 = 6.227\nt_gate_us = 21.84",
        );
        let text = text.replace("schedule = \"ideal\"", "schedule = \"sta\"");
        let c = RunConfig::from_toml_str(&text).unwrap();
        let d = c.driving().unwrap().unwrap();
        let swap = d.omega0() * d.tau(d.t_gate).unwrap();
        assert!((swap - std::f64::consts::PI).abs() < 1e-9);
        let r = c.resolved().unwrap();
        let CentralSection::Driven { frequency_hz: Some(f), .. } = r.central else { panic!() };
        assert!((to_si(f, Unit::Hertz) / d.omega0() - 1.0).abs() < 1e-12);
    }
}
