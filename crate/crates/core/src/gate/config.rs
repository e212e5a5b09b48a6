use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{Branch, SqueezedParams};
use crate::error::{invalid, Result};
use crate::grid::{Grid, Potential, StepPlan, DEFAULT_PHASE_PER_STEP};
use crate::potentials::{fast_gate_timeline, ContactInteraction, GammaSchedule, GaussianTrap, PotentialTimeline, TrapTerm};
use crate::sta::ThetaDriving;
use crate::units::{to_si, Unit, HBAR, MASS_LI6};

/// Times at which the step-size rule samples the potential span.
const SPAN_SAMPLES: usize = 64;

/// Trap the atoms collide in.
#[derive(Debug, Clone, PartialEq)]
pub enum Central {
    Gaussian(GaussianTrap),
    Harmonic { omega: f64 },
    Driven(ThetaDriving),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Ideal,
    Constant,
    Sta,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// Harmonic-approximation Gaussians `exp(-x^2/w0^2)`.
    Analytic,
    /// Imaginary-time ground state of each tweezer.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateConfig {
    pub mass: f64,
    /// Initial separation of the atoms; atom 1 sits at `-d/2`.
    pub d: f64,
    /// Depth and waist of each tweezer; the centre is ignored.
    pub tweezer: GaussianTrap,
    pub central: Central,
    pub schedule: ScheduleKind,
    pub branch: Branch,
    /// Dimensionless multiplier on the interaction schedule.
    pub scale: f64,
    /// Kernel width; `None` means two grid spacings.
    pub epsilon: Option<f64>,
    pub grid: Grid,
    /// Fixed time step; `None` uses the phase-per-step rule.
    pub dt: Option<f64>,
    pub max_phase: f64,
    pub init: InitKind,
    /// Initial packet half-width; `None` uses the tweezer's harmonic ground state.
    pub w0: Option<f64>,
}

impl GateConfig {
    /// Stationary fast gate with the experimental parameters: 4.8 um / 576^2
    /// grid, 700 nm / 20.38 uK tweezers at 2.329 um, and an
    /// 11.857 um / 525 uK central trap.
    pub fn reference() -> Self {
        let tweezer = GaussianTrap::new(to_si(20.38, Unit::Microkelvin), 700e-9, 0.0).expect("valid tweezer");
        let central = GaussianTrap::new(to_si(525.0, Unit::Microkelvin), 11.857e-6, 0.0).expect("valid trap");
        GateConfig {
            mass: MASS_LI6,
            d: 2.329e-6,
            tweezer,
            central: Central::Gaussian(central),
            schedule: ScheduleKind::Ideal,
            branch: Branch::Minus,
            scale: 0.47,
            epsilon: None,
            grid: Grid::new(4.8e-6, 576, 2).expect("valid grid"),
            dt: None,
            max_phase: DEFAULT_PHASE_PER_STEP,
            init: InitKind::Analytic,
            w0: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.d > 0.0) {
            return Err(invalid("mass and separation must be positive"));
        }
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(invalid("interaction scale must be >= 0"));
        }
        if self.grid.dim() != 2 {
            return Err(invalid("gate runs need a 2D grid"));
        }
        if self.grid.extent() < 2.0 * self.d {
            return Err(invalid("grid extent must be at least twice the separation"));
        }
        if !(self.max_phase > 0.0) || self.dt.is_some_and(|dt| !(dt > 0.0)) {
            return Err(invalid("time step settings must be positive"));
        }
        if self.w0.is_some_and(|w| !(w > 0.0)) {
            return Err(invalid("w0 must be positive"));
        }
        match (&self.central, self.schedule) {
            (Central::Driven(_), ScheduleKind::Ideal | ScheduleKind::Constant) => {
                return Err(invalid("a driven trap needs the sta or zero interaction schedule"));
            }
            (Central::Gaussian(_) | Central::Harmonic { .. }, ScheduleKind::Sta) => {
                return Err(invalid("the sta schedule needs a driven central trap"));
            }
            _ => {}
        }
        if let Central::Driven(d) = &self.central {
            d.validate()?;
        }
        Ok(())
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        GateConfig { scale, ..self.clone() }
    }

    pub fn with_w0(&self, w0: f64) -> Self {
        GateConfig { w0: Some(w0), ..self.clone() }
    }

    /// Harmonic frequency of the central trap (the reference frequency for a drive).
    pub fn omega0(&self) -> Result<f64> {
        match &self.central {
            Central::Gaussian(g) => g.omega(self.mass),
            Central::Harmonic { omega } => Ok(*omega),
            Central::Driven(d) => Ok(d.omega0()),
        }
    }

    pub fn t_gate(&self) -> Result<f64> {
        match &self.central {
            Central::Driven(d) => Ok(d.t_gate),
            _ => Ok(PI / self.omega0()?),
        }
    }

    pub fn tweezer_omega(&self) -> Result<f64> {
        self.tweezer.omega(self.mass)
    }

    /// Initial half-width of each packet.
    pub fn w0(&self) -> Result<f64> {
        match self.w0 {
            Some(w) => Ok(w),
            None => Ok((2.0 * HBAR / (self.mass * self.tweezer_omega()?)).sqrt()),
        }
    }

    /// Packets as seen by the reference oscillator; for a drive the initial
    /// dilation `theta(0)` is divided out.
    pub fn squeezed_params(&self) -> Result<SqueezedParams> {
        let th0 = match &self.central {
            Central::Driven(d) => d.theta(0.0)?,
            _ => 1.0,
        };
        SqueezedParams::from_width(self.mass, self.omega0()?, self.w0()? / th0, self.d / th0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(2.0 * self.grid.spacing())
    }

    pub fn trap_term(&self) -> TrapTerm {
        match &self.central {
            Central::Gaussian(g) => TrapTerm::gaussian(*g),
            Central::Harmonic { omega } => TrapTerm::Harmonic { omega: *omega, mass: self.mass },
            Central::Driven(d) => TrapTerm::Driven(*d),
        }
    }

    /// Same configuration with the central Gaussian replaced by its harmonic approximation.
    pub fn harmonic_approximation(&self) -> Result<Self> {
        Ok(match &self.central {
            Central::Gaussian(_) => GateConfig { central: Central::Harmonic { omega: self.omega0()? }, ..self.clone() },
            _ => self.clone(),
        })
    }

    pub fn gamma_schedule(&self) -> Result<GammaSchedule> {
        let params = self.squeezed_params()?;
        Ok(match (self.schedule, &self.central) {
            (ScheduleKind::Zero, _) => GammaSchedule::Zero,
            (ScheduleKind::Ideal, _) => GammaSchedule::Ideal { params, branch: self.branch },
            (ScheduleKind::Constant, _) => GammaSchedule::constant_average(&params, self.branch),
            (ScheduleKind::Sta, Central::Driven(d)) => GammaSchedule::Driven { params, drive: *d, branch: self.branch },
            (ScheduleKind::Sta, _) => return Err(invalid("the sta schedule needs a driven central trap")),
        })
    }

    /// The interaction, or `None` when it is switched off.
    pub fn interaction(&self) -> Result<Option<ContactInteraction>> {
        let schedule = self.gamma_schedule()?;
        if schedule.is_zero() || self.scale == 0.0 {
            return Ok(None);
        }
        ContactInteraction::new(schedule, self.scale, self.epsilon()).map(Some)
    }

    pub fn timeline(&self) -> Result<PotentialTimeline> {
        self.validate()?;
        fast_gate_timeline(self.trap_term(), self.interaction()?, self.t_gate()?, self.mass)
    }

    /// Steps for `window` starting at `t_start`, from `dt` or the phase rule.
    pub fn step_plan(&self, potential: &dyn Potential, grid: &Grid, t_start: f64, window: f64) -> Result<StepPlan> {
        match self.dt {
            Some(dt) => StepPlan::with_max_dt(t_start, window, dt),
            None => StepPlan::auto(potential, grid, t_start, window, self.max_phase, SPAN_SAMPLES),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let c = GateConfig::reference();
        c.validate().unwrap();
        assert!((c.omega0().unwrap() / (2.0 * PI * 22_898.0) - 1.0).abs() < 5e-3);
        assert!((c.t_gate().unwrap() / 21.84e-6 - 1.0).abs() < 1.2e-3);
        assert_eq!(c.epsilon(), 2.0 * c.grid.spacing());
        let p = c.squeezed_params().unwrap();
        // Tweezer ground state is narrower than the central oscillator length.
        assert!(p.tanh_r() < -0.4 && p.tanh_r() > -0.6, "{}", p.tanh_r());
        assert!(c.timeline().is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        let c = GateConfig::reference();
        assert!(GateConfig { d: -1.0, ..c.clone() }.validate().is_err());
        assert!(GateConfig { scale: -0.1, ..c.clone() }.validate().is_err());
        assert!(GateConfig { grid: Grid::new(4.0e-6, 64, 2).unwrap(), ..c.clone() }.validate().is_err());
        assert!(GateConfig { schedule: ScheduleKind::Sta, ..c.clone() }.validate().is_err());
        assert!(GateConfig { grid: Grid::new(4.8e-6, 64, 1).unwrap(), ..c }.validate().is_err());
    }

    #[test]
    fn zero_scale_switches_interaction_off() {
        let c = GateConfig::reference().with_scale(0.0);
        assert!(c.interaction().unwrap().is_none());
        let c = GateConfig { schedule: ScheduleKind::Zero, ..GateConfig::reference() };
        assert!(c.interaction().unwrap().is_none());
    }

    #[test]
    fn driven_params_are_rescaled() {
        let tg = 21.84e-6;
        let d = ThetaDriving::new(1.684, -1.808, 0.199, 2.548, 6.227, tg, 1.0, MASS_LI6)
            .unwrap()
            .with_swap_condition()
            .unwrap();
        let c = GateConfig { central: Central::Driven(d), schedule: ScheduleKind::Sta, ..GateConfig::reference() };
        c.validate().unwrap();
        assert_eq!(c.t_gate().unwrap(), tg);
        let p = c.squeezed_params().unwrap();
        let th0 = d.theta(0.0).unwrap();
        assert!((p.d * th0 / c.d - 1.0).abs() < 1e-14);
        assert!((p.w0() * th0 / c.w0().unwrap() - 1.0).abs() < 1e-12);
    }
}
