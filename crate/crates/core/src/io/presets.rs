use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use super::config::{
    CentralSection, GridSection, InteractionSection, OutputSection, ProtocolSection, RunConfig, TweezerSection,
};
use crate::error::{Error, Result};
use crate::gate::ScheduleKind;
use crate::potentials::GaussianTrap;
use crate::units::{from_si, to_si, Unit, HBAR, MASS_LI6};

/// What a config is run through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    FastGate,
    Adiabatic,
    Sta,
    ScanGamma,
    ScanSqueezing,
    OptimizeDriving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    AdiabaticBaseline,
    StaPaper,
}

impl Preset {
    pub const ALL: [Preset; 6] =
        [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::AdiabaticBaseline, Preset::StaPaper];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::AdiabaticBaseline => "adiabatic-baseline",
            Preset::StaPaper => "sta-paper",
        }
    }

    pub fn pipeline(self) -> Pipeline {
        match self {
            Preset::Fig1 | Preset::Fig2 => Pipeline::FastGate,
            Preset::Fig3 => Pipeline::ScanSqueezing,
            Preset::Fig4 | Preset::StaPaper => Pipeline::Sta,
            Preset::AdiabaticBaseline => Pipeline::Adiabatic,
        }
    }

    pub fn config(self) -> RunConfig {
        let mut c = reference_config();
        c.output.dir = PathBuf::from(format!("out/{}", self.name()));
        let t_gate_us = stationary_t_gate_us();
        match self {
            Preset::Fig1 => {
                // Coarse scan only: the time-lapse barely depends on the last digits of the scale.
                c.protocol.calibration.refine = Some(false);
                c.protocol.marginal_times_us = (0..=20).map(|k| t_gate_us * k as f64 / 20.0).collect();
            }
            Preset::Fig2 => {
                c.protocol.snapshot_times_us = (0..=6).map(|k| t_gate_us * k as f64 / 6.0).collect();
                c.protocol.phase_snapshot = Some(true);
            }
            Preset::Fig3 => {
                c.protocol.w0_list_um = FIG3_TANH_R.iter().map(|&q| w0_for_tanh_r_um(q)).collect();
            }
            Preset::Fig4 => {
                c.central = reference_driving();
                c.interaction.schedule = ScheduleKind::Sta;
                c.protocol.tabulate_only = Some(true);
            }
            Preset::AdiabaticBaseline => {}
            Preset::StaPaper => {
                c.central = reference_driving();
                c.interaction.schedule = ScheduleKind::Sta;
                c.protocol.comparison_depth_uk = Some(694.0);
            }
        }
        c
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`")))
    }
}

pub const FIG3_TANH_R: [f64; 5] = [-0.7, -0.6, -0.5, -0.4, -0.3];

const CENTRAL_DEPTH_UK: f64 = 525.0;
const CENTRAL_WAIST_UM: f64 = 11.857;

/// The experimental setup with a calibrated interaction scale.
pub fn reference_config() -> RunConfig {
    RunConfig {
        grid: GridSection { extent_um: 4.8, n: 576 },
        tweezers: TweezerSection {
            depth_uk: 20.38,
            waist_nm: 700.0,
            separation_um: 2.329,
            w0_um: None,
            mass_u: None,
            init: None,
        },
        central: CentralSection::Gaussian { depth_uk: CENTRAL_DEPTH_UK, waist_um: CENTRAL_WAIST_UM },
        interaction: InteractionSection { schedule: ScheduleKind::Ideal, branch: None, scale: None, epsilon_nm: None },
        protocol: ProtocolSection::default(),
        output: OutputSection::default(),
    }
}

fn reference_driving() -> CentralSection {
    CentralSection::Driven {
        a2: 1.684,
        b1: -1.808,
        b2: 0.199,
        beta1: 2.548,
        beta2: 6.227,
        t_gate_us: 21.84,
        frequency_hz: None,
        waist_um: Some(CENTRAL_WAIST_UM),
    }
}

fn central_omega() -> f64 {
    GaussianTrap::new(to_si(CENTRAL_DEPTH_UK, Unit::Microkelvin), to_si(CENTRAL_WAIST_UM, Unit::Micrometre), 0.0)
        .and_then(|g| g.omega(MASS_LI6))
        .expect("valid central trap")
}

fn stationary_t_gate_us() -> f64 {
    from_si(std::f64::consts::PI / central_omega(), Unit::Microsecond)
}

/// Initial half-width giving squeezing `tanh r = q` in the central trap.
pub fn w0_for_tanh_r_um(q: f64) -> f64 {
    let ell = (HBAR / (MASS_LI6 * central_omega())).sqrt();
    from_si(2f64.sqrt() * ell * q.atanh().exp(), Unit::Micrometre)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::squeezing_from_width;

    #[test]
    fn every_preset_resolves() {
        for p in Preset::ALL {
            let c = p.config();
            c.check().unwrap();
            let r = c.resolved().unwrap_or_else(|e| panic!("{p}: {e}"));
            let text = r.to_toml_string().unwrap();
            assert_eq!(RunConfig::from_toml_str(&text).unwrap(), r, "{p}");
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!("fig9".parse::<Preset>(), Err(Error::Config(_))));
    }

    #[test]
    fn reference_parameters() {
        let c = Preset::Fig2.config();
        assert_eq!((c.grid.extent_um, c.grid.n), (4.8, 576));
        assert_eq!(c.protocol.snapshot_times_us.len(), 7);
        assert!((c.protocol.snapshot_times_us[6] / 21.84 - 1.0).abs() < 2e-3);
        let g = Preset::StaPaper.config().gate_config().unwrap();
        let crate::gate::Central::Driven(d) = g.central else { panic!() };
        assert_eq!((d.beta1, d.beta2, d.a2, d.b1, d.b2), (2.548, 6.227, 1.684, -1.808, 0.199));
        assert!((d.t_gate / 21.84e-6 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fig3_widths_hit_the_requested_squeezing() {
        for (&q, w) in FIG3_TANH_R.iter().zip(Preset::Fig3.config().protocol.w0_list_um) {
            let r = squeezing_from_width(w * 1e-6, central_omega(), MASS_LI6).unwrap();
            assert!((r.tanh() - q).abs() < 1e-12);
        }
    }
}
