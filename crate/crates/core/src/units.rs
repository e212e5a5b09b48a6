//! Physical constants and the handful of lab units accepted in configs.
//!
//! Everything inside the crate is SI. Conversion happens once, at the edge.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;
/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
/// Atomic mass of lithium-6 in u.
pub const LI6_MASS_U: f64 = 6.015_122_887_4;
/// Mass of a lithium-6 atom, kg.
pub const MASS_LI6: f64 = LI6_MASS_U * ATOMIC_MASS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
    pub mass_li6: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        k_b: K_B,
        mass_li6: MASS_LI6,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Units accepted on the config side.
///
/// Temperatures stand for energies (`µK` means µK·k_B); frequencies in Hz
/// and kHz are ordinary frequencies and convert to angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Micrometre,
    Nanometre,
    Microsecond,
    Microkelvin,
    Hertz,
    Kilohertz,
    RadPerSecond,
}

impl Unit {
    pub const ALL: [Unit; 7] = [
        Unit::Micrometre,
        Unit::Nanometre,
        Unit::Microsecond,
        Unit::Microkelvin,
        Unit::Hertz,
        Unit::Kilohertz,
        Unit::RadPerSecond,
    ];

    /// SI value of one unit.
    fn factor(self) -> f64 {
        match self {
            Unit::Micrometre => 1e-6,
            Unit::Nanometre => 1e-9,
            Unit::Microsecond => 1e-6,
            Unit::Microkelvin => 1e-6 * K_B,
            Unit::Hertz => 2.0 * PI,
            Unit::Kilohertz => 2.0 * PI * 1e3,
            Unit::RadPerSecond => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Micrometre => "um",
            Unit::Nanometre => "nm",
            Unit::Microsecond => "us",
            Unit::Microkelvin => "uK",
            Unit::Hertz => "Hz",
            Unit::Kilohertz => "kHz",
            Unit::RadPerSecond => "rad/s",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unit = match s.trim() {
            "um" | "µm" | "μm" => Unit::Micrometre,
            "nm" => Unit::Nanometre,
            "us" | "µs" | "μs" => Unit::Microsecond,
            "uK" | "µK" | "μK" => Unit::Microkelvin,
            "Hz" => Unit::Hertz,
            "kHz" => Unit::Kilohertz,
            "rad/s" => Unit::RadPerSecond,
            other => return Err(Error::UnknownUnit(other.to_string())),
        };
        Ok(unit)
    }
}

pub fn to_si(value: f64, unit: Unit) -> f64 {
    value * unit.factor()
}

pub fn from_si(value: f64, unit: Unit) -> f64 {
    value / unit.factor()
}

/// Parses the unit tag first, so a typo is reported rather than guessed.
pub fn to_si_tagged(value: f64, tag: &str) -> Result<f64> {
    Ok(to_si(value, tag.parse()?))
}
