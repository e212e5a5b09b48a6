//! Closed-form squeezed wavepackets in a harmonic trap, the scattering
//! ansatz for the relative coordinate, and the interaction schedules that
//! make the collision a sqrt-SWAP.
//!
//! Conventions: the relative coordinate is `x = (x2 - x1)/sqrt(2)` and the
//! centre of mass `X = (x1 + x2)/sqrt(2)`. Atom 1 starts at `-d/2`, so the
//! relative packet starts at `+d/sqrt(2)`; that packet is `phi_plus`, and
//! `phi_minus(x) = phi_plus(-x)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sta::ThetaDriving;
use crate::units::HBAR;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The two solutions of `R/T = ±i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" => Ok(Branch::Plus),
            "-" | "minus" => Ok(Branch::Minus),
            other => Err(invalid(format!("unknown branch `{other}`"))),
        }
    }
}

/// Which of the two mirror-image packets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedParams {
    pub mass: f64,
    pub omega0: f64,
    /// Squeezing parameter; negative means squeezed at the start, wide at collision.
    pub r: f64,
    /// Initial separation of the two atoms.
    pub d: f64,
}

impl SqueezedParams {
    pub fn new(mass: f64, omega0: f64, r: f64, d: f64) -> Result<Self> {
        if !(mass > 0.0 && omega0 > 0.0 && d > 0.0) || !r.is_finite() {
            return Err(invalid("squeezed packet needs positive m, omega0, d and finite r"));
        }
        Ok(SqueezedParams { mass, omega0, r, d })
    }

    /// From the initial amplitude half-width `w0` instead of `r`.
    pub fn from_width(mass: f64, omega0: f64, w0: f64, d: f64) -> Result<Self> {
        SqueezedParams::new(mass, omega0, squeezing_from_width(w0, omega0, mass)?, d)
    }

    pub fn tanh_r(&self) -> f64 {
        self.r.tanh()
    }

    /// Oscillator length `sqrt(hbar / m omega0)`.
    pub fn ell(&self) -> f64 {
        (HBAR / (self.mass * self.omega0)).sqrt()
    }

    /// Initial amplitude half-width, `sqrt(2) ell e^r`.
    pub fn w0(&self) -> f64 {
        SQRT_2 * self.ell() * self.r.exp()
    }

    /// Turning point of the relative packets, `d/sqrt(2)`.
    pub fn x_c0(&self) -> f64 {
        self.d * FRAC_1_SQRT_2
    }

    /// `1/w(t)^2`; the packet is `exp(-(x - x_c)^2 / w^2)`.
    pub fn inv_width_sq(&self, t: f64) -> Complex64 {
        let z = Complex64::from_polar(self.tanh_r(), -2.0 * self.omega0 * t);
        (1.0 - z) / (1.0 + z) * (self.mass * self.omega0 / (2.0 * HBAR))
    }

    pub fn width_sq(&self, t: f64) -> Complex64 {
        1.0 / self.inv_width_sq(t)
    }

    /// Normalization amplitude `A(t) = sqrt(2 Re(1/w^2))`.
    pub fn amplitude(&self, t: f64) -> f64 {
        (2.0 * self.inv_width_sq(t).re).sqrt()
    }

    /// `Theta(t) = omega0 t - arg(1 + tanh(r) e^{2 i omega0 t})`, continuous in t.
    pub fn big_theta(&self, t: f64) -> f64 {
        let z = Complex64::from_polar(self.tanh_r(), 2.0 * self.omega0 * t);
        self.omega0 * t - (1.0 + z).arg()
    }

    /// Centre of `phi_plus`.
    pub fn center(&self, t: f64) -> f64 {
        self.x_c0() * (self.omega0 * t).cos()
    }

    /// Momentum of `phi_plus`.
    pub fn momentum(&self, t: f64) -> f64 {
        -self.mass * self.omega0 * self.x_c0() * (self.omega0 * t).sin()
    }

    /// Common Gaussian envelope with centre `xc`, momentum `pc`.
    fn packet(&self, x: f64, t: f64, xc: f64, pc: f64, classical: f64) -> Complex64 {
        let a = self.amplitude(t);
        let norm = (a / PI.sqrt()).sqrt();
        let phase = -0.5 * self.big_theta(t) + pc * x / HBAR + classical;
        (-(x - xc) * (x - xc) * self.inv_width_sq(t)).exp() * Complex64::from_polar(norm, phase)
    }
}

/// `r = ln(w0 / (sqrt(2) sqrt(hbar/(m omega0))))`.
pub fn squeezing_from_width(w0: f64, omega0: f64, mass: f64) -> Result<f64> {
    if !(w0 > 0.0 && omega0 > 0.0 && mass > 0.0) {
        return Err(invalid("w0, omega0 and mass must be positive"));
    }
    Ok((w0 / (SQRT_2 * (HBAR / (mass * omega0)).sqrt())).ln())
}

/// Displaced squeezed packet. `Side::Plus` starts at rest at `+d/sqrt(2)`
/// and reaches `-d/sqrt(2)` at half a period.
pub fn phi_pm(x: f64, t: f64, p: &SqueezedParams, side: Side) -> Complex64 {
    let x = match side {
        Side::Plus => x,
        Side::Minus => -x,
    };
    let w = p.omega0;
    // Action of the classical trajectory, written for the e^{i p_c x} gauge.
    let classical = p.mass * w * p.x_c0() * p.x_c0() * (2.0 * w * t).sin() / (4.0 * HBAR);
    p.packet(x, t, p.center(t), p.momentum(t), classical)
}

/// Undisplaced squeezed packet for the centre-of-mass coordinate.
pub fn psi0_center(x: f64, t: f64, p: &SqueezedParams) -> Complex64 {
    p.packet(x, t, 0.0, 0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterCoeffs {
    pub r: Complex64,
    pub t: Complex64,
    pub branch: Branch,
}

/// `T = e^{±i pi/4}/sqrt(2)`, `R = T - 1`, so that `R/T = ±i`.
pub fn rt_for_sqrt_swap(branch: Branch) -> ScatterCoeffs {
    let t = Complex64::from_polar(FRAC_1_SQRT_2, branch.sign() * PI / 4.0);
    ScatterCoeffs { r: t - 1.0, t, branch }
}

/// Scattering solution in the relative coordinate: `phi_+ + R phi_-` for
/// `x > 0`, `T phi_+` for `x <= 0`.
pub fn scattering_psi1(x: f64, t: f64, p: &SqueezedParams, c: &ScatterCoeffs) -> Complex64 {
    if x > 0.0 {
        phi_pm(x, t, p, Side::Plus) + c.r * phi_pm(x, t, p, Side::Minus)
    } else {
        c.t * phi_pm(x, t, p, Side::Plus)
    }
}

/// Contact strength (J·m, relative coordinate) that keeps `R/T = ±i` at every
/// instant for the packets of `p`.
///
/// From the jump `[psi']_{0-}^{0+} = (2m/hbar^2) gamma psi(0)` with the
/// ansatz above, `gamma = -(hbar^2/m) (R/T) phi_+'(0)/phi_+(0)`, which reduces to
/// `∓ i hbar omega0 (d/sqrt 2)(1 - tanh r) / (e^{i omega0 t} + tanh r e^{-i omega0 t})`.
pub fn gamma_schedule_general(t: f64, p: &SqueezedParams, branch: Branch) -> Result<Complex64> {
    let wt = p.omega0 * t;
    let q = p.tanh_r();
    let den = Complex64::from_polar(1.0, wt) + Complex64::from_polar(q, -wt);
    if den.norm() < 1e-12 {
        return Err(Error::SingularSchedule { t });
    }
    Ok(-branch.sign() * I * HBAR * p.omega0 * p.x_c0() * (1.0 - q) / den)
}

/// Relative mismatch between the one-sided derivative jump of
/// [`scattering_psi1`] at the origin and `(2m/hbar^2) gamma psi(0)`.
pub fn jump_residual(t: f64, p: &SqueezedParams, branch: Branch) -> Result<f64> {
    let c = rt_for_sqrt_swap(branch);
    let h = 1e-5 * p.ell();
    let f = |x: f64| scattering_psi1(x, t, p, &c);
    let right = (f(2.0 * h) * -1.0 + f(h) * 4.0 - f(0.0) * 3.0) / (2.0 * h);
    let left = (f(-2.0 * h) - f(-h) * 4.0 + f(0.0) * 3.0) / (2.0 * h);
    let want = gamma_schedule_general(t, p, branch)? * f(0.0) * (2.0 * p.mass / (HBAR * HBAR));
    let got = right - left;
    Ok((got - want).norm() / want.norm().max(got.norm()))
}

/// Real control shape `∓ sqrt(2) omega0 hbar d sin(omega0 t)`.
pub fn gamma_schedule_ideal(t: f64, p: &SqueezedParams, branch: Branch) -> f64 {
    -branch.sign() * SQRT_2 * p.omega0 * HBAR * p.d * (p.omega0 * t).sin()
}

/// Packet in a scale-invariant drive:
/// `theta^{-1/2} exp(i m theta' x^2 / (2 hbar theta)) phi(x/theta, tau(t))`.
pub fn sta_scaled_phi(x: f64, t: f64, p: &SqueezedParams, drive: &ThetaDriving, side: Side) -> Result<Complex64> {
    let th = drive.theta(t)?;
    let (th_dot, _) = drive.theta_derivatives(t)?;
    let tau = drive.tau(t)?;
    let chirp = Complex64::from_polar(th.sqrt().recip(), p.mass * th_dot * x * x / (2.0 * HBAR * th));
    Ok(chirp * phi_pm(x / th, tau, p, side))
}

/// Driven control shape `∓ sqrt(2) omega0 hbar d sin(omega0 tau) / theta`.
pub fn gamma_tilde(t: f64, p: &SqueezedParams, drive: &ThetaDriving, branch: Branch) -> Result<f64> {
    let th = drive.theta(t)?;
    let tau = drive.tau(t)?;
    Ok(gamma_schedule_ideal(tau, p, branch) / th)
}

/// Driven counterpart of [`gamma_schedule_general`]: `gamma(tau(t)) / theta(t)`.
pub fn gamma_tilde_general(t: f64, p: &SqueezedParams, drive: &ThetaDriving, branch: Branch) -> Result<Complex64> {
    let th = drive.theta(t)?;
    Ok(gamma_schedule_general(drive.tau(t)?, p, branch)? / th)
}
