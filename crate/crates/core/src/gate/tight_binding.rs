//! Two-site tight-binding model of the slow gate.
//!
//! Only the singlet couples to the symmetric doubly occupied state, through
//! `[[0, 2J], [2J, 2U]]`; the triplets have no dynamics. The singlet picks
//! up `e^{i pi/2}` relative to the triplets, which is a sqrt-SWAP.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use splines::{Interpolation, Key, Spline};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::numerics::{brent_root, dopri45, OdeTolerances};
use crate::potentials::{cosine_separation, GaussianTrap};
use crate::units::HBAR;

/// `pi sqrt(3) / 4`: the phase `∫ J dt / hbar` of a sqrt-SWAP with `U = 2J/sqrt(3)`.
pub const GATE_ACTION: f64 = PI * 1.732_050_807_568_877_2 / 4.0;

const U_OVER_J: f64 = 2.0 / 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightBindingState {
    pub singlet: Complex64,
    /// Symmetric combination of the two doubly occupied sites.
    pub double: Complex64,
    /// `|T+>, |T0>, |T->`.
    pub triplet: [Complex64; 3],
}

impl TightBindingState {
    /// `|up, down> = (|T0> + |S>)/sqrt(2)`.
    pub fn opposite_spins() -> Self {
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::default();
        TightBindingState { singlet: a, double: z, triplet: [z, a, z] }
    }

    pub fn singlet() -> Self {
        let z = Complex64::default();
        TightBindingState { singlet: Complex64::new(1.0, 0.0), double: z, triplet: [z; 3] }
    }

    pub fn norm_sq(&self) -> f64 {
        self.singlet.norm_sqr() + self.double.norm_sqr() + self.triplet.iter().map(|t| t.norm_sqr()).sum::<f64>()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.singlet.conj() * other.singlet
            + self.double.conj() * other.double
            + self.triplet.iter().zip(&other.triplet).map(|(a, b)| a.conj() * b).sum::<Complex64>()
    }

    /// The ideal gate applied to this state: singlet times `i`, double emptied.
    pub fn sqrt_swap(&self) -> Self {
        TightBindingState { singlet: self.singlet * Complex64::i(), double: Complex64::default(), triplet: self.triplet }
    }
}

/// `U = (2/sqrt 3) J`, `t_gate = (pi sqrt(3)/4) hbar / J`.
pub fn stationary_tb_gate(j: f64) -> Result<(f64, f64)> {
    if !(j > 0.0 && j.is_finite()) {
        return Err(invalid("tunneling energy must be positive"));
    }
    Ok((U_OVER_J * j, GATE_ACTION * HBAR / j))
}

/// Evolves the state for `duration` under schedules `J(t)`, `U(t)` (joules).
pub fn tb_evolve(
    j: impl Fn(f64) -> f64,
    u: impl Fn(f64) -> f64,
    state: &TightBindingState,
    duration: f64,
) -> Result<TightBindingState> {
    if !(duration >= 0.0) {
        return Err(invalid("duration must be >= 0"));
    }
    // Dimensionless time s = t / duration.
    let scale = duration / HBAR;
    let rhs = |s: f64, y: &[Complex64; 2]| {
        let t = s * duration;
        let (jj, uu) = (j(t) * scale, u(t) * scale);
        let mi = Complex64::new(0.0, -1.0);
        [mi * (2.0 * jj * y[1]), mi * (2.0 * jj * y[0] + 2.0 * uu * y[1])]
    };
    let tol = OdeTolerances { rtol: 1e-12, atol: 1e-14, min_step: 1e-14 };
    let [singlet, double] = dopri45(rhs, 0.0, 1.0, [state.singlet, state.double], tol)?;
    Ok(TightBindingState { singlet, double, triplet: state.triplet })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TbFidelity {
    pub f_opposite: f64,
    pub f_parallel: f64,
    pub f_min: f64,
    /// `arg` of the final singlet amplitude relative to the initial one.
    pub singlet_phase: f64,
    /// Population left in double occupancy.
    pub leakage: f64,
}

/// Fidelity of the evolution `initial -> final` against the ideal gate, for
/// opposite-spin input. Parallel spins live in the frozen triplet sector.
pub fn tb_fidelity(initial: &TightBindingState, final_state: &TightBindingState) -> TbFidelity {
    let target = initial.sqrt_swap();
    let f_opposite = target.inner(final_state).norm_sqr();
    let singlet_phase = (final_state.singlet / initial.singlet).arg();
    TbFidelity {
        f_opposite,
        f_parallel: 1.0,
        f_min: f_opposite.min(1.0),
        singlet_phase,
        leakage: final_state.double.norm_sqr() / initial.norm_sq(),
    }
}

/// A 1D grid wide enough for two wells up to `d_max` apart, resolving the
/// single-well ground state with about 10 points per oscillator length.
pub fn double_well_grid(d_max: f64, trap: &GaussianTrap, mass: f64) -> Result<Grid> {
    let ell = (HBAR / (mass * trap.omega(mass)?)).sqrt();
    let extent = d_max + 6.0 * trap.waist;
    let n = ((extent / (ell / 10.0)).ceil() as usize).next_multiple_of(8);
    Grid::new(extent, n, 1)
}

/// Half the splitting of the two lowest levels of two Gaussian wells at `±d/2`,
/// from a sinc-DVR Hamiltonian on `grid`.
pub fn tunneling_energy(d: f64, trap: &GaussianTrap, grid: &Grid, mass: f64) -> Result<f64> {
    let (j, noise) = splitting(d, trap, grid, mass)?;
    if !(j > noise) {
        return Err(Error::Precision(format!(
            "double-well splitting {:.3e} J at d = {d:.3e} m is below the eigenvalue resolution {:.1e} J",
            2.0 * j,
            2.0 * noise
        )));
    }
    Ok(j)
}

/// Half-splitting and the resolution it is known to.
fn splitting(d: f64, trap: &GaussianTrap, grid: &Grid, mass: f64) -> Result<(f64, f64)> {
    if grid.dim() != 1 {
        return Err(invalid("tunneling energy needs a 1D grid"));
    }
    if !(d > 0.0) || d / 2.0 + 2.0 * trap.waist > grid.extent() / 2.0 {
        return Err(invalid("wells do not fit on the grid"));
    }
    let n = grid.n();
    let h = grid.spacing();
    let t0 = HBAR * HBAR / (2.0 * mass * h * h);
    let (left, right) = (trap.at(-d / 2.0), trap.at(d / 2.0));
    let xs = grid.coords();
    let ham = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            t0 * PI * PI / 3.0 + left.value(xs[i]) + right.value(xs[i])
        } else {
            let k = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            t0 * 2.0 * sign / (k * k)
        }
    });
    let mut e: Vec<f64> = ham.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    if e[1] >= 0.0 {
        return Err(Error::Precision(format!("fewer than two bound states at d = {d:.3e} m")));
    }
    // Eigenvalues are accurate to a few ulps of the spectral radius.
    let noise = 1e3 * f64::EPSILON * e[n - 1].abs().max(e[0].abs());
    Ok(((e[1] - e[0]) / 2.0, noise / 2.0))
}

/// `J(d)` sampled on a uniform mesh and interpolated in `ln J`.
///
/// Where the splitting drops below what the eigen-solve resolves, the table
/// stops and `ln J` is continued linearly; there `J` is negligible anyway.
#[derive(Debug, Clone)]
pub struct TunnelingTable {
    pub d: Vec<f64>,
    pub j: Vec<f64>,
    spline: Spline<f64, f64>,
    lo: f64,
    /// Last separation covered by the spline.
    resolved: f64,
    hi: f64,
    tail_slope: f64,
}

/// Most eigen-solves a table may use.
pub const MAX_TABLE_POINTS: usize = 64;

/// Table entries must exceed the eigenvalue resolution by this factor.
const RESOLUTION_MARGIN: f64 = 10.0;

impl TunnelingTable {
    /// Samples `points` separations covering `[d_lo, d_hi]` (one extra point on
    /// each side keeps the cubic interpolation valid up to the ends).
    pub fn new(d_lo: f64, d_hi: f64, points: usize, trap: &GaussianTrap, mass: f64) -> Result<Self> {
        if !(4..=MAX_TABLE_POINTS).contains(&points) || !(d_hi > d_lo && d_lo > 0.0) {
            return Err(invalid("tunneling table needs 4..=64 points over 0 < d_lo < d_hi"));
        }
        let step = (d_hi - d_lo) / (points - 3) as f64;
        let d_all: Vec<f64> = (0..points).map(|i| d_lo + (i as f64 - 1.0) * step).collect();
        if d_all[0] <= 0.0 {
            return Err(invalid("tunneling table reaches d <= 0"));
        }
        let grid = double_well_grid(d_all[points - 1], trap, mass)?;
        let raw = d_all.par_iter().map(|&di| splitting(di, trap, &grid, mass)).collect::<Result<Vec<_>>>()?;
        let kept = raw.iter().take_while(|(j, noise)| *j > RESOLUTION_MARGIN * noise).count();
        if kept < 4 {
            return Err(Error::Precision("tunneling is unresolved over most of the table".into()));
        }
        let d: Vec<f64> = d_all[..kept].to_vec();
        let j: Vec<f64> = raw[..kept].iter().map(|(j, _)| *j).collect();
        for w in j.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Precision("J(d) is not decreasing on the table".into()));
            }
        }
        if kept < points {
            log::debug!("tunneling table resolved up to d = {:.3e} m of {:.3e} m", d[kept - 2], d_hi);
        }
        let keys = d.iter().zip(&j).map(|(&x, &y)| Key::new(x, y.ln(), Interpolation::CatmullRom)).collect();
        let resolved = d[kept - 2];
        let tail_slope = (j[kept - 2].ln() - j[kept - 3].ln()) / (d[kept - 2] - d[kept - 3]);
        Ok(TunnelingTable { spline: Spline::from_vec(keys), d, j, lo: d_lo, resolved, hi: d_hi, tail_slope })
    }

    pub fn eval(&self, d: f64) -> Result<f64> {
        if !(self.lo - 1e-15..=self.hi + 1e-15).contains(&d) {
            return Err(invalid(format!("d = {d:e} m outside the tunneling table")));
        }
        if d >= self.resolved {
            let last = self.j[self.j.len() - 2].ln();
            return Ok((last + self.tail_slope * (d - self.resolved)).exp());
        }
        let ln_j = self.spline.sample(d.max(self.lo)).ok_or_else(|| invalid("spline sample failed"))?;
        Ok(ln_j.exp())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Largest separation with a resolved splitting.
    pub fn resolved_up_to(&self) -> f64 {
        self.resolved
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum UPolicy {
    /// `U(t) = (2/sqrt 3) J(t)`: the Hamiltonian is `J(t)` times a fixed
    /// matrix, so the gate depends only on `∫ J dt`.
    Proportional,
    /// Constant `U = (2/sqrt 3) J_mean`.
    MeanJ,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticConfig {
    pub d0: f64,
    pub dmin: f64,
    pub period: f64,
    pub trap: GaussianTrap,
    pub mass: f64,
    pub policy: UPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticReport {
    pub period: f64,
    pub dmin: f64,
    pub fidelity: TbFidelity,
    /// `∫ J dt / hbar`; the ideal value is `GATE_ACTION`.
    pub action: f64,
    pub j_mean: f64,
    pub u_mean: f64,
    /// `(pi sqrt(3)/4) hbar / J_mean`.
    pub stationary_t_gate: f64,
}

/// `∫_0^T J(d(t)) dt / hbar` along a cosine trajectory.
pub fn gate_action(table: &TunnelingTable, d0: f64, dmin: f64, period: f64) -> Result<f64> {
    let f = |s: f64| {
        cosine_separation(s * period, d0, dmin, period).and_then(|d| table.eval(d)).map(|j| j * period / HBAR)
    };
    f(0.5)?;
    let out = quadrature::double_exponential::integrate(|s| f(s).unwrap_or(f64::NAN), 0.0, 1.0, 1e-10);
    if !out.integral.is_finite() {
        return Err(invalid("tunneling integral is not finite"));
    }
    Ok(out.integral)
}

/// Runs the tight-binding gate along `d(t)` with `J` from `table`.
pub fn run_adiabatic_gate(cfg: &AdiabaticConfig, table: &TunnelingTable) -> Result<AdiabaticReport> {
    let AdiabaticConfig { d0, dmin, period, policy, .. } = *cfg;
    let j_of = |t: f64| -> f64 {
        cosine_separation(t.clamp(0.0, period), d0, dmin, period).and_then(|d| table.eval(d)).unwrap_or(f64::NAN)
    };
    let action = gate_action(table, d0, dmin, period)?;
    let j_mean = action * HBAR / period;
    let u_const = match policy {
        UPolicy::MeanJ => U_OVER_J * j_mean,
        UPolicy::Fixed(u) => u,
        UPolicy::Proportional => f64::NAN,
    };
    let u_of = |t: f64| if policy == UPolicy::Proportional { U_OVER_J * j_of(t) } else { u_const };
    let init = TightBindingState::opposite_spins();
    let out = tb_evolve(j_of, u_of, &init, period)?;
    let u_mean = if policy == UPolicy::Proportional { U_OVER_J * j_mean } else { u_const };
    Ok(AdiabaticReport {
        period,
        dmin,
        fidelity: tb_fidelity(&init, &out),
        action,
        j_mean,
        u_mean,
        stationary_t_gate: GATE_ACTION * HBAR / j_mean,
    })
}

/// Closest approach for which a cosine trajectory of length `period` has
/// `∫ J dt / hbar = GATE_ACTION`.
pub fn calibrate_dmin(table: &TunnelingTable, d0: f64, period: f64) -> Result<f64> {
    let (lo, _) = table.range();
    let g = |dmin: f64| gate_action(table, d0, dmin, period).map(|a| (a / GATE_ACTION).ln()).unwrap_or(f64::NAN);
    brent_root(g, lo, d0, 1e-17)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{to_si, Unit, MASS_LI6};

    fn tweezer() -> GaussianTrap {
        GaussianTrap::new(to_si(20.38, Unit::Microkelvin), 700e-9, 0.0).unwrap()
    }

    #[test]
    fn stationary_parameters() {
        let j = HBAR * 4775.0;
        let (u, t) = stationary_tb_gate(j).unwrap();
        assert!((u / j - 1.1547).abs() < 1e-4);
        assert!((t / 284.9e-6 - 1.0).abs() < 1e-3);
        let (_, t2) = stationary_tb_gate(2.0 * j).unwrap();
        assert!((t / t2 - 2.0).abs() < 1e-14);
        assert!(stationary_tb_gate(0.0).is_err());
    }

    #[test]
    fn stationary_gate_is_exact() {
        let j = HBAR * 4775.0;
        let (u, t) = stationary_tb_gate(j).unwrap();
        let out = tb_evolve(|_| j, |_| u, &TightBindingState::singlet(), t).unwrap();
        assert!((out.singlet - Complex64::i()).norm() < 1e-8);
        assert!(out.double.norm_sqr() < 1e-8);
        assert!((out.norm_sq() - 1.0).abs() < 1e-10);
        let f = tb_fidelity(&TightBindingState::opposite_spins(), &tb_evolve(|_| j, |_| u, &TightBindingState::opposite_spins(), t).unwrap());
        assert!(1.0 - f.f_min < 1e-8);
    }

    #[test]
    fn analytic_eigenphases() {
        // Starting in an eigenvector, the state only gains exp(-i lambda t / hbar).
        let (j, u) = (1.3e-31f64, 0.7e-31f64);
        let lam = u - (u * u + 4.0 * j * j).sqrt();
        let v = [2.0 * j, lam];
        let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let s = TightBindingState {
            singlet: Complex64::new(v[0] / nv, 0.0),
            double: Complex64::new(v[1] / nv, 0.0),
            triplet: [Complex64::default(); 3],
        };
        let t = 3e-4;
        let out = tb_evolve(|_| j, |_| u, &s, t).unwrap();
        let ph = Complex64::from_polar(1.0, -lam * t / HBAR);
        assert!((out.singlet - s.singlet * ph).norm() < 1e-9);
        assert!((out.double - s.double * ph).norm() < 1e-9);
    }

    #[test]
    fn blockade_and_frozen_limits() {
        let j = HBAR * 1e4;
        let out = tb_evolve(|_| j, |_| 100.0 * j, &TightBindingState::singlet(), 5e-4).unwrap();
        assert!(out.double.norm_sqr() < 1e-3);
        let init = TightBindingState::opposite_spins();
        let out = tb_evolve(|_| 0.0, |_| j, &init, 5e-4).unwrap();
        assert!((out.singlet - init.singlet).norm() < 1e-14);
        assert!((tb_fidelity(&init, &out).f_opposite - 0.5).abs() < 1e-12);
    }

    #[test]
    fn double_well_splitting() {
        let trap = tweezer();
        let grid = double_well_grid(2.5e-6, &trap, MASS_LI6).unwrap();
        // Already negligible well inside the initial separation; J decreases with d.
        let near = tunneling_energy(1.5e-6, &trap, &grid, MASS_LI6).unwrap();
        assert!(near / HBAR < 10.0, "{}", near / HBAR);
        match tunneling_energy(2.329e-6, &trap, &grid, MASS_LI6) {
            Ok(j) => assert!(j < near),
            Err(e) => assert!(matches!(e, Error::Precision(_))),
        }
        let mut prev = f64::INFINITY;
        for d in [1.0e-6, 1.2e-6, 1.4e-6, 1.6e-6] {
            let j = tunneling_energy(d, &trap, &grid, MASS_LI6).unwrap();
            assert!(j > 0.0 && j < prev);
            prev = j;
        }
        assert!(tunneling_energy(20e-6, &trap, &grid, MASS_LI6).is_err());
    }

    #[test]
    fn splitting_matches_relaxation() {
        use crate::grid::{relax, FnPotential, RelaxOptions};
        let trap = tweezer();
        let d = 1.1e-6;
        let grid = double_well_grid(1.5e-6, &trap, MASS_LI6).unwrap();
        let j = tunneling_energy(d, &trap, &grid, MASS_LI6).unwrap();
        let (l, r) = (trap.at(-d / 2.0), trap.at(d / 2.0));
        let pot = FnPotential(move |x: f64, _t: f64| l.value(x) + r.value(x));
        let opts = RelaxOptions::for_frequency(trap.omega(MASS_LI6).unwrap(), 1e-13);
        let (g, e0) = relax(&pot, &grid, MASS_LI6, &opts, None, &[]).unwrap();
        let (_, e1) = relax(&pot, &grid, MASS_LI6, &opts, None, &[g]).unwrap();
        assert!(((e1 - e0) / 2.0 / j - 1.0).abs() < 2e-2, "{} vs {}", (e1 - e0) / 2.0, j);
    }

    #[test]
    fn table_and_calibration() {
        let trap = tweezer();
        let table = TunnelingTable::new(0.5e-6, 2.329e-6, 32, &trap, MASS_LI6).unwrap();
        assert!(table.resolved_up_to() > 1.3e-6 && table.resolved_up_to() < 2.329e-6, "{}", table.resolved_up_to());
        for (&d, &j) in table.d.iter().zip(&table.j).skip(1).take(table.d.len() - 3) {
            assert!((table.eval(d).unwrap() / j - 1.0).abs() < 1e-10);
        }
        let grid = double_well_grid(2.5e-6, &trap, MASS_LI6).unwrap();
        assert!(table.eval(2.329e-6).unwrap() < table.eval(table.resolved_up_to()).unwrap());
        let mid = 0.5 * (table.d[5] + table.d[6]);
        let direct = tunneling_energy(mid, &trap, &grid, MASS_LI6).unwrap();
        assert!((table.eval(mid).unwrap() / direct - 1.0).abs() < 1e-2, "{}", table.eval(mid).unwrap() / direct - 1.0);

        let period = 320e-6;
        let dmin = calibrate_dmin(&table, 2.329e-6, period).unwrap();
        let cfg = AdiabaticConfig { d0: 2.329e-6, dmin, period, trap, mass: MASS_LI6, policy: UPolicy::Proportional };
        let rep = run_adiabatic_gate(&cfg, &table).unwrap();
        assert!((rep.action / GATE_ACTION - 1.0).abs() < 1e-6, "{}", rep.action / GATE_ACTION - 1.0);
        assert!(rep.fidelity.f_min > 0.99, "{rep:?}");
        // Frozen traps do nothing.
        let frozen = AdiabaticConfig { dmin: 2.329e-6, ..cfg };
        let rep = run_adiabatic_gate(&frozen, &table).unwrap();
        assert!((rep.fidelity.f_min - 0.5).abs() < 1e-3);
    }
}
