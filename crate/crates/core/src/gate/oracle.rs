//! The gate in the relative coordinate `x = (x2 - x1)/sqrt(2)`.
//!
//! In a harmonic (or harmonically driven) trap the two-body problem
//! separates: the centre of mass follows a closed-form squeezed state and
//! only the relative packet feels the interaction. Evolving that 1D problem
//! gives an independent check on the 2D solver.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use super::config::{Central, GateConfig};
use crate::analytic::{psi0_center, Branch};
use crate::error::{invalid, Result};
use crate::grid::{overlap, ComplexField, Grid, Potential, Propagator, StepPlan};
use crate::potentials::RelativePotential;

/// Relative-frame grid points per 2D grid point along an axis.
const REFINE: f64 = 2.0 * SQRT_2;

/// Phases of the exchange-symmetric and antisymmetric parts of the relative
/// packet over the gate, with and without the interaction.
///
/// Without interaction the even part gains `pi` relative to the odd part
/// (the mirror). The interaction only acts on the even part, so
/// `conditional_phase` should be `±pi/2` for a sqrt-SWAP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseLedger {
    pub phase_even: f64,
    pub phase_odd: f64,
    pub phase_even_free: f64,
    pub phase_odd_free: f64,
    pub conditional_phase: f64,
}

impl PhaseLedger {
    /// Distance of `|conditional_phase|` from `pi/2`.
    pub fn error(&self) -> f64 {
        (self.conditional_phase.abs() - PI / 2.0).abs()
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub initial: ComplexField,
    pub final_field: ComplexField,
    /// Same evolution with the interaction off.
    pub free_final: ComplexField,
    pub ledger: PhaseLedger,
    pub f_opposite: f64,
    pub f_parallel: f64,
    pub branch: Branch,
    pub steps: usize,
}

impl OracleResult {
    pub fn f_min(&self) -> f64 {
        self.f_opposite.min(self.f_parallel)
    }
}

/// 1D grid for the relative coordinate: it spans the diagonal of the 2D box
/// with `REFINE` times as many points per unit length ratio.
pub fn relative_grid(cfg: &GateConfig) -> Result<Grid> {
    let n = ((cfg.grid.n() as f64 * REFINE / 2.0).ceil() as usize) * 2;
    Grid::new(cfg.grid.extent() * SQRT_2, n, 1)
}

fn wrap(phase: f64) -> f64 {
    let p = (phase + PI).rem_euclid(2.0 * PI) - PI;
    if p <= -PI {
        p + 2.0 * PI
    } else {
        p
    }
}

/// Evolves the relative packet with the configured schedule and a
/// harmonic trap (the central Gaussian's harmonic approximation, or the drive).
pub fn relative_coordinate_oracle(cfg: &GateConfig) -> Result<OracleResult> {
    cfg.validate()?;
    let harmonic = cfg.harmonic_approximation()?;
    let grid = relative_grid(cfg)?;
    let t_gate = cfg.t_gate()?;
    let w0 = cfg.w0()?;
    let xc = cfg.d * FRAC_1_SQRT_2;
    let initial = ComplexField::from_fn_1d(grid, |x| Complex64::new((-(x - xc) * (x - xc) / (w0 * w0)).exp(), 0.0))?
        .normalized()?;

    let interaction = cfg.interaction()?;
    let pot = RelativePotential::new(&grid, harmonic.trap_term(), interaction.clone())?;
    let free = RelativePotential::new(&grid, harmonic.trap_term(), None)?;
    let plan = match cfg.dt {
        Some(dt) => StepPlan::with_max_dt(0.0, t_gate, dt)?,
        None => StepPlan::auto(&pot, &grid, 0.0, t_gate, cfg.max_phase, 64)?,
    };
    let mut prop = Propagator::new(&grid, cfg.mass);
    let mut final_field = initial.clone();
    prop.evolve(&mut final_field, &pot, &plan)?;
    let mut free_final = initial.clone();
    prop.evolve(&mut free_final, &free as &dyn Potential, &plan)?;

    let parity = |f: &ComplexField| -> Result<(ComplexField, ComplexField)> {
        let m = f.mirrored();
        Ok((f.combine(Complex64::new(0.5, 0.0), &m, Complex64::new(0.5, 0.0))?, f.combine(Complex64::new(0.5, 0.0), &m, Complex64::new(-0.5, 0.0))?))
    };
    let (e0, o0) = parity(&initial)?;
    let (e1, o1) = parity(&final_field)?;
    let (ef, of) = parity(&free_final)?;
    let phase_even = overlap(&e0, &e1)?.arg();
    let phase_odd = overlap(&o0, &o1)?.arg();
    let phase_even_free = overlap(&e0, &ef)?.arg();
    let phase_odd_free = overlap(&o0, &of)?.arg();
    let conditional_phase = wrap((phase_even - phase_odd) - (phase_even_free - phase_odd_free));
    let ledger = PhaseLedger { phase_even, phase_odd, phase_even_free, phase_odd_free, conditional_phase };

    // The centre-of-mass factor is common to both sectors.
    let com = com_return(cfg, &harmonic, t_gate)?;
    let mirror0 = initial.mirrored();
    let mut best = (Branch::Plus, -1.0);
    for branch in [Branch::Plus, Branch::Minus] {
        let s = branch.sign();
        let target = initial
            .combine(Complex64::new(0.5, 0.5 * s), &mirror0, Complex64::new(0.5, -0.5 * s))?
            .normalized()?;
        let f = overlap(&target, &final_field)?.norm_sqr() * com;
        if f > best.1 {
            best = (branch, f);
        }
    }
    let f_parallel = overlap(&mirror0, &free_final)?.norm_sqr() * com;
    Ok(OracleResult {
        initial,
        final_field,
        free_final,
        ledger,
        f_opposite: best.1.min(1.0),
        f_parallel: f_parallel.min(1.0),
        branch: best.0,
        steps: plan.n_steps,
    })
}

/// `|<Psi0(0)|Psi0(t)>|^2` for the centre-of-mass packet.
fn com_return(cfg: &GateConfig, harmonic: &GateConfig, t: f64) -> Result<f64> {
    let grid = cfg.grid.with_dim(1)?;
    let a = ComplexField::from_fn_1d(grid, |x| com_packet(harmonic, x, 0.0).unwrap_or_default())?;
    let b = ComplexField::from_fn_1d(grid, |x| com_packet(harmonic, x, t).unwrap_or_default())?;
    Ok(overlap(&a, &b)?.norm_sqr() / (a.norm_sq() * b.norm_sq()))
}

/// Closed-form centre-of-mass packet at time `t` (harmonic or driven trap).
pub fn com_packet(cfg: &GateConfig, xx: f64, t: f64) -> Result<Complex64> {
    let p = cfg.squeezed_params()?;
    match &cfg.central {
        Central::Driven(d) => {
            let th = d.theta(t)?;
            let (th_dot, _) = d.theta_derivatives(t)?;
            let chirp = Complex64::from_polar(th.sqrt().recip(), d.mass * th_dot * xx * xx / (2.0 * crate::units::HBAR * th));
            Ok(chirp * psi0_center(xx / th, d.tau(t)?, &p))
        }
        Central::Harmonic { .. } => Ok(psi0_center(xx, t, &p)),
        Central::Gaussian(_) => Err(invalid("closed-form centre of mass needs a harmonic trap")),
    }
}

/// Six-point Lagrange interpolation of a 1D field; zero outside the grid.
pub fn sample_1d(field: &ComplexField, x: f64) -> Complex64 {
    let grid = field.grid();
    let h = grid.spacing();
    let s = (x + grid.extent() / 2.0) / h;
    let i0 = s.floor() as isize - 2;
    let n = grid.n() as isize;
    if i0 < 0 || i0 + 5 >= n {
        return Complex64::default();
    }
    let v = field.values();
    let mut acc = Complex64::default();
    for a in 0..6 {
        let mut w = 1.0;
        for b in 0..6 {
            if a != b {
                w *= (s - (i0 + b) as f64) / (a - b) as f64;
            }
        }
        acc += v[(i0 + a) as usize] * w;
    }
    acc
}

/// `psi_rel(x) Psi_com(X)` on the 2D grid at time `t`.
pub fn reconstruct_2d(cfg: &GateConfig, relative: &ComplexField, t: f64) -> Result<ComplexField> {
    let harmonic = cfg.harmonic_approximation()?;
    let n = cfg.grid.n();
    let xs = cfg.grid.coords();
    // Sample the centre-of-mass packet once on its own fine line.
    let com_grid = relative.grid();
    let com = ComplexField::from_fn_1d(*com_grid, |xx| com_packet(&harmonic, xx, t).unwrap_or_default())?;
    let mut values = vec![Complex64::default(); n * n];
    for (j, &x2) in xs.iter().enumerate() {
        for (i, &x1) in xs.iter().enumerate() {
            let x = (x2 - x1) * FRAC_1_SQRT_2;
            let xx = (x1 + x2) * FRAC_1_SQRT_2;
            values[j * n + i] = sample_1d(relative, x) * sample_1d(&com, xx);
        }
    }
    // The rotation to (x, X) has unit Jacobian, so no rescaling is needed.
    ComplexField::new(cfg.grid, values)
}
