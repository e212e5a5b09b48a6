use num_complex::Complex64;

use super::{overlap, ComplexField, Grid, Potential, Propagator, StepPlan};
use crate::error::{invalid, Error, Result};
use crate::units::HBAR;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOptions {
    /// Imaginary time step, s.
    pub dt: f64,
    /// Steps between energy checks.
    pub sweep_steps: usize,
    pub max_sweeps: usize,
    /// Relative energy change between sweeps that counts as converged.
    pub tol: f64,
}

impl RelaxOptions {
    /// Reasonable settings for a well whose bottom oscillates at `omega`.
    pub fn for_frequency(omega: f64, tol: f64) -> Self {
        RelaxOptions { dt: 0.02 / omega, sweep_steps: 50, max_sweeps: 2000, tol }
    }
}

/// Ground state by imaginary-time relaxation, with the well frequency
/// estimated from the curvature at the potential minimum.
pub fn imaginary_time_ground_state(
    potential: &dyn Potential,
    grid: &Grid,
    mass: f64,
    tol: f64,
) -> Result<(ComplexField, f64)> {
    let omega = bottom_frequency(potential, grid, mass);
    relax(potential, grid, mass, &RelaxOptions::for_frequency(omega, tol), None, &[])
}

/// Relaxes `initial` (or a broad Gaussian) towards the lowest state orthogonal
/// to every field in `orthogonal_to`. Returns the state and its energy.
pub fn relax(
    potential: &dyn Potential,
    grid: &Grid,
    mass: f64,
    opts: &RelaxOptions,
    initial: Option<ComplexField>,
    orthogonal_to: &[ComplexField],
) -> Result<(ComplexField, f64)> {
    if !(opts.dt > 0.0) || opts.sweep_steps == 0 {
        return Err(invalid("relaxation needs a positive step and non-empty sweeps"));
    }
    let mut psi = match initial {
        Some(f) => f,
        None => seed(grid, !orthogonal_to.is_empty())?,
    };
    project_out(&mut psi, orthogonal_to)?;
    let mut prop = Propagator::new(grid, mass);
    let mut energy = expectation(&mut prop, potential, &psi)?;
    let mut residual = f64::INFINITY;
    for _sweep in 0..opts.max_sweeps {
        for _ in 0..opts.sweep_steps {
            let plan = StepPlan::new(0.0, opts.dt, 1)?;
            prop.evolve_imaginary(&mut psi, potential, &plan)?;
            project_out(&mut psi, orthogonal_to)?;
        }
        let e = expectation(&mut prop, potential, &psi)?;
        residual = ((e - energy) / e).abs();
        energy = e;
        if residual < opts.tol {
            return Ok((psi, energy));
        }
    }
    Err(Error::NotConverged { what: "imaginary-time relaxation", iterations: opts.max_sweeps, residual })
}

fn expectation(prop: &mut Propagator, potential: &dyn Potential, psi: &ComplexField) -> Result<f64> {
    let grid = *psi.grid();
    let mut v = vec![0.0; grid.len()];
    potential.sample(&grid, 0.0, &mut v);
    let pot: f64 = psi.values().iter().zip(&v).map(|(p, vi)| p.norm_sqr() * vi).sum::<f64>() * grid.cell();
    Ok(prop.kinetic_energy(psi)? + pot / psi.norm_sq())
}

fn project_out(psi: &mut ComplexField, states: &[ComplexField]) -> Result<()> {
    for s in states {
        let c = overlap(s, psi)? / s.norm_sq();
        let corrected = psi.combine(Complex64::new(1.0, 0.0), s, -c)?;
        *psi = corrected;
    }
    psi.normalize()
}

/// A broad starting guess. The odd variant has overlap with excited states
/// of either parity once projected.
fn seed(grid: &Grid, excited: bool) -> Result<ComplexField> {
    let w = 0.2 * grid.extent();
    let f = move |x: f64| {
        let g = (-(x / w).powi(2)).exp();
        if excited {
            g * (1.0 + x / w)
        } else {
            g
        }
    };
    let field = match grid.dim() {
        1 => ComplexField::from_fn_1d(*grid, |x| Complex64::new(f(x), 0.0))?,
        _ => ComplexField::from_fn_2d(*grid, |a, b| Complex64::new(f(a) * f(b), 0.0))?,
    };
    field.normalized()
}

fn bottom_frequency(potential: &dyn Potential, grid: &Grid, mass: f64) -> f64 {
    let line = grid.with_dim(1).unwrap_or(*grid);
    let mut v = vec![0.0; grid.len()];
    potential.sample(grid, 0.0, &mut v);
    let n = grid.n();
    // Take the 1D cut through the minimum along the first axis.
    let imin = v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|x| x.0).unwrap_or(0);
    let (i, row) = (imin % n, imin / n * n);
    let h = line.spacing();
    let at = |k: usize| v[row + k];
    let curv = if i >= 1 && i + 1 < n { (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h) } else { 0.0 };
    let kinetic_scale = HBAR * (std::f64::consts::PI / (8.0 * h)).powi(2) / mass;
    if curv > 0.0 {
        (curv / mass).sqrt().min(kinetic_scale)
    } else {
        // No well to speak of: fall back to the grid's own kinetic scale.
        HBAR * (std::f64::consts::PI / grid.extent() * 8.0).powi(2) / mass
    }
}
