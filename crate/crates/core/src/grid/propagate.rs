use num_complex::Complex64;

use super::{ComplexField, FftEngine, Grid};
use crate::error::{invalid, Error, Result};
use crate::units::HBAR;

/// Default bound on the potential phase accumulated per step, in radians.
pub const DEFAULT_PHASE_PER_STEP: f64 = 0.05;

const DIVERGENCE_CHECK_EVERY: usize = 64;

/// A real, possibly time-dependent potential energy on a grid.
pub trait Potential: Sync {
    /// Writes `V(x, t)` in joules for every grid point, in field layout.
    fn sample(&self, grid: &Grid, t: f64, out: &mut [f64]);

    /// Multiplies `values` by `exp(factor * V(x, t))`.
    ///
    /// Structured potentials override this to avoid materializing `V`.
    fn kick(&self, grid: &Grid, t: f64, factor: Complex64, values: &mut [Complex64]) {
        let mut v = vec![0.0; values.len()];
        self.sample(grid, t, &mut v);
        for (psi, vi) in values.iter_mut().zip(&v) {
            *psi *= (factor * vi).exp();
        }
    }

    /// `max V - min V` over the grid. Constant offsets only add a global phase,
    /// so this, not `max |V|`, is what limits the step size.
    fn span(&self, grid: &Grid, t: f64) -> f64 {
        let mut v = vec![0.0; grid.len()];
        self.sample(grid, t, &mut v);
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        hi - lo
    }
}

/// `V = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeSpace;

impl Potential for FreeSpace {
    fn sample(&self, _grid: &Grid, _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }

    fn kick(&self, _grid: &Grid, _t: f64, _factor: Complex64, _values: &mut [Complex64]) {}

    fn span(&self, _grid: &Grid, _t: f64) -> f64 {
        0.0
    }
}

/// A static potential given by its values on the grid.
#[derive(Debug, Clone)]
pub struct SampledPotential {
    pub values: Vec<f64>,
}

impl Potential for SampledPotential {
    fn sample(&self, _grid: &Grid, _t: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.values);
    }
}

/// 1D potential from a closure `V(x, t)`.
pub struct FnPotential<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Sync> Potential for FnPotential<F> {
    fn sample(&self, grid: &Grid, t: f64, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(grid.coords()) {
            *o = (self.0)(x, t);
        }
    }
}

/// 2D potential from a closure `V(x1, x2, t)`.
pub struct FnPotential2<F>(pub F);

impl<F: Fn(f64, f64, f64) -> f64 + Sync> Potential for FnPotential2<F> {
    fn sample(&self, grid: &Grid, t: f64, out: &mut [f64]) {
        let xs = grid.coords();
        let n = grid.n();
        for (j, &x2) in xs.iter().enumerate() {
            for (i, &x1) in xs.iter().enumerate() {
                out[j * n + i] = (self.0)(x1, x2, t);
            }
        }
    }
}

/// Uniform steps covering `[t_start, t_start + dt * n_steps]`.
///
/// Each step is a Strang step: half kinetic, full potential at the step
/// midpoint, half kinetic. Consecutive half-kinetic factors are fused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    pub n_steps: usize,
    pub t_start: f64,
}

impl StepPlan {
    /// Exactly `n_steps` steps over `window` (which may be negative).
    pub fn new(t_start: f64, window: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !window.is_finite() || window == 0.0 {
            return Err(invalid("step plan needs a non-empty window and at least one step"));
        }
        Ok(StepPlan { dt: window / n_steps as f64, n_steps, t_start })
    }

    /// The fewest equal steps over `window` with `|dt| <= dt_max`.
    pub fn with_max_dt(t_start: f64, window: f64, dt_max: f64) -> Result<Self> {
        if !(dt_max > 0.0) {
            return Err(invalid("dt must be positive"));
        }
        let n = (window.abs() / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        StepPlan::new(t_start, window, n)
    }

    /// Steps small enough that the potential phase per step stays below
    /// `max_phase`, judged from the potential span at `samples` times.
    pub fn auto(
        potential: &dyn Potential,
        grid: &Grid,
        t_start: f64,
        window: f64,
        max_phase: f64,
        samples: usize,
    ) -> Result<Self> {
        let samples = samples.max(2);
        let span = (0..samples)
            .map(|s| potential.span(grid, t_start + window * s as f64 / (samples - 1) as f64))
            .fold(0.0f64, f64::max);
        if span == 0.0 {
            return StepPlan::new(t_start, window, 1);
        }
        StepPlan::with_max_dt(t_start, window, max_phase * HBAR / span)
    }

    pub fn window(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.window()
    }
}

/// Split-step Fourier propagator bound to one grid and particle mass.
pub struct Propagator {
    grid: Grid,
    mass: f64,
    fft: FftEngine,
    k_sq: Vec<f64>,
    cache: Option<KineticCache>,
}

struct KineticCache {
    key: (f64, bool),
    full: Vec<Complex64>,
    half: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: &Grid, mass: f64) -> Self {
        let k_sq = grid.wavenumbers().iter().map(|k| k * k).collect();
        Propagator { grid: *grid, mass, fft: FftEngine::new(grid), k_sq, cache: None }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Real-time evolution. Time-dependent potentials are sampled at step midpoints.
    pub fn evolve(&mut self, field: &mut ComplexField, potential: &dyn Potential, plan: &StepPlan) -> Result<()> {
        self.run(field, potential, plan, false)
    }

    /// Imaginary-time evolution (`dt -> -i dt`), renormalizing after every step.
    pub fn evolve_imaginary(
        &mut self,
        field: &mut ComplexField,
        potential: &dyn Potential,
        plan: &StepPlan,
    ) -> Result<()> {
        self.run(field, potential, plan, true)
    }

    fn run(&mut self, field: &mut ComplexField, potential: &dyn Potential, plan: &StepPlan, imaginary: bool) -> Result<()> {
        if !field.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        if plan.n_steps == 0 {
            return Ok(());
        }
        self.prepare_kinetic(plan.dt, imaginary);
        let cache = self.cache.take().expect("kinetic cache prepared");
        let v_factor = if imaginary {
            Complex64::new(-plan.dt / HBAR, 0.0)
        } else {
            Complex64::new(0.0, -plan.dt / HBAR)
        };
        let grid = self.grid;
        let cell = grid.cell();
        let data = field.values_vec_mut();

        let result = (|| {
            self.kinetic(data, &cache.half);
            for step in 0..plan.n_steps {
                let t = plan.t_start + (step as f64 + 0.5) * plan.dt;
                potential.kick(&grid, t, v_factor, data);
                let last = step + 1 == plan.n_steps;
                self.kinetic(data, if last { &cache.half } else { &cache.full });
                if imaginary {
                    let norm = data.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell;
                    if !(norm.is_finite() && norm > 0.0) {
                        return Err(Error::Diverged { step });
                    }
                    let s = 1.0 / norm.sqrt();
                    data.iter_mut().for_each(|v| *v *= s);
                } else if (step % DIVERGENCE_CHECK_EVERY == 0 || last)
                    && !data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
                {
                    return Err(Error::Diverged { step });
                }
            }
            Ok(())
        })();
        self.cache = Some(cache);
        result
    }

    fn prepare_kinetic(&mut self, dt: f64, imaginary: bool) {
        if matches!(&self.cache, Some(c) if c.key == (dt, imaginary)) {
            return;
        }
        // The 1/n per axis folded in here is the inverse-FFT normalization.
        let inv_n = 1.0 / self.grid.n() as f64;
        let coef = HBAR * dt / (2.0 * self.mass);
        let unit = if imaginary { Complex64::new(-1.0, 0.0) } else { Complex64::new(0.0, -1.0) };
        let make = |scale: f64| -> Vec<Complex64> {
            self.k_sq.iter().map(|k2| (unit * coef * scale * k2).exp() * inv_n).collect()
        };
        let full = make(1.0);
        let half = make(0.5);
        self.cache = Some(KineticCache { key: (dt, imaginary), full, half });
    }

    fn kinetic(&mut self, data: &mut Vec<Complex64>, factors: &[Complex64]) {
        self.fft.forward(data);
        multiply_separable(data, factors, self.grid.dim());
        self.fft.inverse(data);
    }

    /// `<T>` of a (not necessarily normalized) field, divided by its norm.
    pub fn kinetic_energy(&mut self, field: &ComplexField) -> Result<f64> {
        if !field.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let mut data = field.values().to_vec();
        self.fft.forward(&mut data);
        let n = self.grid.n();
        let c = HBAR * HBAR / (2.0 * self.mass);
        let (mut num, mut den) = (0.0, 0.0);
        for (idx, v) in data.iter().enumerate() {
            let k2 = match self.grid.dim() {
                1 => self.k_sq[idx],
                _ => self.k_sq[idx / n] + self.k_sq[idx % n],
            };
            num += v.norm_sqr() * c * k2;
            den += v.norm_sqr();
        }
        Ok(num / den)
    }

    /// `psi -> (d/dx_axis) psi`, spectrally. In 2D `axis` 0 is `x1`.
    pub fn derivative(&mut self, field: &ComplexField, axis: usize) -> Result<ComplexField> {
        let n = self.grid.n();
        let k = self.grid.wavenumbers();
        let mut data = field.values().to_vec();
        self.fft.forward(&mut data);
        let scale = 1.0 / self.grid.len() as f64;
        for (idx, v) in data.iter_mut().enumerate() {
            // Forward 2D output is transposed: idx = k1 * n + k2.
            let kk = match (self.grid.dim(), axis) {
                (1, _) => k[idx],
                (_, 0) => k[idx / n],
                _ => k[idx % n],
            };
            // Drop the unpaired Nyquist mode so real fields stay real.
            let kk = if (kk.abs() - self.grid.k_max()).abs() < 1e-9 * self.grid.k_max() { 0.0 } else { kk };
            *v *= Complex64::new(0.0, kk * scale);
        }
        self.fft.inverse(&mut data);
        ComplexField::new(self.grid, data)
    }
}

fn multiply_separable(data: &mut [Complex64], f: &[Complex64], dim: usize) {
    if dim == 1 {
        data.iter_mut().zip(f).for_each(|(v, e)| *v *= e);
        return;
    }
    let n = f.len();
    for (row, fa) in data.chunks_mut(n).zip(f) {
        for (v, fb) in row.iter_mut().zip(f) {
            *v *= fa * fb;
        }
    }
}

/// Evolves `field` under `potential` for the steps in `plan`.
pub fn split_step_evolve(
    mut field: ComplexField,
    potential: &dyn Potential,
    plan: &StepPlan,
    mass: f64,
) -> Result<ComplexField> {
    let mut prop = Propagator::new(field.grid(), mass);
    prop.evolve(&mut field, potential, plan)?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::overlap;
    use crate::units::MASS_LI6;

    const M: f64 = MASS_LI6;

    fn omega() -> f64 {
        2.0 * std::f64::consts::PI * 22_898.0
    }

    fn ell() -> f64 {
        (HBAR / (M * omega())).sqrt()
    }

    fn displaced_ground(grid: Grid, x0: f64) -> ComplexField {
        let l = ell();
        ComplexField::from_fn_1d(grid, |x| Complex64::new((-(x - x0).powi(2) / (2.0 * l * l)).exp(), 0.0))
            .unwrap()
            .normalized()
            .unwrap()
    }

    #[test]
    fn plan_covers_window_exactly() {
        let p = StepPlan::with_max_dt(0.0, 21.84e-6, 1e-8).unwrap();
        assert!(((p.window() - 21.84e-6) / 21.84e-6).abs() < 1e-12);
        assert!(p.dt <= 1e-8);
        assert!(StepPlan::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn harmonic_period_returns_state() {
        let g = Grid::new(4.8e-6, 256, 1).unwrap();
        let w = omega();
        let psi0 = displaced_ground(g, 0.6e-6);
        let v = FnPotential(|x: f64, _t: f64| 0.5 * M * w * w * x * x);
        let period = 2.0 * std::f64::consts::PI / w;
        let plan = StepPlan::new(0.0, period, 2000).unwrap();
        let out = split_step_evolve(psi0.clone(), &v, &plan, M).unwrap();
        let f = overlap(&psi0, &out).unwrap().norm_sqr();
        assert!(f > 0.999, "{f}");
        assert!((out.norm_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn free_spreading_matches_closed_form() {
        // |psi|^2 ~ exp(-x^2 / (2 s^2)), s(t)^2 = s0^2 (1 + (hbar t / (2 m s0^2))^2)
        let g = Grid::new(20e-6, 1024, 1).unwrap();
        let s0 = 0.3e-6;
        let psi0 = ComplexField::from_fn_1d(g, |x| Complex64::new((-x * x / (4.0 * s0 * s0)).exp(), 0.0))
            .unwrap()
            .normalized()
            .unwrap();
        let t = 40e-6;
        let plan = StepPlan::new(0.0, t, 50).unwrap();
        let out = split_step_evolve(psi0, &FreeSpace, &plan, M).unwrap();
        let d = crate::grid::field_diagnostics(&out);
        let want = s0 * s0 * (1.0 + (HBAR * t / (2.0 * M * s0 * s0)).powi(2));
        assert!((d.width[0].powi(2) / want - 1.0).abs() < 1e-3);
    }

    #[test]
    fn unitary_over_many_steps() {
        let g = Grid::new(4.8e-6, 128, 1).unwrap();
        let w = omega();
        let psi0 = displaced_ground(g, 0.8e-6);
        let v = FnPotential(|x: f64, t: f64| 0.5 * M * w * w * x * x * (1.0 + 0.3 * (w * t).sin()));
        let plan = StepPlan::new(0.0, 50e-6, 10_000).unwrap();
        let out = split_step_evolve(psi0, &v, &plan, M).unwrap();
        assert!((out.norm_sq() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn time_reversible_with_frozen_potential() {
        let g = Grid::new(4.8e-6, 128, 2).unwrap();
        let w = omega();
        let psi0 = ComplexField::from_fn_2d(g, |a, b| {
            let l = ell();
            Complex64::new((-((a - 0.5e-6).powi(2) + (b + 0.4e-6).powi(2)) / (2.0 * l * l)).exp(), 0.0)
        })
        .unwrap()
        .normalized()
        .unwrap();
        let v = FnPotential2(|a: f64, b: f64, _t: f64| 0.5 * M * w * w * (a * a + b * b) + 1e-30 * (a - b).cos());
        let fwd = StepPlan::new(0.0, 5e-6, 300).unwrap();
        let back = StepPlan::new(5e-6, -5e-6, 300).unwrap();
        let mid = split_step_evolve(psi0.clone(), &v, &fwd, M).unwrap();
        let end = split_step_evolve(mid, &v, &back, M).unwrap();
        assert!(end.distance(&psi0).unwrap() < 1e-8);
    }

    #[test]
    fn nan_reports_step() {
        let g = Grid::new(1e-6, 16, 1).unwrap();
        let psi0 = displaced_ground(g, 0.0);
        let v = FnPotential(|_x: f64, t: f64| if t > 3e-9 { f64::NAN } else { 0.0 });
        let plan = StepPlan::new(0.0, 1e-8, 10).unwrap();
        match split_step_evolve(psi0, &v, &plan, M) {
            Err(Error::Diverged { step }) => assert!(step >= 2),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn auto_plan_respects_phase_bound() {
        let g = Grid::new(4.8e-6, 64, 1).unwrap();
        let w = omega();
        let v = FnPotential(|x: f64, _t: f64| 0.5 * M * w * w * x * x);
        let plan = StepPlan::auto(&v, &g, 0.0, 10e-6, 0.05, 3).unwrap();
        let span = v.span(&g, 0.0);
        assert!(span * plan.dt / HBAR <= 0.05 * (1.0 + 1e-9));
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let g = Grid::new(4.8e-6, 256, 1).unwrap();
        let psi = displaced_ground(g, 0.2e-6);
        let mut p = Propagator::new(&g, M);
        let d = p.derivative(&psi, 0).unwrap();
        let l2 = ell() * ell();
        for (i, (dv, v)) in d.values().iter().zip(psi.values()).enumerate() {
            let want = -(g.x(i) - 0.2e-6) / l2 * v;
            assert!((dv - want).norm() < 1e-6 * psi.values().iter().map(|z| z.norm()).fold(0.0, f64::max) / ell());
        }
    }
}
