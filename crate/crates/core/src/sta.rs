//! Scale-invariant (Ermakov) driving of the central trap.
//!
//! The trap is described through the rescaling factor
//! `theta(u) = 1 + a2 u^2 + b1 u^beta1 + b2 u^beta2` with the folded time
//! `u = |2t - T| / T`, so `theta` is symmetric about mid-gate and equals 1
//! there. The trap frequency follows from the Ermakov relation
//! `theta'' + omega^2 theta = k0 / (m theta^3)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{ComplexField, FnPotential, Grid, Propagator, StepPlan};
use crate::numerics::{brent_root, nelder_mead};
use crate::units::HBAR;

const POSITIVITY_SAMPLES: usize = 2000;
const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaDriving {
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Gate duration, s.
    pub t_gate: f64,
    /// Spring constant of the reference trap, N/m.
    pub k0: f64,
    /// Particle mass, kg.
    pub mass: f64,
}

impl ThetaDriving {
    #[allow(clippy::too_many_arguments)]
    pub fn new(a2: f64, b1: f64, b2: f64, beta1: f64, beta2: f64, t_gate: f64, k0: f64, mass: f64) -> Result<Self> {
        let d = ThetaDriving { a2, b1, b2, beta1, beta2, t_gate, k0, mass };
        d.validate()?;
        Ok(d)
    }

    /// `theta == 1`: the ordinary static trap at `omega0`.
    pub fn stationary(t_gate: f64, omega0: f64, mass: f64) -> Result<Self> {
        ThetaDriving::new(0.0, 0.0, 0.0, 3.0, 4.0, t_gate, mass * omega0 * omega0, mass)
    }

    /// Same shape, with `k0` fixed by requiring `omega0 * tau(T) = pi`.
    pub fn with_swap_condition(mut self) -> Result<Self> {
        let tau = self.tau(self.t_gate)?;
        let omega0 = PI / tau;
        self.k0 = self.mass * omega0 * omega0;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a2, self.b1, self.b2, self.beta1, self.beta2, self.t_gate, self.k0, self.mass];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDriving("non-finite parameter".into()));
        }
        if self.beta1 <= 2.0 || self.beta2 <= 2.0 {
            return Err(Error::InvalidDriving(format!(
                "exponents must exceed 2 for a continuous trap frequency (got {}, {})",
                self.beta1, self.beta2
            )));
        }
        if self.t_gate <= 0.0 || self.k0 <= 0.0 || self.mass <= 0.0 {
            return Err(Error::InvalidDriving("t_gate, k0 and mass must be positive".into()));
        }
        if let Some(u) = first_nonpositive(self) {
            return Err(Error::InvalidDriving(format!("theta <= 0 at folded time {u:.4}")));
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        (self.k0 / self.mass).sqrt()
    }

    pub fn is_stationary(&self) -> bool {
        self.a2 == 0.0 && self.b1 == 0.0 && self.b2 == 0.0
    }

    /// `theta` as a function of the folded time `u` in `[0, 1]`.
    pub fn theta_folded(&self, u: f64) -> f64 {
        1.0 + self.a2 * u * u + self.b1 * u.powf(self.beta1) + self.b2 * u.powf(self.beta2)
    }

    /// `d theta / du`.
    pub fn slope_folded(&self, u: f64) -> f64 {
        2.0 * self.a2 * u
            + self.beta1 * self.b1 * u.powf(self.beta1 - 1.0)
            + self.beta2 * self.b2 * u.powf(self.beta2 - 1.0)
    }

    /// `d^2 theta / du^2`.
    pub fn curvature_folded(&self, u: f64) -> f64 {
        2.0 * self.a2
            + self.beta1 * (self.beta1 - 1.0) * self.b1 * u.powf(self.beta1 - 2.0)
            + self.beta2 * (self.beta2 - 1.0) * self.b2 * u.powf(self.beta2 - 2.0)
    }

    /// Folded time and `sign(2t - T)`.
    fn fold(&self, t: f64) -> Result<(f64, f64)> {
        let slack = 1e-12 * self.t_gate;
        if !(t >= -slack && t <= self.t_gate + slack) {
            return Err(invalid(format!("t = {t:e} s outside the gate window")));
        }
        let s = 2.0 * t - self.t_gate;
        Ok(((s.abs() / self.t_gate).min(1.0), if s < 0.0 { -1.0 } else { 1.0 }))
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        let (u, _) = self.fold(t)?;
        let th = self.theta_folded(u);
        if th <= 0.0 {
            return Err(Error::InvalidDriving(format!("theta = {th} at t = {t:e} s")));
        }
        Ok(th)
    }

    /// `(d theta/dt, d^2 theta/dt^2)`, with the fold handled analytically.
    pub fn theta_derivatives(&self, t: f64) -> Result<(f64, f64)> {
        let (u, sign) = self.fold(t)?;
        let du = 2.0 / self.t_gate;
        Ok((sign * du * self.slope_folded(u), du * du * self.curvature_folded(u)))
    }

    /// Trap frequency squared from the Ermakov relation.
    pub fn omega_squared(&self, t: f64) -> Result<f64> {
        let th = self.theta(t)?;
        let (_, th_dd) = self.theta_derivatives(t)?;
        Ok((self.k0 / (self.mass * th.powi(3)) - th_dd) / th)
    }

    /// `int_0^1 theta(u)^-2 du` over a sub-interval of folded time.
    fn inverse_square_integral(&self, u0: f64, u1: f64) -> Result<f64> {
        if u1 <= u0 {
            return Ok(0.0);
        }
        let out = quadrature::double_exponential::integrate(|u| self.theta_folded(u).powi(-2), u0, u1, QUAD_TOL);
        if !(out.integral.is_finite() && out.error_estimate <= 1e3 * QUAD_TOL) {
            return Err(Error::NotConverged {
                what: "tau quadrature",
                iterations: out.num_function_evaluations as usize,
                residual: out.error_estimate,
            });
        }
        Ok(out.integral)
    }

    /// Rescaled time `tau(t) = int_0^t theta^-2 ds`.
    pub fn tau(&self, t: f64) -> Result<f64> {
        let (u, sign) = self.fold(t)?;
        let half = 0.5 * self.t_gate;
        if self.is_stationary() {
            return Ok(t.clamp(0.0, self.t_gate));
        }
        if sign < 0.0 {
            Ok(half * self.inverse_square_integral(u, 1.0)?)
        } else {
            Ok(half * (self.inverse_square_integral(0.0, 1.0)? + self.inverse_square_integral(0.0, u)?))
        }
    }

    /// Lewis–Riesenfeld phase of an invariant eigenstate with energy `energy`.
    pub fn lr_phase(&self, energy: f64, t: f64) -> Result<f64> {
        Ok(-energy / HBAR * self.tau(t)?)
    }

    pub fn check_conditions(&self, tol: &ConditionTolerances) -> Result<ConditionReport> {
        let omega0_sq = self.k0 / self.mass;
        let slope_end = self.slope_folded(1.0);
        let w_start = self.omega_squared(0.0)? / omega0_sq;
        let w_end = self.omega_squared(self.t_gate)? / omega0_sq;
        let swap_phase = self.omega0() * self.tau(self.t_gate)?;
        let mut min_ratio = f64::INFINITY;
        let mut min_at = 0.0;
        let n = tol.samples.max(3);
        for i in 0..n {
            let t = self.t_gate * i as f64 / (n - 1) as f64;
            let r = self.omega_squared(t)? / omega0_sq;
            if r < min_ratio {
                min_ratio = r;
                min_at = t;
            }
        }
        Ok(ConditionReport {
            slope_end,
            omega_sq_start: w_start,
            omega_sq_end: w_end,
            swap_phase,
            min_omega_sq: min_ratio,
            min_omega_sq_at: min_at,
            cond1: slope_end.abs() <= tol.slope,
            cond2: w_start.abs() <= tol.endpoint_omega && w_end.abs() <= tol.endpoint_omega,
            cond3: (swap_phase / PI - 1.0).abs() <= tol.swap,
            cond4: min_ratio >= -tol.floor,
        })
    }

    pub fn tabulate(&self, points: usize) -> Result<DrivenSchedule> {
        let n = points.max(2);
        let mut s = DrivenSchedule::default();
        for i in 0..n {
            let t = self.t_gate * i as f64 / (n - 1) as f64;
            let (d1, d2) = self.theta_derivatives(t)?;
            s.time.push(t);
            s.theta.push(self.theta(t)?);
            s.theta_dot.push(d1);
            s.theta_ddot.push(d2);
            s.omega_sq.push(self.omega_squared(t)?);
            s.tau.push(self.tau(t)?);
        }
        Ok(s)
    }

    /// `|theta'' + omega^2 theta - k0/(m theta^3)|` relative to the last term.
    pub fn ermakov_residual(&self, t: f64) -> Result<f64> {
        let th = self.theta(t)?;
        let (_, th_dd) = self.theta_derivatives(t)?;
        let rhs = self.k0 / (self.mass * th.powi(3));
        Ok((th_dd + self.omega_squared(t)? * th - rhs).abs() / rhs)
    }

    /// Peak of the harmonic potential depth `m omega(t)^2 sigma^2 / 4` seen
    /// by a Gaussian beam of waist `sigma` whose bottom has curvature `omega(t)^2`.
    pub fn peak_depth(&self, sigma: f64, samples: usize) -> Result<f64> {
        let n = samples.max(3);
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let t = self.t_gate * i as f64 / (n - 1) as f64;
            best = best.max(self.omega_squared(t)?);
        }
        Ok(self.mass * best * sigma * sigma / 4.0)
    }
}

fn first_nonpositive(d: &ThetaDriving) -> Option<f64> {
    (0..=POSITIVITY_SAMPLES)
        .map(|i| i as f64 / POSITIVITY_SAMPLES as f64)
        .find(|&u| d.theta_folded(u) <= 0.0)
}

/// Thresholds for conditions 1–4. Slopes are `d theta/du` at the gate ends,
/// trap frequencies are in units of `omega0^2`, and the swap tolerance is
/// relative to `pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionTolerances {
    pub slope: f64,
    pub endpoint_omega: f64,
    pub swap: f64,
    pub floor: f64,
    pub samples: usize,
}

impl ConditionTolerances {
    /// What generated drivings are held to.
    pub const STRICT: ConditionTolerances =
        ConditionTolerances { slope: 1e-8, endpoint_omega: 1e-6, swap: 1e-6, floor: 1e-9, samples: 4001 };

    /// Loose enough for coefficients given to four digits.
    pub const FOUR_DIGIT: ConditionTolerances =
        ConditionTolerances { slope: 5e-3, endpoint_omega: 5e-3, swap: 1e-2 / PI, floor: 5e-3, samples: 4001 };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// `d theta/du` at `u = 1` (both gate ends, by symmetry).
    pub slope_end: f64,
    pub omega_sq_start: f64,
    pub omega_sq_end: f64,
    /// `omega0 tau(T)`, ideally `pi`.
    pub swap_phase: f64,
    /// Smallest sampled `omega^2 / omega0^2`.
    pub min_omega_sq: f64,
    pub min_omega_sq_at: f64,
    pub cond1: bool,
    pub cond2: bool,
    pub cond3: bool,
    pub cond4: bool,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.cond1 && self.cond2 && self.cond3 && self.cond4
    }
}

/// Dense tabulation of a driving.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DrivenSchedule {
    pub time: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_dot: Vec<f64>,
    pub theta_ddot: Vec<f64>,
    pub omega_sq: Vec<f64>,
    pub tau: Vec<f64>,
}

/// Every `(a2, b1, b2)` meeting conditions 1–3 with `theta > 0`, without
/// looking at the sign of the trap.
///
/// Conditions 1 and 2 and the value `Theta1 = theta(u=1)` fix the
/// coefficients linearly; `Theta1` is then found by a root search on
/// condition 3.
pub fn constraint_candidates(beta1: f64, beta2: f64, t_gate: f64, omega0: f64, mass: f64) -> Result<Vec<ThetaDriving>> {
    if beta1 <= 2.0 || beta2 <= 2.0 {
        return Err(Error::InvalidDriving("exponents must exceed 2".into()));
    }
    if (beta1 - beta2).abs() < 1e-9 {
        return Err(Error::Infeasible { reason: "exponents coincide".into(), min_omega_sq: None });
    }
    if !(t_gate > 0.0 && omega0 > 0.0 && mass > 0.0) {
        return Err(invalid("t_gate, omega0 and mass must be positive"));
    }
    let m = Matrix3::new(
        2.0, beta1, beta2,
        1.0, 1.0, 1.0,
        2.0, beta1 * (beta1 - 1.0), beta2 * (beta2 - 1.0),
    );
    let sv = m.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond < 1e6) {
        return Err(Error::Infeasible {
            reason: format!("exponents ({beta1}, {beta2}) give a near-degenerate system (condition {cond:.2e})"),
            min_omega_sq: None,
        });
    }
    let inv = m.try_inverse().ok_or(Error::Infeasible { reason: "singular system".into(), min_omega_sq: None })?;
    let k0 = mass * omega0 * omega0;
    let wt = omega0 * t_gate;
    let build = |theta1: f64| -> Option<ThetaDriving> {
        let rhs = Vector3::new(0.0, theta1 - 1.0, 0.25 * wt * wt / theta1.powi(3));
        let c = inv * rhs;
        let d = ThetaDriving { a2: c[0], b1: c[1], b2: c[2], beta1, beta2, t_gate, k0, mass };
        first_nonpositive(&d).is_none().then_some(d)
    };
    let residual = |theta1: f64| -> Option<f64> {
        let d = build(theta1)?;
        Some(wt * d.inverse_square_integral(0.0, 1.0).ok()? - PI)
    };

    // Scan Theta1 for sign changes of the condition-3 residual.
    let grid: Vec<f64> = (0..=240).map(|i| 0.2 * (25f64).powf(i as f64 / 240.0)).collect();
    let vals: Vec<Option<f64>> = grid.iter().map(|&x| residual(x)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        if let (Some(a), Some(b)) = (vals[i], vals[i + 1]) {
            if a.signum() != b.signum() {
                let f = |x: f64| residual(x).unwrap_or(f64::NAN);
                if let Ok(r) = brent_root(f, grid[i], grid[i + 1], 1e-15) {
                    roots.push(r);
                }
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::Infeasible {
            reason: format!("no driving with exponents ({beta1}, {beta2}) meets the swap condition"),
            min_omega_sq: None,
        });
    }
    // Closest to the static trap first.
    roots.sort_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()));
    Ok(roots.into_iter().filter_map(build).collect())
}

/// Given the exponents, finds `(a2, b1, b2)` meeting conditions 1–3 exactly
/// and keeps the first candidate whose trap stays attractive.
pub fn solve_constraints(beta1: f64, beta2: f64, t_gate: f64, omega0: f64, mass: f64) -> Result<ThetaDriving> {
    let mut least_negative: Option<f64> = None;
    for d in constraint_candidates(beta1, beta2, t_gate, omega0, mass)? {
        let report = d.check_conditions(&ConditionTolerances::STRICT)?;
        if report.all_pass() {
            return Ok(d);
        }
        let w = report.min_omega_sq * omega0 * omega0;
        least_negative = Some(least_negative.map_or(w, |x: f64| x.max(w)));
    }
    Err(Error::Infeasible {
        reason: format!("driving with exponents ({beta1}, {beta2}) needs a repulsive trap"),
        min_omega_sq: least_negative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub max_iters: u64,
    /// Initial simplex edge in exponent units.
    pub step: f64,
    pub sd_tol: f64,
    /// Seeds the random jitter of the starting simplex, nothing else.
    pub rng_seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { max_iters: 60, step: 0.25, sd_tol: 1e-6, rng_seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub seed: usize,
    pub evaluation: usize,
    pub beta1: f64,
    pub beta2: f64,
    /// `None` when the exponents were infeasible.
    pub cost: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub best: ThetaDriving,
    pub cost: f64,
    pub trace: Vec<TraceRow>,
}

/// Penalty returned for infeasible candidates; large but finite so the
/// simplex arithmetic stays well defined.
const INFEASIBLE_COST: f64 = 1e30;

/// Nelder–Mead over `(beta1, beta2)` with the coefficients solved by
/// [`solve_constraints`]. Seeds run concurrently.
pub fn optimize_driving<F>(
    objective: F,
    seeds: &[(f64, f64)],
    t_gate: f64,
    omega0: f64,
    mass: f64,
    opts: &OptimizeOptions,
) -> Result<OptimizeOutcome>
where
    F: Fn(&ThetaDriving) -> Result<f64> + Sync,
{
    if seeds.is_empty() {
        return Err(invalid("optimize_driving needs at least one seed"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let jitter: Vec<(f64, f64)> = seeds.iter().map(|_| (rng.gen_range(0.9..1.1), rng.gen_range(0.9..1.1))).collect();

    let runs: Vec<(Option<(ThetaDriving, f64)>, Vec<TraceRow>)> = seeds
        .par_iter()
        .zip(jitter)
        .enumerate()
        .map(|(k, (&(b1, b2), (j1, j2)))| {
            let trace = RefCell::new(Vec::new());
            let cost = |p: &[f64]| -> f64 {
                let c = solve_constraints(p[0], p[1], t_gate, omega0, mass)
                    .and_then(|d| objective(&d))
                    .ok()
                    .filter(|c| c.is_finite());
                let mut tr = trace.borrow_mut();
                let evaluation = tr.len();
                tr.push(TraceRow { seed: k, evaluation, beta1: p[0], beta2: p[1], cost: c });
                c.unwrap_or(INFEASIBLE_COST)
            };
            let simplex = vec![
                vec![b1, b2],
                vec![b1 + opts.step * j1, b2],
                vec![b1, b2 + opts.step * j2],
            ];
            let best = nelder_mead(cost, simplex, opts.max_iters, opts.sd_tol).ok().and_then(|(p, c)| {
                if c >= INFEASIBLE_COST {
                    return None;
                }
                solve_constraints(p[0], p[1], t_gate, omega0, mass).ok().map(|d| (d, c))
            });
            (best, trace.into_inner())
        })
        .collect();

    let mut trace = Vec::new();
    let mut best: Option<(ThetaDriving, f64)> = None;
    for (b, t) in runs {
        trace.extend(t);
        if let Some((d, c)) = b {
            if best.as_ref().map_or(true, |(_, bc)| c < *bc) {
                best = Some((d, c));
            }
        }
    }
    let (best, cost) = best.ok_or(Error::Infeasible { reason: "every seed was infeasible".into(), min_omega_sq: None })?;
    Ok(OptimizeOutcome { best, cost, trace })
}

/// Largest relative change of `<I2>` while a displaced reference ground
/// state is carried through the drive in `checkpoints` legs.
pub fn invariant_drift(drv: &ThetaDriving, grid: &Grid, offset: f64, steps: usize, checkpoints: usize) -> Result<f64> {
    let th0 = drv.theta(0.0)?;
    let l2 = HBAR / (drv.mass * drv.omega0()) * th0 * th0;
    let mut psi = ComplexField::from_fn_1d(*grid, |x| Complex64::new((-(x - offset).powi(2) / (2.0 * l2)).exp(), 0.0))?
        .normalized()?;
    let v = FnPotential(|x: f64, t: f64| 0.5 * drv.mass * drv.omega_squared(t).unwrap_or(f64::NAN) * x * x);
    let mut prop = Propagator::new(grid, drv.mass);
    let i0 = invariant_expectation(&psi, drv, 0.0)?;
    let legs = checkpoints.max(1);
    let mut worst = 0.0f64;
    for k in 0..legs {
        let plan = StepPlan::new(drv.t_gate * k as f64 / legs as f64, drv.t_gate / legs as f64, (steps / legs).max(1))?;
        prop.evolve(&mut psi, &v, &plan)?;
        let i = invariant_expectation(&psi, drv, plan.t_end().min(drv.t_gate))?;
        worst = worst.max((i / i0 - 1.0).abs());
    }
    Ok(worst)
}

/// `<I2>` for a 1D field in a pure harmonic drive:
/// `(theta p - m theta' x)^2 / 2m + k0 (x/theta)^2 / 2`.
pub fn invariant_expectation(field: &ComplexField, drv: &ThetaDriving, t: f64) -> Result<f64> {
    if field.grid().dim() != 1 {
        return Err(invalid("invariant needs a 1D field"));
    }
    let th = drv.theta(t)?;
    let (th_d, _) = drv.theta_derivatives(t)?;
    let grid = *field.grid();
    let dpsi = Propagator::new(&grid, drv.mass).derivative(field, 0)?;
    let xs = grid.coords();
    let mut kin = 0.0;
    let mut pot = 0.0;
    for ((psi, dp), x) in field.values().iter().zip(dpsi.values()).zip(&xs) {
        let p_psi = Complex64::new(0.0, -HBAR) * dp;
        let v = p_psi * th - psi * (drv.mass * th_d * x);
        kin += v.norm_sqr();
        pot += psi.norm_sqr() * (x / th).powi(2);
    }
    let cell = grid.cell();
    Ok((kin * cell / (2.0 * drv.mass) + 0.5 * drv.k0 * pot * cell) / field.norm_sq())
}
