//! Thin adapters over argmin for the few 1D and simplex searches used here,
//! plus an adaptive Dormand–Prince integrator for small complex ODE systems.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::brent::{BrentOpt, BrentRoot};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64;

use crate::error::{Error, Result};

struct Scalar<F>(F);

impl<F: Fn(f64) -> f64> CostFunction for Scalar<F> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(*p))
    }
}

struct Multi<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Multi<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(p))
    }
}

fn solver_error(what: &'static str, e: argmin::core::Error) -> Error {
    log::debug!("{what} failed: {e}");
    Error::NotConverged { what, iterations: 0, residual: f64::NAN }
}

/// Root of `f` in `[a, b]`; `f(a)` and `f(b)` must differ in sign.
pub fn brent_root(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NotConverged { what: "root bracket", iterations: 0, residual: fa.abs().min(fb.abs()) });
    }
    let res = Executor::new(Scalar(f), BrentRoot::new(a, b, tol))
        .configure(|s| s.param(0.5 * (a + b)).max_iters(200))
        .run()
        .map_err(|e| solver_error("Brent root", e))?;
    res.state().get_best_param().copied().ok_or(Error::NotConverged {
        what: "Brent root",
        iterations: 200,
        residual: f64::NAN,
    })
}

/// Minimizer of `f` on `[a, b]` to absolute tolerance roughly `tol`.
pub fn brent_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let res = Executor::new(Scalar(f), BrentOpt::new(a, b).set_tolerance(1e-8, tol))
        .configure(|s| s.max_iters(100))
        .run()
        .map_err(|e| solver_error("Brent minimization", e))?;
    let state = res.state();
    let x = state.get_best_param().copied().ok_or(Error::NotConverged {
        what: "Brent minimization",
        iterations: 100,
        residual: f64::NAN,
    })?;
    Ok((x, state.get_best_cost()))
}

/// Nelder–Mead from an explicit starting simplex (`dim + 1` vertices).
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    simplex: Vec<Vec<f64>>,
    max_iters: u64,
    sd_tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(sd_tol)
        .map_err(|e| solver_error("Nelder-Mead setup", e))?;
    let res = Executor::new(Multi(f), solver)
        .configure(|s| s.max_iters(max_iters))
        .run()
        .map_err(|e| solver_error("Nelder-Mead", e))?;
    let state = res.state();
    let x = state.get_best_param().cloned().ok_or(Error::NotConverged {
        what: "Nelder-Mead",
        iterations: max_iters as usize,
        residual: f64::NAN,
    })?;
    Ok((x, state.get_best_cost()))
}

/// Tolerances for [`dopri45`].
#[derive(Debug, Clone, Copy)]
pub struct OdeTolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step allowed before giving up, relative to the interval.
    pub min_step: f64,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        OdeTolerances { rtol: 1e-12, atol: 1e-14, min_step: 1e-14 }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` with adaptive steps.
pub fn dopri45<const N: usize>(
    f: impl Fn(f64, &[Complex64; N]) -> [Complex64; N],
    t0: f64,
    t1: f64,
    y0: [Complex64; N],
    tol: OdeTolerances,
) -> Result<[Complex64; N]> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let min_step = tol.min_step * span.abs();
    let mut h = span.abs() * 1e-3;
    let mut t = t0;
    let mut y = y0;
    let mut k = [[Complex64::default(); N]; 7];
    k[0] = f(t, &y);
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        h = h.min((t1 - t).abs());
        for s in 1..7 {
            let mut ys = y;
            for (s2, a) in A[s].iter().enumerate().take(s) {
                if *a != 0.0 {
                    for i in 0..N {
                        ys[i] += k[s2][i] * (a * h * dir);
                    }
                }
            }
            k[s] = f(t + C[s] * h * dir, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut d5 = Complex64::default();
            let mut d4 = Complex64::default();
            for s in 0..7 {
                d5 += k[s][i] * B5[s];
                d4 += k[s][i] * B4[s];
            }
            y5[i] += d5 * (h * dir);
            let scale = tol.atol + tol.rtol * y[i].norm().max(y5[i].norm());
            err = err.max(((d5 - d4) * h).norm() / scale);
        }
        if err <= 1.0 {
            t += h * dir;
            y = y5;
            k[0] = k[6];
            steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < min_step && (t1 - t).abs() > min_step {
            return Err(Error::NotConverged { what: "ODE step size", iterations: steps, residual: err });
        }
    }
    Ok(y)
}
