//! Uniform periodic grids, complex fields on them, and the split-step
//! Fourier propagator.

mod diagnostics;
mod fft;
mod field;
mod propagate;
mod relax;

pub use diagnostics::{field_diagnostics, kinetic_energy, FieldDiagnostics, EDGE_BAND};
pub use fft::FftEngine;
pub use field::{overlap, ComplexField};
pub use propagate::{
    split_step_evolve, FnPotential, FnPotential2, FreeSpace, Potential, Propagator, SampledPotential,
    StepPlan, DEFAULT_PHASE_PER_STEP,
};
pub use relax::{imaginary_time_ground_state, relax, RelaxOptions};

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// A square, periodic, cell-centred-free grid: points sit at
/// `x_i = -extent/2 + i*h` for `i = 0..n`, so `x -> -x` maps index `i` to
/// `(n - i) % n` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    extent: f64,
    n: usize,
}

impl Grid {
    pub fn new(extent: f64, n: usize, dim: usize) -> Result<Self> {
        if !(extent.is_finite() && extent > 0.0) {
            return Err(invalid(format!("grid extent must be positive, got {extent}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(invalid(format!("grid needs an even point count >= 8, got {n}")));
        }
        if dim != 1 && dim != 2 {
            return Err(invalid(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        Ok(Grid { dim, extent, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    /// Total number of points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `h^dim` used in every quadrature.
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn x(&self, i: usize) -> f64 {
        -0.5 * self.extent + i as f64 * self.spacing()
    }

    /// Coordinates along one axis.
    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Wavenumbers along one axis in FFT order: `0, dk, ..., -pi/h, ..., -dk`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * PI / self.extent;
        let n = self.n as isize;
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j - n) as f64 * dk })
            .collect()
    }

    pub fn k_max(&self) -> f64 {
        PI / self.spacing()
    }

    /// The same grid in the other dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Grid::new(self.extent, self.n, dim)
    }

    /// Whether two grids can be combined pointwise.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && (self.extent - other.extent).abs() <= 1e-12 * self.extent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_spacing() {
        let g = Grid::new(4.8e-6, 576, 2).unwrap();
        assert!((g.spacing() - 8.3333333e-9).abs() < 1e-15);
        assert_eq!(g.len(), 576 * 576);
    }

    #[test]
    fn wavenumbers_cover_nyquist() {
        let g = Grid::new(10.0, 16, 1).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        let kmax = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((kmax - g.k_max()).abs() < 1e-12);
        assert!(k.iter().any(|&v| (v + g.k_max()).abs() < 1e-12));
    }

    #[test]
    fn refining_halves_spacing() {
        let a = Grid::new(4.8e-6, 576, 2).unwrap();
        let b = Grid::new(4.8e-6, 1152, 2).unwrap();
        assert!((a.spacing() / b.spacing() - 2.0).abs() < 1e-12);
        assert!((b.k_max() / a.k_max() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(Grid::new(-1.0, 64, 1).is_err());
        assert!(Grid::new(1.0, 63, 1).is_err());
        assert!(Grid::new(1.0, 6, 1).is_err());
        assert!(Grid::new(1.0, 64, 3).is_err());
    }

    #[test]
    fn mirror_index_is_exact() {
        let g = Grid::new(3.0, 24, 1).unwrap();
        for i in 1..24 {
            assert!((g.x(i) + g.x(24 - i)).abs() < 1e-12);
        }
    }
}
