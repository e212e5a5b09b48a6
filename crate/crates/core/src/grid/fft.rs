use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::Grid;

const TILE: usize = 32;

/// Forward and inverse transforms for one grid, with reusable buffers.
///
/// In 2D the forward transform leaves the spectrum transposed
/// (`k1` slow, `k2` fast). Every consumer here multiplies by something
/// symmetric in `(k1, k2)`, and the inverse undoes the transpose, so the
/// extra copy back is never needed.
pub struct FftEngine {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    spare: Vec<Complex64>,
}

impl FftEngine {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        let spare = if grid.dim() == 2 { vec![Complex64::default(); grid.len()] } else { Vec::new() };
        FftEngine {
            n,
            dim: grid.dim(),
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            spare,
        }
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&mut self, data: &mut Vec<Complex64>) {
        let fft = Arc::clone(&self.forward);
        self.rows(&*fft, data);
        if self.dim == 2 {
            self.transpose(data);
            self.rows(&*fft, data);
        }
    }

    /// Unnormalized inverse transform; `forward` then `inverse` scales by `n^dim`.
    pub fn inverse(&mut self, data: &mut Vec<Complex64>) {
        let fft = Arc::clone(&self.inverse);
        self.rows(&*fft, data);
        if self.dim == 2 {
            self.transpose(data);
            self.rows(&*fft, data);
        }
    }

    fn rows(&mut self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.n;
        let threads = rayon::current_num_threads();
        if threads > 1 && data.len() > n {
            let rows = data.len() / n;
            let per = rows.div_ceil(threads).max(1);
            data.par_chunks_mut(per * n).for_each(|chunk| fft.process(chunk));
        } else {
            fft.process_with_scratch(data, &mut self.scratch);
        }
    }

    fn transpose(&mut self, data: &mut Vec<Complex64>) {
        let n = self.n;
        let out = &mut self.spare;
        for jb in (0..n).step_by(TILE) {
            for ib in (0..n).step_by(TILE) {
                for j in jb..(jb + TILE).min(n) {
                    for i in ib..(ib + TILE).min(n) {
                        out[i * n + j] = data[j * n + i];
                    }
                }
            }
        }
        std::mem::swap(data, out);
    }
}
