use num_complex::Complex64;

use super::Grid;
use crate::error::{invalid, Error, Result};

/// Complex amplitudes on a grid, scaled so that `sum |psi|^2 h^dim` is the norm.
///
/// 2D fields are stored with the first coordinate varying fastest:
/// `values[j * n + i] = psi(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("field contains non-finite values"));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        ComplexField { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn_1d(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(invalid("from_fn_1d needs a 1D grid"));
        }
        let values = grid.coords().into_iter().map(f).collect();
        ComplexField::new(grid, values)
    }

    pub fn from_fn_2d(grid: Grid, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(invalid("from_fn_2d needs a 2D grid"));
        }
        let xs = grid.coords();
        let mut values = Vec::with_capacity(grid.len());
        for &x2 in &xs {
            for &x1 in &xs {
                values.push(f(x1, x2));
            }
        }
        ComplexField::new(grid, values)
    }

    /// `psi(x1, x2) = a(x1) b(x2)`.
    pub fn outer(a: &ComplexField, b: &ComplexField) -> Result<Self> {
        if a.grid.dim() != 1 || !a.grid.same_as(&b.grid) {
            return Err(Error::GridMismatch);
        }
        let grid = a.grid.with_dim(2)?;
        let mut values = Vec::with_capacity(grid.len());
        for bj in &b.values {
            values.extend(a.values.iter().map(|ai| ai * bj));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn values_vec_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sq();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("cannot normalize a zero or non-finite field"));
        }
        let s = 1.0 / n.sqrt();
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `a*self + b*other`, on the same grid.
    pub fn combine(&self, a: Complex64, other: &ComplexField, b: Complex64) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(ComplexField { grid: self.grid, values })
    }

    /// L2 distance `||self - other||`.
    pub fn distance(&self, other: &ComplexField) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(x, y)| (x - y).norm_sqr()).sum();
        Ok((s * self.grid.cell()).sqrt())
    }

    /// Exchanges the two particle coordinates of a 2D field.
    pub fn swapped(&self) -> Self {
        assert_eq!(self.grid.dim(), 2, "swap needs a 2D field");
        let n = self.grid.n();
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for j in 0..n {
            for i in 0..n {
                values[i * n + j] = self.values[j * n + i];
            }
        }
        ComplexField { grid: self.grid, values }
    }

    /// `psi(x) -> psi(-x)` on every axis.
    pub fn mirrored(&self) -> Self {
        let n = self.grid.n();
        let m = |i: usize| (n - i) % n;
        let values = match self.grid.dim() {
            1 => (0..n).map(|i| self.values[m(i)]).collect(),
            _ => {
                let mut out = Vec::with_capacity(self.values.len());
                for j in 0..n {
                    for i in 0..n {
                        out.push(self.values[m(j) * n + m(i)]);
                    }
                }
                out
            }
        };
        ComplexField { grid: self.grid, values }
    }

    /// Probability density of one particle with the other integrated out.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let n = self.grid.n();
        let h = self.grid.spacing();
        match (self.grid.dim(), axis) {
            (1, _) => self.values.iter().map(|v| v.norm_sqr()).collect(),
            (_, 0) => {
                let mut out = vec![0.0; n];
                for row in self.values.chunks(n) {
                    for (o, v) in out.iter_mut().zip(row) {
                        *o += v.norm_sqr() * h;
                    }
                }
                out
            }
            _ => self.values.chunks(n).map(|row| row.iter().map(|v| v.norm_sqr()).sum::<f64>() * h).collect(),
        }
    }
}

/// `<a|b> = sum conj(a) b h^dim`.
pub fn overlap(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let s: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x.conj() * y).sum();
    Ok(s * a.grid.cell())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian(grid: Grid, x0: f64, w: f64) -> ComplexField {
        ComplexField::from_fn_1d(grid, |x| Complex64::new((-(x - x0).powi(2) / (w * w)).exp(), 0.0))
            .unwrap()
            .normalized()
            .unwrap()
    }

    #[test]
    fn normalized_has_unit_norm() {
        let g = Grid::new(20.0, 256, 1).unwrap();
        let a = gaussian(g, 1.0, 1.3);
        assert!((a.norm_sq() - 1.0).abs() < 1e-12);
        assert!((overlap(&a, &a).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distant_gaussians_are_orthogonal() {
        let g = Grid::new(40.0, 512, 1).unwrap();
        let a = gaussian(g, -8.0, 1.0);
        let b = gaussian(g, 8.0, 1.0);
        assert!(overlap(&a, &b).unwrap().norm() < 1e-6);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = gaussian(Grid::new(20.0, 64, 1).unwrap(), 0.0, 1.0);
        let b = gaussian(Grid::new(20.0, 128, 1).unwrap(), 0.0, 1.0);
        assert!(matches!(overlap(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = Grid::new(1.0, 8, 1).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3].re = f64::NAN;
        assert!(ComplexField::new(g, v).is_err());
    }

    #[test]
    fn outer_product_layout() {
        let g = Grid::new(10.0, 16, 1).unwrap();
        let a = gaussian(g, -2.0, 1.0);
        let b = gaussian(g, 2.0, 0.7);
        let ab = ComplexField::outer(&a, &b).unwrap();
        let n = 16;
        for j in 0..n {
            for i in 0..n {
                let want = a.values()[i] * b.values()[j];
                assert!((ab.values()[j * n + i] - want).norm() < 1e-15);
            }
        }
        let m0 = ab.marginal(0);
        let peak = m0.iter().cloned().enumerate().fold((0, 0.0), |m, (i, v)| if v > m.1 { (i, v) } else { m });
        assert!((g.x(peak.0) + 2.0).abs() < 0.7);
        let ba = ComplexField::outer(&b, &a).unwrap();
        assert!(ab.swapped().distance(&ba).unwrap() < 1e-15);
    }

    #[test]
    fn mirror_twice_is_identity() {
        let g = Grid::new(10.0, 32, 2).unwrap();
        let f = ComplexField::from_fn_2d(g, |a, b| Complex64::new(a + 2.0 * b, a * b)).unwrap();
        assert_eq!(f.mirrored().mirrored(), f);
    }

    proptest! {
        #[test]
        fn hermitian_symmetry(x0 in -3.0f64..3.0, x1 in -3.0f64..3.0, k in -2.0f64..2.0) {
            let g = Grid::new(20.0, 128, 1).unwrap();
            let a = gaussian(g, x0, 1.0);
            let mut b = gaussian(g, x1, 0.8);
            let xs = g.coords();
            for (v, x) in b.values_mut().iter_mut().zip(xs) {
                *v *= Complex64::from_polar(1.0, k * x);
            }
            let ab = overlap(&a, &b).unwrap();
            let ba = overlap(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-14);
        }

        #[test]
        fn norm_scales_quadratically(c in 0.1f64..10.0) {
            let g = Grid::new(20.0, 64, 1).unwrap();
            let mut a = gaussian(g, 0.0, 1.0);
            a.scale(Complex64::new(c, 0.0));
            prop_assert!((a.norm_sq() - c * c).abs() < 1e-10 * c * c);
        }
    }
}
