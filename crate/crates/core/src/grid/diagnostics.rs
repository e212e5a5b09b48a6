use super::{ComplexField, Propagator};
use crate::error::Result;

/// Width of the edge band, as a fraction of the extent, for `edge_mass`.
pub const EDGE_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDiagnostics {
    pub norm: f64,
    /// `<x>` per axis.
    pub mean: Vec<f64>,
    /// r.m.s. deviation of `|psi|^2` per axis.
    pub width: Vec<f64>,
    /// Probability within `EDGE_BAND * extent` of any boundary.
    pub edge_mass: f64,
}

pub fn field_diagnostics(field: &ComplexField) -> FieldDiagnostics {
    let g = field.grid();
    let n = g.n();
    let xs = g.coords();
    let band = EDGE_BAND * g.extent();
    let near_edge: Vec<bool> = xs.iter().map(|&x| 0.5 * g.extent() - x.abs() < band).collect();
    let cell = g.cell();

    let mut norm = 0.0;
    let mut m1 = vec![0.0; g.dim()];
    let mut m2 = vec![0.0; g.dim()];
    let mut edge = 0.0;
    for (idx, v) in field.values().iter().enumerate() {
        let p = v.norm_sqr() * cell;
        let coords = [idx % n, idx / n];
        norm += p;
        let mut at_edge = false;
        for axis in 0..g.dim() {
            let x = xs[coords[axis]];
            m1[axis] += p * x;
            m2[axis] += p * x * x;
            at_edge |= near_edge[coords[axis]];
        }
        if at_edge {
            edge += p;
        }
    }
    let mean: Vec<f64> = m1.iter().map(|m| m / norm).collect();
    let width = m2.iter().zip(&mean).map(|(m, mu)| (m / norm - mu * mu).max(0.0).sqrt()).collect();
    FieldDiagnostics { norm, mean, width, edge_mass: edge / norm }
}

/// `<T>` for particles of `mass`, spectrally.
pub fn kinetic_energy(field: &ComplexField, mass: f64) -> Result<f64> {
    Propagator::new(field.grid(), mass).kinetic_energy(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    #[test]
    fn gaussian_moments() {
        // |psi|^2 ~ exp(-2 (x - x0)^2 / w^2) has r.m.s. width w / 2.
        let g = Grid::new(20.0, 512, 1).unwrap();
        let (x0, w) = (1.7, 1.2);
        let f = ComplexField::from_fn_1d(g, |x| Complex64::new((-(x - x0).powi(2) / (w * w)).exp(), 0.0))
            .unwrap()
            .normalized()
            .unwrap();
        let d = field_diagnostics(&f);
        assert!((d.norm - 1.0).abs() < 1e-12);
        assert!((d.mean[0] - x0).abs() < 1e-10);
        assert!((d.width[0] - w / 2.0).abs() < 1e-10);
        assert!(d.edge_mass < 1e-12);
    }

    #[test]
    fn symmetric_field_centred() {
        let g = Grid::new(10.0, 64, 2).unwrap();
        let f = ComplexField::from_fn_2d(g, |a, b| Complex64::new((-(a * a + b * b)).exp(), 0.0)).unwrap();
        let d = field_diagnostics(&f);
        assert!(d.mean[0].abs() < 1e-12 && d.mean[1].abs() < 1e-12);
    }

    #[test]
    fn edge_mass_sees_the_boundary() {
        let g = Grid::new(10.0, 100, 1).unwrap();
        let f = ComplexField::from_fn_1d(g, |x| Complex64::new(if x < -4.6 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        assert!((field_diagnostics(&f).edge_mass - 1.0).abs() < 1e-12);
    }
}
