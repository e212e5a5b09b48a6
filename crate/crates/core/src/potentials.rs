//! External potentials, the regularized contact interaction and the time
//! schedules that drive them.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{gamma_schedule_ideal, gamma_tilde, Branch, SqueezedParams};
use crate::error::{invalid, Result};
use crate::grid::{Grid, Potential};
use crate::sta::ThetaDriving;

/// Kernel values below this fraction of the peak are dropped.
const KERNEL_CUTOFF: f64 = 1e-17;

/// `-V0 exp(-2 (x - x0)^2 / sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTrap {
    pub depth: f64,
    pub waist: f64,
    #[serde(default)]
    pub center: f64,
}

impl GaussianTrap {
    pub fn new(depth: f64, waist: f64, center: f64) -> Result<Self> {
        if !(depth > 0.0 && waist > 0.0 && center.is_finite()) {
            return Err(invalid("Gaussian trap needs positive depth and waist"));
        }
        Ok(GaussianTrap { depth, waist, center })
    }

    pub fn at(self, center: f64) -> Self {
        GaussianTrap { center, ..self }
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.waist;
        -self.depth * (-2.0 * u * u).exp()
    }

    /// Frequency of the harmonic approximation at the bottom.
    pub fn omega(&self, mass: f64) -> Result<f64> {
        harmonic_freq_from_gaussian(self.depth, self.waist, mass)
    }
}

/// `omega0 = sqrt(4 V0 / (m sigma^2))`.
pub fn harmonic_freq_from_gaussian(depth: f64, waist: f64, mass: f64) -> Result<f64> {
    if !(depth > 0.0 && waist > 0.0 && mass > 0.0) {
        return Err(invalid("depth, waist and mass must be positive"));
    }
    Ok((4.0 * depth / (mass * waist * waist)).sqrt())
}

pub fn gaussian_potential(trap: GaussianTrap) -> impl Fn(f64) -> f64 + Copy + Sync {
    move |x| trap.value(x)
}

/// Single-particle potential term, the same for both atoms.
#[derive(Debug, Clone, PartialEq)]
pub enum TrapTerm {
    Free,
    /// Sum of Gaussian wells (one central trap, or a pair of tweezers).
    Gaussians(Vec<GaussianTrap>),
    Harmonic { omega: f64, mass: f64 },
    /// `(m/2) omega(t)^2 x^2` from a scale-invariant drive.
    Driven(ThetaDriving),
}

impl TrapTerm {
    pub fn gaussian(trap: GaussianTrap) -> Self {
        TrapTerm::Gaussians(vec![trap])
    }

    /// Two equal wells at `±d/2`.
    pub fn tweezer_pair(trap: GaussianTrap, d: f64) -> Self {
        TrapTerm::Gaussians(vec![trap.at(-d / 2.0), trap.at(d / 2.0)])
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        match self {
            TrapTerm::Free => 0.0,
            TrapTerm::Gaussians(traps) => traps.iter().map(|g| g.value(x)).sum(),
            TrapTerm::Harmonic { omega, mass } => 0.5 * mass * omega * omega * x * x,
            // A validated drive only fails outside [0, t_gate]; NaN then
            // surfaces as a divergence in the propagator.
            TrapTerm::Driven(d) => 0.5 * d.mass * d.omega_squared(t).unwrap_or(f64::NAN) * x * x,
        }
    }

    /// Harmonic frequency at the origin, for the stationary terms.
    pub fn omega0(&self, mass: f64) -> Option<f64> {
        match self {
            TrapTerm::Gaussians(traps) if traps.len() == 1 && traps[0].center == 0.0 => traps[0].omega(mass).ok(),
            TrapTerm::Harmonic { omega, .. } => Some(*omega),
            TrapTerm::Driven(d) => Some(d.omega0()),
            _ => None,
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, TrapTerm::Driven(_))
    }
}

/// Interaction strength `gamma(t)` in the relative coordinate (J·m).
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSchedule {
    Zero,
    Constant(f64),
    /// `∓ sqrt(2) omega0 hbar d sin(omega0 t)`.
    Ideal { params: SqueezedParams, branch: Branch },
    /// The same shape in the rescaled time of a drive, divided by `theta`.
    Driven { params: SqueezedParams, drive: ThetaDriving, branch: Branch },
}

impl GammaSchedule {
    /// Constant schedule with the time average of the ideal one.
    pub fn constant_average(params: &SqueezedParams, branch: Branch) -> Self {
        let peak = gamma_schedule_ideal(PI / (2.0 * params.omega0), params, branch);
        GammaSchedule::Constant(2.0 / PI * peak)
    }

    pub fn gamma(&self, t: f64) -> f64 {
        match self {
            GammaSchedule::Zero => 0.0,
            GammaSchedule::Constant(g) => *g,
            GammaSchedule::Ideal { params, branch } => gamma_schedule_ideal(t, params, *branch),
            GammaSchedule::Driven { params, drive, branch } => {
                gamma_tilde(t, params, drive, *branch).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn branch(&self) -> Option<Branch> {
        match self {
            GammaSchedule::Ideal { branch, .. } | GammaSchedule::Driven { branch, .. } => Some(*branch),
            GammaSchedule::Constant(g) if *g > 0.0 => Some(Branch::Minus),
            GammaSchedule::Constant(g) if *g < 0.0 => Some(Branch::Plus),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, GammaSchedule::Zero) || matches!(self, GammaSchedule::Constant(g) if *g == 0.0)
    }
}

/// `F(t) g_eps(x1 - x2)` with `F = sqrt(2) s gamma(t)` and `g_eps` a unit-area
/// Gaussian of standard deviation `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactInteraction {
    pub schedule: GammaSchedule,
    pub scale: f64,
    pub epsilon: f64,
}

impl ContactInteraction {
    pub fn new(schedule: GammaSchedule, scale: f64, epsilon: f64) -> Result<Self> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(invalid("interaction scale must be finite and >= 0"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("regularization width must be positive"));
        }
        Ok(ContactInteraction { schedule, scale, epsilon })
    }

    /// Rejects kernels narrower than the grid spacing.
    pub fn check_resolution(&self, grid: &Grid) -> Result<()> {
        if self.epsilon < grid.spacing() * (1.0 - 1e-9) {
            return Err(invalid(format!(
                "regularization width {:.3e} m is below the grid spacing {:.3e} m",
                self.epsilon,
                grid.spacing()
            )));
        }
        Ok(())
    }

    pub fn strength(&self, t: f64) -> f64 {
        SQRT_2 * self.scale * self.schedule.gamma(t)
    }

    pub fn kernel(&self, u: f64) -> f64 {
        let z = u / self.epsilon;
        (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * self.epsilon)
    }

    /// `g_eps(k h)` for `k = 0..`, cut where it drops below `KERNEL_CUTOFF` of the peak.
    fn band(&self, h: f64) -> Vec<f64> {
        let reach = self.epsilon * (-2.0 * KERNEL_CUTOFF.ln()).sqrt();
        let k_max = (reach / h).ceil() as usize;
        (0..=k_max).map(|k| self.kernel(k as f64 * h)).collect()
    }
}

/// The interaction term on a 2D grid as a function of `(x1, x2)`.
pub fn contact_kernel_2d<'a>(
    grid: &Grid,
    interaction: &'a ContactInteraction,
    t: f64,
) -> Result<impl Fn(f64, f64) -> f64 + 'a> {
    interaction.check_resolution(grid)?;
    let f = interaction.strength(t);
    Ok(move |x1: f64, x2: f64| f * interaction.kernel(x1 - x2))
}

/// `V(x1, t) + V(x2, t) + F(t) g_eps(x1 - x2)` on a 2D grid.
///
/// The kick factors into per-axis exponentials times a band around the
/// diagonal, so no full 2D exponential is computed per step.
#[derive(Debug, Clone)]
pub struct TwoBodyPotential {
    trap: TrapTerm,
    interaction: Option<ContactInteraction>,
    band: Vec<f64>,
    static_trap: Option<Vec<f64>>,
}

impl TwoBodyPotential {
    pub fn new(grid: &Grid, trap: TrapTerm, interaction: Option<ContactInteraction>) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(invalid("two-body potential needs a 2D grid"));
        }
        let interaction = interaction.filter(|c| !c.schedule.is_zero() && c.scale > 0.0);
        let band = match &interaction {
            Some(c) => {
                c.check_resolution(grid)?;
                c.band(grid.spacing())
            }
            None => Vec::new(),
        };
        let static_trap = (!trap.is_time_dependent()).then(|| grid.coords().iter().map(|&x| trap.value(x, 0.0)).collect());
        Ok(TwoBodyPotential { trap, interaction, band, static_trap })
    }

    pub fn trap(&self) -> &TrapTerm {
        &self.trap
    }

    pub fn interaction(&self) -> Option<&ContactInteraction> {
        self.interaction.as_ref()
    }

    fn single(&self, grid: &Grid, t: f64) -> Vec<f64> {
        match &self.static_trap {
            Some(v) => v.clone(),
            None => grid.coords().iter().map(|&x| self.trap.value(x, t)).collect(),
        }
    }

    fn strength(&self, t: f64) -> f64 {
        self.interaction.as_ref().map_or(0.0, |c| c.strength(t))
    }
}

impl Potential for TwoBodyPotential {
    fn sample(&self, grid: &Grid, t: f64, out: &mut [f64]) {
        let n = grid.n();
        let v1 = self.single(grid, t);
        let f = self.strength(t);
        for (j, row) in out.chunks_mut(n).enumerate() {
            for (i, o) in row.iter_mut().enumerate() {
                let g = self.band.get(i.abs_diff(j)).copied().unwrap_or(0.0);
                *o = v1[i] + v1[j] + f * g;
            }
        }
    }

    fn kick(&self, grid: &Grid, t: f64, factor: Complex64, values: &mut [Complex64]) {
        let n = grid.n();
        let e1: Vec<Complex64> = self.single(grid, t).iter().map(|&v| (factor * v).exp()).collect();
        let f = self.strength(t);
        let eg: Vec<Complex64> = if f == 0.0 {
            Vec::new()
        } else {
            self.band.iter().map(|&g| (factor * f * g).exp()).collect()
        };
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            let ej = e1[j];
            for (v, ei) in row.iter_mut().zip(&e1) {
                *v *= ei * ej;
            }
            if !eg.is_empty() {
                let lo = j.saturating_sub(eg.len() - 1);
                let hi = (j + eg.len()).min(n);
                for (i, v) in row.iter_mut().enumerate().take(hi).skip(lo) {
                    *v *= eg[i.abs_diff(j)];
                }
            }
        });
    }

    fn span(&self, grid: &Grid, t: f64) -> f64 {
        let v1 = self.single(grid, t);
        let (lo, hi) = v1.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let peak = self.band.first().copied().unwrap_or(0.0);
        2.0 * (hi - lo) + (self.strength(t) * peak).abs()
    }
}

/// The relative-coordinate problem on a 1D grid:
/// `V(x, t) + F(t) g_eps(sqrt(2) x)`, i.e. `s gamma(t)` times a kernel of width `eps/sqrt(2)`.
#[derive(Debug, Clone)]
pub struct RelativePotential {
    pub trap: TrapTerm,
    pub interaction: Option<ContactInteraction>,
}

impl RelativePotential {
    pub fn new(grid: &Grid, trap: TrapTerm, interaction: Option<ContactInteraction>) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(invalid("relative-coordinate potential needs a 1D grid"));
        }
        if let Some(c) = &interaction {
            // The 2D kernel must be resolved on the matching 2D grid, whose
            // spacing is sqrt(2) times coarser along x1 - x2 than x is here.
            if c.epsilon < grid.spacing() * (1.0 - 1e-9) {
                return Err(invalid("regularization width below the grid spacing"));
            }
        }
        Ok(RelativePotential { trap, interaction })
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let v = self.trap.value(x, t);
        match &self.interaction {
            Some(c) => v + c.strength(t) * c.kernel(SQRT_2 * x),
            None => v,
        }
    }
}

impl Potential for RelativePotential {
    fn sample(&self, grid: &Grid, t: f64, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(grid.coords()) {
            *o = self.value(x, t);
        }
    }
}

/// Smooth trap-separation trajectory
/// `d(t) = dmin + (d0 - dmin)(1 + cos(2 pi t / T))/2`.
pub fn cosine_separation(t: f64, d0: f64, dmin: f64, period: f64) -> Result<f64> {
    if !(dmin > 0.0 && dmin <= d0 && period > 0.0) {
        return Err(invalid("cosine trajectory needs 0 < dmin <= d0 and T > 0"));
    }
    if !(0.0..=period).contains(&t) {
        return Err(invalid(format!("t = {t:e} outside [0, T]")));
    }
    Ok(dmin + (d0 - dmin) * 0.5 * (1.0 + (2.0 * PI * t / period).cos()))
}

/// Rate of change of [`cosine_separation`].
pub fn cosine_separation_rate(t: f64, d0: f64, dmin: f64, period: f64) -> Result<f64> {
    cosine_separation(t, d0, dmin, period)?;
    Ok(-(d0 - dmin) * PI / period * (2.0 * PI * t / period).sin())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub trap: TrapTerm,
    pub interaction: Option<ContactInteraction>,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// The grid potential for this segment.
    pub fn potential(&self, grid: &Grid) -> Result<TwoBodyPotential> {
        TwoBodyPotential::new(grid, self.trap.clone(), self.interaction.clone())
    }

    /// Same segment with the interaction removed (the parallel-spin sectors).
    pub fn without_interaction(&self) -> Segment {
        Segment { interaction: None, ..self.clone() }
    }
}

/// Contiguous segments covering `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTimeline {
    segments: Vec<Segment>,
}

impl PotentialTimeline {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let first = segments.first().ok_or_else(|| invalid("timeline has no segments"))?;
        if first.start != 0.0 {
            return Err(invalid("timeline must start at t = 0"));
        }
        for s in &segments {
            if !(s.end > s.start) {
                return Err(invalid("timeline segment with empty window"));
            }
        }
        for w in segments.windows(2) {
            if w[0].end != w[1].start {
                return Err(invalid("timeline segments must be contiguous"));
            }
        }
        Ok(PotentialTimeline { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    pub fn segment_at(&self, t: f64) -> Option<&Segment> {
        if !(0.0..=self.t_end()).contains(&t) {
            return None;
        }
        self.segments.iter().find(|s| t < s.end).or(self.segments.last())
    }

    /// Two-body potential at any time in `[0, t_end]`.
    pub fn evaluate(&self, x1: f64, x2: f64, t: f64) -> Option<f64> {
        let s = self.segment_at(t)?;
        let vint = s.interaction.as_ref().map_or(0.0, |c| c.strength(t) * c.kernel(x1 - x2));
        Some(s.trap.value(x1, t) + s.trap.value(x2, t) + vint)
    }
}

/// Single segment `[0, t_gate]`: the central trap plus the interaction.
/// Stationary traps require `t_gate = pi / omega0`, driven ones the drive's own gate time.
pub fn fast_gate_timeline(
    central: TrapTerm,
    interaction: Option<ContactInteraction>,
    t_gate: f64,
    mass: f64,
) -> Result<PotentialTimeline> {
    let omega0 = central
        .omega0(mass)
        .ok_or_else(|| invalid("central trap must be a single centred Gaussian, harmonic or driven"))?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
    match &central {
        TrapTerm::Driven(d) => {
            if !close(t_gate, d.t_gate) {
                return Err(invalid("gate time differs from the drive's gate time"));
            }
        }
        _ => {
            if !close(t_gate, PI / omega0) {
                return Err(invalid(format!(
                    "t_gate = {t_gate:e} s is not half a trap period ({:e} s)",
                    PI / omega0
                )));
            }
        }
    }
    if let Some(c) = &interaction {
        match (&c.schedule, &central) {
            (GammaSchedule::Driven { drive, .. }, TrapTerm::Driven(d)) if drive == d => {}
            (GammaSchedule::Driven { .. }, _) => {
                return Err(invalid("driven interaction schedule needs the same drive as the trap"));
            }
            (GammaSchedule::Ideal { params, .. }, _) if !close(params.omega0, omega0) => {
                return Err(invalid("interaction schedule frequency differs from the trap frequency"));
            }
            _ => {}
        }
    }
    PotentialTimeline::new(vec![Segment { start: 0.0, end: t_gate, trap: central, interaction }])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ComplexField;
    use crate::units::{to_si, Unit, HBAR, MASS_LI6};
    use quadrature::double_exponential::integrate;

    fn central() -> GaussianTrap {
        GaussianTrap::new(to_si(525.0, Unit::Microkelvin), 11.857e-6, 0.0).unwrap()
    }

    fn params(omega: f64) -> SqueezedParams {
        SqueezedParams::new(MASS_LI6, omega, -0.5, 2.329e-6).unwrap()
    }

    #[test]
    fn central_trap_frequency() {
        let w = central().omega(MASS_LI6).unwrap();
        assert!((w / (2.0 * PI * 22_898.0) - 1.0).abs() < 5e-3);
        let deeper = GaussianTrap { depth: 4.0 * central().depth, ..central() };
        assert!((deeper.omega(MASS_LI6).unwrap() / w - 2.0).abs() < 1e-14);
        let tw = harmonic_freq_from_gaussian(to_si(20.38, Unit::Microkelvin), 700e-9, MASS_LI6).unwrap();
        assert!((tw / (2.0 * PI * 76.3e3) - 1.0).abs() < 5e-3);
        assert!(harmonic_freq_from_gaussian(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gaussian_shape() {
        let g = GaussianTrap::new(2.0, 3.0, 0.5).unwrap();
        let v = gaussian_potential(g);
        assert_eq!(v(0.5), -2.0);
        assert!((v(0.5 + 3.0 / SQRT_2) / -2.0 - (-1f64).exp()).abs() < 1e-15);
        assert!((v(0.5 - 3.0 / SQRT_2) / -2.0 - (-1f64).exp()).abs() < 1e-15);
        // Curvature at the bottom equals m omega^2.
        let t = central();
        let h = 1e-9;
        let curv = (t.value(h) - 2.0 * t.value(0.0) + t.value(-h)) / (h * h);
        let w = t.omega(MASS_LI6).unwrap();
        assert!((curv / (MASS_LI6 * w * w) - 1.0).abs() < 1e-5);
        assert!(GaussianTrap::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn kernel_normalized() {
        let c = ContactInteraction::new(GammaSchedule::Constant(1.0), 1.0, 16.7e-9).unwrap();
        // Split at the peak; the double-exponential rule clusters nodes at the ends.
        let half = integrate(|z| c.kernel(z * c.epsilon) * c.epsilon, 0.0, 40.0, 1e-12).integral;
        assert!((2.0 * half - 1.0).abs() < 1e-6);
        // Also on the lattice at eps = h.
        let h = c.epsilon;
        let s: f64 = (-200i32..=200).map(|k| c.kernel(k as f64 * h)).sum::<f64>() * h;
        assert!((s - 1.0).abs() < 1e-6);
        assert!((c.strength(0.0) - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn kernel_resolution_enforced() {
        let grid = Grid::new(4.8e-6, 576, 2).unwrap();
        let h = grid.spacing();
        let c = ContactInteraction::new(GammaSchedule::Constant(1.0), 1.0, 0.5 * h).unwrap();
        assert!(contact_kernel_2d(&grid, &c, 0.0).is_err());
        assert!(TwoBodyPotential::new(&grid, TrapTerm::Free, Some(c)).is_err());
        let c = ContactInteraction::new(GammaSchedule::Constant(1.0), 1.0, h).unwrap();
        let k = contact_kernel_2d(&grid, &c, 0.0).unwrap();
        assert!((k(0.3e-6, 0.3e-6) - SQRT_2 * c.kernel(0.0)).abs() < 1e-9 * k(0.0, 0.0));
    }

    #[test]
    fn schedules() {
        let w = central().omega(MASS_LI6).unwrap();
        let p = params(w);
        let ideal = GammaSchedule::Ideal { params: p, branch: Branch::Minus };
        assert!(ideal.gamma(PI / (2.0 * w)) > 0.0);
        assert_eq!(ideal.branch(), Some(Branch::Minus));
        let avg = GammaSchedule::constant_average(&p, Branch::Minus);
        let GammaSchedule::Constant(g) = avg else { panic!() };
        let peak = ideal.gamma(PI / (2.0 * w));
        let mean = integrate(|u| ideal.gamma(u / w) / peak, 0.0, PI, 1e-13).integral * peak / PI;
        assert!((g / mean - 1.0).abs() < 1e-10);
        assert_eq!(avg.branch(), Some(Branch::Minus));
        assert!(GammaSchedule::Zero.is_zero());
        assert!(GammaSchedule::Constant(0.0).is_zero());
    }

    #[test]
    fn two_body_kick_matches_sampled_potential() {
        let grid = Grid::new(4.8e-6, 64, 2).unwrap();
        let w = central().omega(MASS_LI6).unwrap();
        let c = ContactInteraction::new(GammaSchedule::Ideal { params: params(w), branch: Branch::Plus }, 0.7, 2.0 * grid.spacing())
            .unwrap();
        let pot = TwoBodyPotential::new(&grid, TrapTerm::gaussian(central()), Some(c.clone())).unwrap();
        let t = 0.3 * PI / w;
        let mut v = vec![0.0; grid.len()];
        pot.sample(&grid, t, &mut v);
        let direct = FnPotential2Check { c: &c, trap: central() };
        let (i, j) = (20, 23);
        let want = direct.value(grid.x(i), grid.x(j), t);
        assert!((v[j * 64 + i] - want).abs() < 1e-12 * want.abs());

        let field = ComplexField::from_fn_2d(grid, |a, b| Complex64::new((-(a * a + b * b) / 1e-12).exp(), 0.1)).unwrap();
        let factor = Complex64::new(0.0, -3e-9 / HBAR);
        let mut fast = field.values().to_vec();
        pot.kick(&grid, t, factor, &mut fast);
        let mut slow = field.values().to_vec();
        for (s, vi) in slow.iter_mut().zip(&v) {
            *s *= (factor * vi).exp();
        }
        let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let span = pot.span(&grid, t);
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(span >= hi - lo);
    }

    struct FnPotential2Check<'a> {
        c: &'a ContactInteraction,
        trap: GaussianTrap,
    }

    impl FnPotential2Check<'_> {
        fn value(&self, x1: f64, x2: f64, t: f64) -> f64 {
            self.trap.value(x1) + self.trap.value(x2) + self.c.strength(t) * self.c.kernel(x1 - x2)
        }
    }

    #[test]
    fn relative_potential_matches_two_body_on_diagonal_direction() {
        let grid = Grid::new(4.8e-6, 256, 1).unwrap();
        let c = ContactInteraction::new(GammaSchedule::Constant(2e-35), 1.0, 20e-9).unwrap();
        let rel = RelativePotential::new(&grid, TrapTerm::Harmonic { omega: 1e5, mass: MASS_LI6 }, Some(c.clone())).unwrap();
        // At x1 = -x/sqrt2, x2 = x/sqrt2 the interaction terms coincide.
        let x = 13e-9;
        let two = c.strength(0.0) * c.kernel(-SQRT_2 * x);
        let one = rel.value(x, 0.0) - 0.5 * MASS_LI6 * 1e10 * x * x;
        assert!((one - two).abs() < 1e-12 * two.abs());
        // Jacobian: the 1D strength integrates to s gamma.
        let e = c.epsilon;
        let area = 2.0 * integrate(|z| c.kernel(SQRT_2 * z * e) * e, 0.0, 40.0, 1e-14).integral * c.strength(0.0);
        assert!((area / 2e-35 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cosine_trajectory() {
        let (d0, dmin, tt) = (2.329e-6, 0.9e-6, 300e-6);
        assert_eq!(cosine_separation(0.0, d0, dmin, tt).unwrap(), d0);
        assert!((cosine_separation(tt, d0, dmin, tt).unwrap() - d0).abs() < 1e-20);
        assert!((cosine_separation(tt / 2.0, d0, dmin, tt).unwrap() - dmin).abs() < 1e-20);
        assert_eq!(cosine_separation_rate(0.0, d0, dmin, tt).unwrap(), 0.0);
        assert!(cosine_separation_rate(tt, d0, dmin, tt).unwrap().abs() < 1e-12 * (d0 - dmin) / tt);
        let h = 1e-9 * tt;
        let fd = (cosine_separation(0.3 * tt + h, d0, dmin, tt).unwrap() - cosine_separation(0.3 * tt - h, d0, dmin, tt).unwrap()) / (2.0 * h);
        assert!((fd / cosine_separation_rate(0.3 * tt, d0, dmin, tt).unwrap() - 1.0).abs() < 1e-5);
        assert!(cosine_separation(0.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn stationary_timeline() {
        let w = central().omega(MASS_LI6).unwrap();
        let tg = PI / w;
        assert!((tg / 21.84e-6 - 1.0).abs() < 1.2e-3);
        let c = ContactInteraction::new(GammaSchedule::Ideal { params: params(w), branch: Branch::Plus }, 1.0, 16.7e-9).unwrap();
        let tl = fast_gate_timeline(TrapTerm::gaussian(central()), Some(c), tg, MASS_LI6).unwrap();
        assert_eq!(tl.segments().len(), 1);
        assert_eq!(tl.t_end(), tg);
        assert!(tl.evaluate(0.0, 0.0, tg).is_some());
        assert!(tl.evaluate(0.0, 0.0, 1.01 * tg).is_none());
        assert!(fast_gate_timeline(TrapTerm::gaussian(central()), None, 1.01 * tg, MASS_LI6).is_err());
        let wrong = ContactInteraction::new(GammaSchedule::Ideal { params: params(1.1 * w), branch: Branch::Plus }, 1.0, 16.7e-9).unwrap();
        assert!(fast_gate_timeline(TrapTerm::gaussian(central()), Some(wrong), tg, MASS_LI6).is_err());

        // gamma = 0 leaves only the trap.
        let swap = fast_gate_timeline(TrapTerm::Harmonic { omega: w, mass: MASS_LI6 }, None, tg, MASS_LI6).unwrap();
        let s = &swap.segments()[0];
        assert!(s.interaction.is_none());
        assert_eq!(swap.evaluate(1e-7, -1e-7, 0.5 * tg).unwrap(), 0.5 * MASS_LI6 * w * w * 2e-14);
    }

    #[test]
    fn driven_timeline() {
        let tg = 21.84e-6;
        let d = ThetaDriving::new(1.684, -1.808, 0.199, 2.548, 6.227, tg, 1.0, MASS_LI6)
            .unwrap()
            .with_swap_condition()
            .unwrap();
        let p = params(d.omega0());
        let c = ContactInteraction::new(GammaSchedule::Driven { params: p, drive: d.clone(), branch: Branch::Plus }, 1.0, 16.7e-9).unwrap();
        let tl = fast_gate_timeline(TrapTerm::Driven(d.clone()), Some(c.clone()), tg, MASS_LI6).unwrap();
        let x = 1e-6;
        let v = tl.segments()[0].trap.value(x, 0.4 * tg);
        assert!((v - 0.5 * MASS_LI6 * d.omega_squared(0.4 * tg).unwrap() * x * x).abs() < 1e-12 * v.abs());
        assert!(fast_gate_timeline(TrapTerm::Driven(d), Some(c.clone()), 20e-6, MASS_LI6).is_err());
        let w = central().omega(MASS_LI6).unwrap();
        assert!(fast_gate_timeline(TrapTerm::Harmonic { omega: w, mass: MASS_LI6 }, Some(c), PI / w, MASS_LI6).is_err());
    }

    #[test]
    fn timeline_validation() {
        let seg = |a: f64, b: f64| Segment { start: a, end: b, trap: TrapTerm::Free, interaction: None };
        assert!(PotentialTimeline::new(vec![]).is_err());
        assert!(PotentialTimeline::new(vec![seg(0.1, 1.0)]).is_err());
        assert!(PotentialTimeline::new(vec![seg(0.0, 1.0), seg(1.5, 2.0)]).is_err());
        assert!(PotentialTimeline::new(vec![seg(0.0, 1.0), seg(0.5, 2.0)]).is_err());
        let tl = PotentialTimeline::new(vec![seg(0.0, 1.0), seg(1.0, 2.0)]).unwrap();
        assert_eq!(tl.segment_at(1.0).unwrap().start, 1.0);
        assert_eq!(tl.segment_at(2.0).unwrap().start, 1.0);
        assert_eq!(tl.segment_at(0.0).unwrap().start, 0.0);
    }
}
