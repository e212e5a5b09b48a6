use num_complex::Complex64;
use serde::Serialize;

use super::config::{Central, GateConfig, InitKind};
use crate::analytic::Branch;
use crate::error::{Error, Result};
use crate::grid::{
    field_diagnostics, imaginary_time_ground_state, overlap, ComplexField, FnPotential, Grid, Propagator,
};
use crate::potentials::TrapTerm;
use crate::sta::invariant_expectation;

/// Edge mass above which a run is flagged as touching the boundary.
pub const EDGE_MASS_LIMIT: f64 = 1e-3;

const RELAX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    /// Opposite spins, against the sqrt-SWAP target.
    pub f_opposite: f64,
    /// Parallel spins, against the swapped product.
    pub f_parallel: f64,
    pub f_min: f64,
    /// Target branch with the larger `f_opposite`.
    pub branch: Branch,
    /// Whether `branch` agrees with the interaction schedule's branch.
    pub branch_consistent: Option<bool>,
    /// `|<swap(init)|final>|^2` in the opposite-spin sector.
    pub swap_overlap: f64,
    pub scale: f64,
    pub norm_drift: f64,
    pub edge_mass: f64,
    /// Relative change of the invariant over a driven run.
    pub invariant_drift: Option<f64>,
    pub steps: usize,
    pub warnings: Vec<String>,
}

/// The two single-particle factors of the initial product state,
/// atom 1 at `-d/2` and atom 2 at `+d/2`, on the 1D version of the grid.
pub fn initial_factors(cfg: &GateConfig) -> Result<(ComplexField, ComplexField)> {
    cfg.validate()?;
    let grid = cfg.grid.with_dim(1)?;
    let half = cfg.d / 2.0;
    match cfg.init {
        InitKind::Analytic => {
            let w0 = cfg.w0()?;
            let packet = |c: f64| {
                ComplexField::from_fn_1d(grid, |x| Complex64::new((-(x - c) * (x - c) / (w0 * w0)).exp(), 0.0))?
                    .normalized()
            };
            Ok((packet(-half)?, packet(half)?))
        }
        InitKind::Relaxed => {
            let well = |c: f64| -> Result<ComplexField> {
                let trap = cfg.tweezer.at(c);
                let pot = FnPotential(move |x: f64, _t: f64| trap.value(x));
                let (mut psi, _) = imaginary_time_ground_state(&pot, &grid, cfg.mass, RELAX_TOL)?;
                fix_phase(&mut psi);
                Ok(psi)
            };
            Ok((well(-half)?, well(half)?))
        }
    }
}

/// Rotates a field so its largest sample is real and positive.
fn fix_phase(psi: &mut ComplexField) {
    if let Some(peak) = psi.values().iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())) {
        if peak.norm() > 0.0 {
            psi.scale(peak.conj() / peak.norm());
        }
    }
}

/// `phi(x1 + d/2) phi(x2 - d/2)` on the 2D grid, normalized.
pub fn prepare_initial_state(cfg: &GateConfig) -> Result<ComplexField> {
    let (a, b) = initial_factors(cfg)?;
    ComplexField::outer(&a, &b)?.normalized()
}

/// `1/2 (1 ± i) init + 1/2 (1 ∓ i) swap(init)`, normalized. Applying the
/// same map twice gives `swap(init)`.
pub fn sqrt_swap_target(init: &ComplexField, branch: Branch) -> Result<ComplexField> {
    let s = branch.sign();
    let a = Complex64::new(0.5, 0.5 * s);
    let b = Complex64::new(0.5, -0.5 * s);
    init.combine(a, &init.swapped(), b)?.normalized()
}

/// Fidelities of the two spin sectors. Both target branches are tried and
/// the better one is reported; `expected` is the branch of the schedule.
pub fn gate_fidelity(
    final_opposite: &ComplexField,
    final_parallel: &ComplexField,
    init: &ComplexField,
    expected: Option<Branch>,
) -> Result<FidelityReport> {
    if !final_opposite.grid().same_as(init.grid()) || !final_parallel.grid().same_as(init.grid()) {
        return Err(Error::GridMismatch);
    }
    let mut best: Option<(Branch, f64)> = None;
    for branch in [Branch::Plus, Branch::Minus] {
        let target = sqrt_swap_target(init, branch)?;
        let f = overlap(&target, final_opposite)?.norm_sqr().min(1.0);
        if best.is_none_or(|(_, bf)| f > bf) {
            best = Some((branch, f));
        }
    }
    let (branch, f_opposite) = best.expect("two branches tried");
    let swapped = init.swapped().normalized()?;
    let f_parallel = overlap(&swapped, final_parallel)?.norm_sqr().min(1.0);
    let swap_overlap = overlap(&swapped, final_opposite)?.norm_sqr().min(1.0);
    Ok(FidelityReport {
        f_opposite,
        f_parallel,
        f_min: f_opposite.min(f_parallel),
        branch,
        branch_consistent: expected.map(|b| b == branch),
        swap_overlap,
        scale: f64::NAN,
        norm_drift: (final_opposite.norm_sq() - 1.0).abs(),
        edge_mass: field_diagnostics(final_opposite).edge_mass,
        invariant_drift: None,
        steps: 0,
        warnings: Vec::new(),
    })
}

/// Result of evolving both spin sectors through the gate.
#[derive(Debug, Clone)]
pub struct GateRun {
    pub init: ComplexField,
    pub final_opposite: ComplexField,
    /// Product of the two independently evolved factors.
    pub final_parallel: ComplexField,
    pub report: FidelityReport,
}

/// Evolves the opposite-spin sector on the 2D grid with the interaction and
/// the parallel-spin sector (no interaction, so a product state stays a
/// product) as two 1D runs with the same step.
pub fn run_fast_gate(cfg: &GateConfig) -> Result<(ComplexField, FidelityReport)> {
    let run = run_gate(cfg)?;
    Ok((run.final_opposite, run.report))
}

pub fn run_gate(cfg: &GateConfig) -> Result<GateRun> {
    let timeline = cfg.timeline()?;
    let (a, b) = initial_factors(cfg)?;
    let init = ComplexField::outer(&a, &b)?.normalized()?;
    let grid = cfg.grid;
    let grid1 = grid.with_dim(1)?;

    let mut field = init.clone();
    let mut prop = Propagator::new(&grid, cfg.mass);
    let mut prop1 = Propagator::new(&grid1, cfg.mass);
    let (mut ua, mut ub) = (a.clone(), b.clone());
    let mut steps = 0;
    for seg in timeline.segments() {
        let pot = seg.potential(&grid)?;
        let plan = cfg.step_plan(&pot, &grid, seg.start, seg.duration())?;
        log::debug!("segment [{:e}, {:e}] s: {} steps of {:e} s", seg.start, seg.end, plan.n_steps, plan.dt);
        prop.evolve(&mut field, &pot, &plan)?;
        let trap = seg.trap.clone();
        let single = FnPotential(move |x: f64, t: f64| trap.value(x, t));
        prop1.evolve(&mut ua, &single, &plan)?;
        prop1.evolve(&mut ub, &single, &plan)?;
        steps += plan.n_steps;
    }
    let parallel = ComplexField::outer(&ua, &ub)?;
    let expected = cfg.interaction()?.and_then(|c| c.schedule.branch());
    let mut report = gate_fidelity(&field, &parallel, &init, expected)?;
    report.scale = cfg.scale;
    report.steps = steps;
    if let Central::Driven(d) = &cfg.central {
        let i0 = invariant_expectation(&a, d, 0.0)?;
        let i1 = invariant_expectation(&ua, d, d.t_gate)?;
        report.invariant_drift = Some(((i1 - i0) / i0).abs());
    }
    if report.edge_mass > EDGE_MASS_LIMIT {
        report.warnings.push(format!("edge mass {:.2e} exceeds {EDGE_MASS_LIMIT:e}; enlarge the grid", report.edge_mass));
    }
    if report.norm_drift > 1e-8 {
        report.warnings.push(format!("norm drift {:.2e}", report.norm_drift));
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(GateRun { init, final_opposite: field, final_parallel: parallel, report })
}

/// [`run_fast_gate`] for a driven central trap.
pub fn run_sta_gate(cfg: &GateConfig) -> Result<FidelityReport> {
    if !matches!(cfg.central, Central::Driven(_)) {
        return Err(crate::error::invalid("run_sta_gate needs a driven central trap"));
    }
    Ok(run_fast_gate(cfg)?.1)
}

/// Evolves the opposite-spin sector and returns snapshots at the requested
/// times (which must lie in `[0, t_gate]`; they are visited in order).
pub fn evolve_with_snapshots(cfg: &GateConfig, times: &[f64]) -> Result<Vec<(f64, ComplexField)>> {
    let timeline = cfg.timeline()?;
    let grid: Grid = cfg.grid;
    let mut field = prepare_initial_state(cfg)?;
    let mut prop = Propagator::new(&grid, cfg.mass);
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let t_end = timeline.t_end();
    if sorted.iter().any(|&t| !(0.0..=t_end).contains(&t)) {
        return Err(crate::error::invalid("snapshot time outside the gate window"));
    }
    // Step size from the whole gate, so snapshots do not change the result.
    let seg0 = &timeline.segments()[0];
    let pot0 = seg0.potential(&grid)?;
    let dt = cfg.step_plan(&pot0, &grid, 0.0, t_end)?.dt;
    let mut out = Vec::with_capacity(sorted.len());
    let mut now = 0.0;
    for &t in &sorted {
        while now < t {
            let seg = timeline.segment_at(now).expect("inside timeline");
            let stop = t.min(seg.end);
            let pot = seg.potential(&grid)?;
            let window = stop - now;
            if window > 0.0 {
                let n = (window / dt).round().max(1.0) as usize;
                prop.evolve(&mut field, &pot, &crate::grid::StepPlan::new(now, window, n)?)?;
            }
            now = stop;
            if stop == seg.end && stop < t {
                continue;
            }
        }
        out.push((t, field.clone()));
    }
    Ok(out)
}

/// Single-particle trap of a config, for 1D runs.
pub fn single_particle_trap(cfg: &GateConfig) -> TrapTerm {
    cfg.trap_term()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{phi_pm, psi0_center, Side};
    use crate::gate::config::ScheduleKind;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn small() -> GateConfig {
        GateConfig { grid: Grid::new(4.8e-6, 96, 2).unwrap(), ..GateConfig::reference() }
    }

    #[test]
    fn initial_state_is_a_centred_product() {
        let cfg = GateConfig::reference();
        let init = prepare_initial_state(&cfg).unwrap();
        let (a, b) = initial_factors(&cfg).unwrap();
        let outer = ComplexField::outer(&a, &b).unwrap();
        assert!(init.distance(&outer).unwrap() < 1e-12);
        let diag = field_diagnostics(&init);
        assert!((diag.mean[0] + 1.1645e-6).abs() < 1e-12);
        assert!((diag.mean[1] - 1.1645e-6).abs() < 1e-12);
        assert!((init.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relaxed_init_close_to_analytic() {
        let cfg = GateConfig { init: InitKind::Relaxed, ..small() };
        let (a, _) = initial_factors(&cfg).unwrap();
        let (c, _) = initial_factors(&GateConfig { init: InitKind::Analytic, ..cfg }).unwrap();
        assert!(overlap(&a, &c).unwrap().norm_sqr() > 0.999);
    }

    #[test]
    fn target_algebra() {
        let init = prepare_initial_state(&small()).unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let t = sqrt_swap_target(&init, branch).unwrap();
            assert!((overlap(&t, &init).unwrap().norm_sqr() - 0.5).abs() < 1e-6);
            let twice = sqrt_swap_target(&t, branch).unwrap();
            assert!((overlap(&init.swapped(), &twice).unwrap().norm() - 1.0).abs() < 1e-12);
            // Swapping the particles and conjugating the coefficients leaves the target unchanged.
            let other = sqrt_swap_target(&init.swapped(), branch.flipped()).unwrap();
            assert!(t.distance(&other).unwrap() < 1e-12);
        }
    }

    #[test]
    fn fidelity_edge_cases() {
        let init = prepare_initial_state(&small()).unwrap();
        let target = sqrt_swap_target(&init, Branch::Minus).unwrap();
        let r = gate_fidelity(&target, &init.swapped(), &init, Some(Branch::Minus)).unwrap();
        assert!((r.f_opposite - 1.0).abs() < 1e-12);
        assert!((r.f_parallel - 1.0).abs() < 1e-12);
        assert_eq!(r.branch, Branch::Minus);
        assert_eq!(r.branch_consistent, Some(true));
        let r = gate_fidelity(&init, &init, &init, None).unwrap();
        assert!((r.f_opposite - 0.5).abs() < 1e-6);
        assert!(r.f_parallel < 1e-6);
        assert_eq!(r.f_min, r.f_parallel);
        let other = Grid::new(4.8e-6, 64, 2).unwrap();
        assert!(gate_fidelity(&ComplexField::zeros(other), &init, &init, None).is_err());
    }

    #[test]
    fn zero_interaction_swaps() {
        let cfg = GateConfig { schedule: ScheduleKind::Zero, central: Central::Harmonic { omega: small().omega0().unwrap() }, ..small() };
        let (final_field, report) = run_fast_gate(&cfg).unwrap();
        assert!(report.swap_overlap > 0.995, "{}", report.swap_overlap);
        assert!((report.f_opposite - 0.5).abs() < 0.01);
        assert!(report.f_parallel > 0.995);
        assert!(report.norm_drift < 1e-10);
        assert!((final_field.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn snapshots_follow_analytic_solution() {
        let mut cfg = GateConfig { schedule: ScheduleKind::Zero, ..small() };
        cfg.central = Central::Harmonic { omega: cfg.omega0().unwrap() };
        let tg = cfg.t_gate().unwrap();
        let p = cfg.squeezed_params().unwrap();
        let snaps = evolve_with_snapshots(&cfg, &[0.0, 0.5 * tg, tg]).unwrap();
        assert_eq!(snaps.len(), 3);
        for (t, f) in snaps {
            let want = ComplexField::from_fn_2d(cfg.grid, |x1, x2| {
                let x = (x2 - x1) * FRAC_1_SQRT_2;
                let xx = (x1 + x2) * FRAC_1_SQRT_2;
                phi_pm(x, t, &p, Side::Plus) * psi0_center(xx, t, &p)
            })
            .unwrap();
            assert!(f.distance(&want).unwrap() < 5e-3, "t {t}: {}", f.distance(&want).unwrap());
        }
    }
}
