//! Gate runners and metrics.

mod config;
mod fast;

pub use config::{Central, GateConfig, InitKind, ScheduleKind};
pub use fast::{
    evolve_with_snapshots, gate_fidelity, initial_factors, prepare_initial_state, run_fast_gate, run_gate,
    run_sta_gate, single_particle_trap, sqrt_swap_target, FidelityReport, GateRun, EDGE_MASS_LIMIT,
};

mod oracle;

pub use oracle::{com_packet, reconstruct_2d, relative_coordinate_oracle, relative_grid, sample_1d, OracleResult, PhaseLedger};

mod scan;

pub use scan::{
    calibrate_scale, evaluate_scale, scan_interaction_scale, scan_squeezing, Calibration, CalibrationOptions, Engine,
    ScaleRow, ScaleScan, SqueezeRow, MIN_POINTS_PER_WIDTH,
};

mod tight_binding;

pub use tight_binding::{
    calibrate_dmin, double_well_grid, gate_action, run_adiabatic_gate, stationary_tb_gate, tb_evolve, tb_fidelity,
    tunneling_energy, AdiabaticConfig, AdiabaticReport, TbFidelity, TightBindingState, TunnelingTable, UPolicy,
    GATE_ACTION, MAX_TABLE_POINTS,
};
