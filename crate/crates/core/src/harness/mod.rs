//! Seeded, replicated experiments: configuration, execution, aggregation,
//! scaling fits, parameter sweeps and CSV output.

mod config;
mod output;
mod run;
mod stats;

pub use config::{Algorithm, EnvKind, ExperimentConfig, GraphSpec};
pub use output::{
    emit_csv, write_file, write_finals, write_invariants, write_scaling, write_sweep, write_trajectory, FINALS_FILE,
    FINALS_HEADER, INVARIANTS_HEADER, SCALING_HEADER, SWEEP_HEADER, TRAJECTORY_FILE, TRAJECTORY_HEADER,
};
pub use run::{
    replication_rngs, run_experiment, run_experiment_with, workers, Experiment, Instance, Parallelism, WORKERS_ENV,
};
pub use stats::{
    aggregate, check_geometric, fit_power_law, mean_ci, scaling_fit, sweep, sweep_config, AggregateResult,
    ScalingFit, SweepResult, SweepRow, HELD_OUT_SEED_OFFSET, MIN_FIT_POINTS, Z_95,
};
