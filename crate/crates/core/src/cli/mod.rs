//! Configuration, sweep runners and table writers behind the `sptlab`
//! binary. The runners are plain library functions so integration tests
//! can drive them without spawning processes.

pub mod config;
pub mod output;
pub mod run;

pub use config::Config;
pub use output::{Cell, Table, SCHEMA_VERSION};
pub use run::{
    elimination_report, evaluate_point, log_log_slope, resolve_frame, run_convergence,
    run_phase_diagram, run_point, run_squeezing_scan, run_sweep, run_validate_elimination,
    CouplingCoord, Numerics, OmegaAnchor, PointRow, PointSpec, PredisplaceMode, RunOutcome,
};
