//! Experiment drivers: Haar scaling, time traces, plateau detection,
//! distribution and controllability checks, reconstruction robustness, and
//! the CSV/SVG writers used to report them.

pub mod checks;
pub mod config;
pub mod ensemble;
pub mod plateau;
pub mod report;

pub use checks::{
    run_control_check, run_distribution_check, run_reconstruct_demo, ControlCheckRow, DistributionCheckRow,
    ReconstructionTrial,
};
pub use config::{ExperimentConfig, ExperimentKind, FieldKind, TimeGrid, UnitaryMode};
pub use ensemble::{run_haar_scaling, run_time_trace, EnsembleResult, HaarScalingRow, LogKappaStats};
pub use plateau::{plateau_estimate, PlateauEstimate};
