//! Scenario-driven experiments: batch placement trials, offset sweeps,
//! finger-press checks and plot data.

pub mod experiments;
pub mod report;
pub mod scenario;
pub mod stats;
pub mod trace;

pub use experiments::{
    emit_contact_plot_data, finger_press_check, run_scenario, run_scenario_path, summarize_sweep, sweep_offsets,
    sweep_rows, HarnessError, RunOptions, SweepRow,
};
pub use report::ExperimentReport;
pub use scenario::{Family, Scenario, ScenarioError};
pub use trace::TraceFile;
