//! Scenario files, the run pipeline and its on-disk artifacts.

mod config;
mod limits;
mod output;
mod run;

pub use config::{ScenarioConfig, KNOWN_CHECKS};
pub use limits::{
    mollification_convergence, perturb, refined, stability_functional, uniqueness_gronwall,
    MollificationReport, UniquenessReport, CONVERGED_DISTANCE,
};
pub use output::{load_result, load_trajectory_dir, write_atomic, SUMMARY_FILE};
pub use run::{run, run_config, CheckOutcome, ScenarioResult};
