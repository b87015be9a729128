//! Experiment harness: seeded episode batches, a bootstrap particle filter
//! between steps, CSV results and summaries, width sweeps and CEM tuning.

pub mod filter;
pub mod presets;
pub mod run;
pub mod spec;
pub mod summary;
pub mod tune;

pub use filter::bootstrap_update;
pub use presets::{default_preset, preset, Preset, SolverConfig, PRESET_NAMES};
pub use run::{
    run_episodes, run_experiment, run_to_dir, vowss_width_sweep, write_results, write_sweep,
    EpisodeResult, SweepRow, CSV_HEADER,
};
pub use spec::{merge_json, AnyEnv, EnvId, ExperimentSpec, SolverId};
pub use summary::{format_summary, summarize_csv, summarize_results, write_summary, SummaryRow};
pub use tune::{tune_two_phase, TuneOutcome, TuneSpec};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("CSV schema mismatch: {0}")]
    Schema(String),
    #[error(transparent)]
    Plan(#[from] crate::error::PlanError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// True for errors caused by the experiment description itself.
    pub fn is_validation(&self) -> bool {
        matches!(self, HarnessError::Spec(_))
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
