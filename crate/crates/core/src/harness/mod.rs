//! Experiment orchestration: config files, seeded ensembles, aggregation
//! and output files.

mod config;
mod ensemble;
mod export;

use std::path::PathBuf;

pub use config::{
    Analysis, CheckpointSpec, CoverageSpec, ExperimentConfig, ExperimentPlan, GeometricCheckpoints, SeedGraphSpec,
    Thresholds, WarmupSpec,
};
pub use ensemble::{
    run_ensemble, witness_satisfaction_curve, EnsembleResult, L2Summary, RunSummary, ShSummary, WitnessCurve,
    XCheckpointStats,
};
pub use export::{write_ensemble, write_json, write_meta, RunMeta};

use crate::engine::EngineError;
use crate::growth::GrowthError;
use crate::martingale::MartingaleError;
use crate::multigraph::GraphError;
use crate::rado::RadoError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("no witness request {0} in this ensemble")]
    UnknownRequest(String),
    #[error("run {run} failed: {source}")]
    RunFailed {
        run: u64,
        #[source]
        source: Box<HarnessError>,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Martingale(#[from] MartingaleError),
    #[error(transparent)]
    Rado(#[from] RadoError),
}

impl HarnessError {
    /// Errors caused by the inputs rather than by a failing computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Json { .. }
                | HarnessError::UnknownRequest(_)
                | HarnessError::Engine(EngineError::Config(_) | EngineError::Growth(_) | EngineError::Graph(_))
                | HarnessError::Engine(EngineError::Infeasible { t: Some(_), .. })
                | HarnessError::Growth(_)
                | HarnessError::Graph(_)
                | HarnessError::Martingale(MartingaleError::Config(_))
                | HarnessError::Rado(RadoError::Config(_) | RadoError::PatternTooLarge(_) | RadoError::InvalidIso(_))
        )
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
