//! MPA and GPA process simulation.

mod multinomial;
mod process;
mod sampler;

use serde::{Deserialize, Serialize};

use crate::growth::GrowthError;
use crate::multigraph::GraphError;

pub use multinomial::{ln_factorial, step_distribution_exact, step_distribution_rational, EXACT_LIMIT};
pub use process::{run, Process, ProcessConfig, StepOutcome, StepRecord, Trajectory};
pub use sampler::DegreeSampler;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("cannot sample from a graph with zero total degree")]
    EmptyGraph,
    #[error("cannot pick {k} distinct endpoints among {nodes} nodes{}", .t.map(|t| format!(" at step t = {t}")).unwrap_or_default())]
    Infeasible { k: u64, nodes: u64, t: Option<u64> },
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid process configuration: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;

/// Endpoint sampling rule: with replacement (multigraph) or without (simple graph).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "MPA", alias = "mpa")]
    Mpa,
    #[serde(rename = "GPA", alias = "gpa")]
    Gpa,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Mpa => "MPA",
            Variant::Gpa => "GPA",
        })
    }
}
