//! Finite-side checks of the Rado multigraph: axiom checks, the
//! independent-pairs generator, back-and-forth extension and embedding.

mod axioms;
mod embed;
mod er;
mod iso;

pub use axioms::{check_basic_axioms, witness_coverage, AxiomReport, CoverageClass, CoverageReport};
pub use embed::{embed_multigraph, verify_embedding, MAX_PATTERN_NODES};
pub use er::{er_generate, ErConfig, PSequence, DEFAULT_MULTIPLICITY_CAP};
pub use iso::{back_and_forth_extend, BackForthOutcome, Direction, FailurePoint, PartialIso};

use crate::multigraph::{GraphError, NodeId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RadoError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("multiplicity cap {cap} reached on pair ({u}, {v})")]
    CapReached { u: NodeId, v: NodeId, cap: u32 },
    #[error("invalid partial isomorphism: {0}")]
    InvalidIso(String),
    #[error("pattern has {0} nodes; at most {MAX_PATTERN_NODES} are supported")]
    PatternTooLarge(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, RadoError>;
