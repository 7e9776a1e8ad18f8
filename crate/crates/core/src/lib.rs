//! Preferential-attachment multigraph processes with prescribed edge
//! growth, martingale diagnostics, and finite checks of the Rado-multigraph
//! axioms.

pub mod engine;
pub mod growth;
pub mod harness;
pub mod martingale;
pub mod multigraph;
pub mod rado;
pub mod rational;
pub mod seeding;
pub mod stats;

pub use engine::{EngineError, Process, ProcessConfig, Trajectory, Variant};
pub use growth::{GrowthError, GrowthKind, GrowthSpec, GrowthTable};
pub use harness::{run_ensemble, EnsembleResult, ExperimentConfig, ExperimentPlan, HarnessError};
pub use martingale::{MartingaleError, NormalizerTable};
pub use multigraph::{GraphError, Multigraph, NodeId, StorageMode, WitnessRequest};
pub use rado::{PartialIso, RadoError};
pub use rational::Rational;
