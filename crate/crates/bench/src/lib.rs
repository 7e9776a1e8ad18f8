//! Fixtures shared by the benchmarks.

use pa_core::engine::{Process, ProcessConfig, Variant};
use pa_core::{GrowthSpec, Multigraph, StorageMode};

/// Profile L from a single edge.
pub fn linear_config(variant: Variant, horizon: u64, storage: StorageMode, seed: u64) -> ProcessConfig {
    let seed_graph = Multigraph::new_seed(&[(1, 2)], 2).expect("single edge seed");
    ProcessConfig::new(variant, GrowthSpec::canonical_linear(), seed_graph, horizon, seed).storage(storage)
}

/// Degree sequence of a profile-L graph grown to `t` nodes.
pub fn grown_degrees(t: u64, seed: u64) -> Vec<u64> {
    let mut p = Process::new(&linear_config(Variant::Mpa, t, StorageMode::DegreesOnly, seed)).expect("valid config");
    p.advance_to(t).expect("run");
    p.graph().degrees().to_vec()
}
