use std::hash::{Hash, Hasher};
use std::io;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHasher;

use super::sampler::DegreeSampler;
use super::{EngineError, Result, Variant};
use crate::growth::{GrowthSpec, GrowthTable};
use crate::multigraph::{Multigraph, NodeId, StorageMode};
use crate::seeding::rng_from_seed;

#[derive(Debug, Clone)]
pub struct ProcessConfig {
    pub variant: Variant,
    pub growth: GrowthSpec,
    /// `G' = G(v')`: must have `v'` nodes and `e'` edges.
    pub seed_graph: Multigraph,
    /// Final time `T`; the run ends with `G(T)`.
    pub horizon: u64,
    pub rng_seed: u64,
    /// Seed-graph nodes whose degrees are recorded every step.
    pub tracked_nodes: Vec<NodeId>,
    pub storage_mode: StorageMode,
}

impl ProcessConfig {
    pub fn new(variant: Variant, growth: GrowthSpec, seed_graph: Multigraph, horizon: u64, rng_seed: u64) -> Self {
        ProcessConfig {
            variant,
            growth,
            seed_graph,
            horizon,
            rng_seed,
            tracked_nodes: Vec::new(),
            storage_mode: StorageMode::Full,
        }
    }

    pub fn tracking(mut self, nodes: Vec<NodeId>) -> Self {
        self.tracked_nodes = nodes;
        self
    }

    pub fn storage(mut self, mode: StorageMode) -> Self {
        self.storage_mode = mode;
        self
    }

    /// Checks the config and builds the growth table it runs on.
    pub fn validate(&self) -> Result<GrowthTable> {
        self.growth.validate()?;
        let v_prime = self.growth.v_prime;
        if self.horizon < v_prime {
            return Err(EngineError::Config(format!(
                "horizon {} is before v' = {v_prime}",
                self.horizon
            )));
        }
        let table = GrowthTable::build(&self.growth, self.horizon)?;
        let seed = &self.seed_graph;
        if seed.node_count() as u64 != v_prime {
            return Err(EngineError::Config(format!(
                "seed graph has {} nodes but v' = {v_prime}",
                seed.node_count()
            )));
        }
        if seed.total_edges() != self.growth.e_prime {
            return Err(EngineError::Config(format!(
                "seed graph has {} edges but e' = {}",
                seed.total_edges(),
                self.growth.e_prime
            )));
        }
        if let Some(i) = seed.degrees().iter().position(|&d| d == 0) {
            return Err(EngineError::Config(format!("seed node {} is isolated", i + 1)));
        }
        if self.variant == Variant::Gpa {
            for t in v_prime..=self.horizon {
                let f = table.f(t)?;
                if f > t {
                    return Err(EngineError::Infeasible {
                        k: f,
                        nodes: t,
                        t: Some(t),
                    });
                }
            }
        }
        for (i, &u) in self.tracked_nodes.iter().enumerate() {
            if u == 0 || u as u64 > v_prime {
                return Err(EngineError::Config(format!(
                    "tracked node {u} is not a seed node (1..={v_prime})"
                )));
            }
            if self.tracked_nodes[..i].contains(&u) {
                return Err(EngineError::Config(format!("tracked node {u} listed twice")));
            }
        }
        Ok(table)
    }

    /// Stable text identifying everything but the rng seed.
    pub fn signature(&self) -> String {
        let mut h = FxHasher::default();
        match self.seed_graph.edge_multiplicities() {
            Ok(edges) => edges.hash(&mut h),
            Err(_) => self.seed_graph.degrees().hash(&mut h),
        }
        format!(
            "{}|{}|T={}|tracked={:?}|storage={:?}|seed={:016x}",
            self.variant,
            serde_json::to_string(&self.growth).unwrap_or_default(),
            self.horizon,
            self.tracked_nodes,
            self.storage_mode,
            h.finish()
        )
    }
}

/// What one step did: node `t + 1` arrived with `f(t)` edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub t: u64,
    pub f_t: u64,
    pub big_f_t: u64,
    pub new_node: NodeId,
}

/// A running process positioned at `G(t)`.
#[derive(Debug, Clone)]
pub struct Process {
    variant: Variant,
    table: Arc<GrowthTable>,
    graph: Multigraph,
    sampler: DegreeSampler,
    rng: ChaCha8Rng,
    t: u64,
    tracked: Vec<NodeId>,
    tracked_before: Vec<u64>,
    increments: Vec<u64>,
    endpoints: Vec<NodeId>,
}

impl Process {
    pub fn new(config: &ProcessConfig) -> Result<Self> {
        let table = config.validate()?;
        let graph = config.seed_graph.clone().with_storage(config.storage_mode);
        Ok(Self::assemble(
            config.variant,
            Arc::new(table),
            graph,
            rng_from_seed(config.rng_seed),
            config.tracked_nodes.clone(),
        ))
    }

    fn assemble(
        variant: Variant,
        table: Arc<GrowthTable>,
        graph: Multigraph,
        rng: ChaCha8Rng,
        tracked: Vec<NodeId>,
    ) -> Self {
        let sampler = DegreeSampler::from_weights(graph.degrees());
        let t = graph.node_count() as u64;
        let tracked_before = tracked.iter().map(|&u| graph.degrees()[u as usize - 1]).collect();
        let k = tracked.len();
        Process {
            variant,
            table,
            graph,
            sampler,
            rng,
            t,
            tracked,
            tracked_before,
            increments: vec![0; k],
            endpoints: Vec::new(),
        }
    }

    /// Copy of the current state continuing with an independent stream.
    pub fn fork(&self, rng_seed: u64) -> Self {
        let mut p = self.clone();
        p.rng = rng_from_seed(rng_seed);
        p
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn horizon(&self) -> u64 {
        self.table.horizon()
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.table.horizon()
    }

    pub fn graph(&self) -> &Multigraph {
        &self.graph
    }

    pub fn into_graph(self) -> Multigraph {
        self.graph
    }

    pub fn table(&self) -> &GrowthTable {
        &self.table
    }

    pub fn tracked_nodes(&self) -> &[NodeId] {
        &self.tracked
    }

    /// Current degrees of the tracked nodes.
    pub fn tracked_degrees(&self) -> Vec<u64> {
        self.tracked
            .iter()
            .map(|&u| self.graph.degrees()[u as usize - 1])
            .collect()
    }

    /// Degrees of the tracked nodes in `G(t)` before the last step.
    pub fn tracked_degrees_before(&self) -> &[u64] {
        &self.tracked_before
    }

    /// `U_u(t + 1)` for each tracked node from the last step.
    pub fn tracked_increments(&self) -> &[u64] {
        &self.increments
    }

    /// Endpoints drawn in the last step, in draw order.
    pub fn last_endpoints(&self) -> &[NodeId] {
        &self.endpoints
    }

    /// Advances from `G(t)` to `G(t + 1)`.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let t = self.t;
        if t >= self.table.horizon() {
            return Err(EngineError::Config(format!("process already at horizon {t}")));
        }
        let f_t = self.table.f(t)?;
        let big_f_t = self.table.prefix_f(t)?;
        for (slot, &u) in self.tracked_before.iter_mut().zip(&self.tracked) {
            *slot = self.graph.degrees()[u as usize - 1];
        }

        self.endpoints.clear();
        let k = f_t as usize;
        let sampled = match self.variant {
            Variant::Mpa => self
                .sampler
                .sample_with_replacement(k, &mut self.rng, &mut self.endpoints),
            Variant::Gpa => self
                .sampler
                .sample_without_replacement(k, &mut self.rng, &mut self.endpoints),
        };
        sampled.map_err(|e| match e {
            EngineError::Infeasible { k, nodes, .. } => EngineError::Infeasible { k, nodes, t: Some(t) },
            other => other,
        })?;
        let new_node = self.graph.add_node_with_endpoints(&self.endpoints)?;

        let n = self.sampler.len() + 1;
        if (k as f64) * (n as f64).log2() > n as f64 {
            self.sampler.rebuild(self.graph.degrees());
        } else {
            self.sampler.push(f_t);
            for &u in &self.endpoints {
                self.sampler.add(u as usize - 1, 1);
            }
        }
        self.t = t + 1;

        let big_f_next = self.table.prefix_f(self.t)?;
        if self.graph.total_edges() != big_f_next || self.sampler.total() != 2 * big_f_next {
            return Err(EngineError::InvariantViolation(format!(
                "at t = {}: {} edges, sampler total {}, expected F = {big_f_next}",
                self.t,
                self.graph.total_edges(),
                self.sampler.total()
            )));
        }
        for ((inc, &before), &u) in self.increments.iter_mut().zip(&self.tracked_before).zip(&self.tracked) {
            *inc = self.graph.degrees()[u as usize - 1] - before;
        }
        Ok(StepOutcome {
            t,
            f_t,
            big_f_t,
            new_node,
        })
    }

    pub fn advance_to(&mut self, t: u64) -> Result<()> {
        while self.t < t {
            self.step()?;
        }
        Ok(())
    }
}

/// Tracked-node record for one step `G(t) → G(t + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub t: u64,
    pub f_t: u64,
    pub big_f_t: u64,
    /// `d_u(t)` per tracked node.
    pub degrees: Vec<u64>,
    /// `U_u(t + 1)` per tracked node.
    pub increments: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub signature: String,
    pub rng_seed: u64,
    pub tracked: Vec<NodeId>,
    pub steps: Vec<StepRecord>,
    pub final_t: u64,
    pub final_degrees: Vec<u64>,
    pub final_graph: Multigraph,
}

impl Trajectory {
    /// Columns `t, f_t, F_t`, then `d_u, U_u` per tracked node.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "f_t".into(), "F_t".into()];
        for u in &self.tracked {
            header.push(format!("d_{u}"));
            header.push(format!("U_{u}"));
        }
        w.write_record(&header)?;
        let mut row = Vec::with_capacity(header.len());
        for s in &self.steps {
            row.clear();
            row.extend([s.t.to_string(), s.f_t.to_string(), s.big_f_t.to_string()]);
            for (d, u) in s.degrees.iter().zip(&s.increments) {
                row.push(d.to_string());
                row.push(u.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the process from `G(v')` to `G(T)` recording every step.
pub fn run(config: &ProcessConfig) -> Result<Trajectory> {
    let mut p = Process::new(config)?;
    let mut steps = Vec::with_capacity((config.horizon - p.t()) as usize);
    while !p.is_finished() {
        let o = p.step()?;
        steps.push(StepRecord {
            t: o.t,
            f_t: o.f_t,
            big_f_t: o.big_f_t,
            degrees: p.tracked_degrees_before().to_vec(),
            increments: p.tracked_increments().to_vec(),
        });
    }
    Ok(Trajectory {
        signature: config.signature(),
        rng_seed: config.rng_seed,
        tracked: config.tracked_nodes.clone(),
        steps,
        final_t: p.t(),
        final_degrees: p.tracked_degrees(),
        final_graph: p.into_graph(),
    })
}
