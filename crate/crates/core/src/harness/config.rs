use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, HarnessError, Result};
use crate::engine::{ProcessConfig, Variant};
use crate::growth::GrowthSpec;
use crate::multigraph::{Multigraph, NodeId, StorageMode, WitnessRequest};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedGraphSpec {
    Inline { nodes: usize, edges: Vec<(NodeId, NodeId)> },
    Path { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckpointSpec {
    List(Vec<u64>),
    Geometric(GeometricCheckpoints),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "geometric")]
pub struct GeometricCheckpoints {
    pub base: u64,
    pub ratio: f64,
}

impl Default for CheckpointSpec {
    fn default() -> Self {
        CheckpointSpec::Geometric(GeometricCheckpoints { base: 2, ratio: 1.3 })
    }
}

impl CheckpointSpec {
    /// Sorted, deduplicated times in `[lo, horizon]`; the horizon is always included.
    pub fn resolve(&self, lo: u64, horizon: u64) -> Result<Vec<u64>> {
        let mut ts: BTreeSet<u64> = BTreeSet::new();
        match self {
            CheckpointSpec::List(list) => {
                for &t in list {
                    if t < lo || t > horizon {
                        return Err(HarnessError::Config(format!(
                            "checkpoint {t} is outside [{lo}, {horizon}]"
                        )));
                    }
                    ts.insert(t);
                }
            }
            CheckpointSpec::Geometric(g) => {
                if g.ratio <= 1.0 || !g.ratio.is_finite() {
                    return Err(HarnessError::Config("geometric checkpoint ratio must exceed 1".into()));
                }
                let mut x = g.base.max(lo) as f64;
                while x.ceil() <= horizon as f64 {
                    ts.insert(x.ceil() as u64);
                    x *= g.ratio;
                }
            }
        }
        ts.insert(horizon);
        Ok(ts.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Martingale,
    L2,
    Sh,
    WitnessCurve,
    AxiomCoverage,
}

/// Pilot-calibrated pass/fail levels; absent fields mean "report only".
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// `θ₀`: runs with `X_u(T) < θ₀` count as "near zero".
    pub x_positive: Option<f64>,
    pub x_positive_max_fraction: Option<f64>,
    /// A run plateaus when `l2(T) − l2(T/10) ≤ fraction · l2(T)`.
    pub l2_plateau_fraction: Option<f64>,
    pub l2_plateau_min_runs: Option<f64>,
    pub satisfaction_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupSpec {
    /// Common starting time `t₀` for every run.
    pub t0: u64,
    /// Seed of the run that grows `G(t₀)`.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSpec {
    pub n_max: usize,
    pub m_max: u32,
    pub samples: u64,
}

impl Default for CoverageSpec {
    fn default() -> Self {
        CoverageSpec {
            n_max: 2,
            m_max: 2,
            samples: 50,
        }
    }
}

fn default_alpha() -> Rational {
    Rational::new(3, 4)
}

fn default_runs() -> u64 {
    1
}

/// Experiment config file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub growth: GrowthSpec,
    pub seed_graph: SeedGraphSpec,
    pub horizon: u64,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub checkpoints: CheckpointSpec,
    /// Each request is a list of `[node, multiplicity]` pairs.
    #[serde(default)]
    pub witnesses: Vec<WitnessRequest>,
    #[serde(default)]
    pub tracked_nodes: Vec<NodeId>,
    /// Defaults to full storage when witness or axiom analyses need it.
    #[serde(default)]
    pub storage: Option<StorageMode>,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default = "default_alpha")]
    pub alpha: Rational,
    /// Inclusive step range checked for short tails; defaults to every step.
    #[serde(default)]
    pub sh_window: Option<(u64, u64)>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub warmup: Option<WarmupSpec>,
    #[serde(default)]
    pub coverage: Option<CoverageSpec>,
    /// Worker threads; defaults to the rayon global pool.
    #[serde(default)]
    pub threads: Option<usize>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// A validated, fully resolved experiment.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub config: ExperimentConfig,
    /// `rng_seed` here is unused; each run derives its own stream.
    pub process: ProcessConfig,
    pub runs: u64,
    pub checkpoints: Vec<u64>,
    pub witnesses: Vec<WitnessRequest>,
    pub analyses: BTreeSet<Analysis>,
    pub alpha: Rational,
    pub sh_window: (u64, u64),
    pub coverage: CoverageSpec,
    pub master_seed: u64,
}

fn load_seed_graph(spec: &SeedGraphSpec, base_dir: &Path) -> Result<Multigraph> {
    Ok(match spec {
        SeedGraphSpec::Inline { nodes, edges } => Multigraph::new_seed(edges, *nodes)?,
        SeedGraphSpec::Path { path } => {
            let path = base_dir.join(path);
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            Multigraph::deserialize(&text)?
        }
    })
}

impl ExperimentPlan {
    /// Resolves `config`; relative seed-graph paths are taken from `base_dir`.
    pub fn new(config: ExperimentConfig, base_dir: &Path) -> Result<Self> {
        if config.runs == 0 {
            return Err(HarnessError::Config("runs must be at least 1".into()));
        }
        let analyses: BTreeSet<Analysis> = config.analyses.iter().copied().collect();
        let needs_full = analyses.contains(&Analysis::WitnessCurve) || analyses.contains(&Analysis::AxiomCoverage);
        let storage = config.storage.unwrap_or(if needs_full {
            StorageMode::Full
        } else {
            StorageMode::DegreesOnly
        });
        if needs_full && storage == StorageMode::DegreesOnly {
            return Err(HarnessError::Config(
                "witness and axiom analyses need full storage".into(),
            ));
        }
        let needs_tracked = [Analysis::Martingale, Analysis::L2, Analysis::Sh]
            .iter()
            .any(|a| analyses.contains(a));
        if needs_tracked && config.tracked_nodes.is_empty() {
            return Err(HarnessError::Config("martingale analyses need tracked_nodes".into()));
        }
        if analyses.contains(&Analysis::WitnessCurve) && config.witnesses.is_empty() {
            return Err(HarnessError::Config("witness_curve needs at least one request".into()));
        }

        let seed_graph = load_seed_graph(&config.seed_graph, base_dir)?;
        let process = ProcessConfig::new(
            config.variant,
            config.growth.clone(),
            seed_graph,
            config.horizon,
            config.seed,
        )
        .tracking(config.tracked_nodes.clone())
        .storage(storage);
        process.validate()?;

        let v_prime = config.growth.v_prime;
        let start = match &config.warmup {
            Some(w) => {
                if w.t0 < v_prime || w.t0 > config.horizon {
                    return Err(HarnessError::Config(format!(
                        "warmup t0 = {} is outside [{v_prime}, {}]",
                        w.t0, config.horizon
                    )));
                }
                w.t0
            }
            None => v_prime,
        };
        let checkpoints = config.checkpoints.resolve(start, config.horizon)?;
        let max_node = config.horizon;
        for w in &config.witnesses {
            if let Some(&(u, _)) = w.pairs().iter().find(|&&(u, _)| u as u64 > max_node) {
                return Err(HarnessError::Config(format!(
                    "witness node {u} never exists before the horizon"
                )));
            }
        }
        let sh_window = config.sh_window.unwrap_or((start, config.horizon));
        if sh_window.0 > sh_window.1 {
            return Err(HarnessError::Config("sh_window is empty".into()));
        }
        if analyses.contains(&Analysis::Sh) || analyses.contains(&Analysis::Martingale) {
            crate::martingale::sh_check(0, 1, config.alpha)?;
        }
        Ok(ExperimentPlan {
            process,
            runs: config.runs,
            checkpoints,
            witnesses: config.witnesses.clone(),
            analyses,
            alpha: config.alpha,
            sh_window,
            coverage: config.coverage.clone().unwrap_or_default(),
            master_seed: config.seed,
            config,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let config = ExperimentConfig::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::new(config, base)
    }

    /// Same plan with a different master seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self.config.seed = seed;
        self.process.rng_seed = seed;
        self
    }

    /// Same plan with a different run count.
    pub fn with_runs(mut self, runs: u64) -> Self {
        self.runs = runs;
        self.config.runs = runs;
        self
    }

    pub fn has(&self, a: Analysis) -> bool {
        self.analyses.contains(&a)
    }
}
