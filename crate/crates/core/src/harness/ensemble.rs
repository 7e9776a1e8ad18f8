use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Analysis, ExperimentPlan};
use super::{HarnessError, Result};
use crate::engine::Process;
use crate::martingale::{x_value, NormalizerPoint, NormalizerTable, TrackedNodeStats, XLimitSummary};
use crate::multigraph::{NodeId, WitnessRequest};
use crate::rado::{check_basic_axioms, witness_coverage, AxiomReport};
use crate::seeding::{rng_from_seed, splitmix64, stream_seed};
use crate::stats;

const DEFAULT_PLATEAU_FRACTION: f64 = 0.05;

/// Everything one run reports back to the fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: u64,
    pub seed: u64,
    /// Per request: index of the first checkpoint where it was satisfied.
    pub satisfied_at: Vec<Option<usize>>,
    pub tracked: Vec<TrackedNodeStats>,
    /// L2 sum per tracked node at `max(T/10, start)`.
    pub l2_tenth: Vec<f64>,
    pub final_degrees: Vec<u64>,
    pub axioms: Option<AxiomReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XCheckpointStats {
    pub node: NodeId,
    pub t: u64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub mean_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Summary {
    pub node: NodeId,
    pub tenth_t: u64,
    pub plateau_fraction: f64,
    /// Runs with `l2(T) − l2(T/10) ≤ plateau_fraction · l2(T)`.
    pub plateaued_runs: u64,
    pub fraction_plateaued: f64,
    pub mean_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShSummary {
    pub node: NodeId,
    pub window: (u64, u64),
    pub violations: u64,
    pub runs_with_violation: u64,
    pub max_increment: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub signature: String,
    pub master_seed: u64,
    pub runs: u64,
    pub start_t: u64,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    pub requests: Vec<WitnessRequest>,
    /// `satisfied[r][c]`: runs with request `r` satisfied by checkpoint `c`.
    pub satisfied: Vec<Vec<u64>>,
    pub normalizer: Vec<NormalizerPoint>,
    pub tracked: Vec<NodeId>,
    /// `X_u` at the common start state, per tracked node.
    pub start_x: Vec<f64>,
    pub x_stats: Vec<XCheckpointStats>,
    pub x_limits: Vec<XLimitSummary>,
    pub l2: Vec<L2Summary>,
    pub sh: Vec<ShSummary>,
    pub run_summaries: Vec<RunSummary>,
}

impl EnsembleResult {
    /// `satisfied / runs` per request and checkpoint.
    pub fn fractions(&self) -> Vec<Vec<f64>> {
        self.satisfied
            .iter()
            .map(|row| row.iter().map(|&k| k as f64 / self.runs as f64).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCurve {
    pub request: WitnessRequest,
    pub t: Vec<u64>,
    pub satisfied: Vec<u64>,
    pub fraction: Vec<f64>,
}

impl WitnessCurve {
    pub fn is_nondecreasing(&self) -> bool {
        self.satisfied.windows(2).all(|w| w[0] <= w[1])
    }
}

pub fn witness_satisfaction_curve(result: &EnsembleResult, request: &WitnessRequest) -> Result<WitnessCurve> {
    let r = result
        .requests
        .iter()
        .position(|w| w == request)
        .ok_or_else(|| HarnessError::UnknownRequest(format!("{:?}", request.pairs())))?;
    let satisfied = result.satisfied[r].clone();
    Ok(WitnessCurve {
        request: request.clone(),
        t: result.checkpoints.clone(),
        fraction: satisfied.iter().map(|&k| k as f64 / result.runs as f64).collect(),
        satisfied,
    })
}

/// The state every run forks from.
fn start_process(plan: &ExperimentPlan) -> Result<Process> {
    let base = Process::new(&plan.process)?;
    Ok(match &plan.config.warmup {
        Some(w) => {
            let mut p = base.fork(w.seed);
            p.advance_to(w.t0)?;
            p
        }
        None => base,
    })
}

fn witness_check(p: &Process, requests: &[WitnessRequest], satisfied_at: &mut [Option<usize>], c: usize) -> Result<()> {
    let n = p.graph().node_count() as NodeId;
    for (w, slot) in requests.iter().zip(satisfied_at.iter_mut()) {
        if slot.is_some() || w.pairs().iter().any(|&(u, _)| u > n) {
            continue;
        }
        if p.graph().witness_satisfied(w)?.is_some() {
            *slot = Some(c);
        }
    }
    Ok(())
}

fn run_one(plan: &ExperimentPlan, start: &Process, norm: &NormalizerTable, run: u64) -> Result<RunSummary> {
    let seed = stream_seed(plan.master_seed, run);
    let mut p = start.fork(seed);
    let horizon = p.horizon();
    let tenth = (horizon / 10).max(p.t());
    let witnesses = plan.has(Analysis::WitnessCurve);
    let mut satisfied_at = vec![None; plan.witnesses.len()];
    let mut tracked = p
        .tracked_nodes()
        .iter()
        .map(|&u| TrackedNodeStats::new(u, plan.alpha, plan.sh_window))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut l2_tenth = vec![0.0; tracked.len()];
    let mut next = 0;
    loop {
        let t = p.t();
        if t == tenth {
            for (slot, s) in l2_tenth.iter_mut().zip(&tracked) {
                *slot = s.l2_sum;
            }
        }
        if plan.checkpoints.get(next) == Some(&t) {
            if witnesses {
                witness_check(&p, &plan.witnesses, &mut satisfied_at, next)?;
            }
            for (s, d) in tracked.iter_mut().zip(p.tracked_degrees()) {
                s.checkpoint(t, d, norm)?;
            }
            next += 1;
        }
        if p.is_finished() {
            break;
        }
        let o = p.step()?;
        let (before, inc) = (p.tracked_degrees_before(), p.tracked_increments());
        for (j, s) in tracked.iter_mut().enumerate() {
            s.observe_step(o.t, before[j], inc[j], o.f_t, o.big_f_t, norm)?;
        }
    }
    let final_degrees = p.tracked_degrees();
    for (s, &d) in tracked.iter_mut().zip(&final_degrees) {
        s.finish(horizon, d, norm)?;
    }
    let axioms = if plan.has(Analysis::AxiomCoverage) {
        let mut report = check_basic_axioms(p.graph())?;
        let c = &plan.coverage;
        let mut rng = rng_from_seed(splitmix64(seed));
        report.a4_coverage = Some(witness_coverage(p.graph(), c.n_max, c.m_max, c.samples, &mut rng)?);
        Some(report)
    } else {
        None
    };
    Ok(RunSummary {
        run,
        seed,
        satisfied_at,
        tracked,
        l2_tenth,
        final_degrees,
        axioms,
    })
}

fn fold(
    plan: &ExperimentPlan,
    start: &Process,
    norm: &NormalizerTable,
    runs: Vec<RunSummary>,
) -> Result<EnsembleResult> {
    let n = runs.len();
    let cps = &plan.checkpoints;
    let mut satisfied = vec![vec![0u64; cps.len()]; plan.witnesses.len()];
    for r in &runs {
        for (row, at) in satisfied.iter_mut().zip(&r.satisfied_at) {
            if let Some(c) = *at {
                for k in &mut row[c..] {
                    *k += 1;
                }
            }
        }
    }
    let tracked: Vec<NodeId> = start.tracked_nodes().to_vec();
    let start_a = norm.a(start.t())?;
    let start_x = start.tracked_degrees().iter().map(|&d| x_value(d, start_a)).collect();

    let mut x_stats = Vec::new();
    let mut x_limits = Vec::new();
    let mut l2 = Vec::new();
    let mut sh = Vec::new();
    let plateau = plan
        .config
        .thresholds
        .l2_plateau_fraction
        .unwrap_or(DEFAULT_PLATEAU_FRACTION);
    let tenth_t = (start.horizon() / 10).max(start.t());
    for (j, &node) in tracked.iter().enumerate() {
        for (c, &t) in cps.iter().enumerate() {
            let xs: Vec<f64> = runs.iter().map(|r| r.tracked[j].x_series[c]).collect();
            let l2s: Vec<f64> = runs.iter().map(|r| r.tracked[j].l2_series[c]).collect();
            x_stats.push(XCheckpointStats {
                node,
                t,
                mean: stats::mean(&xs),
                std: stats::sample_std(&xs),
                min: xs.iter().copied().fold(f64::INFINITY, f64::min),
                max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_l2: stats::mean(&l2s),
            });
        }
        let x_hat: Vec<f64> = runs.iter().map(|r| r.tracked[j].x_hat.unwrap_or(f64::NAN)).collect();
        x_limits.push(XLimitSummary::from_samples(
            node,
            x_hat,
            plan.config.thresholds.x_positive,
        ));

        let finals: Vec<f64> = runs.iter().map(|r| r.tracked[j].l2_sum).collect();
        let plateaued = runs
            .iter()
            .filter(|r| {
                let end = r.tracked[j].l2_sum;
                end - r.l2_tenth[j] <= plateau * end
            })
            .count() as u64;
        l2.push(L2Summary {
            node,
            tenth_t,
            plateau_fraction: plateau,
            plateaued_runs: plateaued,
            fraction_plateaued: plateaued as f64 / n as f64,
            mean_final: stats::mean(&finals),
        });
        sh.push(ShSummary {
            node,
            window: plan.sh_window,
            violations: runs.iter().map(|r| r.tracked[j].sh_violations).sum(),
            runs_with_violation: runs.iter().filter(|r| r.tracked[j].sh_violations > 0).count() as u64,
            max_increment: runs.iter().map(|r| r.tracked[j].max_increment).max().unwrap_or(0),
        });
    }
    Ok(EnsembleResult {
        signature: plan.process.signature(),
        master_seed: plan.master_seed,
        runs: n as u64,
        start_t: start.t(),
        horizon: start.horizon(),
        checkpoints: cps.clone(),
        requests: plan.witnesses.clone(),
        satisfied,
        normalizer: norm.points(cps)?,
        tracked,
        start_x,
        x_stats,
        x_limits,
        l2,
        sh,
        run_summaries: runs,
    })
}

fn run_all(plan: &ExperimentPlan) -> Result<EnsembleResult> {
    let start = start_process(plan)?;
    let norm = NormalizerTable::build(start.table())?;
    let runs = (0..plan.runs)
        .into_par_iter()
        .map(|i| run_one(plan, &start, &norm, i).map_err(|e| (i, e)))
        .collect::<std::result::Result<Vec<_>, _>>();
    let runs = match runs {
        Ok(r) => r,
        Err((run, source)) => {
            return Err(HarnessError::RunFailed {
                run,
                source: Box::new(source),
            })
        }
    };
    fold(plan, &start, &norm, runs)
}

/// Executes the plan's runs in parallel and folds them in run order, so
/// the result depends only on the plan.
pub fn run_ensemble(plan: &ExperimentPlan) -> Result<EnsembleResult> {
    match plan.config.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(|| run_all(plan)),
        None => run_all(plan),
    }
}
