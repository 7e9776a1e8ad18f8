//! Normalizer `A(t)`, the degree martingale `X_u(t) = d_u(t)/A(t)`, its
//! L2 accumulator and the short-tail diagnostic.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::engine::Trajectory;
use crate::growth::GrowthTable;
use crate::multigraph::NodeId;
use crate::rational::Rational;
use crate::stats::{self, CompensatedSum};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MartingaleError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trajectory is missing the record for step t = {0}")]
    MissingRecord(u64),
    #[error("runs come from different configurations")]
    MixedConfigs,
}

pub type Result<T> = std::result::Result<T, MartingaleError>;

/// `A(t) = Π_{j=1}^{t−1} (1 + f(j)/2F(j))`, held as a compensated log-sum.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizerTable {
    // ln_a[t] for t in 1..=horizon; slot 0 unused.
    ln_a: Vec<f64>,
    big_f: Vec<u64>,
}

impl NormalizerTable {
    pub fn build(table: &GrowthTable) -> Result<Self> {
        let horizon = table.horizon() as usize;
        let f = table.f_values();
        let big_f = table.prefix_values();
        let mut ln_a = vec![f64::NAN; horizon + 1];
        let mut acc = CompensatedSum::new();
        if horizon >= 1 {
            ln_a[1] = 0.0;
        }
        for j in 1..horizon {
            if f[j] > 0 {
                if big_f[j] == 0 {
                    return Err(MartingaleError::Domain(format!("F({j}) = 0 with f({j}) > 0")));
                }
                acc.add((f[j] as f64 / (2 * big_f[j]) as f64).ln_1p());
            }
            ln_a[j + 1] = acc.value();
        }
        Ok(NormalizerTable {
            ln_a,
            big_f: big_f.to_vec(),
        })
    }

    pub fn horizon(&self) -> u64 {
        self.ln_a.len() as u64 - 1
    }

    pub fn ln_a(&self, t: u64) -> Result<f64> {
        if t == 0 || t > self.horizon() {
            return Err(MartingaleError::Domain(format!(
                "A(t) is defined for 1 ≤ t ≤ {}, got {t}",
                self.horizon()
            )));
        }
        Ok(self.ln_a[t as usize])
    }

    pub fn a(&self, t: u64) -> Result<f64> {
        self.ln_a(t).map(f64::exp)
    }

    /// `A(t) / √F(t)`.
    pub fn ratio_to_sqrt_prefix(&self, t: u64) -> Result<f64> {
        let a = self.a(t)?;
        let f = self.big_f[t as usize];
        if f == 0 {
            return Err(MartingaleError::Domain(format!("F({t}) = 0")));
        }
        Ok(a / (f as f64).sqrt())
    }

    pub fn points(&self, checkpoints: &[u64]) -> Result<Vec<NormalizerPoint>> {
        checkpoints
            .iter()
            .map(|&t| {
                Ok(NormalizerPoint {
                    t,
                    a: self.a(t)?,
                    big_f: self.big_f[t as usize],
                    ratio: self.ratio_to_sqrt_prefix(t)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerPoint {
    pub t: u64,
    pub a: f64,
    #[serde(rename = "F")]
    pub big_f: u64,
    pub ratio: f64,
}

/// `E(U | d) = d·f/2F`.
pub fn mu_expected_increment(d: u64, f: u64, big_f: u64) -> f64 {
    if d == 0 {
        return 0.0;
    }
    d as f64 * f as f64 / (2 * big_f) as f64
}

/// `V(U | d) = (d·f/2F)(1 − d/2F)`.
pub fn conditional_variance(d: u64, f: u64, big_f: u64) -> Result<f64> {
    let two_f = 2 * big_f;
    if d > two_f {
        return Err(MartingaleError::Domain(format!("degree {d} exceeds 2F = {two_f}")));
    }
    if d == 0 || f == 0 {
        return Ok(0.0);
    }
    Ok(mu_expected_increment(d, f, big_f) * ((two_f - d) as f64 / two_f as f64))
}

pub fn x_value(d: u64, a: f64) -> f64 {
    d as f64 / a
}

fn check_alpha(alpha: Rational) -> Result<()> {
    if alpha <= Rational::new(1, 2) || alpha >= Rational::from_integer(1) {
        return Err(MartingaleError::Config(format!(
            "alpha must lie in (1/2, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// `U < t^α`, decided exactly as `U^q < t^p` for `α = p/q`.
pub fn sh_check(u: u64, t: u64, alpha: Rational) -> Result<bool> {
    check_alpha(alpha)?;
    let (p, q) = (alpha.numer() as u32, alpha.denom() as u32);
    if let (Some(lhs), Some(rhs)) = ((u as u128).checked_pow(q), (t as u128).checked_pow(p)) {
        return Ok(lhs < rhs);
    }
    Ok(BigUint::from(u).pow(q) < BigUint::from(t).pow(p))
}

/// Running sums `Σ V(U(s+1) | d(s)) / A(s+1)²`, one series per tracked node,
/// one entry per recorded step.
pub fn l2_accumulate(trajectory: &Trajectory, norm: &NormalizerTable) -> Result<Vec<Vec<f64>>> {
    let k = trajectory.tracked.len();
    let mut out = vec![Vec::with_capacity(trajectory.steps.len()); k];
    let mut acc = vec![CompensatedSum::new(); k];
    let first = trajectory.steps.first().map(|s| s.t);
    for (i, s) in trajectory.steps.iter().enumerate() {
        let expected = first.unwrap() + i as u64;
        if s.t != expected {
            return Err(MartingaleError::MissingRecord(expected));
        }
        let a_next = norm.a(s.t + 1)?;
        for (j, &d) in s.degrees.iter().enumerate() {
            acc[j].add(conditional_variance(d, s.f_t, s.big_f_t)? / (a_next * a_next));
            out[j].push(acc[j].value());
        }
    }
    if let Some(last) = trajectory.steps.last() {
        if last.t + 1 != trajectory.final_t {
            return Err(MartingaleError::MissingRecord(last.t + 1));
        }
    }
    Ok(out)
}

/// Per-run statistics for one tracked node, fed step by step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedNodeStats {
    pub node: NodeId,
    pub alpha: Rational,
    /// Steps `t` with `lo ≤ t ≤ hi` are checked for short tails.
    pub sh_window: (u64, u64),
    pub checkpoints: Vec<u64>,
    pub x_series: Vec<f64>,
    /// L2 running sum at each checkpoint.
    pub l2_series: Vec<f64>,
    pub x_hat: Option<f64>,
    pub l2_sum: f64,
    pub sh_violations: u64,
    pub max_increment: u64,
    #[serde(skip)]
    l2_acc: CompensatedSum,
}

impl TrackedNodeStats {
    pub fn new(node: NodeId, alpha: Rational, sh_window: (u64, u64)) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(TrackedNodeStats {
            node,
            alpha,
            sh_window,
            checkpoints: Vec::new(),
            x_series: Vec::new(),
            l2_series: Vec::new(),
            x_hat: None,
            l2_sum: 0.0,
            sh_violations: 0,
            max_increment: 0,
            l2_acc: CompensatedSum::new(),
        })
    }

    /// Records the step `G(t) → G(t + 1)` where the node had degree `d` and gained `u`.
    pub fn observe_step(&mut self, t: u64, d: u64, u: u64, f: u64, big_f: u64, norm: &NormalizerTable) -> Result<()> {
        let a_next = norm.a(t + 1)?;
        self.l2_acc.add(conditional_variance(d, f, big_f)? / (a_next * a_next));
        self.l2_sum = self.l2_acc.value();
        self.max_increment = self.max_increment.max(u);
        if t >= self.sh_window.0 && t <= self.sh_window.1 && !sh_check(u, t, self.alpha)? {
            self.sh_violations += 1;
        }
        Ok(())
    }

    /// Records `X_u(t)` given the current degree.
    pub fn checkpoint(&mut self, t: u64, d: u64, norm: &NormalizerTable) -> Result<()> {
        self.checkpoints.push(t);
        self.x_series.push(x_value(d, norm.a(t)?));
        self.l2_series.push(self.l2_sum);
        Ok(())
    }

    pub fn finish(&mut self, t: u64, d: u64, norm: &NormalizerTable) -> Result<()> {
        self.x_hat = Some(x_value(d, norm.a(t)?));
        Ok(())
    }

    /// L2 sum at the latest checkpoint `≤ t`.
    pub fn l2_at(&self, t: u64) -> Option<f64> {
        let i = self.checkpoints.partition_point(|&c| c <= t);
        (i > 0).then(|| self.l2_series[i - 1])
    }
}

/// End state of one run, enough to estimate `x_u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalState {
    pub signature: String,
    pub tracked: Vec<NodeId>,
    pub final_t: u64,
    pub final_degrees: Vec<u64>,
}

impl From<&Trajectory> for FinalState {
    fn from(t: &Trajectory) -> Self {
        FinalState {
            signature: t.signature.clone(),
            tracked: t.tracked.clone(),
            final_t: t.final_t,
            final_degrees: t.final_degrees.clone(),
        }
    }
}

pub const SUMMARY_QUANTILES: [f64; 9] = [0.001, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XLimitSummary {
    pub node: NodeId,
    pub runs: usize,
    /// `X_u(T)` per run, in run order.
    pub x_hat: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub quantiles: Vec<(f64, f64)>,
    pub threshold: Option<f64>,
    pub fraction_below: Option<f64>,
}

impl XLimitSummary {
    pub fn from_samples(node: NodeId, x_hat: Vec<f64>, threshold: Option<f64>) -> Self {
        let mut sorted = x_hat.clone();
        sorted.sort_by(f64::total_cmp);
        let (min, max) = match (sorted.first(), sorted.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (f64::NAN, f64::NAN),
        };
        let quantiles = if sorted.is_empty() {
            Vec::new()
        } else {
            SUMMARY_QUANTILES
                .iter()
                .map(|&q| (q, stats::quantile_sorted(&sorted, q)))
                .collect()
        };
        let fraction_below =
            threshold.map(|th| x_hat.iter().filter(|&&x| x < th).count() as f64 / x_hat.len().max(1) as f64);
        XLimitSummary {
            node,
            runs: x_hat.len(),
            min,
            max,
            mean: stats::mean(&x_hat),
            std: stats::sample_std(&x_hat),
            quantiles,
            threshold,
            fraction_below,
            x_hat,
        }
    }
}

/// `x̂_u = X_u(T)` per run, summarised per tracked node.
pub fn estimate_x_limits(
    runs: &[FinalState],
    norm: &NormalizerTable,
    threshold: Option<f64>,
) -> Result<Vec<XLimitSummary>> {
    let Some(first) = runs.first() else {
        return Ok(Vec::new());
    };
    if runs
        .iter()
        .any(|r| r.signature != first.signature || r.tracked != first.tracked || r.final_t != first.final_t)
    {
        return Err(MartingaleError::MixedConfigs);
    }
    let a = norm.a(first.final_t)?;
    Ok(first
        .tracked
        .iter()
        .enumerate()
        .map(|(j, &node)| {
            let xs = runs.iter().map(|r| x_value(r.final_degrees[j], a)).collect();
            XLimitSummary::from_samples(node, xs, threshold)
        })
        .collect())
}
