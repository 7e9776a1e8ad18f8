use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{RadoError, Result};
use crate::multigraph::{Multigraph, NodeId, WitnessRequest};

/// Satisfied fraction for requests of one `(size, Σm)` class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageClass {
    pub size: usize,
    pub total_multiplicity: u64,
    pub sampled: u64,
    pub satisfied: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub n_max: usize,
    pub m_max: u32,
    pub sampled: u64,
    pub satisfied: u64,
    pub classes: Vec<CoverageClass>,
    /// Requests that found no witness, in sampling order.
    pub unsatisfied: Vec<WitnessRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub node_count: usize,
    /// Every pair of distinct nodes is related at level 0; holds for any store.
    pub a0_ok: bool,
    /// No loops and multiplicities stored symmetrically.
    pub a1_ok: bool,
    /// Level monotonicity: with multiplicity encoding this reduces to every
    /// stored multiplicity being at least 1.
    pub a2_ok: bool,
    /// Every pair has finite multiplicity; the maximum is reported.
    pub a3_ok: bool,
    pub max_multiplicity: u32,
    pub loops: u64,
    pub asymmetric_entries: u64,
    pub zero_entries: u64,
    /// Stored degrees equal the row sums of the adjacency.
    pub degrees_consistent: bool,
    pub a4_coverage: Option<CoverageReport>,
}

impl AxiomReport {
    pub fn basic_ok(&self) -> bool {
        self.a0_ok && self.a1_ok && self.a2_ok && self.a3_ok && self.degrees_consistent
    }
}

/// Structural checks behind the first four axioms.
pub fn check_basic_axioms(g: &Multigraph) -> Result<AxiomReport> {
    let adj = g.adjacency()?;
    let (mut loops, mut asym, mut zeros, mut max_mult) = (0u64, 0u64, 0u64, 0u32);
    let mut degrees_consistent = true;
    for (i, row) in adj.iter().enumerate() {
        let u = i as NodeId + 1;
        let mut row_sum = 0u64;
        for (&v, &k) in row {
            row_sum += k as u64;
            max_mult = max_mult.max(k);
            if v == u {
                loops += 1;
                continue;
            }
            if k == 0 {
                zeros += 1;
            }
            let back = adj.get(v as usize - 1).and_then(|r| r.get(&u)).copied();
            if back != Some(k) {
                asym += 1;
            }
        }
        degrees_consistent &= row_sum == g.degrees()[i];
    }
    Ok(AxiomReport {
        node_count: g.node_count(),
        a0_ok: true,
        a1_ok: loops == 0 && asym == 0,
        a2_ok: zeros == 0,
        a3_ok: true,
        max_multiplicity: max_mult,
        loops,
        asymmetric_entries: asym,
        zero_entries: zeros,
        degrees_consistent,
        a4_coverage: None,
    })
}

/// Samples `sample_count` witness requests: size uniform in `1..=n_max`,
/// distinct nodes uniform, each `m_i` uniform in `0..=m_max`.
pub fn witness_coverage<R: Rng + ?Sized>(
    g: &Multigraph,
    n_max: usize,
    m_max: u32,
    sample_count: u64,
    rng: &mut R,
) -> Result<CoverageReport> {
    g.adjacency()?;
    if n_max == 0 {
        return Err(RadoError::Config("n_max must be at least 1".into()));
    }
    if n_max > g.node_count() {
        return Err(RadoError::Config(format!(
            "requests of size {n_max} need at least that many nodes; graph has {}",
            g.node_count()
        )));
    }
    let mut classes: BTreeMap<(usize, u64), (u64, u64)> = BTreeMap::new();
    let mut satisfied = 0;
    let mut unsatisfied = Vec::new();
    for _ in 0..sample_count {
        let size = rng.random_range(1..=n_max);
        let nodes = index::sample(rng, g.node_count(), size);
        let pairs = nodes
            .iter()
            .map(|i| (i as NodeId + 1, rng.random_range(0..=m_max)))
            .collect();
        let w = WitnessRequest::new(pairs)?;
        let hit = g.witness_satisfied(&w)?.is_some();
        let e = classes.entry((size, w.total_multiplicity())).or_default();
        e.0 += 1;
        if hit {
            e.1 += 1;
            satisfied += 1;
        } else {
            unsatisfied.push(w);
        }
    }
    Ok(CoverageReport {
        n_max,
        m_max,
        sampled: sample_count,
        satisfied,
        classes: classes
            .into_iter()
            .map(|((size, total_multiplicity), (sampled, sat))| CoverageClass {
                size,
                total_multiplicity,
                sampled,
                satisfied: sat,
                fraction: sat as f64 / sampled as f64,
            })
            .collect(),
        unsatisfied,
    })
}
