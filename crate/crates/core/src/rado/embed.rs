use rand::seq::SliceRandom;
use rand::Rng;

use super::{RadoError, Result};
use crate::multigraph::{Multigraph, NodeId};

pub const MAX_PATTERN_NODES: usize = 8;

/// True when `map[i]` (the image of pattern node `i + 1`) is injective and
/// preserves every pairwise multiplicity, zeros included.
pub fn verify_embedding(host: &Multigraph, pattern: &Multigraph, map: &[NodeId]) -> Result<bool> {
    if map.len() != pattern.node_count() {
        return Ok(false);
    }
    for i in 0..map.len() {
        for j in 0..i {
            if map[i] == map[j] {
                return Ok(false);
            }
            let pm = pattern.multiplicity(i as NodeId + 1, j as NodeId + 1)?;
            if host.multiplicity(map[i], map[j])? != pm {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct Search<'a, R: ?Sized> {
    host: &'a Multigraph,
    // pattern multiplicities, k × k
    pm: Vec<Vec<u32>>,
    order: Vec<usize>,
    map: Vec<NodeId>,
    budget: u64,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Search<'_, R> {
    fn fits(&self, depth: usize, v: NodeId) -> Result<bool> {
        let p = self.order[depth];
        for &q in &self.order[..depth] {
            let w = self.map[q];
            if w == v || self.host.multiplicity(v, w)? != self.pm[p][q] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Candidate images for `order[depth]`, in random order. If the node
    /// has a positive multiplicity to an already placed node, only the host
    /// neighbours with that multiplicity can work.
    fn candidates(&mut self, depth: usize) -> Result<Vec<NodeId>> {
        let p = self.order[depth];
        let anchor = self.order[..depth].iter().copied().find(|&q| self.pm[p][q] > 0);
        let mut c: Vec<NodeId> = match anchor {
            Some(q) => {
                let m = self.pm[p][q];
                let mut c: Vec<NodeId> = self
                    .host
                    .neighbours(self.map[q])?
                    .filter(|&(_, k)| k == m)
                    .map(|(v, _)| v)
                    .collect();
                // Neighbour maps iterate in hash order; sort first so the
                // shuffle alone decides the order.
                c.sort_unstable();
                c
            }
            None => (1..=self.host.node_count() as NodeId).collect(),
        };
        c.shuffle(self.rng);
        Ok(c)
    }

    fn extend(&mut self, depth: usize) -> Result<bool> {
        if depth == self.order.len() {
            return Ok(true);
        }
        for v in self.candidates(depth)? {
            if self.budget == 0 {
                return Ok(false);
            }
            self.budget -= 1;
            if self.fits(depth, v)? {
                self.map[self.order[depth]] = v;
                if self.extend(depth + 1)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Randomized backtracking search for an injection `pattern → host` that
/// preserves all multiplicities. `attempt_budget` bounds the number of
/// candidate checks; `None` means nothing was found within it, not that no
/// embedding exists. The result lists the image of pattern nodes `1..=k`.
pub fn embed_multigraph<R: Rng + ?Sized>(
    host: &Multigraph,
    pattern: &Multigraph,
    rng: &mut R,
    attempt_budget: u64,
) -> Result<Option<Vec<NodeId>>> {
    let k = pattern.node_count();
    if k > MAX_PATTERN_NODES {
        return Err(RadoError::PatternTooLarge(k));
    }
    host.adjacency()?;
    let mut pm = vec![vec![0u32; k]; k];
    for (u, v, m) in pattern.edge_multiplicities()? {
        pm[u as usize - 1][v as usize - 1] = m;
        pm[v as usize - 1][u as usize - 1] = m;
    }
    if k > host.node_count() {
        return Ok(None);
    }
    // Place high-degree pattern nodes first so later nodes are anchored.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(pattern.degrees()[i]));
    let mut s = Search {
        host,
        pm,
        order,
        map: vec![0; k],
        budget: attempt_budget,
        rng,
    };
    Ok(s.extend(0)?.then_some(s.map))
}
