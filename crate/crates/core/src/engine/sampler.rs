use rand::Rng;

use super::{EngineError, Result};
use crate::multigraph::NodeId;

/// Fenwick tree over node degrees: point update, append and weighted index
/// lookup in `O(log n)`, full rebuild in `O(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSampler {
    // 1-based Fenwick array; tree[0] is unused.
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
    // Weights zeroed during a without-replacement batch.
    removed: Vec<(usize, u64)>,
    // Guide table for large batches: cum[i] is the prefix sum before node
    // i, and guide[b] the node holding offset b << shift.
    cum: Vec<u64>,
    guide: Vec<u32>,
}

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

impl DegreeSampler {
    pub fn with_capacity(capacity: usize) -> Self {
        let mut tree = Vec::with_capacity(capacity + 1);
        tree.push(0);
        DegreeSampler {
            tree,
            weights: Vec::with_capacity(capacity),
            total: 0,
            removed: Vec::new(),
            cum: Vec::new(),
            guide: Vec::new(),
        }
    }

    pub fn from_weights(weights: &[u64]) -> Self {
        let mut s = Self::with_capacity(weights.len());
        s.weights.extend_from_slice(weights);
        s.rebuild_tree();
        s
    }

    fn rebuild_tree(&mut self) {
        let n = self.weights.len();
        self.tree.clear();
        self.tree.push(0);
        self.tree.extend_from_slice(&self.weights);
        for i in 1..=n {
            let parent = i + lowbit(i);
            if parent <= n {
                self.tree[parent] += self.tree[i];
            }
        }
        self.total = self.weights.iter().sum();
    }

    /// Replaces all weights; `weights.len()` may differ from the current length.
    pub fn rebuild(&mut self, weights: &[u64]) {
        self.weights.clear();
        self.weights.extend_from_slice(weights);
        self.rebuild_tree();
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn weight(&self, index: usize) -> u64 {
        self.weights[index]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    fn prefix(&self, mut i: usize) -> u64 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= lowbit(i);
        }
        s
    }

    pub fn push(&mut self, w: u64) {
        self.weights.push(w);
        let i = self.weights.len();
        let covered = self.prefix(i - 1) - self.prefix(i - lowbit(i));
        self.tree.push(w + covered);
        self.total += w;
    }

    /// Adds `delta` to the weight at zero-based `index`.
    pub fn add(&mut self, index: usize, delta: u64) {
        self.weights[index] += delta;
        self.total += delta;
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += lowbit(i);
        }
    }

    fn sub(&mut self, index: usize, delta: u64) {
        self.weights[index] -= delta;
        self.total -= delta;
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] -= delta;
            i += lowbit(i);
        }
    }

    /// Zero-based index `i` with `prefix(i) ≤ r < prefix(i + 1)`; requires `r < total`.
    #[inline]
    pub fn find(&self, mut r: u64) -> usize {
        debug_assert!(r < self.total);
        let n = self.weights.len();
        let mut pos = 0usize;
        let mut step = if n == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - n.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= r {
                pos = next;
                r -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }

    /// Builds the guide table with about `buckets` equal-width buckets over
    /// `0..total`; returns the bucket shift. `O(n + buckets)`.
    fn build_guide(&mut self, buckets: usize) -> u32 {
        let n = self.weights.len();
        self.cum.clear();
        self.cum.reserve(n + 1);
        let mut acc = 0;
        self.cum.push(0);
        for &w in &self.weights {
            acc += w;
            self.cum.push(acc);
        }
        let shift =
            (u64::BITS - (self.total - 1).leading_zeros()).saturating_sub(usize::BITS - buckets.leading_zeros());
        let nb = ((self.total - 1) >> shift) as usize + 1;
        self.guide.clear();
        self.guide.reserve(nb);
        let mut i = 0;
        for b in 0..nb as u64 {
            let lo = b << shift;
            while self.cum[i + 1] <= lo {
                i += 1;
            }
            self.guide.push(i as u32);
        }
        shift
    }

    /// Same answer as `find`, via the guide table.
    #[inline]
    fn guided_find(&self, r: u64, shift: u32) -> usize {
        let mut i = self.guide[(r >> shift) as usize] as usize;
        while self.cum[i + 1] <= r {
            i += 1;
        }
        i
    }

    /// `k` independent degree-proportional draws; weights are not changed.
    /// Large batches go through a guide table instead of the tree.
    pub fn sample_with_replacement<R: Rng + ?Sized>(
        &mut self,
        k: usize,
        rng: &mut R,
        out: &mut Vec<NodeId>,
    ) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        if self.total == 0 {
            return Err(EngineError::EmptyGraph);
        }
        out.reserve(k);
        let n = self.len();
        if (k as f64) * (n as f64).log2() > n as f64 {
            let shift = self.build_guide(k);
            for _ in 0..k {
                let r = rng.random_range(0..self.total);
                out.push(self.guided_find(r, shift) as NodeId + 1);
            }
        } else {
            for _ in 0..k {
                let r = rng.random_range(0..self.total);
                out.push(self.find(r) as NodeId + 1);
            }
        }
        Ok(())
    }

    /// `k` distinct nodes by successive weighted draws, each among the nodes
    /// not yet chosen. Weights are restored before returning.
    pub fn sample_without_replacement<R: Rng + ?Sized>(
        &mut self,
        k: usize,
        rng: &mut R,
        out: &mut Vec<NodeId>,
    ) -> Result<()> {
        if k > self.len() {
            return Err(EngineError::Infeasible {
                k: k as u64,
                nodes: self.len() as u64,
                t: None,
            });
        }
        let start = out.len();
        let mut outcome = Ok(());
        for _ in 0..k {
            if self.total == 0 {
                outcome = Err(EngineError::Infeasible {
                    k: k as u64,
                    nodes: (out.len() - start) as u64,
                    t: None,
                });
                break;
            }
            let r = rng.random_range(0..self.total);
            let idx = self.find(r);
            out.push(idx as NodeId + 1);
            let w = self.weights[idx];
            self.sub(idx, w);
            self.removed.push((idx, w));
        }
        while let Some((idx, w)) = self.removed.pop() {
            self.add(idx, w);
        }
        if outcome.is_err() {
            out.truncate(start);
        }
        outcome
    }
}
