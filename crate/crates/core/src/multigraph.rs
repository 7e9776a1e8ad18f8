//! Finite loopless multigraphs stored as edge multiplicities.
//!
//! Nodes are numbered `1..=n`. Edge identity and direction are not kept:
//! only the number of parallel edges between each unordered pair. In
//! [`StorageMode::DegreesOnly`] the adjacency is dropped entirely, which is
//! what long martingale runs use since their edge multisets grow
//! quadratically.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("loop edge at node {0}")]
    Loop(NodeId),
    #[error("node {node} is out of range (graph has {count} nodes)")]
    NodeOutOfRange { node: NodeId, count: usize },
    #[error("seed graph is invalid: node {0} is isolated")]
    IsolatedNode(NodeId),
    #[error("operation requires full adjacency storage")]
    DegreesOnly,
    #[error("invalid witness request: {0}")]
    InvalidRequest(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageMode {
    #[default]
    Full,
    DegreesOnly,
}

/// A demand for a node joined to each `u_i` by exactly `m_i` edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(NodeId, u32)>", into = "Vec<(NodeId, u32)>")]
pub struct WitnessRequest {
    pairs: Vec<(NodeId, u32)>,
}

impl WitnessRequest {
    pub fn new(pairs: Vec<(NodeId, u32)>) -> Result<Self> {
        for (i, &(u, _)) in pairs.iter().enumerate() {
            if u == 0 {
                return Err(GraphError::InvalidRequest("node ids start at 1".into()));
            }
            if pairs[..i].iter().any(|&(v, _)| v == u) {
                return Err(GraphError::InvalidRequest(format!("node {u} listed twice")));
            }
        }
        Ok(WitnessRequest { pairs })
    }

    pub fn pairs(&self) -> &[(NodeId, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.pairs.iter().map(|&(_, m)| m as u64).sum()
    }
}

impl TryFrom<Vec<(NodeId, u32)>> for WitnessRequest {
    type Error = GraphError;

    fn try_from(pairs: Vec<(NodeId, u32)>) -> Result<Self> {
        WitnessRequest::new(pairs)
    }
}

impl From<WitnessRequest> for Vec<(NodeId, u32)> {
    fn from(w: WitnessRequest) -> Self {
        w.pairs
    }
}

/// Per-node neighbour map: neighbour → multiplicity (always ≥ 1).
pub(crate) type NeighbourMap = FxHashMap<NodeId, u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    degrees: Vec<u64>,
    total_edges: u64,
    // adjacency[u - 1] maps each neighbour of u to its multiplicity; the
    // entry is mirrored at adjacency[v - 1].
    adjacency: Option<Vec<NeighbourMap>>,
}

impl Default for Multigraph {
    fn default() -> Self {
        Multigraph::empty(0)
    }
}

impl Multigraph {
    /// `n` nodes, no edges, full storage.
    pub fn empty(n: usize) -> Self {
        Multigraph {
            degrees: vec![0; n],
            total_edges: 0,
            adjacency: Some(vec![NeighbourMap::default(); n]),
        }
    }

    /// Builds a process seed on `1..=v_prime`; every node must have an edge.
    pub fn new_seed(edges: &[(NodeId, NodeId)], v_prime: usize) -> Result<Self> {
        let g = Self::from_edges(edges, v_prime)?;
        if let Some(i) = g.degrees.iter().position(|&d| d == 0) {
            return Err(GraphError::IsolatedNode(i as NodeId + 1));
        }
        Ok(g)
    }

    /// Builds a graph from a multiset of edges; isolated nodes are allowed.
    pub fn from_edges(edges: &[(NodeId, NodeId)], n: usize) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edges(u, v, 1)?;
        }
        Ok(g)
    }

    fn check_node(&self, u: NodeId) -> Result<()> {
        if u == 0 || u as usize > self.degrees.len() {
            return Err(GraphError::NodeOutOfRange {
                node: u,
                count: self.degrees.len(),
            });
        }
        Ok(())
    }

    /// Adds `k` parallel edges between `u` and `v`.
    pub fn add_edges(&mut self, u: NodeId, v: NodeId, k: u32) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(GraphError::Loop(u));
        }
        if k == 0 {
            return Ok(());
        }
        if let Some(adj) = self.adjacency.as_mut() {
            *adj[u as usize - 1].entry(v).or_insert(0) += k;
            *adj[v as usize - 1].entry(u).or_insert(0) += k;
        }
        self.degrees[u as usize - 1] += k as u64;
        self.degrees[v as usize - 1] += k as u64;
        self.total_edges += k as u64;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn total_edges(&self) -> u64 {
        self.total_edges
    }

    /// Degrees indexed from zero: `degrees()[u - 1]` is the degree of `u`.
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn degree(&self, u: NodeId) -> Result<u64> {
        self.check_node(u)?;
        Ok(self.degrees[u as usize - 1])
    }

    pub fn storage_mode(&self) -> StorageMode {
        if self.adjacency.is_some() {
            StorageMode::Full
        } else {
            StorageMode::DegreesOnly
        }
    }

    /// Drops the adjacency, keeping degrees and the edge count.
    pub fn into_degrees_only(mut self) -> Self {
        self.adjacency = None;
        self
    }

    pub fn with_storage(self, mode: StorageMode) -> Self {
        match mode {
            StorageMode::Full => self,
            StorageMode::DegreesOnly => self.into_degrees_only(),
        }
    }

    pub(crate) fn adjacency(&self) -> Result<&[NeighbourMap]> {
        self.adjacency.as_deref().ok_or(GraphError::DegreesOnly)
    }

    /// Neighbours of `u` with their multiplicities, in unspecified order.
    pub fn neighbours(&self, u: NodeId) -> Result<impl Iterator<Item = (NodeId, u32)> + '_> {
        self.check_node(u)?;
        let adj = self.adjacency()?;
        Ok(adj[u as usize - 1].iter().map(|(&v, &k)| (v, k)))
    }

    /// Number of parallel edges between distinct `u` and `v`.
    pub fn multiplicity(&self, u: NodeId, v: NodeId) -> Result<u32> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(GraphError::Loop(u));
        }
        let adj = self.adjacency()?;
        Ok(adj[u as usize - 1].get(&v).copied().unwrap_or(0))
    }

    /// Multiplicity without range or mode checks; callers guarantee both.
    #[inline]
    pub(crate) fn multiplicity_unchecked(adj: &[NeighbourMap], u: NodeId, v: NodeId) -> u32 {
        adj[u as usize - 1].get(&v).copied().unwrap_or(0)
    }

    /// Appends node `n + 1` with one edge to each listed endpoint (repeats
    /// give parallel edges) and returns its id.
    pub fn add_node_with_endpoints(&mut self, endpoints: &[NodeId]) -> Result<NodeId> {
        for &u in endpoints {
            self.check_node(u)?;
        }
        let new = self.degrees.len() as NodeId + 1;
        self.degrees.push(endpoints.len() as u64);
        if let Some(adj) = self.adjacency.as_mut() {
            let mut own = NeighbourMap::default();
            for &u in endpoints {
                *own.entry(u).or_insert(0) += 1;
                *adj[u as usize - 1].entry(new).or_insert(0) += 1;
            }
            adj.push(own);
        }
        for &u in endpoints {
            self.degrees[u as usize - 1] += 1;
        }
        self.total_edges += endpoints.len() as u64;
        Ok(new)
    }

    fn check_request(&self, w: &WitnessRequest) -> Result<&[NeighbourMap]> {
        let adj = self.adjacency()?;
        for &(u, _) in w.pairs() {
            self.check_node(u)?;
        }
        Ok(adj)
    }

    fn is_witness(adj: &[NeighbourMap], w: &WitnessRequest, v: NodeId) -> bool {
        w.pairs()
            .iter()
            .all(|&(u, m)| u != v && Self::multiplicity_unchecked(adj, v, u) == m)
    }

    /// Candidate witnesses in ascending order. When some `m_i > 0` only the
    /// neighbours of that `u_i` can qualify; otherwise every node is scanned.
    fn witness_candidates(&self, adj: &[NeighbourMap], w: &WitnessRequest) -> Vec<NodeId> {
        let anchor = w
            .pairs()
            .iter()
            .filter(|&&(_, m)| m > 0)
            .min_by_key(|&&(u, _)| adj[u as usize - 1].len());
        match anchor {
            Some(&(u, m)) => {
                let mut c: Vec<NodeId> = adj[u as usize - 1]
                    .iter()
                    .filter(|&(_, &k)| k == m)
                    .map(|(&v, _)| v)
                    .collect();
                c.sort_unstable();
                c
            }
            None => (1..=self.degrees.len() as NodeId).collect(),
        }
    }

    /// Smallest node `v ∉ {u_i}` with `multiplicity(v, u_i) = m_i` for all `i`.
    pub fn witness_satisfied(&self, w: &WitnessRequest) -> Result<Option<NodeId>> {
        let adj = self.check_request(w)?;
        Ok(self
            .witness_candidates(adj, w)
            .into_iter()
            .find(|&v| Self::is_witness(adj, w, v)))
    }

    /// Every witness of `w`, ascending.
    pub fn witnesses_all(&self, w: &WitnessRequest) -> Result<Vec<NodeId>> {
        let adj = self.check_request(w)?;
        Ok(self
            .witness_candidates(adj, w)
            .into_iter()
            .filter(|&v| Self::is_witness(adj, w, v))
            .collect())
    }

    /// All stored pairs `(u, v, k)` with `u < v`, sorted.
    pub fn edge_multiplicities(&self) -> Result<Vec<(NodeId, NodeId, u32)>> {
        let adj = self.adjacency()?;
        let mut out = Vec::new();
        for (i, nbrs) in adj.iter().enumerate() {
            let u = i as NodeId + 1;
            let start = out.len();
            out.extend(nbrs.iter().filter(|&(&v, _)| v > u).map(|(&v, &k)| (u, v, k)));
            out[start..].sort_unstable();
        }
        Ok(out)
    }

    /// Text format: `nodes N`, then one `u v k` line per pair with `u < v`.
    pub fn serialize(&self) -> Result<String> {
        let mut s = String::new();
        writeln!(s, "nodes {}", self.node_count()).unwrap();
        for (u, v, k) in self.edge_multiplicities()? {
            writeln!(s, "{u} {v} {k}").unwrap();
        }
        Ok(s)
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| GraphError::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `nodes N` header".into()))?;
        let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["nodes", n] => n
                .parse()
                .map_err(|_| parse_err(hline, format!("bad node count `{n}`")))?,
            _ => return Err(parse_err(hline, format!("expected `nodes N`, found `{header}`"))),
        };
        let mut g = Multigraph::empty(n);
        for (line, content) in lines {
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [u, v, k] = fields.as_slice() else {
                return Err(parse_err(line, format!("expected `u v k`, found `{content}`")));
            };
            let num = |s: &str| -> Result<u32> {
                s.parse()
                    .map_err(|_| parse_err(line, format!("`{s}` is not a non-negative integer")))
            };
            let (u, v, k) = (num(u)?, num(v)?, num(k)?);
            if u == v {
                return Err(GraphError::Loop(u));
            }
            if k == 0 {
                return Err(parse_err(line, "multiplicity must be ≥ 1".into()));
            }
            if g.check_node(u).is_err() || g.check_node(v).is_err() {
                return Err(parse_err(line, format!("node out of range 1..={n}")));
            }
            if g.multiplicity(u, v)? != 0 {
                return Err(parse_err(line, format!("pair {u} {v} listed twice")));
            }
            g.add_edges(u, v, k)?;
        }
        Ok(g)
    }

    /// Inserts a one-sided adjacency entry, bypassing the mirror. Test hook
    /// for fault injection in the axiom checker.
    #[cfg(test)]
    pub(crate) fn insert_one_sided(&mut self, u: NodeId, v: NodeId, k: u32) {
        if let Some(adj) = self.adjacency.as_mut() {
            adj[u as usize - 1].insert(v, k);
        }
    }
}
