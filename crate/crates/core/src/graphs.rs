//! Weighted undirected communication graphs with 1-based node ids.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Connected, undirected graph with strictly positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n_agents: usize,
    /// keyed by `(min, max)`, 1-based
    weights: BTreeMap<(usize, usize), f64>,
    /// 0-based adjacency with weights, sorted by neighbor
    adjacency: Vec<Vec<(usize, f64)>>,
    kind: GraphKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GraphKind {
    Cycle,
    Circulant(usize),
    Edges,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

fn check_weight(w: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return input(format!("edge weights must be positive and finite, got {w}"));
    }
    Ok(())
}

/// Successor of `i` on the ring `1..=n`.
pub fn next_index(i: usize, n: usize) -> usize {
    i % n + 1
}

/// Predecessor of `i` on the ring `1..=n`.
pub fn prev_index(i: usize, n: usize) -> usize {
    (i + n - 2) % n + 1
}

impl NetworkGraph {
    /// Builds a graph from `(i, j, w)` triples. Rejects self-loops, duplicate
    /// edges, bad ids, nonpositive weights and disconnected graphs.
    pub fn from_edges(n_agents: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let g = Self::build(n_agents, edges, GraphKind::Edges)?;
        if !g.is_connected() {
            return input("graph is not connected");
        }
        Ok(g)
    }

    /// Like [`from_edges`](Self::from_edges) but accepts disconnected graphs.
    pub fn from_edges_unchecked_connectivity(n_agents: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::build(n_agents, edges, GraphKind::Edges)
    }

    fn build(n_agents: usize, edges: &[(usize, usize, f64)], kind: GraphKind) -> Result<Self> {
        if n_agents == 0 {
            return input("graph needs at least one node");
        }
        let mut weights = BTreeMap::new();
        for &(i, j, w) in edges {
            if i == 0 || j == 0 || i > n_agents || j > n_agents {
                return input(format!("edge {{{i},{j}}} out of range 1..={n_agents}"));
            }
            if i == j {
                return input(format!("self-loop at node {i}"));
            }
            check_weight(w)?;
            if weights.insert(key(i, j), w).is_some() {
                return input(format!("duplicate edge {{{i},{j}}}"));
            }
        }
        let mut adjacency = vec![Vec::new(); n_agents];
        for (&(i, j), &w) in &weights {
            adjacency[i - 1].push((j - 1, w));
            adjacency[j - 1].push((i - 1, w));
        }
        for a in &mut adjacency {
            a.sort_by_key(|&(j, _)| j);
        }
        Ok(Self { n_agents, weights, adjacency, kind })
    }

    /// Cycle `H_N` with `w_{i,i+1} = weights[i-1]`; an empty slice means unit weights.
    pub fn cycle(n: usize, weights: &[f64]) -> Result<Self> {
        if n < 3 {
            return input(format!("cycle graph needs N >= 3, got {n}"));
        }
        let ws: Vec<f64> = match weights.len() {
            0 => vec![1.0; n],
            1 => vec![weights[0]; n],
            l if l == n => weights.to_vec(),
            l => return input(format!("cycle of {n} nodes needs {n} weights, got {l}")),
        };
        let edges: Vec<_> = (1..=n).map(|i| (i, next_index(i, n), ws[i - 1])).collect();
        Self::build(n, &edges, GraphKind::Cycle)
    }

    /// Circulant graph `F_{N,k}`: `{i, j}` is an edge when the cyclic distance is at most `k`.
    pub fn circulant(n: usize, k: usize, w: f64) -> Result<Self> {
        if k == 0 {
            return input("circulant graph needs k >= 1");
        }
        if 2 * k >= n {
            return input(format!("circulant graph needs 2k < N, got N={n}, k={k}"));
        }
        check_weight(w)?;
        let mut edges = Vec::with_capacity(n * k);
        for i in 1..=n {
            for s in 1..=k {
                edges.push((i, (i - 1 + s) % n + 1, w));
            }
        }
        let kind = if k == 1 { GraphKind::Cycle } else { GraphKind::Circulant(k) };
        Self::build(n, &edges, kind)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_edges(&self) -> usize {
        self.weights.len()
    }

    /// Edges as `(i, j, w)` with `i < j`, 1-based.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.weights.get(&key(i, j)).copied()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.values().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn neighbors(&self, i: usize) -> Result<BTreeSet<usize>> {
        if i == 0 || i > self.n_agents {
            return input(format!("node {i} out of range 1..={}", self.n_agents));
        }
        Ok(self.adjacency[i - 1].iter().map(|&(j, _)| j + 1).collect())
    }

    /// 0-based adjacency list used by the flows.
    pub(crate) fn adjacency(&self) -> &[Vec<(usize, f64)>] {
        &self.adjacency
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        Ok(self.neighbors(i)?.len())
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_agents];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n_agents
    }

    /// True if the graph is exactly a cycle `1 - 2 - ... - N - 1`.
    pub fn is_cycle(&self) -> bool {
        self.kind == GraphKind::Cycle
            || (self.n_agents >= 3 && self.n_edges() == self.n_agents && self.contains_cycle_order(&self.natural_order()))
    }

    /// Whether consecutive entries of `order` (wrapping) are all joined by edges.
    pub fn contains_cycle_order(&self, order: &[usize]) -> bool {
        let k = order.len();
        if k < 3 {
            return false;
        }
        let distinct: BTreeSet<_> = order.iter().collect();
        distinct.len() == k && (0..k).all(|i| self.weight(order[i], order[(i + 1) % k]).is_some())
    }

    /// The ring ordering `1..=N`.
    pub fn natural_order(&self) -> Vec<usize> {
        (1..=self.n_agents).collect()
    }

    /// Designated Hamiltonian cycle: the natural ordering when every edge
    /// `{i, i+1}` is present (cycles and circulants), otherwise `None`.
    pub fn default_cycle_order(&self) -> Option<Vec<usize>> {
        let order = self.natural_order();
        self.contains_cycle_order(&order).then_some(order)
    }

    /// Weights `w_{o_i, o_{i+1}}` along a designated cycle.
    pub fn cycle_weights(&self, order: &[usize]) -> Result<Vec<f64>> {
        let k = order.len();
        (0..k)
            .map(|i| {
                let (a, b) = (order[i], order[(i + 1) % k]);
                self.weight(a, b).ok_or_else(|| crate::Error::Input(format!("{{{a},{b}}} is not an edge")))
            })
            .collect()
    }
}

/// JSON description of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(rename = "type")]
    pub kind: GraphType,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphType {
    Cycle,
    Circulant,
    Edges,
}

impl GraphSpec {
    pub fn build(&self) -> Result<NetworkGraph> {
        match self.kind {
            GraphType::Cycle => NetworkGraph::cycle(self.n, &self.weights),
            GraphType::Circulant => {
                let k = self.k.ok_or_else(|| crate::Error::Input("circulant graph needs `k`".into()))?;
                let w = match self.weights[..] {
                    [] => 1.0,
                    [w] => w,
                    _ => return input("circulant graph takes a single uniform weight"),
                };
                NetworkGraph::circulant(self.n, k, w)
            }
            GraphType::Edges => NetworkGraph::from_edges(self.n, &self.edges),
        }
    }
}

impl From<&NetworkGraph> for GraphSpec {
    fn from(g: &NetworkGraph) -> Self {
        GraphSpec { kind: GraphType::Edges, n: g.n_agents, k: None, weights: vec![], edges: g.edges().collect() }
    }
}
