//! Undirected simple graphs, the graph families used in the experiments, and
//! combinatorial quantities (Laplacian, connectivity, edge expansion).

mod expansion;
mod io;

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::prng;
use crate::spectral::SymMatrix;

pub use expansion::{edge_expansion, CheegerResult, ExpansionMode, EXACT_EXPANSION_MAX_N};
pub use io::{read_edge_list, write_edge_list};

/// An undirected simple graph on vertices `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted lexicographically.
/// Values are immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.n, raw.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl Graph {
    /// Builds a graph from unordered pairs. Rejects self-loops, duplicate
    /// pairs (in either orientation) and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(invalid(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self::from_sorted(n, set.into_iter().collect()))
    }

    fn from_sorted(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Self { n, edges, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Returns `Err(Structural)` unless the graph is connected.
    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "graph on {} vertices with {} edges is not connected",
                self.n,
                self.edges.len()
            )))
        }
    }

    /// Graph Laplacian `D − A` as a dense matrix.
    pub fn laplacian(&self) -> SymMatrix {
        let mut l = SymMatrix::zeros(self.n);
        for (u, nbrs) in self.adj.iter().enumerate() {
            l.set(u, u, nbrs.len() as f64);
        }
        for &(u, v) in &self.edges {
            l.set(u, v, -1.0);
        }
        l
    }
}

/// Free-function form of [`Graph::laplacian`].
pub fn laplacian(g: &Graph) -> SymMatrix {
    g.laplacian()
}

/// `rows × cols` lattice; vertex `(i, j)` has index `i·cols + j`.
pub fn grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("grid dimensions must be positive, got {rows}x{cols}")));
    }
    if rows * cols < 2 {
        return Err(invalid("grid needs at least two vertices"));
    }
    let mut edges = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for i in 0..rows {
        for j in 0..cols {
            let u = i * cols + j;
            if j + 1 < cols {
                edges.push((u, u + 1));
            }
            if i + 1 < rows {
                edges.push((u, u + cols));
            }
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_sorted(rows * cols, edges))
}

pub fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(invalid(format!("complete graph needs n >= 2, got {n}")));
    }
    let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
    Ok(Graph::from_sorted(n, edges))
}

/// Star with center 0.
pub fn star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(invalid(format!("star graph needs n >= 2, got {n}")));
    }
    Ok(Graph::from_sorted(n, (1..n).map(|v| (0, v)).collect()))
}

/// The family `(K_{n−t}ᶜ + H_tᶜ)ᶜ`, where `H_t` is `t` isolated vertices and
/// `+` is the disjoint union with the second operand relabeled to follow the
/// first.
///
/// The result is a clique on vertices `0..n−t` joined to every vertex of an
/// independent set `n−t..n`. `t = n − 1` is the star centred at 0 and `t = 1`
/// is `K_n`.
pub fn complement_join(n: usize, t: usize) -> Result<Graph> {
    if t == 0 || t >= n {
        return Err(invalid(format!("complement_join needs 1 <= t <= n - 1, got n = {n}, t = {t}")));
    }
    let core = n - t;
    let union = {
        // K_{n−t}ᶜ is edgeless; H_tᶜ is the clique on the relabeled block.
        let edges = (core..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
        Graph::from_sorted(n, edges)
    };
    Ok(complement(&union))
}

pub fn complement(g: &Graph) -> Graph {
    let n = g.n();
    let edges = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.has_edge(u, v))
        .collect();
    Graph::from_sorted(n, edges)
}

/// `G(n, r)`: each pair `u < v`, visited in lexicographic order, is kept when a
/// uniform draw in `[0, 1)` falls below `r`. May be disconnected.
pub fn erdos_renyi(n: usize, r: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("edge probability must lie in [0, 1], got {r}")));
    }
    let mut rng = prng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < r {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_sorted(n, edges))
}
