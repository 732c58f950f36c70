//! Undirected simple graphs, degree statistics, edge-list I/O and generators.

mod generators;
mod io;

pub use generators::{gen_barabasi_albert, gen_erdos_renyi, gen_regular};
pub use io::{load_edge_list, read_edge_list, LoadedGraph};

use std::ops::Deref;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("edge list is empty")]
    Empty,
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error("resilience index undefined: all degrees are zero")]
    ZeroDegrees,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// An undirected simple graph on vertices `0..n`.
///
/// Neighbor lists and the edge list are kept sorted, which makes common-neighbor
/// intersection and edge lookup logarithmic and gives every traversal a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// A graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
            edges: Vec::new(),
        }
    }

    /// Builds a graph from edges given in any orientation.
    ///
    /// Self-loops, repeated edges and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        Ok(Self::from_sorted_unique(n, list))
    }

    /// `edges` must be sorted, deduplicated and oriented `u < v`.
    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { adjacency, edges }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u >= self.n() || v >= self.n() {
            return false;
        }
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector(self.adjacency.iter().map(Vec::len).collect())
    }

    /// Serializes as one `u v` line per edge, sorted by `(u, v)` with `u < v`.
    ///
    /// Isolated vertices do not appear in the output.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.m() * 12);
        for &(u, v) in &self.edges {
            out.push_str(&u.to_string());
            out.push(' ');
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub fn write_edge_list(&self, path: &std::path::Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_edge_list()).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Per-vertex degrees of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DegreeVector(pub Vec<usize>);

impl DegreeVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&d| d as f64).collect()
    }
}

impl Deref for DegreeVector {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for DegreeVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Resilience index ⟨δ²⟩/⟨δ⟩ of an integer degree sequence.
pub fn beta_index(degrees: &[usize]) -> Result<f64, GraphError> {
    let (mut s1, mut s2) = (0u128, 0u128);
    for &d in degrees {
        s1 += d as u128;
        s2 += (d as u128) * (d as u128);
    }
    if s1 == 0 {
        return Err(GraphError::ZeroDegrees);
    }
    Ok(s2 as f64 / s1 as f64)
}

/// Resilience index of a real-valued degree estimate, accumulated in index order.
///
/// Returns `None` when the values sum to zero.
pub fn beta_of_reals(degrees: &[f64]) -> Option<f64> {
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for &d in degrees {
        s1 += d;
        s2 += d * d;
    }
    (s1 > 0.0).then(|| s2 / s1)
}
