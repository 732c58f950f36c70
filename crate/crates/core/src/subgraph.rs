//! The observed part of a network: a vertex set and the edges seen among it.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::graph::{DegreeVector, Graph};

#[derive(Debug, Error)]
pub enum SubgraphError {
    #[error("edge ({0}, {1}) has an endpoint outside the observed vertex set")]
    UnobservedEndpoint(usize, usize),
    #[error("vertex {vertex} out of range for {n} vertices")]
    OutOfRange { vertex: usize, n: usize },
    #[error("self-loop or duplicate edge ({0}, {1})")]
    NotSimple(usize, usize),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A sampled sub-network `G^(s)` of a graph on `n` vertices.
///
/// Unobserved vertices keep their ids and have sampled degree zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledSubgraph {
    observed: Vec<bool>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl SampledSubgraph {
    /// Nothing observed.
    pub fn empty(n: usize) -> Self {
        Self {
            observed: vec![false; n],
            adjacency: vec![Vec::new(); n],
            edges: Vec::new(),
        }
    }

    /// The whole graph observed, every vertex included.
    pub fn full(graph: &Graph) -> Self {
        Self::build(graph.n(), vec![true; graph.n()], graph.edges().to_vec())
    }

    /// Validates and builds a subgraph from an observed vertex set and edges.
    pub fn new<V, E>(n: usize, observed_vertices: V, edges: E) -> Result<Self, SubgraphError>
    where
        V: IntoIterator<Item = usize>,
        E: IntoIterator<Item = (usize, usize)>,
    {
        let mut observed = vec![false; n];
        for v in observed_vertices {
            if v >= n {
                return Err(SubgraphError::OutOfRange { vertex: v, n });
            }
            observed[v] = true;
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(SubgraphError::OutOfRange { vertex: u.max(v), n });
            }
            if !observed[u] || !observed[v] {
                return Err(SubgraphError::UnobservedEndpoint(u, v));
            }
            if u == v {
                return Err(SubgraphError::NotSimple(u, v));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(SubgraphError::NotSimple(w[0].0, w[0].1));
        }
        Ok(Self::build(n, observed, list))
    }

    /// Incident subgraph: the given edges of `graph` and their endpoints.
    /// `edge_indices` index into `graph.edges()` and must be distinct.
    pub(crate) fn incident(graph: &Graph, edge_indices: &[usize]) -> Self {
        let mut observed = vec![false; graph.n()];
        let mut edges: Vec<_> = edge_indices.iter().map(|&k| graph.edges()[k]).collect();
        edges.sort_unstable();
        for &(u, v) in &edges {
            observed[u] = true;
            observed[v] = true;
        }
        Self::build(graph.n(), observed, edges)
    }

    fn build(n: usize, observed: Vec<bool>, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { observed, adjacency, edges }
    }

    pub fn n(&self) -> usize {
        self.observed.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn is_observed(&self, v: usize) -> bool {
        self.observed[v]
    }

    pub fn observed_vertices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.observed[v]).collect()
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    /// Sorted observed neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn sampled_degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn sampled_degrees(&self) -> DegreeVector {
        DegreeVector(self.adjacency.iter().map(Vec::len).collect())
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Whether every sampled edge exists in `graph` (and hence
    /// `δ^(s)_i <= δ_i` everywhere).
    pub fn is_subgraph_of(&self, graph: &Graph) -> bool {
        self.n() == graph.n() && self.edges.iter().all(|&(u, v)| graph.has_edge(u, v))
    }

    /// Edge list text (`u v` per line, `u < v`), labelled through `labels`.
    pub fn edges_to_text(&self, labels: Option<&[u64]>) -> String {
        let id = |v: usize| labels.map_or(v as u64, |l| l[v]);
        let mut out = String::new();
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", id(u), id(v));
        }
        out
    }

    /// Vertex sidecar text: one observed vertex id per line.
    pub fn vertices_to_text(&self, labels: Option<&[u64]>) -> String {
        let mut out = String::new();
        for v in self.observed_vertices() {
            let _ = writeln!(out, "{}", labels.map_or(v as u64, |l| l[v]));
        }
        out
    }

    /// Inverse of [`edges_to_text`](Self::edges_to_text) plus
    /// [`vertices_to_text`](Self::vertices_to_text); `resolve` maps file ids
    /// to vertex indices.
    pub fn parse<F>(n: usize, edges: &str, vertices: &str, resolve: F) -> Result<Self, SubgraphError>
    where
        F: Fn(u64) -> Option<usize>,
    {
        let token = |line: usize, t: &str| -> Result<usize, SubgraphError> {
            let id = t.parse::<u64>().map_err(|_| SubgraphError::Parse {
                line,
                reason: format!("not a vertex id: {t:?}"),
            })?;
            resolve(id).ok_or_else(|| SubgraphError::Parse {
                line,
                reason: format!("unknown vertex id {id}"),
            })
        };
        let mut vs = Vec::new();
        for (i, raw) in vertices.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            vs.push(token(i + 1, line)?);
        }
        let mut es = Vec::new();
        for (i, raw) in edges.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tok = line.split_whitespace();
            let (Some(a), Some(b), None) = (tok.next(), tok.next(), tok.next()) else {
                return Err(SubgraphError::Parse {
                    line: i + 1,
                    reason: format!("expected two vertex ids, got {line:?}"),
                });
            };
            let (u, v) = (token(i + 1, a)?, token(i + 1, b)?);
            vs.extend([u, v]);
            es.push((u, v));
        }
        Self::new(n, vs, es)
    }

    /// Writes `path` (edges) and `path.vertices` (sidecar).
    pub fn write(&self, path: &Path, labels: Option<&[u64]>) -> Result<(), SubgraphError> {
        let io = |p: &Path, e| SubgraphError::Io { path: p.display().to_string(), source: e };
        std::fs::write(path, self.edges_to_text(labels)).map_err(|e| io(path, e))?;
        let side = sidecar_path(path);
        std::fs::write(&side, self.vertices_to_text(labels)).map_err(|e| io(&side, e))
    }

    pub fn read<F>(n: usize, path: &Path, resolve: F) -> Result<Self, SubgraphError>
    where
        F: Fn(u64) -> Option<usize>,
    {
        let io = |p: &Path, e| SubgraphError::Io { path: p.display().to_string(), source: e };
        let edges = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
        let side = sidecar_path(path);
        let vertices = match std::fs::read_to_string(&side) {
            Ok(s) => s,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(io(&side, e)),
        };
        Self::parse(n, &edges, &vertices, resolve)
    }
}

/// `sub.txt` → `sub.txt.vertices`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".vertices");
    s.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SampledSubgraph::new(3, [0, 1], [(0, 1)]).is_ok());
        assert!(matches!(
            SampledSubgraph::new(3, [0], [(0, 1)]),
            Err(SubgraphError::UnobservedEndpoint(0, 1))
        ));
        assert!(matches!(
            SampledSubgraph::new(3, [0, 1], [(0, 1), (1, 0)]),
            Err(SubgraphError::NotSimple(0, 1))
        ));
        assert!(matches!(SampledSubgraph::new(2, [5], []), Err(SubgraphError::OutOfRange { .. })));
    }

    #[test]
    fn degrees_and_observation() {
        let s = SampledSubgraph::new(4, [0, 1, 3], [(1, 0)]).unwrap();
        assert_eq!(s.sampled_degrees().0, vec![1, 1, 0, 0]);
        assert_eq!(s.observed_vertices(), vec![0, 1, 3]);
        assert!(!s.is_observed(2));
        let e = SampledSubgraph::empty(3);
        assert_eq!(e.observed_count(), 0);
    }

    #[test]
    fn text_round_trip_with_labels() {
        let s = SampledSubgraph::new(4, [0, 2, 3], [(0, 2)]).unwrap();
        let labels = [10u64, 11, 12, 13];
        let back = SampledSubgraph::parse(
            4,
            &s.edges_to_text(Some(&labels)),
            &s.vertices_to_text(Some(&labels)),
            |id| id.checked_sub(10).map(|v| v as usize),
        )
        .unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn subgraph_check() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(SampledSubgraph::full(&g).is_subgraph_of(&g));
        let s = SampledSubgraph::new(3, [0, 2], [(0, 2)]).unwrap();
        assert!(!s.is_subgraph_of(&g));
    }
}
