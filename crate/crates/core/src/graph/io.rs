use std::collections::HashMap;
use std::path::Path;

use super::{Graph, GraphError};

/// A graph read from an edge list together with what the loader did to it.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `original_ids[v]` is the id vertex `v` carried in the input file.
    pub original_ids: Vec<u64>,
    pub self_loops_dropped: usize,
    /// Repeated lines, in either orientation, beyond the first occurrence.
    pub duplicates_dropped: usize,
}

impl LoadedGraph {
    /// Inverse of `original_ids`.
    pub fn id_map(&self) -> HashMap<u64, usize> {
        self.original_ids
            .iter()
            .enumerate()
            .map(|(v, &id)| (id, v))
            .collect()
    }
}

/// Parses a whitespace-separated edge list.
///
/// Lines starting with `#` and blank lines are skipped. Ids are compacted to
/// `0..n` in order of first appearance; ids that only occur in self-loops still
/// become (isolated) vertices.
pub fn load_edge_list(text: &str) -> Result<LoadedGraph, GraphError> {
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut original_ids = Vec::new();
    let mut intern = |id: u64| -> usize {
        *ids.entry(id).or_insert_with(|| {
            original_ids.push(id);
            original_ids.len() - 1
        })
    };

    let mut edges = Vec::new();
    let mut self_loops = 0usize;
    let mut lines_seen = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        lines_seen += 1;
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(GraphError::Parse {
                    line: idx + 1,
                    reason: format!("expected two vertex ids, got {line:?}"),
                })
            }
        };
        let parse = |t: &str| {
            t.parse::<u64>().map_err(|_| GraphError::Parse {
                line: idx + 1,
                reason: format!("not a nonnegative integer: {t:?}"),
            })
        };
        let (u, v) = (intern(parse(a)?), intern(parse(b)?));
        if u == v {
            self_loops += 1;
        } else {
            edges.push((u.min(v), u.max(v)));
        }
    }
    if lines_seen == 0 {
        return Err(GraphError::Empty);
    }

    let before = edges.len();
    edges.sort_unstable();
    edges.dedup();
    let duplicates = before - edges.len();
    if self_loops > 0 {
        log::warn!("edge list: dropped {self_loops} self-loop(s)");
    }
    let graph = Graph::from_sorted_unique(original_ids.len(), edges);
    Ok(LoadedGraph {
        graph,
        original_ids,
        self_loops_dropped: self_loops,
        duplicates_dropped: duplicates,
    })
}

pub fn read_edge_list(path: &Path) -> Result<LoadedGraph, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_edge_list(&text)
}
