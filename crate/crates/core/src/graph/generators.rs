//! Seeded random graph models for desk-scale experiments.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Graph, GraphError};
use crate::rng::rng_from_seed;

/// Uniform random graph with exactly `m` edges, G(n, m).
pub fn gen_erdos_renyi(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    let pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
    if m > pairs {
        return Err(GraphError::Infeasible(format!(
            "G(n={n}, m={m}): at most {pairs} edges fit"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut picked = rand::seq::index::sample(&mut rng, pairs, m).into_vec();
    picked.sort_unstable();
    let edges = picked.into_iter().map(|k| unrank_pair(n, k)).collect();
    Ok(Graph::from_sorted_unique(n, edges))
}

/// Maps `k` in `0..n(n-1)/2` to the `k`-th pair `(u, v)`, `u < v`, in lexicographic order.
fn unrank_pair(n: usize, k: usize) -> (usize, usize) {
    // Row u starts at offset u*(2n-u-1)/2.
    let offset = |u: usize| u * (2 * n - u - 1) / 2;
    let (mut lo, mut hi) = (0usize, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if offset(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, lo + 1 + (k - offset(lo)))
}

/// Barabási–Albert preferential attachment.
///
/// Starts from a clique on `attach` vertices; every later vertex links to
/// `attach` distinct existing vertices chosen with probability proportional to
/// degree. The result has `attach*(n-attach) + attach*(attach-1)/2` edges.
pub fn gen_barabasi_albert(n: usize, attach: usize, seed: u64) -> Result<Graph, GraphError> {
    if attach == 0 || attach >= n {
        return Err(GraphError::Infeasible(format!(
            "BA(n={n}, attach={attach}) needs 1 <= attach < n"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::with_capacity(attach * (n - attach) + attach * attach / 2);
    // Every endpoint of every edge, so a uniform pick is degree-proportional.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for u in 0..attach {
        for v in u + 1..attach {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut targets = BTreeSet::new();
    for new in attach..n {
        targets.clear();
        while targets.len() < attach {
            let t = if endpoints.is_empty() {
                rng.random_range(0..new)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            targets.insert(t);
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.extend([t, new]);
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_sorted_unique(n, edges))
}

/// Uniformly random `k`-regular graph by stub pairing with restarts.
pub fn gen_regular(n: usize, k: usize, seed: u64) -> Result<Graph, GraphError> {
    if k >= n.max(1) || !(n * k).is_multiple_of(2) {
        return Err(GraphError::Infeasible(format!(
            "{k}-regular graph on {n} vertices needs k < n and n*k even"
        )));
    }
    if k == 0 {
        return Ok(Graph::empty(n));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..10_000 {
        if let Some(edges) = try_regular(n, k, &mut rng) {
            let mut edges: Vec<_> = edges.into_iter().collect();
            edges.sort_unstable();
            return Ok(Graph::from_sorted_unique(n, edges));
        }
    }
    Err(GraphError::Infeasible(format!(
        "no {k}-regular graph on {n} vertices found after 10000 attempts"
    )))
}

fn try_regular<R: Rng>(n: usize, k: usize, rng: &mut R) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                continue;
            }
            *leftover.entry(a).or_default() += 1;
            *leftover.entry(b).or_default() += 1;
        }
        let open: Vec<usize> = leftover.keys().copied().collect();
        let pairable = open.iter().enumerate().any(|(i, &a)| {
            open[i + 1..].iter().any(|&b| !edges.contains(&(a, b)))
        });
        if !open.is_empty() && !pairable {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(v, c)| std::iter::repeat_n(v, c))
            .collect();
    }
    Some(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unrank_covers_all_pairs_in_order() {
        let n = 7;
        let all: Vec<_> = (0..n * (n - 1) / 2).map(|k| unrank_pair(n, k)).collect();
        let mut expected = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                expected.push((u, v));
            }
        }
        assert_eq!(all, expected);
    }

    #[test]
    fn complete_graph_from_er() {
        let g = gen_erdos_renyi(10, 45, 3).unwrap();
        assert_eq!(g.m(), 45);
        assert!(g.degrees().iter().all(|&d| d == 9));
        assert!(gen_erdos_renyi(10, 46, 3).is_err());
    }

    #[test]
    fn ba_edge_count_by_construction() {
        let g = gen_barabasi_albert(100, 3, 11).unwrap();
        assert_eq!(g.m(), 3 * (100 - 3) + 3);
        let g1 = gen_barabasi_albert(20, 1, 11).unwrap();
        assert_eq!(g1.m(), 19);
        assert!(gen_barabasi_albert(3, 3, 0).is_err());
    }

    #[test]
    fn regular_graphs() {
        let g = gen_regular(6, 2, 5).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 2));
        for k in [2, 4, 8] {
            let g = gen_regular(100, k, 1).unwrap();
            assert!(g.degrees().iter().all(|&d| d == k));
        }
        assert!(gen_regular(7, 3, 0).is_err());
        assert!(gen_regular(4, 4, 0).is_err());
        assert_eq!(gen_regular(5, 0, 0).unwrap().m(), 0);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(gen_barabasi_albert(50, 2, 9).unwrap(), gen_barabasi_albert(50, 2, 9).unwrap());
        assert_eq!(gen_erdos_renyi(50, 80, 9).unwrap(), gen_erdos_renyi(50, 80, 9).unwrap());
        assert_eq!(gen_regular(50, 4, 9).unwrap(), gen_regular(50, 4, 9).unwrap());
        assert_ne!(gen_erdos_renyi(50, 80, 9).unwrap(), gen_erdos_renyi(50, 80, 10).unwrap());
    }
}
