//! Subgraph samplers and state noise.
//!
//! Fractions convert to counts by rounding half up, so `p = 0.1` on 972 edges
//! keeps 97 of them on every platform.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::rng::rng_from_seed;
use crate::solver::StateVector;
use crate::subgraph::SampledSubgraph;

/// Steps without a new edge before a walk restarts, as a multiple of `m`.
pub const WALK_STALL_FACTOR: usize = 50;

/// `round(fraction · total)` with ties rounded up.
pub fn fraction_to_count(fraction: f64, total: usize) -> usize {
    let c = (fraction * total as f64 + 0.5).floor();
    (c.max(0.0) as usize).min(total)
}

fn check_fraction(p: f64) {
    assert!((0.0..=1.0).contains(&p), "sampling fraction {p} outside [0, 1]");
}

/// `round(p·m)` edges drawn uniformly without replacement, with their
/// endpoints as the observed vertices.
///
/// # Panics
/// If `p` is outside `[0, 1]`.
pub fn sample_edges_uniform(graph: &Graph, p: f64, seed: u64) -> SampledSubgraph {
    check_fraction(p);
    let k = fraction_to_count(p, graph.m());
    let mut rng = rng_from_seed(seed);
    let picked = index::sample(&mut rng, graph.m(), k).into_vec();
    SampledSubgraph::incident(graph, &picked)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSample {
    pub subgraph: SampledSubgraph,
    /// Edges requested but not collected before the restart budget ran out.
    pub shortfall: usize,
}

/// Edges traversed by a simple random walk until `round(p·m)` distinct ones
/// are held.
///
/// The walk starts at a uniform vertex and restarts at a fresh uniform vertex
/// when it lands on an isolated vertex or goes `50·m` steps without a new
/// edge. After `4n + 16` restarts it gives up and reports the shortfall.
///
/// # Panics
/// If `p` is outside `[0, 1]`.
pub fn sample_random_walk(graph: &Graph, p: f64, seed: u64) -> WalkSample {
    check_fraction(p);
    let target = fraction_to_count(p, graph.m());
    let mut rng = rng_from_seed(seed);
    let mut held: Vec<usize> = Vec::with_capacity(target);
    let mut seen: HashSet<usize> = HashSet::with_capacity(target);
    let stall_limit = WALK_STALL_FACTOR * graph.m().max(1);
    let max_restarts = 4 * graph.n() + 16;
    let mut restarts = 0;
    while held.len() < target && restarts <= max_restarts {
        let mut at = rng.random_range(0..graph.n());
        let mut stalled = 0;
        while held.len() < target && stalled < stall_limit {
            let nbrs = graph.neighbors(at);
            if nbrs.is_empty() {
                break;
            }
            let next = nbrs[rng.random_range(0..nbrs.len())];
            let key = (at.min(next), at.max(next));
            let e = graph.edges().binary_search(&key).expect("walk follows graph edges");
            if seen.insert(e) {
                held.push(e);
                stalled = 0;
            } else {
                stalled += 1;
            }
            at = next;
        }
        restarts += 1;
    }
    let shortfall = target - held.len();
    if shortfall > 0 {
        log::warn!("random walk collected {} of {target} edges", held.len());
    }
    WalkSample { subgraph: SampledSubgraph::incident(graph, &held), shortfall }
}

/// `round(q·n)` vertices drawn uniformly and every edge among them.
///
/// # Panics
/// If `q` is outside `[0, 1]`.
pub fn sample_induced(graph: &Graph, q: f64, seed: u64) -> SampledSubgraph {
    check_fraction(q);
    let k = fraction_to_count(q, graph.n());
    let mut rng = rng_from_seed(seed);
    let mut chosen = vec![false; graph.n()];
    for v in index::sample(&mut rng, graph.n(), k) {
        chosen[v] = true;
    }
    let edges = graph.edges().iter().copied().filter(|&(u, v)| chosen[u] && chosen[v]);
    SampledSubgraph::new(graph.n(), (0..graph.n()).filter(|&v| chosen[v]), edges)
        .expect("edges of the graph among chosen vertices")
}

/// `x_i ↦ max(0, x_i (1 + ε_i))` with `ε_i ~ N(0, σ)`.
///
/// The underlying standard normal draws depend only on `seed`, so the same
/// seed at different `sigma` applies proportionally scaled noise.
///
/// # Panics
/// If `sigma` is negative or not finite.
pub fn add_state_noise(states: &StateVector, sigma: f64, seed: u64) -> StateVector {
    assert!(sigma.is_finite() && sigma >= 0.0, "noise sigma {sigma} must be >= 0");
    if sigma == 0.0 {
        return states.clone();
    }
    let mut rng = rng_from_seed(seed);
    StateVector(
        states
            .iter()
            .map(|&x| {
                let z: f64 = rng.sample(StandardNormal);
                (x * (1.0 + sigma * z)).max(0.0)
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Incident subgraph of uniformly drawn edges.
    #[default]
    Uniform,
    /// Incident subgraph of random-walk edges.
    RandomWalk,
    /// Induced subgraph of uniformly drawn vertices.
    Induced,
}

impl Sampler {
    pub const ALL: [Sampler; 3] = [Sampler::Uniform, Sampler::RandomWalk, Sampler::Induced];

    pub fn name(self) -> &'static str {
        match self {
            Sampler::Uniform => "uniform",
            Sampler::RandomWalk => "random_walk",
            Sampler::Induced => "induced",
        }
    }

    /// Whether only the subgraph's vertices have observed states.
    pub fn is_induced(self) -> bool {
        self == Sampler::Induced
    }

    pub fn sample(self, graph: &Graph, fraction: f64, seed: u64) -> SampledSubgraph {
        match self {
            Sampler::Uniform => sample_edges_uniform(graph, fraction, seed),
            Sampler::RandomWalk => sample_random_walk(graph, fraction, seed).subgraph,
            Sampler::Induced => sample_induced(graph, fraction, seed),
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sampler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "uniform" | "edge" => Ok(Sampler::Uniform),
            "random_walk" | "rw" | "walk" => Ok(Sampler::RandomWalk),
            "induced" | "vertex" => Ok(Sampler::Induced),
            _ => Err(format!("unknown sampler {s:?} (uniform | random_walk | induced)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_barabasi_albert;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn rounding_half_up() {
        assert_eq!(fraction_to_count(0.1, 972), 97);
        assert_eq!(fraction_to_count(0.5, 3), 2);
        assert_eq!(fraction_to_count(0.25, 2), 1);
        assert_eq!(fraction_to_count(1.0, 7), 7);
        assert_eq!(fraction_to_count(0.0, 7), 0);
    }

    #[test]
    fn uniform_edge_extremes() {
        let g = gen_barabasi_albert(50, 2, 1).unwrap();
        let empty = sample_edges_uniform(&g, 0.0, 3);
        assert_eq!(empty.m(), 0);
        assert_eq!(empty.sampled_degrees().total(), 0);
        let full = sample_edges_uniform(&g, 1.0, 3);
        assert_eq!(full.sampled_degrees(), g.degrees());
    }

    #[test]
    fn uniform_edge_triangle_third() {
        for seed in 0..20 {
            let s = sample_edges_uniform(&triangle(), 1.0 / 3.0, seed);
            assert_eq!(s.m(), 1);
            let mut d = s.sampled_degrees().0;
            d.sort_unstable();
            assert_eq!(d, vec![0, 1, 1]);
            assert_eq!(s.observed_count(), 2);
        }
    }

    #[test]
    fn walk_path_and_empty() {
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let w = sample_random_walk(&path, 1.0, 9);
        assert_eq!(w.subgraph.m(), 2);
        assert_eq!(w.shortfall, 0);
        assert_eq!(sample_random_walk(&path, 0.0, 9).subgraph.m(), 0);
    }

    #[test]
    fn walk_restarts_reach_every_component() {
        let g = Graph::from_edges(7, [(0, 1), (1, 2), (3, 4), (5, 6)]).unwrap();
        for seed in 0..10 {
            let w = sample_random_walk(&g, 1.0, seed);
            assert_eq!((w.subgraph.m(), w.shortfall), (4, 0));
        }
        let lonely = Graph::empty(3);
        let w = sample_random_walk(&lonely, 1.0, 0);
        assert_eq!((w.subgraph.m(), w.shortfall), (0, 0));
    }

    #[test]
    fn induced_examples() {
        let s = sample_induced(&triangle(), 2.0 / 3.0, 4);
        assert_eq!((s.observed_count(), s.m()), (2, 1));
        let g = gen_barabasi_albert(30, 2, 2).unwrap();
        let all = sample_induced(&g, 1.0, 4);
        assert_eq!(all.edges(), g.edges());
        let star = Graph::from_edges(5, (1..5).map(|l| (0, l))).unwrap();
        let mut found = false;
        for seed in 0..50 {
            let s = sample_induced(&star, 0.4, seed);
            assert_eq!(s.observed_count(), 2);
            if !s.is_observed(0) {
                assert_eq!(s.m(), 0);
                found = true;
            }
        }
        assert!(found);
    }

    #[test]
    fn noise_examples() {
        let x = StateVector(vec![0.3, 0.0, 2.0]);
        assert_eq!(add_state_noise(&x, 0.0, 1), x);
        let zeros = StateVector(vec![0.0; 10]);
        assert_eq!(add_state_noise(&zeros, 0.5, 1), zeros);
        let ones = StateVector(vec![1.0; 100_000]);
        let y = add_state_noise(&ones, 0.1, 12);
        let mean = y.mean();
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert!((0.999..=1.002).contains(&mean), "{mean}");
        assert!((0.099..=0.101).contains(&var.sqrt()), "{}", var.sqrt());
    }

    #[test]
    fn noise_scales_with_sigma_under_one_seed() {
        let x = StateVector(vec![1.0; 50]);
        let a = add_state_noise(&x, 0.1, 5);
        let b = add_state_noise(&x, 0.2, 5);
        for (u, v) in a.iter().zip(b.iter()) {
            if *u > 0.0 && *v > 0.0 {
                assert!(((v - 1.0) - 2.0 * (u - 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampler_names() {
        for s in Sampler::ALL {
            assert_eq!(s.name().parse::<Sampler>().unwrap(), s);
        }
        assert!("snowball".parse::<Sampler>().is_err());
    }
}
