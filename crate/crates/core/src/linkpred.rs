//! Link prediction on a sampled subgraph with Adamic–Adar (AA) and
//! preferential-attachment (PA) scores, fed by one of three degree sources:
//!
//! * `naive`: the sampled degrees `δ^(s)`;
//! * `revised`: estimated degrees `δ̂`, with AA also scaled by
//!   `α_{u,v} = min(δ̂_u/δ^(s)_u, δ̂_v/δ^(s)_v)`;
//! * `truth`: the true degrees of every vertex whose state is observed.
//!
//! Common neighbors for AA always come from the sampled subgraph.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicsModel;
use crate::estimators::{EstimateError, EstimateResult, Estimator, EstimatorConfig};
use crate::eval::mean_std;
use crate::graph::Graph;
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::sampling::{fraction_to_count, sample_edges_uniform};
use crate::solver::StateVector;
use crate::subgraph::SampledSubgraph;

/// Above this many positive × negative comparisons AUC is estimated by
/// sampling.
pub const EXACT_AUC_LIMIT: usize = 10_000_000;
pub const DEFAULT_COMPARISONS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum LinkPredError {
    #[error("no positive pairs to score")]
    NoPositives,
    #[error("no negative pairs to score")]
    NoNegatives,
    #[error("sampling fraction {0} leaves no held-out edges")]
    NothingHeldOut(f64),
    #[error("invalid link-prediction setup: {0}")]
    Invalid(String),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Aa,
    Pa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Naive,
    Revised,
    Truth,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Aa, Metric::Pa];
    pub fn name(self) -> &'static str {
        match self {
            Metric::Aa => "aa",
            Metric::Pa => "pa",
        }
    }
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Naive, Variant::Revised, Variant::Truth];
    pub fn name(self) -> &'static str {
        match self {
            Variant::Naive => "naive",
            Variant::Revised => "revised",
            Variant::Truth => "truth",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aa" | "adamic_adar" => Ok(Metric::Aa),
            "pa" | "preferential_attachment" => Ok(Metric::Pa),
            _ => Err(format!("unknown metric {s:?} (aa | pa)")),
        }
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Variant::Naive),
            "revised" => Ok(Variant::Revised),
            "truth" => Ok(Variant::Truth),
            _ => Err(format!("unknown variant {s:?} (naive | revised | truth)")),
        }
    }
}

/// `Σ_{w ∈ Γ_u ∩ Γ_v} 1/ln deg(w)` over common neighbors in `sub`; a common
/// neighbor with `deg(w) <= 1` contributes nothing.
pub fn aa_score(sub: &SampledSubgraph, u: usize, v: usize, deg: &[usize]) -> f64 {
    let (a, b) = (sub.neighbors(u), sub.neighbors(v));
    let (mut i, mut j) = (0, 0);
    let mut s = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let d = deg[a[i]];
                if d > 1 {
                    s += 1.0 / (d as f64).ln();
                }
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// `deg(u) · deg(v)`.
pub fn pa_score(deg: &[usize], u: usize, v: usize) -> f64 {
    deg[u] as f64 * deg[v] as f64
}

/// `min(δ̂_u/δ^(s)_u, δ̂_v/δ^(s)_v)`, or 1 when either sampled degree is zero
/// (such a vertex has no sampled common neighbors to scale).
pub fn scale_factor(sub: &SampledSubgraph, est: &EstimateResult, u: usize, v: usize) -> f64 {
    let (su, sv) = (sub.sampled_degree(u), sub.sampled_degree(v));
    if su == 0 || sv == 0 {
        return 1.0;
    }
    let ru = est.delta_hat[u] as f64 / su as f64;
    let rv = est.delta_hat[v] as f64 / sv as f64;
    ru.min(rv)
}

/// Candidate pairs with their scores under one degree source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPairs {
    pub variant: Variant,
    pub metric: Metric,
    pub pairs: Vec<(usize, usize)>,
    pub scores: Vec<f64>,
}

/// What a scoring run needs besides the pairs.
pub struct ScoreContext<'a> {
    pub sub: &'a SampledSubgraph,
    pub sampled: &'a [usize],
    pub estimate: Option<&'a EstimateResult>,
    pub truth: &'a [usize],
}

impl ScoreContext<'_> {
    fn degrees(&self, variant: Variant) -> Result<&[usize], LinkPredError> {
        Ok(match variant {
            Variant::Naive => self.sampled,
            Variant::Truth => self.truth,
            Variant::Revised => &self
                .estimate
                .ok_or_else(|| LinkPredError::Invalid("revised scores need an estimate".into()))?
                .delta_hat,
        })
    }

    pub fn score(&self, metric: Metric, variant: Variant, pairs: &[(usize, usize)]) -> Result<ScoredPairs, LinkPredError> {
        let deg = self.degrees(variant)?;
        let scores = pairs
            .par_iter()
            .map(|&(u, v)| match metric {
                Metric::Pa => pa_score(deg, u, v),
                Metric::Aa => {
                    let s = aa_score(self.sub, u, v, deg);
                    match (variant, self.estimate) {
                        (Variant::Revised, Some(est)) if s != 0.0 => s * scale_factor(self.sub, est, u, v),
                        _ => s,
                    }
                }
            })
            .collect();
        Ok(ScoredPairs { variant, metric, pairs: pairs.to_vec(), scores })
    }
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Exact when `|pos|·|neg| <= EXACT_AUC_LIMIT`, otherwise
/// estimated from `comparisons` random pairs drawn with `seed`.
pub fn auc(pos: &[f64], neg: &[f64], comparisons: usize, seed: u64) -> Result<f64, LinkPredError> {
    if pos.is_empty() {
        return Err(LinkPredError::NoPositives);
    }
    if neg.is_empty() {
        return Err(LinkPredError::NoNegatives);
    }
    if pos.len().saturating_mul(neg.len()) <= EXACT_AUC_LIMIT {
        let mut sorted = neg.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut wins = 0.0;
        for &p in pos {
            let below = sorted.partition_point(|&x| x < p);
            let not_above = sorted.partition_point(|&x| x <= p);
            wins += below as f64 + 0.5 * (not_above - below) as f64;
        }
        return Ok(wins / (pos.len() as f64 * neg.len() as f64));
    }
    if comparisons == 0 {
        return Err(LinkPredError::Invalid("Monte Carlo AUC needs comparisons >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut wins = 0.0;
    for _ in 0..comparisons {
        let p = pos[rng.random_range(0..pos.len())];
        let n = neg[rng.random_range(0..neg.len())];
        if p > n {
            wins += 1.0;
        } else if p == n {
            wins += 0.5;
        }
    }
    Ok(wins / comparisons as f64)
}

/// Up to `count` distinct uniform non-edges of `graph`.
pub fn sample_non_edges(graph: &Graph, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let n = graph.n();
    let total = n * n.saturating_sub(1) / 2 - graph.m();
    let count = count.min(total);
    let mut rng = rng_from_seed(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    if 2 * count > total {
        // Dense request: enumerate and draw without replacement.
        let mut all = Vec::with_capacity(total);
        for u in 0..n {
            for v in u + 1..n {
                if !graph.has_edge(u, v) {
                    all.push((u, v));
                }
            }
        }
        for k in rand::seq::index::sample(&mut rng, all.len(), count) {
            out.push(all[k]);
        }
        return out;
    }
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if !graph.has_edge(key.0, key.1) && seen.insert(key) {
            out.push(key);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredConfig {
    pub fraction: f64,
    pub estimator: Estimator,
    pub combos: Vec<(Metric, Variant)>,
    pub repetitions: usize,
    pub seed: u64,
    pub comparisons: usize,
    pub options: EstimatorConfig,
}

impl LinkPredConfig {
    /// Every metric × variant.
    pub fn all_combos() -> Vec<(Metric, Variant)> {
        Metric::ALL
            .iter()
            .flat_map(|&m| Variant::ALL.iter().map(move |&v| (m, v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredRecord {
    pub rep: usize,
    pub metric: Metric,
    pub variant: Variant,
    pub auc: Option<f64>,
    pub positives: usize,
    pub negatives: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredSummary {
    pub metric: Metric,
    pub variant: Variant,
    pub repetitions: usize,
    pub completed: usize,
    pub failed: usize,
    pub mean_auc: f64,
    pub std_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredReport {
    pub config: LinkPredConfig,
    pub n: usize,
    pub m: usize,
    pub summaries: Vec<LinkPredSummary>,
    pub records: Vec<LinkPredRecord>,
}

impl LinkPredReport {
    pub const CSV_HEADER: &'static str = "metric,variant,fraction,repetitions,completed,failed,mean_auc,std_auc";

    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.metric, s.variant, self.config.fraction, s.repetitions, s.completed, s.failed, s.mean_auc, s.std_auc
            );
        }
        out
    }

    pub fn summary(&self, metric: Metric, variant: Variant) -> Option<&LinkPredSummary> {
        self.summaries.iter().find(|s| s.metric == metric && s.variant == variant)
    }
}

fn run_rep(
    graph: &Graph,
    states: &StateVector,
    model: &DynamicsModel,
    cfg: &LinkPredConfig,
    truth: &[usize],
    rep: usize,
) -> Vec<LinkPredRecord> {
    let sub = sample_edges_uniform(graph, cfg.fraction, derive_seed(cfg.seed, &[stream::SAMPLE, rep as u64]));
    let positives: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| sub.neighbors(u).binary_search(&v).is_err())
        .collect();
    let negatives = sample_non_edges(graph, positives.len(), derive_seed(cfg.seed, &[stream::NEGATIVES, rep as u64]));
    let sampled = sub.sampled_degrees().0;
    let needs_estimate = cfg.combos.iter().any(|&(_, v)| v == Variant::Revised);
    let estimate = if needs_estimate {
        Some(cfg.estimator.run(states, Some(&sub), model, &cfg.options))
    } else {
        None
    };
    let ctx = ScoreContext {
        sub: &sub,
        sampled: &sampled,
        estimate: estimate.as_ref().and_then(|r| r.as_ref().ok()),
        truth,
    };
    cfg.combos
        .iter()
        .enumerate()
        .map(|(k, &(metric, variant))| {
            let outcome = (|| {
                if variant == Variant::Revised {
                    if let Some(Err(e)) = &estimate {
                        return Err(LinkPredError::Invalid(format!("estimator failed: {e}")));
                    }
                }
                let p = ctx.score(metric, variant, &positives)?;
                let q = ctx.score(metric, variant, &negatives)?;
                auc(&p.scores, &q.scores, cfg.comparisons, derive_seed(cfg.seed, &[stream::AUC, rep as u64, k as u64]))
            })();
            LinkPredRecord {
                rep,
                metric,
                variant,
                auc: outcome.as_ref().ok().copied(),
                positives: positives.len(),
                negatives: negatives.len(),
                error: outcome.err().map(|e| e.to_string()),
            }
        })
        .collect()
}

/// Mean AUC per (metric, variant) over `cfg.repetitions` uniform edge samples.
///
/// Positives are the edges left out of the sample; negatives are uniform
/// non-edges of `graph`, as many as there are positives. The truth variant
/// uses the true degree of every vertex, all of whose states are observed.
pub fn linkpred_experiment(
    graph: &Graph,
    states: &StateVector,
    model: &DynamicsModel,
    cfg: &LinkPredConfig,
    jobs: Option<usize>,
) -> Result<LinkPredReport, LinkPredError> {
    if !(0.0..=1.0).contains(&cfg.fraction) {
        return Err(LinkPredError::Invalid(format!("fraction {} outside [0, 1]", cfg.fraction)));
    }
    if cfg.repetitions == 0 || cfg.combos.is_empty() {
        return Err(LinkPredError::Invalid("need repetitions >= 1 and at least one metric/variant".into()));
    }
    if states.len() != graph.n() {
        return Err(LinkPredError::Invalid(format!("{} states for {} vertices", states.len(), graph.n())));
    }
    if fraction_to_count(cfg.fraction, graph.m()) == graph.m() {
        return Err(LinkPredError::NothingHeldOut(cfg.fraction));
    }
    cfg.options.validate()?;
    let truth = graph.degrees().0;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| LinkPredError::Invalid(format!("thread pool: {e}")))?;
    let per_rep: Vec<Vec<LinkPredRecord>> = pool.install(|| {
        (0..cfg.repetitions)
            .into_par_iter()
            .map(|rep| run_rep(graph, states, model, cfg, &truth, rep))
            .collect()
    });
    let summaries = cfg
        .combos
        .iter()
        .enumerate()
        .map(|(k, &(metric, variant))| {
            let aucs: Vec<f64> = per_rep.iter().filter_map(|r| r[k].auc).collect();
            let (mean_auc, std_auc) = mean_std(&aucs);
            LinkPredSummary {
                metric,
                variant,
                repetitions: cfg.repetitions,
                completed: aucs.len(),
                failed: cfg.repetitions - aucs.len(),
                mean_auc,
                std_auc,
            }
        })
        .collect();
    Ok(LinkPredReport {
        config: cfg.clone(),
        n: graph.n(),
        m: graph.m(),
        summaries,
        records: per_rep.into_iter().flatten().collect(),
    })
}
