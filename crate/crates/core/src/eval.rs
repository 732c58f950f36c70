//! Accuracy metrics and the repetition harness.
//!
//! An experiment fixes a graph and a dynamics model, simulates the true steady
//! states once, then for every repetition draws a subgraph and runs each
//! estimator on every (fraction, noise level, misspecification) cell. The
//! subgraph and the noise draws of a repetition depend only on the base seed
//! and the repetition index, so cells are compared on identical draws.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::{DynamicsError, DynamicsModel};
use crate::estimators::{EstimateResult, Estimator, EstimatorConfig, StateCoverage};
use crate::graph::{gen_barabasi_albert, gen_erdos_renyi, gen_regular, read_edge_list, Graph, GraphError};
use crate::rng::{derive_seed, stream};
use crate::sampling::{add_state_noise, Sampler};
use crate::solver::{simulate_full, SolverError, StateVector};
use crate::subgraph::SampledSubgraph;

pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("relative error undefined for true degree {true_deg} and estimate {est}")]
    Domain { true_deg: usize, est: f64 },
    #[error("{0} true degrees but {1} estimates")]
    LengthMismatch(usize, usize),
    #[error("no vertex with positive true degree to score")]
    NoEligibleVertices,
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io { path: path.display().to_string(), source }
}

/// `|ln(est / true)|`.
pub fn relative_error(true_deg: usize, est: f64) -> Result<f64, EvalError> {
    if true_deg == 0 || !(est > 0.0) || !est.is_finite() {
        return Err(EvalError::Domain { true_deg, est });
    }
    Ok((est / true_deg as f64).ln().abs())
}

/// Fraction of vertices with `relative_error <= threshold`.
///
/// Vertices of true degree zero are left out of the denominator. An estimate
/// that is zero, negative or NaN (the convention for inestimable vertices)
/// counts as a miss.
pub fn accuracy(true_degs: &[usize], est: &[f64], threshold: f64) -> Result<f64, EvalError> {
    accuracy_masked(true_degs, est, threshold, None)
}

/// [`accuracy`] over the vertices where `mask` is true.
pub fn accuracy_masked(
    true_degs: &[usize],
    est: &[f64],
    threshold: f64,
    mask: Option<&[bool]>,
) -> Result<f64, EvalError> {
    if true_degs.len() != est.len() {
        return Err(EvalError::LengthMismatch(true_degs.len(), est.len()));
    }
    let mut eligible = 0usize;
    let mut hits = 0usize;
    for (v, (&t, &e)) in true_degs.iter().zip(est).enumerate() {
        if t == 0 || mask.is_some_and(|m| !m[v]) {
            continue;
        }
        eligible += 1;
        if relative_error(t, e).is_ok_and(|r| r <= threshold) {
            hits += 1;
        }
    }
    if eligible == 0 {
        return Err(EvalError::NoEligibleVertices);
    }
    Ok(hits as f64 / eligible as f64)
}

/// Integer estimates as reals, with inestimable and unestimated vertices
/// replaced by NaN so that they score as misses.
pub fn scored_estimates(result: &EstimateResult) -> Vec<f64> {
    let mut out: Vec<f64> = result
        .delta_hat
        .iter()
        .zip(&result.estimated)
        .map(|(&d, &e)| if e { d as f64 } else { f64::NAN })
        .collect();
    for &v in &result.inestimable {
        out[v] = f64::NAN;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Edge-list file.
    File { path: PathBuf },
    /// Barabási–Albert preferential attachment.
    Ba { n: usize, attach: usize, seed: u64 },
    /// Erdős–Rényi with a fixed edge count.
    Er { n: usize, m: usize, seed: u64 },
    /// Uniform random k-regular.
    Regular { n: usize, k: usize, seed: u64 },
}

impl GraphSource {
    /// The graph plus the file's vertex ids when read from a file.
    pub fn load(&self) -> Result<(Graph, Option<Vec<u64>>), GraphError> {
        Ok(match self {
            GraphSource::File { path } => {
                let loaded = read_edge_list(path)?;
                (loaded.graph, Some(loaded.original_ids))
            }
            GraphSource::Ba { n, attach, seed } => (gen_barabasi_albert(*n, *attach, *seed)?, None),
            GraphSource::Er { n, m, seed } => (gen_erdos_renyi(*n, *m, *seed)?, None),
            GraphSource::Regular { n, k, seed } => (gen_regular(*n, *k, *seed)?, None),
        })
    }
}

/// One cell of the misspecification grid: the estimators see parameter
/// `param` multiplied by `1 + r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Misspecification {
    pub param: String,
    pub r: f64,
}

fn default_sigmas() -> Vec<f64> {
    vec![0.0]
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_perturbation_limit() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub dynamics: DynamicsModel,
    #[serde(default)]
    pub sampler: Sampler,
    pub fractions: Vec<f64>,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    /// Empty means a single cell with the true model.
    #[serde(default)]
    pub misspecification: Vec<Misspecification>,
    #[serde(default = "default_perturbation_limit")]
    pub perturbation_limit: f64,
    pub estimators: Vec<Estimator>,
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub options: EstimatorConfig,
    /// Directory for cached ground-truth states.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    /// Keep per-vertex estimates in the report.
    #[serde(default)]
    pub per_vertex: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |s: String| Err(EvalError::Config(s));
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if self.fractions.is_empty() || self.sigmas.is_empty() || self.estimators.is_empty() {
            return bad("fractions, sigmas and estimators must be nonempty".into());
        }
        if let Some(p) = self.fractions.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("fraction {p} outside [0, 1]"));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return bad(format!("noise sigma {s} must be >= 0"));
        }
        if !(self.threshold >= 0.0) {
            return bad(format!("threshold {} must be >= 0", self.threshold));
        }
        self.dynamics.validate()?;
        for m in &self.misspecification {
            self.dynamics.perturb(&[(&m.param, m.r)], self.perturbation_limit)?;
        }
        self.options
            .validate()
            .map_err(|e| EvalError::Config(e.to_string()))
    }

    fn misspec_cells(&self) -> Vec<Option<&Misspecification>> {
        if self.misspecification.is_empty() {
            vec![None]
        } else {
            self.misspecification.iter().map(Some).collect()
        }
    }

    fn estimator_config(&self) -> EstimatorConfig {
        let mut c = self.options;
        if self.sampler.is_induced() {
            c.coverage = StateCoverage::ObservedOnly;
        }
        c
    }
}

/// The graph and its simulated steady states.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub graph: Graph,
    pub labels: Option<Vec<u64>>,
    pub states: StateVector,
    pub cache_hit: bool,
}

/// Content hash identifying a ground-truth simulation.
pub fn ground_truth_key(graph: &Graph, model: &DynamicsModel, cfg: &EstimatorConfig) -> String {
    let mut h = Sha256::new();
    h.update(graph.n().to_le_bytes());
    h.update(graph.to_edge_list().as_bytes());
    h.update(serde_json::to_vec(model).expect("model serializes"));
    h.update(serde_json::to_vec(&cfg.solver).expect("options serialize"));
    h.update(model.default_initial_state().to_le_bytes());
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Simulates the true steady states, reusing `cache_dir` when given.
pub fn ground_truth(
    graph: Graph,
    labels: Option<Vec<u64>>,
    model: &DynamicsModel,
    cfg: &EstimatorConfig,
    cache_dir: Option<&Path>,
) -> Result<GroundTruth, EvalError> {
    let cache_path = cache_dir.map(|d| d.join(format!("{}.states", ground_truth_key(&graph, model, cfg))));
    if let Some(path) = cache_path.as_deref().filter(|p| p.exists()) {
        let (_, states) = StateVector::read(path)?;
        if states.len() == graph.n() {
            log::info!("ground truth from cache {}", path.display());
            return Ok(GroundTruth { graph, labels, states, cache_hit: true });
        }
        log::warn!("ignoring cache entry {} of the wrong length", path.display());
    }
    let x0 = StateVector::constant(graph.n(), model.default_initial_state());
    let states = simulate_full(&graph, model, &x0, &cfg.solver)?;
    if let Some(path) = cache_path {
        let dir = path.parent().expect("cache file has a parent");
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        states.write(&path, None)?;
    }
    Ok(GroundTruth { graph, labels, states, cache_hit: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub fraction: f64,
    pub sigma: f64,
    pub misspec: Option<Misspecification>,
    pub estimator: Estimator,
    pub rep: usize,
    /// `None` when the estimator failed.
    pub accuracy: Option<f64>,
    pub accuracy_observed: Option<f64>,
    pub inestimable: usize,
    pub converged: bool,
    pub iterations: usize,
    pub error: Option<String>,
    pub runtime_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub fraction: f64,
    pub sigma: f64,
    pub misspec: Option<Misspecification>,
    pub estimator: Estimator,
    pub repetitions: usize,
    pub completed: usize,
    pub failed: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_accuracy_observed: f64,
    pub std_accuracy_observed: f64,
    pub mean_inestimable: f64,
    pub convergence_rate: f64,
    pub mean_iterations: f64,
    pub mean_runtime_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub version: String,
    pub n: usize,
    pub m: usize,
    pub ground_truth_cached: bool,
    pub wall_time_s: f64,
    pub cells: Vec<CellSummary>,
    pub records: Vec<RepRecord>,
    /// True degrees, kept when per-vertex output is requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_degrees: Option<Vec<usize>>,
}

/// Mean and sample standard deviation, summed in slice order.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(records: &[&RepRecord], repetitions: usize) -> CellSummary {
    let first = records[0];
    let done: Vec<&RepRecord> = records.iter().copied().filter(|r| r.accuracy.is_some()).collect();
    let acc: Vec<f64> = done.iter().filter_map(|r| r.accuracy).collect();
    let obs: Vec<f64> = done.iter().filter_map(|r| r.accuracy_observed).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&acc);
    let (mean_accuracy_observed, std_accuracy_observed) = mean_std(&obs);
    let k = done.len().max(1) as f64;
    CellSummary {
        fraction: first.fraction,
        sigma: first.sigma,
        misspec: first.misspec.clone(),
        estimator: first.estimator,
        repetitions,
        completed: done.len(),
        failed: records.len() - done.len(),
        mean_accuracy,
        std_accuracy,
        mean_accuracy_observed,
        std_accuracy_observed,
        mean_inestimable: done.iter().map(|r| r.inestimable as f64).sum::<f64>() / k,
        convergence_rate: done.iter().filter(|r| r.converged).count() as f64 / k,
        mean_iterations: done.iter().map(|r| r.iterations as f64).sum::<f64>() / k,
        mean_runtime_s: records.iter().map(|r| r.runtime_s).sum::<f64>() / records.len() as f64,
    }
}

struct Unit<'a> {
    config: &'a ExperimentConfig,
    truth: &'a GroundTruth,
    true_degrees: &'a [usize],
    est_cfg: EstimatorConfig,
}

impl Unit<'_> {
    fn run(&self, fraction_idx: usize, rep: usize) -> Vec<RepRecord> {
        let c = self.config;
        let fraction = c.fractions[fraction_idx];
        let sample_seed = derive_seed(c.seed, &[stream::SAMPLE, rep as u64]);
        let sub = c.sampler.sample(&self.truth.graph, fraction, sample_seed);
        let noise_seed = derive_seed(c.seed, &[stream::NOISE, rep as u64]);
        let mut out = Vec::new();
        for &sigma in &c.sigmas {
            let states = add_state_noise(&self.truth.states, sigma, noise_seed);
            for misspec in c.misspec_cells() {
                let model = match misspec {
                    Some(m) => c
                        .dynamics
                        .perturb(&[(&m.param, m.r)], c.perturbation_limit)
                        .expect("validated"),
                    None => c.dynamics,
                };
                let mut topo_plus_cache: Option<(EstimateResult, f64)> = None;
                for &est in &c.estimators {
                    let t0 = Instant::now();
                    let result = match est {
                        Estimator::Round => {
                            let prior = match &topo_plus_cache {
                                Some((r, _)) => Ok(r.clone()),
                                None => Estimator::TopoPlus.run(&states, Some(&sub), &model, &self.est_cfg),
                            };
                            prior.and_then(|p| {
                                crate::estimators::round_refine(&states, &sub, &p, &model, &self.est_cfg)
                            })
                        }
                        _ => est.run(&states, Some(&sub), &model, &self.est_cfg),
                    };
                    let mut runtime_s = t0.elapsed().as_secs_f64();
                    if est == Estimator::Round {
                        if let Some((_, t)) = &topo_plus_cache {
                            runtime_s += t;
                        }
                    }
                    if est == Estimator::TopoPlus {
                        if let Ok(r) = &result {
                            topo_plus_cache = Some((r.clone(), runtime_s));
                        }
                    }
                    out.push(self.record(fraction, sigma, misspec, est, rep, &sub, result, runtime_s));
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &self,
        fraction: f64,
        sigma: f64,
        misspec: Option<&Misspecification>,
        estimator: Estimator,
        rep: usize,
        sub: &SampledSubgraph,
        result: Result<EstimateResult, crate::estimators::EstimateError>,
        runtime_s: f64,
    ) -> RepRecord {
        let mut rec = RepRecord {
            fraction,
            sigma,
            misspec: misspec.cloned(),
            estimator,
            rep,
            accuracy: None,
            accuracy_observed: None,
            inestimable: 0,
            converged: false,
            iterations: 0,
            error: None,
            runtime_s,
            delta_hat: None,
        };
        match result {
            Ok(r) => {
                let est = scored_estimates(&r);
                let observed: Vec<bool> = (0..sub.n()).map(|v| sub.is_observed(v)).collect();
                let scope = if self.est_cfg.coverage == StateCoverage::ObservedOnly {
                    Some(observed.as_slice())
                } else {
                    None
                };
                match accuracy_masked(self.true_degrees, &est, self.config.threshold, scope) {
                    Ok(a) => rec.accuracy = Some(a),
                    Err(e) => rec.error = Some(e.to_string()),
                }
                rec.accuracy_observed =
                    accuracy_masked(self.true_degrees, &est, self.config.threshold, Some(&observed)).ok();
                rec.inestimable = r.inestimable.len();
                rec.converged = r.converged;
                rec.iterations = r.iterations;
                if self.config.per_vertex {
                    rec.delta_hat = Some(r.delta_hat);
                }
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }
}

/// Runs every cell of `config` on an already simulated ground truth.
///
/// `jobs` caps the worker threads (default: all cores). Results do not depend
/// on it.
pub fn run_experiment_on(
    config: &ExperimentConfig,
    truth: &GroundTruth,
    jobs: Option<usize>,
) -> Result<Report, EvalError> {
    config.validate()?;
    let start = Instant::now();
    let true_degrees = truth.graph.degrees().0;
    let unit = Unit { config, truth, true_degrees: &true_degrees, est_cfg: config.estimator_config() };
    let work: Vec<(usize, usize)> = (0..config.fractions.len())
        .flat_map(|f| (0..config.repetitions).map(move |r| (f, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| EvalError::Config(format!("thread pool: {e}")))?;
    let chunks: Vec<Vec<RepRecord>> = pool.install(|| work.par_iter().map(|&(f, r)| unit.run(f, r)).collect());

    // Order records by cell, then repetition.
    let n_sig = config.sigmas.len();
    let n_mis = config.misspec_cells().len();
    let n_est = config.estimators.len();
    let mut records: Vec<(usize, RepRecord)> = Vec::new();
    for (&(f, _), chunk) in work.iter().zip(chunks) {
        for (k, rec) in chunk.into_iter().enumerate() {
            let cell = ((f * n_sig) * n_mis) * n_est + k;
            records.push((cell, rec));
        }
    }
    records.sort_by_key(|(cell, rec)| (*cell, rec.rep));
    let mut by_cell: BTreeMap<usize, Vec<&RepRecord>> = BTreeMap::new();
    for (cell, rec) in &records {
        by_cell.entry(*cell).or_default().push(rec);
    }
    let cells = by_cell.values().map(|rs| summarize(rs, config.repetitions)).collect();
    let failures = records.iter().filter(|(_, r)| r.error.is_some()).count();
    if failures > 0 {
        log::warn!("{failures} estimator runs failed; see the per-repetition records");
    }
    Ok(Report {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        n: truth.graph.n(),
        m: truth.graph.m(),
        ground_truth_cached: truth.cache_hit,
        wall_time_s: start.elapsed().as_secs_f64(),
        cells,
        records: records.into_iter().map(|(_, r)| r).collect(),
        true_degrees: config.per_vertex.then_some(true_degrees),
    })
}

/// Loads the graph, simulates (or loads cached) ground truth, runs the grid.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Report, EvalError> {
    config.validate()?;
    let (graph, labels) = config.graph.load()?;
    let truth = ground_truth(graph, labels, &config.dynamics, &config.options, config.cache_dir.as_deref())?;
    run_experiment_on(config, &truth, jobs)
}

fn misspec_columns(m: &Option<Misspecification>) -> (String, f64) {
    m.as_ref().map_or((String::new(), 0.0), |m| (m.param.clone(), m.r))
}

impl Report {
    pub const CSV_HEADER: &'static str = "sampler,fraction,sigma,misspec_param,misspec_r,estimator,\
repetitions,completed,failed,mean_accuracy,std_accuracy,mean_accuracy_observed,\
std_accuracy_observed,mean_inestimable,convergence_rate,mean_iterations";

    /// One row per cell. Timing is left out so that reruns are byte-identical.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let (param, r) = misspec_columns(&c.misspec);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.config.sampler,
                c.fraction,
                c.sigma,
                param,
                r,
                c.estimator.name(),
                c.repetitions,
                c.completed,
                c.failed,
                c.mean_accuracy,
                c.std_accuracy,
                c.mean_accuracy_observed,
                c.std_accuracy_observed,
                c.mean_inestimable,
                c.convergence_rate,
                c.mean_iterations
            );
        }
        out
    }

    /// Per-vertex estimates, one row per (record, vertex); empty unless the
    /// experiment kept them.
    pub fn per_vertex_csv(&self) -> Option<String> {
        let truth = self.true_degrees.as_ref()?;
        let mut out = String::from("fraction,sigma,misspec_param,misspec_r,estimator,rep,vertex,true_degree,estimate\n");
        for r in &self.records {
            let Some(est) = &r.delta_hat else { continue };
            let (param, pr) = misspec_columns(&r.misspec);
            for (v, (&t, &e)) in truth.iter().zip(est).enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.fraction,
                    r.sigma,
                    param,
                    pr,
                    r.estimator.name(),
                    r.rep,
                    v,
                    t,
                    e
                );
            }
        }
        Some(out)
    }

    /// Looks up a cell.
    pub fn cell(
        &self,
        fraction: f64,
        sigma: f64,
        misspec: Option<(&str, f64)>,
        estimator: Estimator,
    ) -> Option<&CellSummary> {
        self.cells.iter().find(|c| {
            c.fraction == fraction
                && c.sigma == sigma
                && c.estimator == estimator
                && match (&c.misspec, misspec) {
                    (None, None) => true,
                    (Some(a), Some((p, r))) => a.param == p && a.r == r,
                    _ => false,
                }
        })
    }

    /// Writes `<prefix>.csv`, `<prefix>.json` and, when kept,
    /// `<prefix>.vertices.csv`. Returns the paths written.
    pub fn write(&self, prefix: &Path) -> Result<Vec<PathBuf>, EvalError> {
        let with_ext = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        let mut written = Vec::new();
        let csv = with_ext(".csv");
        std::fs::write(&csv, self.to_csv()).map_err(io_err(&csv))?;
        written.push(csv);
        let json = with_ext(".json");
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(&json, text).map_err(io_err(&json))?;
        written.push(json);
        if let Some(pv) = self.per_vertex_csv() {
            let path = with_ext(".vertices.csv");
            std::fs::write(&path, pv).map_err(io_err(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Family;

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(10, 10.0).unwrap(), 0.0);
        assert!((relative_error(10, 10.5).unwrap() - 1.05f64.ln()).abs() < 1e-15);
        assert!((relative_error(4, 2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(relative_error(0, 1.0).is_err());
        assert!(relative_error(3, 0.0).is_err());
        assert!(relative_error(3, f64::NAN).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[3, 5, 7], &[3.0, 5.0, 7.0], 0.05).unwrap(), 1.0);
        assert_eq!(accuracy(&[4, 4], &[4.0, 8.0], 0.05).unwrap(), 0.5);
        assert_eq!(accuracy(&[10], &[10.4], 0.05).unwrap(), 1.0);
        // Zero true degree leaves the denominator; zero estimate is a miss.
        assert_eq!(accuracy(&[0, 2, 2], &[5.0, 0.0, 2.0], 0.05).unwrap(), 0.5);
        assert_eq!(accuracy(&[2], &[f64::NAN], 0.05).unwrap(), 0.0);
        assert!(matches!(accuracy(&[0], &[1.0], 0.05), Err(EvalError::NoEligibleVertices)));
        assert!(accuracy(&[1, 2], &[1.0], 0.05).is_err());
        assert_eq!(accuracy_masked(&[4, 4], &[4.0, 8.0], 0.05, Some(&[false, true])).unwrap(), 0.0);
    }

    #[test]
    fn zero_threshold_is_exact_match() {
        assert_eq!(accuracy(&[3, 4, 5, 6], &[3.0, 4.1, 5.0, 7.0], 0.0).unwrap(), 0.5);
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            graph: GraphSource::Ba { n: 60, attach: 2, seed: 3 },
            dynamics: DynamicsModel::default_for(Family::Epidemic),
            sampler: Sampler::Uniform,
            fractions: vec![0.2, 1.0],
            sigmas: vec![0.0],
            misspecification: vec![],
            perturbation_limit: 0.5,
            estimators: vec![Estimator::TopoPlus, Estimator::Round],
            repetitions: 3,
            seed: 11,
            threshold: DEFAULT_THRESHOLD,
            options: EstimatorConfig::default(),
            cache_dir: None,
            per_vertex: false,
        }
    }

    #[test]
    fn full_topology_cell_is_exact() {
        let r = run_experiment(&small_config(), Some(2)).unwrap();
        let c = r.cell(1.0, 0.0, None, Estimator::TopoPlus).unwrap();
        assert_eq!((c.completed, c.mean_accuracy), (3, 1.0));
        assert_eq!(r.records.len(), 2 * 2 * 3);
    }

    #[test]
    fn summaries_match_records() {
        let r = run_experiment(&small_config(), None).unwrap();
        for c in &r.cells {
            let acc: Vec<f64> = r
                .records
                .iter()
                .filter(|x| x.fraction == c.fraction && x.estimator == c.estimator)
                .filter_map(|x| x.accuracy)
                .collect();
            assert_eq!(acc.len(), c.completed);
            assert_eq!(mean_std(&acc).0, c.mean_accuracy);
        }
    }

    #[test]
    fn csv_independent_of_jobs() {
        let cfg = small_config();
        let a = run_experiment(&cfg, Some(1)).unwrap().to_csv();
        let b = run_experiment(&cfg, Some(4)).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with(Report::CSV_HEADER));
    }

    #[test]
    fn ground_truth_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = gen_barabasi_albert(40, 2, 1).unwrap();
        let m = DynamicsModel::default_for(Family::Regulatory);
        let cfg = EstimatorConfig::default();
        let a = ground_truth(g.clone(), None, &m, &cfg, Some(dir.path())).unwrap();
        let b = ground_truth(g, None, &m, &cfg, Some(dir.path())).unwrap();
        assert!(!a.cache_hit && b.cache_hit);
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn config_validation() {
        let mut c = small_config();
        c.repetitions = 0;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.misspecification = vec![Misspecification { param: "B".into(), r: 0.7 }];
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.fractions = vec![1.5];
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_parses_from_json_shape() {
        let text = r#"{
            "graph": {"kind": "er", "n": 30, "m": 60, "seed": 2},
            "dynamics": {"family": "regulatory", "h": 2.0},
            "fractions": [0.1],
            "estimators": ["zerotopo"],
            "repetitions": 2
        }"#;
        let c: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.sigmas, vec![0.0]);
        assert_eq!(c.sampler, Sampler::Uniform);
        let bad = text.replace("\"repetitions\"", "\"reps\"");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }
}
