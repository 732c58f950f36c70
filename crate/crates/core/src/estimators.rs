//! Degree estimators built on the mean-field kernel.
//!
//! * [`zero_topo`] uses the observed states alone.
//! * [`topo_plus`] adds a sampled subgraph: observed neighbors enter with their
//!   true states and only the missing degree is inferred.
//! * [`round_refine`] improves the integer rounding of the missing degrees by
//!   pairwise ±1 moves that reduce the mismatch between observed states and
//!   the states the enhanced mean-field ODE predicts.
//!
//! The first two share one fixed-point loop on `(β, x_eff)`: estimate degrees
//! from `x_eff`, recompute `β = ⟨δ̂²⟩/⟨δ̂⟩`, re-solve `x_eff`, until neither
//! changes by more than `fp_tol` relative.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicsModel;
use crate::graph::beta_of_reals;
use crate::meanfield::{
    degree_closed_form, enhanced_steady, missing_degree, solve_xeff, MeanFieldError,
};
use crate::solver::{SolverOptions, StateVector};
pub use crate::subgraph::SampledSubgraph;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("no vertices to estimate")]
    Empty,
    #[error("{0} states for {1} vertices")]
    LengthMismatch(usize, usize),
    #[error("state of vertex {vertex} is {value}; states must be finite and nonnegative")]
    InvalidState { vertex: usize, value: f64 },
    #[error("every vertex is degenerate at x_eff = {x_eff}; no degree can be estimated")]
    AllDegenerate { x_eff: f64 },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointOptions {
    /// Relative change in β and in x_eff below which the loop stops.
    pub fp_tol: f64,
    pub max_iters: usize,
    /// Weight of the new β once the iteration is seen to oscillate.
    pub damping: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { fp_tol: 1e-6, max_iters: 100, damping: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoundOptions {
    pub max_sweeps: usize,
    /// Number of past missing-degree vectors remembered for cycle detection.
    pub cycle_window: usize,
}

impl Default for RoundOptions {
    fn default() -> Self {
        Self { max_sweeps: 50, cycle_window: 8 }
    }
}

/// Which vertices have observed states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateCoverage {
    /// Every vertex (incident-subgraph setting).
    #[default]
    All,
    /// Only the subgraph's observed vertices (induced-subgraph setting); β and
    /// x_eff are then fitted from those vertices' estimates alone.
    ObservedOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub solver: SolverOptions,
    pub fixed_point: FixedPointOptions,
    pub round: RoundOptions,
    pub coverage: StateCoverage,
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), EstimateError> {
        let fp = &self.fixed_point;
        if !(fp.fp_tol > 0.0) || fp.max_iters == 0 || !(fp.damping > 0.0 && fp.damping <= 1.0) {
            return Err(EstimateError::InvalidOptions(format!("{fp:?}")));
        }
        if self.round.max_sweeps == 0 {
            return Err(EstimateError::InvalidOptions("round.max_sweeps must be >= 1".into()));
        }
        self.solver
            .validate()
            .map_err(|e| EstimateError::InvalidOptions(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    /// Every estimate came out zero, leaving β undefined; nothing to iterate.
    AllZero,
    MaxIterations,
    SweepCap,
    Cycle,
}

/// Summary of one Round sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub pair_moves: usize,
    pub single_moves: usize,
    /// Largest gain among the moves applied (≤ 0 by construction), or
    /// `-inf` when nothing moved.
    pub max_applied_gain: f64,
    pub total_d_before: i64,
    pub total_d_after_pairs: i64,
    pub x_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    /// `δ^(s) + d` before rounding.
    pub delta_hat_raw: Vec<f64>,
    /// Integer estimates after rounding and flooring.
    pub delta_hat: Vec<usize>,
    /// Missing degrees before rounding (negative raw values already clamped).
    pub d_raw: Vec<f64>,
    /// Integer missing degrees, `delta_hat - δ^(s)`.
    pub d: Vec<usize>,
    pub x_eff: f64,
    /// `⟨δ̂²⟩/⟨δ̂⟩` over the estimated vertices, from `delta_hat_raw`.
    pub beta: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Vertices whose degree was not identifiable (interaction with the mean
    /// field below the degeneracy floor).
    pub inestimable: Vec<usize>,
    /// Vertices that were estimated at all; the rest carry zeros.
    pub estimated: Vec<bool>,
    /// Raw estimates below zero that were clamped.
    pub clamped_negative: usize,
    /// Round only: one entry per sweep.
    pub sweeps: Vec<SweepSummary>,
}

impl EstimateResult {
    pub fn estimated_vertices(&self) -> Vec<usize> {
        (0..self.estimated.len()).filter(|&v| self.estimated[v]).collect()
    }

    pub fn is_inestimable(&self, v: usize) -> bool {
        self.inestimable.binary_search(&v).is_ok()
    }
}

fn relative_change(new: f64, old: f64) -> f64 {
    if new == old {
        0.0
    } else {
        (new - old).abs() / new.abs().max(old.abs())
    }
}

fn check_states(states: &StateVector, n: usize, scope: &[usize]) -> Result<(), EstimateError> {
    if states.len() != n {
        return Err(EstimateError::LengthMismatch(states.len(), n));
    }
    for &v in scope {
        let x = states[v];
        if !x.is_finite() || x < 0.0 {
            return Err(EstimateError::InvalidState { vertex: v, value: x });
        }
    }
    Ok(())
}

/// Lowest admissible integer degree: observed edges are certain, and only a
/// vertex at the absorbing zero state may have degree zero.
fn degree_floor(model: &DynamicsModel, x: f64, sampled: usize) -> usize {
    let living = usize::from(!model.is_extinct(x));
    sampled.max(living)
}

enum Start {
    /// `x_eff^(0) = ⟨x*⟩`.
    MeanState,
    /// `δ̂^(0) = δ^(s)`.
    SampledDegrees,
}

struct Problem<'a> {
    model: &'a DynamicsModel,
    states: &'a StateVector,
    scope: Vec<usize>,
    /// `δ^(s)` per vertex (all vertices, zero outside the sample).
    sampled: Vec<usize>,
    /// Observed neighbor states per scope position.
    neighbor_states: Vec<Vec<f64>>,
    use_closed_form: bool,
}

struct Sweep {
    d: Vec<f64>,
    inestimable: Vec<usize>,
    clamped: usize,
}

impl Problem<'_> {
    fn mean_state(&self) -> f64 {
        let s: f64 = self.scope.iter().map(|&v| self.states[v]).sum();
        s / self.scope.len() as f64
    }

    /// Raw missing degree for every scope vertex at `x_eff`.
    fn estimate(&self, x_eff: f64) -> Result<Sweep, EstimateError> {
        let outcomes: Vec<Result<f64, MeanFieldError>> = self
            .scope
            .par_iter()
            .enumerate()
            .map(|(k, &v)| {
                let x = self.states[v];
                if self.use_closed_form {
                    degree_closed_form(self.model, x, x_eff)
                } else {
                    missing_degree(self.model, x, &self.neighbor_states[k], x_eff)
                }
            })
            .collect();
        let mut d = Vec::with_capacity(outcomes.len());
        let mut inestimable = Vec::new();
        let mut clamped = 0;
        let mut live = 0usize;
        for (k, out) in outcomes.into_iter().enumerate() {
            let v = self.scope[k];
            match out {
                Ok(raw) if raw < 0.0 => {
                    clamped += 1;
                    d.push(0.0);
                    live += 1;
                }
                Ok(raw) => {
                    d.push(raw);
                    live += 1;
                }
                Err(MeanFieldError::Degenerate { .. }) => {
                    d.push(0.0);
                    if !self.model.is_extinct(self.states[v]) {
                        inestimable.push(v);
                    } else {
                        live += 1;
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        if live == 0 {
            return Err(EstimateError::AllDegenerate { x_eff });
        }
        Ok(Sweep { d, inestimable, clamped })
    }

    fn degrees(&self, d: &[f64]) -> Vec<f64> {
        self.scope
            .iter()
            .zip(d)
            .map(|(&v, &dv)| self.sampled[v] as f64 + dv)
            .collect()
    }

    fn run(&self, start: Start, cfg: &EstimatorConfig) -> Result<EstimateResult, EstimateError> {
        cfg.validate()?;
        if self.scope.is_empty() {
            return Err(EstimateError::Empty);
        }
        let fp = &cfg.fixed_point;
        let mean = self.mean_state();

        let sampled_beta = match start {
            Start::SampledDegrees => {
                let s: Vec<f64> = self.scope.iter().map(|&v| self.sampled[v] as f64).collect();
                beta_of_reals(&s)
            }
            Start::MeanState => None,
        };
        // (β, x_eff) of the previous iteration, if any.
        let mut prev: Option<(f64, f64)> = None;
        let mut x_eff = mean;
        let mut sweep = None;
        if let Some(b0) = sampled_beta {
            let x0 = solve_xeff(self.model, b0, mean, &cfg.solver)?;
            match self.estimate(x0) {
                Ok(s) => {
                    prev = Some((b0, x0));
                    x_eff = x0;
                    sweep = Some(s);
                }
                // The sampled degrees can be too sparse to sustain a nonzero
                // mean field; fall back to the mean observed state.
                Err(EstimateError::AllDegenerate { .. }) => {
                    log::debug!("sampled beta {b0} gives a degenerate mean field; starting from <x*>");
                }
                Err(e) => return Err(e),
            }
        }
        let mut sweep = match sweep {
            Some(s) => s,
            None => self.estimate(x_eff)?,
        };

        let mut iterations = 0;
        let mut termination = Termination::MaxIterations;
        let mut last_signs: [i8; 2] = [0, 0];
        let mut damped = false;
        let mut clamped_total = sweep.clamped;
        while iterations < fp.max_iters {
            iterations += 1;
            let Some(mut beta) = beta_of_reals(&self.degrees(&sweep.d)) else {
                termination = Termination::AllZero;
                break;
            };
            if let Some((pb, _)) = prev {
                let sign = (beta - pb).signum() as i8;
                if !damped && sign != 0 && last_signs[1] != 0 && sign == -last_signs[1] && last_signs[0] == sign {
                    damped = true;
                    log::debug!("fixed point oscillates; damping beta updates by {}", fp.damping);
                }
                last_signs = [last_signs[1], sign];
                if damped {
                    beta = pb + fp.damping * (beta - pb);
                }
            }
            let new_x_eff = solve_xeff(self.model, beta, x_eff, &cfg.solver)?;
            sweep = self.estimate(new_x_eff)?;
            clamped_total += sweep.clamped;
            let settled = prev.is_some_and(|(pb, _)| relative_change(beta, pb) <= fp.fp_tol)
                && relative_change(new_x_eff, x_eff) <= fp.fp_tol;
            prev = Some((beta, new_x_eff));
            x_eff = new_x_eff;
            if settled {
                termination = Termination::Converged;
                break;
            }
        }
        if termination == Termination::MaxIterations {
            log::warn!("fixed point did not settle within {} iterations", fp.max_iters);
        }
        Ok(self.finish(sweep, x_eff, iterations, termination, clamped_total))
    }

    fn finish(
        &self,
        sweep: Sweep,
        x_eff: f64,
        iterations: usize,
        termination: Termination,
        clamped_negative: usize,
    ) -> EstimateResult {
        let n = self.states.len();
        let mut delta_hat_raw = vec![0.0; n];
        let mut d_raw = vec![0.0; n];
        let mut delta_hat = vec![0usize; n];
        let mut d_int = vec![0usize; n];
        let mut estimated = vec![false; n];
        for (k, &v) in self.scope.iter().enumerate() {
            let sampled = self.sampled[v];
            let raw = sweep.d[k];
            d_raw[v] = raw;
            delta_hat_raw[v] = sampled as f64 + raw;
            let floor = degree_floor(self.model, self.states[v], sampled);
            let rounded = sampled + raw.round() as usize;
            delta_hat[v] = rounded.max(floor);
            d_int[v] = delta_hat[v] - sampled;
            estimated[v] = true;
        }
        let raw_scope: Vec<f64> = self.scope.iter().map(|&v| delta_hat_raw[v]).collect();
        let mut inestimable = sweep.inestimable;
        inestimable.sort_unstable();
        EstimateResult {
            delta_hat_raw,
            delta_hat,
            d_raw,
            d: d_int,
            x_eff,
            beta: beta_of_reals(&raw_scope).unwrap_or(0.0),
            iterations,
            converged: matches!(termination, Termination::Converged | Termination::AllZero),
            termination,
            inestimable,
            estimated,
            clamped_negative,
            sweeps: Vec::new(),
        }
    }
}

fn scope_for(sub: Option<&SampledSubgraph>, n: usize, coverage: StateCoverage) -> Vec<usize> {
    match (coverage, sub) {
        (StateCoverage::ObservedOnly, Some(s)) => s.observed_vertices(),
        _ => (0..n).collect(),
    }
}

/// Degrees from states alone, every vertex estimated.
pub fn zero_topo(
    states: &StateVector,
    model: &DynamicsModel,
    cfg: &EstimatorConfig,
) -> Result<EstimateResult, EstimateError> {
    zero_topo_on(states, (0..states.len()).collect(), model, cfg)
}

/// [`zero_topo`] restricted to the vertices in `scope`, whose states are the
/// only ones read.
pub fn zero_topo_on(
    states: &StateVector,
    scope: Vec<usize>,
    model: &DynamicsModel,
    cfg: &EstimatorConfig,
) -> Result<EstimateResult, EstimateError> {
    let n = states.len();
    check_states(states, n, &scope)?;
    let problem = Problem {
        model,
        states,
        neighbor_states: vec![Vec::new(); scope.len()],
        scope,
        sampled: vec![0; n],
        use_closed_form: true,
    };
    problem.run(Start::MeanState, cfg)
}

/// Degrees from states plus a sampled subgraph.
///
/// Starts from `δ̂ = δ^(s)`; when the sample has no edges this coincides with
/// [`zero_topo`] vertex for vertex.
pub fn topo_plus(
    states: &StateVector,
    sub: &SampledSubgraph,
    model: &DynamicsModel,
    cfg: &EstimatorConfig,
) -> Result<EstimateResult, EstimateError> {
    let n = sub.n();
    let scope = scope_for(Some(sub), n, cfg.coverage);
    check_states(states, n, &scope)?;
    let neighbor_states = scope
        .iter()
        .map(|&v| sub.neighbors(v).iter().map(|&j| states[j]).collect())
        .collect();
    let problem = Problem {
        model,
        states,
        scope,
        sampled: sub.sampled_degrees().0,
        neighbor_states,
        use_closed_form: false,
    };
    problem.run(Start::SampledDegrees, cfg)
}

/// Mismatch between a predicted and an observed state: `|ln(z/x)|` when both
/// are positive, `|z - x|` otherwise.
pub fn state_error(z: f64, x: f64) -> f64 {
    if z > 0.0 && x > 0.0 {
        (z / x).ln().abs()
    } else {
        (z - x).abs()
    }
}

/// Integer refinement of the missing degrees in `prior`.
///
/// Each sweep scores `Q⁺_i = ε_i(d_i+1) - ε_i(d_i)` and
/// `Q⁻_i = ε_i(d_i-1) - ε_i(d_i)`, where `ε_i(d)` compares the enhanced
/// mean-field steady state at missing degree `d` with the observed state.
/// Vertices that gain from both directions are set aside; the rest are paired
/// (most negative gains first) and moved `+1`/`-1` together, which keeps the
/// total edge count fixed. The set-aside vertices then move alone toward the
/// larger gain. β and x_eff are refitted after each sweep.
pub fn round_refine(
    states: &StateVector,
    sub: &SampledSubgraph,
    prior: &EstimateResult,
    model: &DynamicsModel,
    cfg: &EstimatorConfig,
) -> Result<EstimateResult, EstimateError> {
    cfg.validate()?;
    let n = sub.n();
    if prior.d.len() != n || prior.estimated.len() != n {
        return Err(EstimateError::LengthMismatch(prior.d.len(), n));
    }
    let scope = prior.estimated_vertices();
    check_states(states, n, &scope)?;
    if scope.is_empty() {
        return Err(EstimateError::Empty);
    }
    let sampled = sub.sampled_degrees();
    let neighbor_states: Vec<Vec<f64>> = (0..n)
        .map(|v| sub.neighbors(v).iter().map(|&j| states[j]).collect())
        .collect();
    let movable: Vec<usize> = scope
        .iter()
        .copied()
        .filter(|&v| !prior.is_inestimable(v) && !model.is_extinct(states[v]))
        .collect();
    let min_d: Vec<usize> = (0..n)
        .map(|v| degree_floor(model, states[v], sampled[v]) - sampled[v])
        .collect();

    let mut d: Vec<usize> = prior.d.clone();
    let mut x_eff = prior.x_eff;
    let mut memo: HashMap<(usize, usize), Option<f64>> = HashMap::new();
    let mut history: VecDeque<Vec<usize>> = VecDeque::new();
    let mut sweeps = Vec::new();
    let mut termination = Termination::SweepCap;

    let eps = |v: usize, dv: usize, x_eff: f64| -> Option<f64> {
        let x = states[v];
        enhanced_steady(model, dv as f64, &neighbor_states[v], x_eff, x, &cfg.solver)
            .ok()
            .map(|z| state_error(z, x))
    };

    while sweeps.len() < cfg.round.max_sweeps {
        // Fill the memo for every (vertex, d) this sweep needs.
        let needed: Vec<(usize, usize)> = movable
            .iter()
            .flat_map(|&v| {
                let lo = if d[v] > min_d[v] { d[v] - 1 } else { d[v] };
                (lo..=d[v] + 1).map(move |k| (v, k))
            })
            .filter(|key| !memo.contains_key(key))
            .collect();
        let fresh: Vec<((usize, usize), Option<f64>)> = needed
            .par_iter()
            .map(|&(v, k)| ((v, k), eps(v, k, x_eff)))
            .collect();
        memo.extend(fresh);

        let mut plus: Vec<(f64, usize)> = Vec::new();
        let mut minus: Vec<(f64, usize)> = Vec::new();
        let mut gains: HashMap<usize, (Option<f64>, Option<f64>)> = HashMap::new();
        for &v in &movable {
            let Some(e0) = memo[&(v, d[v])] else { continue };
            let qp = memo[&(v, d[v] + 1)].map(|e| e - e0);
            let qm = if d[v] > min_d[v] {
                memo[&(v, d[v] - 1)].map(|e| e - e0)
            } else {
                None
            };
            gains.insert(v, (qp, qm));
            if let Some(q) = qp.filter(|q| *q <= 0.0) {
                plus.push((q, v));
            }
            if let Some(q) = qm.filter(|q| *q <= 0.0) {
                minus.push((q, v));
            }
        }
        let both: Vec<usize> = {
            let mset: std::collections::HashSet<usize> = minus.iter().map(|&(_, v)| v).collect();
            let mut b: Vec<usize> = plus.iter().map(|&(_, v)| v).filter(|v| mset.contains(v)).collect();
            b.sort_unstable();
            b
        };
        plus.retain(|(_, v)| both.binary_search(v).is_err());
        minus.retain(|(_, v)| both.binary_search(v).is_err());
        let by_gain = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        plus.sort_by(by_gain);
        minus.sort_by(by_gain);

        let before = d.clone();
        let total_before: i64 = d.iter().map(|&x| x as i64).sum();
        let mut max_gain = f64::NEG_INFINITY;
        let mut pair_moves = 0;
        for (&(qi, i), &(qj, j)) in plus.iter().zip(&minus) {
            d[i] += 1;
            d[j] -= 1;
            max_gain = max_gain.max(qi).max(qj);
            pair_moves += 1;
        }
        let total_after_pairs: i64 = d.iter().map(|&x| x as i64).sum();
        let mut single_moves = 0;
        for &v in &both {
            let (Some(qp), Some(qm)) = gains[&v] else { continue };
            if qp.abs() > qm.abs() {
                d[v] += 1;
                max_gain = max_gain.max(qp);
                single_moves += 1;
            } else if qp.abs() < qm.abs() {
                d[v] -= 1;
                max_gain = max_gain.max(qm);
                single_moves += 1;
            }
        }

        let unchanged = d == before;
        if !unchanged {
            let degrees: Vec<f64> = scope.iter().map(|&v| (sampled[v] + d[v]) as f64).collect();
            if let Some(beta) = beta_of_reals(&degrees) {
                let next = solve_xeff(model, beta, x_eff, &cfg.solver)?;
                if next.to_bits() != x_eff.to_bits() {
                    memo.clear();
                }
                x_eff = next;
            }
        }
        sweeps.push(SweepSummary {
            pair_moves,
            single_moves,
            max_applied_gain: max_gain,
            total_d_before: total_before,
            total_d_after_pairs: total_after_pairs,
            x_eff,
        });
        if unchanged {
            termination = Termination::Converged;
            break;
        }
        if history.contains(&d) {
            termination = Termination::Cycle;
            break;
        }
        history.push_back(before);
        while history.len() > cfg.round.cycle_window {
            history.pop_front();
        }
    }
    if termination != Termination::Converged {
        log::warn!("round refinement stopped without settling: {termination:?}");
    }

    let delta_hat: Vec<usize> = (0..n)
        .map(|v| if prior.estimated[v] { sampled[v] + d[v] } else { 0 })
        .collect();
    let delta_hat_raw: Vec<f64> = delta_hat.iter().map(|&x| x as f64).collect();
    let raw_scope: Vec<f64> = scope.iter().map(|&v| delta_hat_raw[v]).collect();
    Ok(EstimateResult {
        d_raw: d.iter().map(|&x| x as f64).collect(),
        d,
        delta_hat,
        beta: beta_of_reals(&raw_scope).unwrap_or(0.0),
        delta_hat_raw,
        x_eff,
        iterations: sweeps.len(),
        converged: termination == Termination::Converged,
        termination,
        inestimable: prior.inestimable.clone(),
        estimated: prior.estimated.clone(),
        clamped_negative: prior.clamped_negative,
        sweeps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    ZeroTopo,
    TopoPlus,
    /// TopoPlus followed by Round.
    Round,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::ZeroTopo => "zerotopo",
            Estimator::TopoPlus => "topoplus",
            Estimator::Round => "round",
        }
    }

    /// Runs the estimator; `sub` defaults to the empty subgraph.
    pub fn run(
        self,
        states: &StateVector,
        sub: Option<&SampledSubgraph>,
        model: &DynamicsModel,
        cfg: &EstimatorConfig,
    ) -> Result<EstimateResult, EstimateError> {
        let empty;
        let sub = match sub {
            Some(s) => s,
            None => {
                empty = SampledSubgraph::empty(states.len());
                &empty
            }
        };
        match self {
            Estimator::ZeroTopo => {
                zero_topo_on(states, scope_for(Some(sub), states.len(), cfg.coverage), model, cfg)
            }
            Estimator::TopoPlus => topo_plus(states, sub, model, cfg),
            Estimator::Round => {
                let prior = topo_plus(states, sub, model, cfg)?;
                round_refine(states, sub, &prior, model, cfg)
            }
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['_', '-', '+'], "").as_str() {
            "zerotopo" => Ok(Estimator::ZeroTopo),
            "topoplus" => Ok(Estimator::TopoPlus),
            "round" | "topoplusround" => Ok(Estimator::Round),
            _ => Err(format!("unknown estimator {s:?} (zerotopo | topoplus | round)")),
        }
    }
}
