//! Steady states of the coupled network ODE and of scalar ODEs.
//!
//! Both solvers integrate forward in time with classical RK4 and step-doubling
//! error control, and stop as soon as the *residual* `max |dx/dt|` falls below
//! `steady_tol`. The residual criterion can be re-checked by anyone holding the
//! returned state, which is not true of step-to-step change.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicsModel;
use crate::graph::Graph;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no steady state within t_max={t_max}: residual {residual:e} at t={t}")]
    NotConverged { residual: f64, t: f64, t_max: f64 },
    #[error("integration diverged at t={t}")]
    Diverged { t: f64 },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// A state is steady once `max |dx/dt| <= steady_tol`.
    pub steady_tol: f64,
    pub t_max: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Relative local error per step.
    pub rtol: f64,
    /// Absolute local error per step.
    pub atol: f64,
    /// Any `|x_i|` above this is reported as divergence.
    pub overflow_guard: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            steady_tol: 1e-9,
            t_max: 1e4,
            dt_init: 1e-2,
            dt_min: 1e-10,
            dt_max: 10.0,
            rtol: 1e-6,
            atol: 1e-9,
            overflow_guard: 1e12,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = self.steady_tol > 0.0
            && self.t_max > 0.0
            && self.dt_min > 0.0
            && self.dt_min <= self.dt_init
            && self.dt_init <= self.dt_max
            && self.rtol > 0.0
            && self.atol > 0.0
            && self.overflow_guard > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidOptions(format!("{self:?}")))
        }
    }
}

/// Per-vertex state values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector(pub Vec<f64>);

impl std::ops::Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl StateVector {
    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }

    /// One `vertex_id value` line per vertex; values carry 17 significant
    /// digits so they parse back bit-exactly. `labels[v]`, when given, replaces
    /// the vertex index as the id.
    pub fn to_text(&self, labels: Option<&[u64]>) -> String {
        let mut out = String::with_capacity(self.0.len() * 28);
        for (v, x) in self.0.iter().enumerate() {
            let id = labels.map_or(v as u64, |l| l[v]);
            let _ = writeln!(out, "{id} {x:.16e}");
        }
        out
    }

    /// Parses the format written by [`StateVector::to_text`], returning the ids
    /// in file order alongside the values.
    pub fn parse(text: &str) -> Result<(Vec<u64>, StateVector), SolverError> {
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| SolverError::Parse { line: idx + 1, reason };
            let mut tok = line.split_whitespace();
            let (Some(a), Some(b), None) = (tok.next(), tok.next(), tok.next()) else {
                return Err(err(format!("expected `vertex_id value`, got {line:?}")));
            };
            let id = a.parse::<u64>().map_err(|_| err(format!("bad vertex id {a:?}")))?;
            let x = b.parse::<f64>().map_err(|_| err(format!("bad value {b:?}")))?;
            if !x.is_finite() {
                return Err(err(format!("non-finite value {b:?}")));
            }
            ids.push(id);
            values.push(x);
        }
        Ok((ids, StateVector(values)))
    }

    pub fn write(&self, path: &Path, labels: Option<&[u64]>) -> Result<(), SolverError> {
        std::fs::write(path, self.to_text(labels)).map_err(|source| SolverError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<(Vec<u64>, StateVector), SolverError> {
        let text = std::fs::read_to_string(path).map_err(|source| SolverError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Residual that ignores pushes below zero on coordinates pinned at the
/// boundary `x = 0`.
fn projected_residual(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .map(|(&xi, &di)| if xi <= 0.0 && di < 0.0 { 0.0 } else { di.abs() })
        .fold(0.0, f64::max)
}

struct Workspace {
    k1: Vec<f64>,
    k_half: Vec<f64>,
    full: Vec<f64>,
    half: Vec<f64>,
    two_half: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Self { k1: z(), k_half: z(), full: z(), half: z(), two_half: z() }
    }
}

/// One RK4 step of size `h` from `x` whose derivative is already in `k1`.
fn rk4_step<F>(deriv: &F, x: &[f64], k1: &[f64], h: f64, out: &mut [f64], ws: &mut RkStages)
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    for i in 0..n {
        ws.tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    deriv(&ws.tmp, &mut ws.k2);
    for i in 0..n {
        ws.tmp[i] = x[i] + 0.5 * h * ws.k2[i];
    }
    deriv(&ws.tmp, &mut ws.k3);
    for i in 0..n {
        ws.tmp[i] = x[i] + h * ws.k3[i];
    }
    deriv(&ws.tmp, &mut ws.k4);
    for i in 0..n {
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}

struct RkStages {
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

/// Integrates `dx/dt = deriv(x)` from `x` until the residual is below
/// `steady_tol`. States are clamped at zero after every accepted step.
///
/// `polish` is consulted whenever the residual is small but not yet below
/// tolerance; returning `Some(state)` ends the integration with that state.
fn integrate_to_steady<F, P>(
    x: &mut [f64],
    deriv: F,
    opts: &SolverOptions,
    mut polish: P,
) -> Result<(), SolverError>
where
    F: Fn(&[f64], &mut [f64]),
    P: FnMut(&[f64], f64) -> Option<Vec<f64>>,
{
    opts.validate()?;
    let n = x.len();
    let mut ws = Workspace::new(n);
    let mut stages = RkStages {
        k2: vec![0.0; n],
        k3: vec![0.0; n],
        k4: vec![0.0; n],
        tmp: vec![0.0; n],
    };
    let mut t = 0.0;
    let mut h = opts.dt_init;
    deriv(x, &mut ws.k1);
    loop {
        let residual = projected_residual(x, &ws.k1);
        if !residual.is_finite() {
            return Err(SolverError::Diverged { t });
        }
        if residual <= opts.steady_tol {
            return Ok(());
        }
        if let Some(better) = polish(x, residual) {
            x.copy_from_slice(&better);
            return Ok(());
        }
        if t >= opts.t_max {
            return Err(SolverError::NotConverged { residual, t, t_max: opts.t_max });
        }

        rk4_step(&deriv, x, &ws.k1, h, &mut ws.full, &mut stages);
        rk4_step(&deriv, x, &ws.k1, 0.5 * h, &mut ws.half, &mut stages);
        deriv(&ws.half, &mut ws.k_half);
        rk4_step(&deriv, &ws.half, &ws.k_half, 0.5 * h, &mut ws.two_half, &mut stages);

        let mut err = 0.0f64;
        let mut diff = 0.0f64;
        let mut motion = 0.0f64;
        let mut finite = true;
        for i in 0..n {
            finite &= ws.two_half[i].is_finite() && ws.full[i].is_finite();
            let e = (ws.two_half[i] - ws.full[i]).abs() / 15.0;
            let scale = opts.atol + opts.rtol * x[i].abs().max(ws.two_half[i].abs());
            err = err.max(e / scale);
            diff = diff.max(e);
            motion = motion.max((ws.two_half[i] - x[i]).abs());
        }
        // Close to rest the absolute test lets h grow to the edge of RK4's
        // stability region, where deviations stop decaying; bounding the error
        // by a fraction of the step's own displacement keeps h well inside it.
        if motion > 0.0 {
            err = err.max(diff / (MOTION_RATIO * motion));
        }
        if !finite {
            err = f64::INFINITY;
        }
        if !err.is_finite() {
            if h <= opts.dt_min {
                return Err(SolverError::Diverged { t });
            }
            h = (0.5 * h).max(opts.dt_min);
            continue;
        }
        if err <= 1.0 || h <= opts.dt_min {
            t += h;
            for i in 0..n {
                let v = ws.two_half[i];
                if !v.is_finite() || v.abs() > opts.overflow_guard {
                    return Err(SolverError::Diverged { t });
                }
                x[i] = v.max(0.0);
            }
            deriv(x, &mut ws.k1);
            if err < 1.0 / 32.0 {
                h = (2.0 * h).min(opts.dt_max);
            }
        } else {
            h = (0.5 * h).max(opts.dt_min);
        }
    }
}

const PAR_THRESHOLD: usize = 4096;
const MOTION_RATIO: f64 = 0.1;

/// Right-hand side of the coupled system, summing neighbors in index order.
pub fn coupled_derivative(graph: &Graph, model: &DynamicsModel, x: &[f64], dx: &mut [f64]) {
    let eval = |i: usize| {
        let xi = x[i];
        let mut s = 0.0;
        for &j in graph.neighbors(i) {
            s += model.g(xi, x[j]);
        }
        model.f(xi) + s
    };
    if x.len() >= PAR_THRESHOLD {
        dx.par_iter_mut().enumerate().for_each(|(i, d)| *d = eval(i));
    } else {
        for (i, d) in dx.iter_mut().enumerate() {
            *d = eval(i);
        }
    }
}

/// Integrates the full coupled system from `x0` to a steady state.
pub fn simulate_full(
    graph: &Graph,
    model: &DynamicsModel,
    x0: &StateVector,
    opts: &SolverOptions,
) -> Result<StateVector, SolverError> {
    if x0.len() != graph.n() {
        return Err(SolverError::InvalidInput(format!(
            "initial state has {} entries for {} vertices",
            x0.len(),
            graph.n()
        )));
    }
    if let Some(bad) = x0.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(SolverError::InvalidInput(format!("initial state entry {bad}")));
    }
    let mut x = x0.0.clone();
    integrate_to_steady(
        &mut x,
        |s: &[f64], d: &mut [f64]| coupled_derivative(graph, model, s, d),
        opts,
        |_, _| None,
    )?;
    Ok(StateVector(x))
}

/// Steady state of the scalar ODE `dx/dt = rhs(x)` reached from `x0`.
///
/// Once the trajectory is close to rest, a few guarded Newton steps finish the
/// job; this keeps slow (near-degenerate) equilibria from exhausting `t_max`.
/// Newton is only accepted if it stays within a small neighborhood of the
/// trajectory, so the root returned is still the one whose basin holds `x0`.
pub fn solve_scalar_steady<F>(rhs: F, x0: f64, opts: &SolverOptions) -> Result<f64, SolverError>
where
    F: Fn(f64) -> f64,
{
    if !x0.is_finite() {
        return Err(SolverError::InvalidInput(format!("initial value {x0}")));
    }
    let mut x = [x0.max(0.0)];
    let tol = opts.steady_tol;
    integrate_to_steady(
        &mut x,
        |s: &[f64], d: &mut [f64]| d[0] = rhs(s[0]),
        opts,
        |s, residual| {
            if residual > 1e-4 {
                return None;
            }
            newton_polish(&rhs, s[0], tol).map(|v| vec![v])
        },
    )?;
    Ok(x[0])
}

fn newton_polish<F: Fn(f64) -> f64>(rhs: &F, start: f64, tol: f64) -> Option<f64> {
    let radius = 1e-2 * start.abs().max(1.0);
    let mut x = start;
    for _ in 0..50 {
        let r = rhs(x);
        if r.abs() <= tol && !(x <= 0.0 && r < 0.0) {
            return Some(x);
        }
        if x <= 0.0 && r < 0.0 {
            return Some(0.0);
        }
        let step = 1e-7 * x.abs().max(1e-3);
        let slope = (rhs(x + step) - rhs(x - step)) / (2.0 * step);
        if !slope.is_finite() || slope == 0.0 {
            return None;
        }
        let next = (x - r / slope).max(0.0);
        if !next.is_finite() || (next - start).abs() > radius {
            return None;
        }
        x = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynamicsModel, Family};
    use crate::graph::{gen_erdos_renyi, gen_regular, Graph};

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn residual(graph: &Graph, model: &DynamicsModel, x: &[f64]) -> f64 {
        // Independent re-evaluation, written out by hand.
        (0..graph.n())
            .map(|i| {
                let mut s = model.f(x[i]);
                for &j in graph.neighbors(i) {
                    s += model.g(x[i], x[j]);
                }
                if x[i] <= 0.0 && s < 0.0 {
                    0.0
                } else {
                    s.abs()
                }
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn epidemic_regular_homogeneous_fixed_point() {
        let g = gen_regular(40, 4, 2).unwrap();
        let m = DynamicsModel::default_for(Family::Epidemic);
        let x = simulate_full(&g, &m, &StateVector::constant(40, 0.5), &opts()).unwrap();
        for v in x.iter() {
            assert!((v - 0.75).abs() < 1e-8, "{v}");
        }
        assert!(residual(&g, &m, &x) <= 1e-9);
    }

    #[test]
    fn epidemic_zero_is_absorbing() {
        let g = gen_regular(20, 4, 2).unwrap();
        let m = DynamicsModel::default_for(Family::Epidemic);
        let x = simulate_full(&g, &m, &StateVector::constant(20, 0.0), &opts()).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn isolated_regulatory_vertex_decays() {
        let g = Graph::empty(1);
        let m = DynamicsModel::default_for(Family::Regulatory);
        let x = simulate_full(&g, &m, &StateVector(vec![3.0]), &opts()).unwrap();
        assert!(x[0].abs() <= 1e-9);
    }

    #[test]
    fn all_families_on_random_graph_meet_residual() {
        let g = gen_erdos_renyi(80, 240, 4).unwrap();
        for fam in Family::ALL {
            let m = DynamicsModel::default_for(fam);
            let x0 = StateVector::constant(80, m.default_initial_state());
            let x = simulate_full(&g, &m, &x0, &opts()).unwrap();
            assert!(residual(&g, &m, &x) <= opts().steady_tol, "{fam}");
            assert!(x.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn simulate_is_deterministic() {
        let g = gen_erdos_renyi(60, 200, 8).unwrap();
        let m = DynamicsModel::default_for(Family::Ecological);
        let x0 = StateVector::constant(60, 6.0);
        let a = simulate_full(&g, &m, &x0, &opts()).unwrap();
        let b = simulate_full(&g, &m, &x0, &opts()).unwrap();
        assert!(a.iter().zip(b.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn horizon_exhaustion_is_reported() {
        let g = gen_regular(10, 2, 0).unwrap();
        let m = DynamicsModel::default_for(Family::Epidemic);
        let short = SolverOptions { t_max: 0.05, ..opts() };
        let err = simulate_full(&g, &m, &StateVector::constant(10, 0.9), &short).unwrap_err();
        assert!(matches!(err, SolverError::NotConverged { residual, .. } if residual > 1e-9));
    }

    #[test]
    fn divergence_is_reported() {
        let err = solve_scalar_steady(|x| x * x + 1.0, 1.0, &opts()).unwrap_err();
        assert!(matches!(err, SolverError::Diverged { .. }), "{err:?}");
    }

    #[test]
    fn bad_inputs() {
        let g = Graph::empty(2);
        let m = DynamicsModel::default_for(Family::Epidemic);
        assert!(simulate_full(&g, &m, &StateVector(vec![1.0]), &opts()).is_err());
        assert!(simulate_full(&g, &m, &StateVector(vec![1.0, -1.0]), &opts()).is_err());
        let broken = SolverOptions { dt_init: 100.0, ..opts() };
        assert!(matches!(
            solve_scalar_steady(|x| -x, 1.0, &broken),
            Err(SolverError::InvalidOptions(_))
        ));
    }

    #[test]
    fn scalar_examples() {
        let logistic = |x: f64| -x + 4.0 * (1.0 - x) * x;
        let v = solve_scalar_steady(logistic, 0.5, &opts()).unwrap();
        assert!((v - 0.75).abs() < 1e-9);
        assert!(logistic(v).abs() <= 1e-9);
        assert!(solve_scalar_steady(|x| -x, 1.0, &opts()).unwrap().abs() <= 1e-9);
        assert_eq!(solve_scalar_steady(logistic, 0.0, &opts()).unwrap(), 0.0);
    }

    #[test]
    fn scalar_degenerate_root_converges() {
        // Double root at 1: trajectories approach it only algebraically.
        let rhs = |x: f64| -x * (x - 1.0) * (x - 1.0) / (x * x + 1.0);
        let v = solve_scalar_steady(rhs, 1.5, &opts()).unwrap();
        assert!(rhs(v).abs() <= 1e-9);
        assert!((v - 1.0).abs() < 1e-3);
    }

    #[test]
    fn state_text_round_trips_exactly() {
        let s = StateVector(vec![0.1, 1.0 / 3.0, 7.5e-300, 0.0, 123456.789]);
        let (ids, back) = StateVector::parse(&s.to_text(None)).unwrap();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
        assert!(s.iter().zip(back.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        let (ids, _) = StateVector::parse(&s.to_text(Some(&[9, 8, 7, 6, 5]))).unwrap();
        assert_eq!(ids, vec![9, 8, 7, 6, 5]);
        assert!(matches!(StateVector::parse("0 1.0\n1 abc\n"), Err(SolverError::Parse { line: 2, .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn epidemic_basin_is_positive_root(beta in 1.2f64..20.0, x0 in 0.01f64..=1.0) {
                // B = R = 1: positive root 1 - 1/beta whenever beta > 1.
                let rhs = |x: f64| -x + beta * (1.0 - x) * x;
                let v = solve_scalar_steady(rhs, x0, &SolverOptions::default()).unwrap();
                prop_assert!(v > 0.0);
                prop_assert!((v - (1.0 - 1.0 / beta)).abs() < 1e-7);
            }
        }
    }
}
