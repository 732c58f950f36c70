//! Mean-field reduction of the coupled dynamics.
//!
//! Replacing every neighbor by a single effective state `x_eff` turns the
//! coupled system into one scalar ODE for the network,
//! `dx/dt = f(x) + β g(x, x)`, and one uncoupled ODE per vertex,
//! `dx_i/dt = f(x_i) + δ_i g(x_i, x_eff)`. At a steady state the second can be
//! solved for `δ_i`, which is what makes degrees recoverable from states.
//!
//! When part of the neighborhood is observed, the known neighbors enter with
//! their actual states and only the missing degree `d_i` goes through `x_eff`.

use thiserror::Error;

use crate::dynamics::DynamicsModel;
use crate::solver::{solve_scalar_steady, SolverError, SolverOptions};

/// Below this `|g(x_i*, x_eff)|` a vertex's degree is not identifiable.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("interaction with the mean field vanishes (|g| = {g:e}); degree not identifiable")]
    Degenerate { g: f64 },
    #[error("resilience index must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("missing degree must be nonnegative and finite, got {0}")]
    InvalidDegree(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Resilience index β together with the effective state it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldContext {
    pub beta: f64,
    pub x_eff: f64,
}

impl MeanFieldContext {
    pub fn solve(
        model: &DynamicsModel,
        beta: f64,
        init: f64,
        opts: &SolverOptions,
    ) -> Result<Self, MeanFieldError> {
        let x_eff = solve_xeff(model, beta, init, opts)?;
        Ok(Self { beta, x_eff })
    }
}

/// Steady state of `dx/dt = f(x) + β g(x, x)` reached from `init`.
///
/// The root depends on the starting basin; starting at an absorbing zero
/// state returns zero.
pub fn solve_xeff(
    model: &DynamicsModel,
    beta: f64,
    init: f64,
    opts: &SolverOptions,
) -> Result<f64, MeanFieldError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(MeanFieldError::InvalidBeta(beta));
    }
    Ok(solve_scalar_steady(|x| model.f(x) + beta * model.g(x, x), init, opts)?)
}

fn checked_interaction(model: &DynamicsModel, xi: f64, x_eff: f64) -> Result<f64, MeanFieldError> {
    let g = model.g(xi, x_eff);
    if !(g.abs() >= DEGENERACY_FLOOR) {
        return Err(MeanFieldError::Degenerate { g });
    }
    Ok(g)
}

/// Degree that makes `xi_star` a steady state of the uncoupled vertex ODE:
/// `-f(x_i*) / g(x_i*, x_eff)`.
pub fn degree_closed_form(model: &DynamicsModel, xi_star: f64, x_eff: f64) -> Result<f64, MeanFieldError> {
    let g = checked_interaction(model, xi_star, x_eff)?;
    Ok(-model.f(xi_star) / g)
}

/// Number of unobserved neighbors implied by `xi_star`, given the states of
/// the observed neighbors:
/// `-[f(x_i*) + Σ_obs g(x_i*, x_j*)] / g(x_i*, x_eff)`.
///
/// With no observed neighbors this is exactly [`degree_closed_form`].
pub fn missing_degree(
    model: &DynamicsModel,
    xi_star: f64,
    observed_neighbor_states: &[f64],
    x_eff: f64,
) -> Result<f64, MeanFieldError> {
    let g = checked_interaction(model, xi_star, x_eff)?;
    let mut known = 0.0;
    for &xj in observed_neighbor_states {
        known += model.g(xi_star, xj);
    }
    Ok(-(model.f(xi_star) + known) / g)
}

/// Steady state `z_i*(d)` of
/// `dz/dt = f(z) + Σ_obs g(z, x_j*) + d g(z, x_eff)` reached from `init`.
pub fn enhanced_steady(
    model: &DynamicsModel,
    candidate_d: f64,
    observed_neighbor_states: &[f64],
    x_eff: f64,
    init: f64,
    opts: &SolverOptions,
) -> Result<f64, MeanFieldError> {
    if !(candidate_d.is_finite() && candidate_d >= 0.0) {
        return Err(MeanFieldError::InvalidDegree(candidate_d));
    }
    let rhs = |z: f64| {
        let mut s = model.f(z);
        for &xj in observed_neighbor_states {
            s += model.g(z, xj);
        }
        s + candidate_d * model.g(z, x_eff)
    };
    Ok(solve_scalar_steady(rhs, init, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Family;

    fn epi() -> DynamicsModel {
        DynamicsModel::default_for(Family::Epidemic)
    }
    fn reg() -> DynamicsModel {
        DynamicsModel::default_for(Family::Regulatory)
    }
    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn xeff_examples() {
        let v = solve_xeff(&epi(), 4.0, 0.5, &opts()).unwrap();
        assert!((v - 0.75).abs() < 1e-8);
        assert_eq!(solve_xeff(&epi(), 4.0, 0.0, &opts()).unwrap(), 0.0);
        // x = 2x^2/(x^2+1) has the double root x = 1 (plus x = 0).
        let r = solve_xeff(&reg(), 2.0, 1.0, &opts()).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
        // beta = 4: x^2 - 4x + 1 = 0, stable root 2 + sqrt(3).
        let r4 = solve_xeff(&reg(), 4.0, 1.0, &opts()).unwrap();
        assert!((r4 - (2.0 + 3f64.sqrt())).abs() < 1e-8, "{r4}");
        assert!(matches!(solve_xeff(&epi(), 0.0, 0.5, &opts()), Err(MeanFieldError::InvalidBeta(_))));
    }

    #[test]
    fn xeff_with_very_large_beta() {
        // Stiff: the first trial steps overshoot and must be retried smaller.
        let beta = 1e7;
        let v = solve_xeff(&epi(), beta, 0.5, &opts()).unwrap();
        assert!((v - (1.0 - 1.0 / beta)).abs() < 1e-8, "{v}");
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(degree_closed_form(&epi(), 0.75, 0.75).unwrap(), 4.0);
        assert!((degree_closed_form(&reg(), 2.0, 2.0).unwrap() - 2.5).abs() < 1e-14);
        assert_eq!(degree_closed_form(&epi(), 0.0, 0.5).unwrap(), 0.0);
        assert!(matches!(
            degree_closed_form(&epi(), 1.0, 0.5),
            Err(MeanFieldError::Degenerate { .. })
        ));
    }

    #[test]
    fn missing_degree_examples() {
        assert_eq!(missing_degree(&epi(), 0.75, &[], 0.75).unwrap(), 4.0);
        assert_eq!(missing_degree(&epi(), 0.75, &[0.75], 0.75).unwrap(), 3.0);
        assert_eq!(missing_degree(&epi(), 0.75, &[0.75; 4], 0.75).unwrap(), 0.0);
    }

    #[test]
    fn enhanced_steady_examples() {
        let z = enhanced_steady(&epi(), 4.0, &[], 0.75, 0.5, &opts()).unwrap();
        assert!((z - 0.75).abs() < 1e-8);
        let z0 = enhanced_steady(&epi(), 0.0, &[], 0.75, 0.5, &opts()).unwrap();
        assert!(z0.abs() <= 1e-9);
        assert!(enhanced_steady(&epi(), -1.0, &[], 0.75, 0.5, &opts()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn model_strategy() -> impl Strategy<Value = DynamicsModel> {
            prop_oneof![
                Just(DynamicsModel::default_for(Family::Ecological)),
                Just(DynamicsModel::default_for(Family::Regulatory)),
                Just(DynamicsModel::default_for(Family::Epidemic)),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn empty_neighborhood_reduces_to_closed_form(
                m in model_strategy(), x in 0.01f64..0.99, x_eff in 0.01f64..0.99
            ) {
                let a = missing_degree(&m, x, &[], x_eff).unwrap();
                let b = degree_closed_form(&m, x, x_eff).unwrap();
                prop_assert_eq!(a, b);
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn enhanced_steady_recovers_observed_state(
                x in 0.55f64..0.95, x_eff in 0.3f64..0.95,
                nbrs in proptest::collection::vec(0.1f64..0.95, 0..3)
            ) {
                // Epidemic: the enhanced vertex ODE is monotone with a unique
                // positive root whenever the total drive is positive.
                let m = epi();
                let d = missing_degree(&m, x, &nbrs, x_eff).unwrap();
                prop_assume!(d >= 0.0);
                let z = enhanced_steady(&m, d, &nbrs, x_eff, x, &opts()).unwrap();
                prop_assert!((z - x).abs() < 1e-7, "z={} x={}", z, x);
            }
        }
    }
}
