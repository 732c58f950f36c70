//! Inference of individual vertex degrees in a partially observed network from
//! the steady states of nonlinear dynamics running on it.
//!
//! The pipeline is: a [`graph::Graph`] and a [`dynamics::DynamicsModel`] give
//! ground-truth steady states through [`solver::simulate_full`]; a sampler in
//! [`sampling`] reveals part of the topology; the estimators in [`estimators`]
//! combine the observed states with the sampled topology through the
//! mean-field kernel in [`meanfield`]; [`eval`] and [`linkpred`] score the
//! result.

pub mod dynamics;
pub mod estimators;
pub mod eval;
pub mod graph;
pub mod linkpred;
pub mod meanfield;
pub mod rng;
pub mod sampling;
pub mod solver;
pub mod subgraph;
