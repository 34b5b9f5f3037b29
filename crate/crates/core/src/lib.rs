//! Batched, scalable multi-objective Bayesian optimization.
//!
//! The optimizer fits one Monte-Carlo-dropout network per objective
//! (optionally with gradient matching), searches the lower-confidence-bound
//! surrogate problem with MOEA/D, and greedily picks a batch of points that
//! maximizes the optimistic hypervolume gain over everything evaluated so far.
//!
//! The [`optimizer::Optimizer`] exposes an ask/tell interface for external
//! problems; [`optimizer::run`] drives the built-in benchmark suite.

pub mod domain;
pub mod error;
pub mod indicators;
pub mod moead;
pub mod optimizer;
pub mod problems;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod selection;
pub mod surrogate;

pub use domain::{
    clamp_to_bounds, dominates, nondominated_subset, Archive, BoxBounds, DecisionVector, EvaluatedSolution,
    GradientMatrix, ObjectiveVector,
};
pub use error::{Error, Result};
pub use rng::RngStream;
