//! Solvers and diagnostics for inclusion problems `0 ∈ F(z) + A(z)`, where
//! `F` is Lipschitz and `A` is maximal monotone and accessed only through
//! its resolvent.
//!
//! The main entry points are [`problem::InclusionProblem`], [`algorithms::run`]
//! and the audits in [`analysis`].

pub mod algorithms;
pub mod analysis;
pub mod certify;
pub mod error;
pub mod operators;
pub mod point;
pub mod problem;
pub mod prox;
pub mod residuals;
pub mod sets;

pub use algorithms::{run, Algorithm, AlgorithmConfig, Termination, Trajectory, TrajectoryRecord};
pub use error::{Error, Result};
pub use operators::{MaximalMonotoneOperator, SingleValuedOperator};
pub use point::Point;
pub use problem::{InclusionProblem, Regime};
pub use residuals::ResidualReport;
pub use sets::FeasibleSet;
