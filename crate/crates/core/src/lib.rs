//! Hypergradients of bilevel programs through the implicit function theorem,
//! with preconditioned and reparameterized variants and tooling to measure
//! how fast each estimator's error decays with the inner error.

pub mod efficiency;
pub mod error;
pub mod estimators;
pub mod fd;
pub mod linalg;
pub mod model_zoo;
pub mod problem;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use problem::{BilevelProblem, InnerOracle, OuterOracle};
