//! Set-membership parameter estimation over sensor networks.
//!
//! A network of nodes observes a common parameter vector through scalar
//! measurements corrupted by unknown-but-bounded noise. Every measurement
//! confines the parameter to a convex region, and the intersection of all
//! regions seen so far is the set of parameters consistent with the data.
//! The estimators here track a point in that intersection using nothing
//! but local projections and neighbor estimates:
//!
//! * **incremental**: a single estimate travels the node cycle and is
//!   projected onto each node's current feasible set in turn;
//! * **consensus**: every node averages the estimates it receives through
//!   a row-stochastic weight matrix and projects the average onto its own
//!   feasible set.
//!
//! [`geometry`] provides the convex sets and projections, [`network`] the
//! communication graphs and weight matrices, [`estimation`] the two
//! estimators with their stopping rules, [`regression`] the bounded-noise
//! linear regression scenario, and [`harness`] a deterministic Monte
//! Carlo campaign driver on top of them.
//!
//! Everything numeric is generic over the [`Real`] scalar (`f32` or
//! `f64`); the `*64` aliases below fix `f64` for everyday use.

pub mod error;
pub mod estimation;
pub mod geometry;
pub mod harness;
pub mod network;
pub mod regression;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Parameter-space vector over `f64`.
pub type Vector64 = geometry::Vector<f64>;
/// Slab over `f64`.
pub type Slab64 = geometry::Slab<f64>;
/// Feasible set over `f64`.
pub type FeasibleSet64 = geometry::FeasibleSet<f64>;
/// Weight matrix over `f64`.
pub type WeightMatrix64 = network::WeightMatrix<f64>;
/// Estimator state over `f64`.
pub type EstimatorState64 = estimation::EstimatorState<f64>;
/// Run trajectory over `f64`.
pub type Trajectory64 = estimation::Trajectory<f64>;
/// Measurement scenario over `f64`.
pub type Scenario64 = regression::Scenario<f64>;
