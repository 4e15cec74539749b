//! Dynamical analysis of Euclidean algorithms: exact decompositions, additive
//! costs, exhaustive ensemble statistics, real-input trajectories and
//! transfer-operator constants.

pub mod algorithm;
pub mod cost;
pub mod ensemble;
pub mod error;
pub mod identities;
pub mod lft;
pub mod realdyn;
pub mod spectral;
pub mod stats;

pub use algorithm::{decompose, divide, reconstruct, Algorithm, Digit, Sign, Trajectory};
pub use cost::{total_cost, DigitCost};
pub use error::{Error, Result};
pub use lft::Lft;
