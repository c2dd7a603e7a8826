//! Average treatment effect estimation in randomized experiments where
//! units may interfere with each other in unknown ways.

pub mod assignment;
pub mod data;
pub mod designs;
pub mod dgp;
pub mod distance;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod metrics;
pub mod mixing;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod transport;
pub mod variance;

pub use assignment::AssignmentVector;
pub use data::{ExperimentData, RegularityConstants};
pub use designs::DesignSpec;
pub use error::{Error, Result};
pub use graph::InterferenceGraph;
pub use oracle::{assignment_ate, unit_effect, FnOracle, PotentialOutcomes};
