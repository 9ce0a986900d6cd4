//! Simulation and steady-state modelling of tree-based network size counting
//! under Poisson churn.
//!
//! The crate has four layers:
//!
//! * [`graph`]: a dynamic Erdős–Rényi graph with Poisson joins and uniform failures.
//! * [`protocol`]: the per-node level/aggregate/parent registers and their update rule.
//! * [`sim`]: an exact continuous-time discrete-event simulator that samples
//!   level populations, partial aggregates and unstable-node counts.
//! * [`model`]: the master-equation model of the same quantities, solved numerically.
//!
//! [`harness`] ties the two together with CSV output, parameter sweeps and
//! model-versus-simulation comparison tables; the `treecount` binary exposes it.

pub mod error;
pub mod graph;
pub mod harness;
pub mod model;
pub mod protocol;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{sample_join_degree, ChurnParams, DynamicGraph, NodeId};
pub use model::{predict, LevelProfile, ModelParams, ModelSolution};
pub use protocol::{Level, NodeState, StabilityClass};
pub use sim::{LevelSample, SimConfig, SimResult};

/// Crate version, recorded in sweep manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
