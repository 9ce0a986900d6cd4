//! Front-end plumbing: CSV output, comparison tables, configuration files and
//! resumable parameter sweeps.

pub mod compare;
pub mod config;
pub mod output;
pub mod sweep;

pub use compare::{ComparisonRow, ComparisonTable};
pub use config::FileConfig;
pub use sweep::{run_sweep, SweepPoint, SweepReport, SweepSpec};
