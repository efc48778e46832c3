//! Run orchestration for the dlab solvers: exact-rational configuration,
//! hashed run manifests, q sweeps with versioned tables, verification suites
//! and the pseudoconformal dual-run check.

pub mod config;
pub mod error;
pub mod pcheck;
pub mod report;
pub mod runner;
pub mod sweep;
pub mod table;
pub mod verify;

pub use config::{parse_config, parse_config_with, RunConfig};
pub use error::{exit, HarnessError, Result};
pub use runner::{run, run_in, RunManifest};
pub use sweep::{sweep, SweepReport, SweepRow};
