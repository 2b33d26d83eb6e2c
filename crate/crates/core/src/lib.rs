//! Envy minimization for house allocation.
//!
//! Agents each receive one house. The crate measures envy, refines a given
//! allocation with a bounded number of reallocations, solves the
//! single-peaked and single-dipped domains exactly, and ships exhaustive
//! oracles, welfare baselines, generators and an experiment harness.

pub mod bench;
pub mod dipped;
pub mod error;
pub mod gen;
pub mod graph;
pub mod measure;
pub mod model;
pub mod oracle;
mod orders;
pub mod par;
pub mod pareto;
pub mod peaked;
pub mod refine;
pub mod welfare;

pub use error::{Error, Result};
pub use graph::{apply_all, apply_path, decompose, symmetric_difference, AltKind, AltPath, PreferenceGraph};
pub use measure::{envy_report, measure_value, welfare, EnvyReport, Measure, WelfareKind};
pub use model::{Agent, Allocation, House, Instance, Preferences, Ranking};
