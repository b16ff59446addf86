//! Exact and approximate counting of DAG models.
//!
//! The crate exactly counts labeled DAGs, weakly connected DAGs and essential
//! DAGs; enumerates small cases by brute force as ground truth; samples
//! essential graphs uniformly with an MCMC kernel; and turns samples into
//! ratio estimates (essential graphs per DAG, connected essential graphs per
//! connected DAG, and friends) with standard errors.

pub mod counts;
pub mod equivalence;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod mcmc;
pub mod oracle;

pub use error::{Error, Result};

/// Version tag for every persisted JSON/JSONL/CSV schema in this crate.
pub const SCHEMA_VERSION: u32 = 1;
