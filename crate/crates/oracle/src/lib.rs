//! Brute-force reference implementations. Nothing here may depend on the
//! engine: each function re-derives its answer from definitions so that a
//! bug in the engine cannot confirm itself.

pub mod apply;
pub mod cra;
pub mod generate;
pub mod semantics;
pub mod theorem;

pub use apply::{naive_apply, NaiveStep};
pub use cra::{cra_optimal_assignment, partition_metric, Optimum, OracleError, DEFAULT_BOUND};
pub use generate::{instance, Gen, GenParams, Instance, MANIFEST};
pub use semantics::{morphisms, oracle_nv, oracle_satisfies, oracle_violations};
pub use theorem::{
    actual_delta, direct_flags, naive_matches, verify_delta_theorem, DeltaCheck, DirectFlags, OracleReport,
};
