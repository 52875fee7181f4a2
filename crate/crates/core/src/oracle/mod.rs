//! Exact brute-force ground truth for small instances.
//!
//! These routines are exponential (Boolean setting) or polynomial with a
//! high degree (continuous setting) and exist to validate the forest and the
//! split solvers, not to score production data.

mod boolean;
mod continuous;

pub use boolean::{
    id_length, impostors, max_boolean_subcube_sparsity, parse_point, pid_length_boolean, BooleanDataset,
    CubeSparsity, ImpostorSet, PartialId, MAX_BOOLEAN_DIM,
};
pub use continuous::{
    densest_interval_all, densest_interval_weighted, gap_endpoints, pidscore_1d,
    pidscore_bruteforce, Densest, DiscreteInterval, OneDimScore, MAX_BRUTEFORCE_DIM,
};
pub(crate) use continuous::midpoint;
