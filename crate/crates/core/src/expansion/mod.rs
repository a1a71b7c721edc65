//! Polymer activities, exact polymer-gas partition functions, cluster
//! coefficients and the Kotecký–Preiss check.

mod activity;
mod bounds;
mod kp;
mod partition;

pub use activity::{
    a_of_h, activity_upper_bound, estimate_activity, ActivityEstimate, BoundaryValues, ExpansionParams,
};
pub use bounds::{bound_lemma2, bound_mext, bound_psi};
pub use kp::{kp_check, kp_check_all, tail_bound, KpReport, GROWTH_CONSTANT};
pub use partition::{cluster_coefficients, exact_partition_function, truncated_log_z, PolymerGas, MAX_GAS_SIZE};
