//! The two-state spin-flip process of rate `h`.
//!
//! A spin line is a right-continuous `±1` path that flips at the points of a
//! Poisson process. [`Trajectory`] stores such a path exactly as its initial
//! value plus a sorted list of flip times, so overlaps between lines are
//! computed without quadrature error.

mod blocks;
pub(crate) mod sampling;
mod trajectory;

pub use blocks::{block_decompose, recompose, BlockSpin};
pub use sampling::{
    conditioned_poisson_count, kernel_same, sample_bridge, sample_forward, sample_stationary,
    transition_kernel, BRIDGE_LEAF_RATE,
};
pub use trajectory::{overlap_integral, Spin, Trajectory};
