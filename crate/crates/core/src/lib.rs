//! Desk-scale numerics for the one-dimensional ferromagnetic quantum Ising
//! chain in a transverse field.
//!
//! The crate has five layers:
//!
//! * [`quantum`]: exact diagonalization, reduced density matrices and
//!   entanglement entropy. Every other layer is checked against it.
//! * [`spinflip`]: continuous-time spin-flip trajectories, bridges and the
//!   two-point transition kernel.
//! * [`gibbs`]: the path-integral Gibbs measure over spin lines and its
//!   Metropolis sampler.
//! * [`lattice`] and [`expansion`]: the block-discretized space-time lattice,
//!   polymers, clusters, activities and the Kotecký–Preiss check.
//! * [`experiments`]: scenario runners behind the `tfim` CLI.

pub mod conventions;
pub mod error;
pub mod expansion;
pub mod experiments;
pub mod gibbs;
pub mod lattice;
pub mod quantum;
pub mod rng;
pub mod spinflip;
pub mod stats;

pub use error::{Error, Result};
pub use spinflip::{Spin, Trajectory};
