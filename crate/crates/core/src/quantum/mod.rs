//! Exact diagonalization of the open transverse-field Ising chain.
//!
//! Basis states are bit strings with site 0 as the most significant bit; a
//! clear bit is `σ³ = +1`. All matrices are real.

mod density;
mod hamiltonian;
mod solver;

pub use density::{
    block_operator_expectation, operator_norm, reduced_density, reduced_density_mixed,
    trace_distance, von_neumann_entropy, DensityMatrix,
};
pub use hamiltonian::{sigma_z_diagonal, ChainParams, Hamiltonian};
pub use solver::{
    ground_state, ground_state_with, propagator, thermal_expectation, thermal_expectation_diagonal,
    GroundState, LanczosOptions,
};
