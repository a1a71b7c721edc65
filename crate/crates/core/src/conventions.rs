//! Shared physical conventions.
//!
//! The Hamiltonian is written as `-(J/2) Σ_{ordered nn pairs} σ³σ³ - h Σ σ¹`.
//! Each unordered bond therefore enters with weight `J`, which is the same
//! weight the path-integral exponent `J Σ_bonds ∫ σ_x σ_y dt` assigns to it.
//! Both the quantum and the path-integral code read the factor from here.

/// Weight of one unordered nearest-neighbour bond, in units of `J`.
pub const BOND_WEIGHT: f64 = 1.0;

/// Entropies are reported in nats.
pub const ENTROPY_UNIT: &str = "nats";

/// Eigenvalues of a density matrix below `-NEGATIVE_EIGEN_TOL` are an error;
/// values in `[-NEGATIVE_EIGEN_TOL, 0)` are clipped to zero.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// Largest chain handled by the exact solvers (Hilbert dimension `2^22`).
pub const MAX_SITES: usize = 22;

/// Up to this many sites the ground state comes from a dense symmetric
/// eigendecomposition; above it a Lanczos iteration is used.
pub const DENSE_SITE_LIMIT: usize = 10;
