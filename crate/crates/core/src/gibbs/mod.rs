//! The path-integral Gibbs measure over spin lines and its Metropolis
//! sampler.
//!
//! A configuration assigns to every site of `Λ = {0, …, n−1}` a spin line on
//! the imaginary-time domain. The measure has density
//! `exp(J Σ_{⟨x,y⟩} ∫ σ_x σ_y dt)` with respect to independent rate-`h`
//! spin-flip processes, so that time-zero expectations reproduce
//! `tr(e^{−βH} ·)/tr(e^{−βH})` for the chain `H = −J Σ σ³σ³ − h Σ σ¹`.
//!
//! Sites of an optional slit block have their line cut at time zero, which
//! gives the matrix elements of reduced density operators.

mod chain;
mod config;
mod estimate;
mod params;

pub use chain::{log_relative_density, mc_sample, run_chain, ChainStats, GibbsChain};
pub use config::{End, FieldConfiguration, Strand};
pub use estimate::{
    estimate_time_zero_observable, estimate_time_zero_observables, exact_slit_distribution,
    factorization_ratios, factorization_ratios_exact, mc_reduced_density, slit_counts, CellTable,
    McReducedDensity, SlitCounts, MIN_CELL_COUNT,
};
pub use params::{GibbsParams, SpaceBc, TimeBc, DEFAULT_WINDOW};
