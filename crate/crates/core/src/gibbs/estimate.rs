use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chain::{run_chain, ChainStats};
use super::config::FieldConfiguration;
use super::params::{GibbsParams, SpaceBc, TimeBc};
use crate::error::{invalid, Result};
use crate::quantum::{propagator, Hamiltonian};
use crate::spinflip::Spin;
use crate::stats::{batch_means, ObservableEstimate, DEFAULT_BATCHES};

/// Cells of a slit table seen fewer times than this are flagged.
pub const MIN_CELL_COUNT: u64 = 20;

/// Batch-means estimate of `E[f(σ_Λ(0))]` over recorded configurations.
pub fn estimate_time_zero_observable(
    samples: &[FieldConfiguration],
    f: impl Fn(&[Spin]) -> f64,
) -> Result<ObservableEstimate> {
    let xs: Vec<f64> = samples.iter().map(|c| f(&c.time_zero())).collect();
    batch_means(&xs, DEFAULT_BATCHES)
}

/// Several time-zero observables from one chain, without storing the
/// configurations.
pub fn estimate_time_zero_observables<R: Rng + ?Sized>(
    params: &GibbsParams,
    n_sweeps: usize,
    n_burn_in: usize,
    rng: &mut R,
    observables: &[&dyn Fn(&[Spin]) -> f64],
) -> Result<(Vec<ObservableEstimate>, ChainStats)> {
    let mut series = vec![Vec::with_capacity(n_sweeps.saturating_sub(n_burn_in)); observables.len()];
    let stats = run_chain(params, n_sweeps, n_burn_in, rng, |c| {
        let s = c.time_zero();
        for (f, xs) in observables.iter().zip(series.iter_mut()) {
            xs.push(f(&s));
        }
    })?;
    let est = series.iter().map(|xs| batch_means(xs, DEFAULT_BATCHES)).collect::<Result<Vec<_>>>()?;
    Ok((est, stats))
}

/// Index of a block configuration, first site most significant, a set bit
/// meaning `σ³ = −1`.
fn block_index(spins: impl Iterator<Item = Spin>) -> usize {
    spins.fold(0, |acc, s| acc << 1 | (s == Spin::Down) as usize)
}

/// Counts of `(σ_B(0⁺), σ_B(0⁻))` over the slit block `B`, per batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitCounts {
    pub dim: usize,
    /// `batches[b][a·dim + c]` counts `ε⁺ = a`, `ε⁻ = c` in batch `b`.
    pub batches: Vec<Vec<u64>>,
    pub stats: ChainStats,
}

impl SlitCounts {
    pub fn total(&self) -> Vec<u64> {
        let mut t = vec![0; self.dim * self.dim];
        for b in &self.batches {
            for (x, y) in t.iter_mut().zip(b) {
                *x += y;
            }
        }
        t
    }
}

pub fn slit_counts<R: Rng + ?Sized>(
    params: &GibbsParams,
    n_sweeps: usize,
    n_burn_in: usize,
    rng: &mut R,
) -> Result<SlitCounts> {
    let Some((lo, hi)) = params.slit else {
        return Err(invalid("slit counts need a slit block"));
    };
    let dim = 1usize << (hi - lo + 1);
    let n_rec = n_sweeps.saturating_sub(n_burn_in);
    let n_batches = DEFAULT_BATCHES.min(n_rec.max(1));
    let per_batch = (n_rec / n_batches).max(1);
    let mut batches = vec![vec![0u64; dim * dim]; n_batches];
    let mut k = 0usize;
    let stats = run_chain(params, n_sweeps, n_burn_in, rng, |c| {
        let plus = block_index((lo..=hi).map(|x| c.slit_values(x).0));
        let minus = block_index((lo..=hi).map(|x| c.slit_values(x).1));
        let b = (k / per_batch).min(n_batches - 1);
        batches[b][plus * dim + minus] += 1;
        k += 1;
    })?;
    Ok(SlitCounts { dim, batches, stats })
}

/// A `dim × dim` table of estimates indexed by `(ε⁺, ε⁻)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellTable {
    pub dim: usize,
    pub value: Vec<Vec<f64>>,
    /// Jackknife over batches.
    pub std_error: Vec<Vec<f64>>,
    pub counts: Vec<Vec<u64>>,
    /// Cells seen fewer than [`MIN_CELL_COUNT`] times.
    pub undersampled: Vec<(usize, usize)>,
}

fn frequencies(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n.max(1) as f64).collect()
}

fn table(counts: &SlitCounts, f: impl Fn(&[f64], usize) -> Vec<f64>) -> CellTable {
    let dim = counts.dim;
    let total = counts.total();
    let value = f(&frequencies(&total), dim);
    let nb = counts.batches.len();
    let mut std_error = vec![0.0; dim * dim];
    if nb >= 2 {
        let loo: Vec<Vec<f64>> = counts
            .batches
            .iter()
            .map(|b| {
                let rest: Vec<u64> = total.iter().zip(b).map(|(t, x)| t - x).collect();
                f(&frequencies(&rest), dim)
            })
            .collect();
        for i in 0..dim * dim {
            let m = loo.iter().map(|v| v[i]).sum::<f64>() / nb as f64;
            let ss: f64 = loo.iter().map(|v| (v[i] - m).powi(2)).sum();
            std_error[i] = ((nb as f64 - 1.0) / nb as f64 * ss).sqrt();
        }
    }
    let undersampled = (0..dim * dim).filter(|&i| total[i] < MIN_CELL_COUNT).map(|i| (i / dim, i % dim)).collect();
    let rows = |v: &[f64]| v.chunks(dim).map(<[f64]>::to_vec).collect();
    CellTable {
        dim,
        value: rows(&value),
        std_error: rows(&std_error),
        counts: total.chunks(dim).map(<[u64]>::to_vec).collect(),
        undersampled,
    }
}

fn normalize_by_diagonal(p: &[f64], dim: usize) -> Vec<f64> {
    let tr: f64 = (0..dim).map(|a| p[a * dim + a]).sum();
    p.iter().map(|x| x / tr).collect()
}

fn ratios(p: &[f64], dim: usize) -> Vec<f64> {
    let plus: Vec<f64> = (0..dim).map(|a| (0..dim).map(|c| p[a * dim + c]).sum()).collect();
    let minus: Vec<f64> = (0..dim).map(|c| (0..dim).map(|a| p[a * dim + c]).sum()).collect();
    (0..dim * dim).map(|i| p[i] / (plus[i / dim] * minus[i % dim])).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReducedDensity {
    pub rho: CellTable,
    pub stats: ChainStats,
}

/// `ρ(ε⁺, ε⁻) = ν(σ_{B⁺} = ε⁺, σ_{B⁻} = ε⁻) / ν(σ_{B⁺} = σ_{B⁻})` on the
/// periodic slit box with the cut on `block`.
pub fn mc_reduced_density<R: Rng + ?Sized>(
    params: &GibbsParams,
    block: (usize, usize),
    n_sweeps: usize,
    n_burn_in: usize,
    rng: &mut R,
) -> Result<McReducedDensity> {
    if params.bc_time != TimeBc::Periodic {
        return Err(invalid("reduced densities use periodic time boundary conditions"));
    }
    let p = params.clone().with_slit(block.0, block.1)?;
    let counts = slit_counts(&p, n_sweeps, n_burn_in, rng)?;
    if !table(&counts, normalize_by_diagonal).undersampled.is_empty() {
        log::warn!("undersampled cells in the slit table");
    }
    Ok(McReducedDensity { rho: table(&counts, normalize_by_diagonal), stats: counts.stats })
}

/// `φ{ε⁺, ε⁻} / (φ{ε⁺} φ{ε⁻})` for the slit measure of `params`.
pub fn factorization_ratios<R: Rng + ?Sized>(
    params: &GibbsParams,
    n_sweeps: usize,
    n_burn_in: usize,
    rng: &mut R,
) -> Result<(CellTable, ChainStats)> {
    let counts = slit_counts(params, n_sweeps, n_burn_in, rng)?;
    Ok((table(&counts, ratios), counts.stats))
}

fn basis_index(spins: &[Spin]) -> usize {
    block_index(spins.iter().copied())
}

/// Exact joint law of `(σ_B(0⁺), σ_B(0⁻))` under the slit measure, by
/// transfer operators `e^{−tH}`. Row `ε⁺`, column `ε⁻`; entries sum to 1.
pub fn exact_slit_distribution(params: &GibbsParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let Some((lo, hi)) = params.slit else {
        return Err(invalid("exact slit distribution needs a slit block"));
    };
    if params.bc_space != SpaceBc::Free {
        return Err(invalid("exact slit distribution supports free spatial boundaries only"));
    }
    let n = params.n_sites;
    let ham = Hamiltonian::new(n, params.j, params.h)?;
    let full = 1usize << n;
    let w = hi - lo + 1;
    let dim = 1usize << w;
    let shift = n - 1 - hi;
    let mask = (dim - 1) << shift;
    let block_of = |i: usize| (i & mask) >> shift;
    let with_block = |i: usize, b: usize| (i & !mask) | (b << shift);
    let mut p = vec![0.0; dim * dim];
    match &params.bc_time {
        TimeBc::Periodic => {
            let g = propagator(&ham, params.beta)?;
            for i in 0..full {
                let a = block_of(i);
                for c in 0..dim {
                    p[a * dim + c] += g[(i, with_block(i, c))];
                }
            }
        }
        bc => {
            let m = propagator(&ham, 0.5 * params.beta)?;
            let boundary = |side: Option<&Vec<Spin>>| match side {
                Some(xi) => {
                    let mut v = DVector::zeros(full);
                    v[basis_index(xi)] = 1.0;
                    v
                }
                None => DVector::from_element(full, 1.0),
            };
            let (plus, minus) = match bc {
                TimeBc::Fixed { plus, minus } => (Some(plus), Some(minus)),
                _ => (None, None),
            };
            let u = &m * boundary(plus);
            let v = &m * boundary(minus);
            for i in 0..full {
                let a = block_of(i);
                for c in 0..dim {
                    p[a * dim + c] += u[i] * v[with_block(i, c)];
                }
            }
        }
    }
    let z: f64 = p.iter().sum();
    Ok(p.chunks(dim).map(|r| r.iter().map(|x| x / z).collect()).collect())
}

/// Factorization ratios of [`exact_slit_distribution`].
pub fn factorization_ratios_exact(params: &GibbsParams) -> Result<Vec<Vec<f64>>> {
    let p = exact_slit_distribution(params)?;
    let dim = p.len();
    let flat: Vec<f64> = p.concat();
    Ok(ratios(&flat, dim).chunks(dim).map(<[f64]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::mc_sample;
    use crate::quantum::{reduced_density_mixed, sigma_z_diagonal, thermal_expectation_diagonal};
    use crate::rng::stream;

    #[test]
    fn constant_observable_has_no_error() {
        let p = GibbsParams::periodic(1.0, 2.0, 2.0, 2).unwrap();
        let s = mc_sample(&p, 300, 50, &mut stream(2, 0)).unwrap();
        let e = estimate_time_zero_observable(&s, |_| 1.0).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
        assert!(estimate_time_zero_observable(&s[..50], |_| 1.0).is_err());
    }

    #[test]
    fn single_site_magnetization_vanishes() {
        let p = GibbsParams::periodic(0.0, 1.0, 4.0, 1).unwrap();
        let s = mc_sample(&p, 4000, 200, &mut stream(4, 0)).unwrap();
        let e = estimate_time_zero_observable(&s, |x| x[0].value()).unwrap();
        assert!(e.mean.abs() < 4.0 * e.std_error.max(1e-3), "{e:?}");
    }

    #[test]
    fn two_site_correlator_matches_thermal() {
        let p = GibbsParams::periodic(1.0, 2.0, 4.0, 2).unwrap();
        let f = |s: &[Spin]| s[0].value() * s[1].value();
        let (est, _) = estimate_time_zero_observables(&p, 20_000, 2_000, &mut stream(6, 0), &[&f]).unwrap();
        let ham = Hamiltonian::new(2, 1.0, 2.0).unwrap();
        let exact = thermal_expectation_diagonal(&ham, 4.0, &sigma_z_diagonal(2, &[0, 1])).unwrap();
        assert!((est[0].mean - exact).abs() < 3.0 * est[0].std_error + 1e-3, "{:?} vs {exact}", est[0]);
    }

    #[test]
    fn exact_slit_periodic_is_thermal_reduced_density() {
        let p = GibbsParams::periodic(1.0, 1.5, 3.0, 4).unwrap().with_slit(1, 2).unwrap();
        let joint = exact_slit_distribution(&p).unwrap();
        let tr: f64 = (0..4).map(|a| joint[a][a]).sum();
        let ham = Hamiltonian::new(4, 1.0, 1.5).unwrap();
        let g = propagator(&ham, 3.0).unwrap();
        let rho = reduced_density_mixed(&g, 4, 1..3).unwrap();
        for a in 0..4 {
            for c in 0..4 {
                assert!((joint[a][c] / tr - rho.matrix()[(a, c)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_coupling_factorizes_exactly() {
        let p = GibbsParams {
            j: 0.0,
            bc_time: TimeBc::Fixed { plus: vec![Spin::Up; 3], minus: vec![Spin::Down, Spin::Up, Spin::Up] },
            ..GibbsParams::periodic(0.0, 2.0, 2.0, 3).unwrap()
        }
        .with_slit(1, 1)
        .unwrap();
        for row in factorization_ratios_exact(&p).unwrap() {
            for r in row {
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_site_reduced_density_is_flat() {
        let p = GibbsParams::periodic(0.0, 1.0, 8.0, 1).unwrap();
        let d = mc_reduced_density(&p, (0, 0), 20_000, 1_000, &mut stream(11, 0)).unwrap();
        for a in 0..2 {
            for c in 0..2 {
                let (v, e) = (d.rho.value[a][c], d.rho.std_error[a][c]);
                assert!((v - 0.5).abs() < 3.0 * e + 2e-3, "{a}{c}: {v} ± {e}");
            }
        }
    }
}
