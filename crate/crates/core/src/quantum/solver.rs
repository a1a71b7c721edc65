use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use super::hamiltonian::Hamiltonian;
use crate::conventions::DENSE_SITE_LIMIT;
use crate::error::{invalid, Error, Result};
use crate::rng::from_seed;

/// Gaps below this count as a degenerate ground space.
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// `E₁ − E₀`. From the Lanczos path this is a Ritz estimate.
    pub gap: f64,
    /// Normalized; the largest-magnitude amplitude is positive.
    pub state: DVector<f64>,
    pub degenerate: bool,
    /// Smallest amplitude divided by the largest. Perron–Frobenius predicts a
    /// positive value whenever `h > 0`.
    pub min_relative_amplitude: f64,
    /// `‖Hψ − Eψ‖`.
    pub residual: f64,
}

impl GroundState {
    pub fn is_positive(&self) -> bool {
        self.min_relative_amplitude > 0.0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_krylov: usize,
    pub max_restarts: usize,
    /// Target for `‖Hψ − Eψ‖`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_krylov: 160, max_restarts: 30, tol: 1e-12, seed: 0x5eed }
    }
}

pub fn ground_state(ham: &Hamiltonian) -> Result<GroundState> {
    ground_state_with(ham, &LanczosOptions::default())
}

/// Dense decomposition up to [`DENSE_SITE_LIMIT`] sites, Lanczos above.
pub fn ground_state_with(ham: &Hamiltonian, opts: &LanczosOptions) -> Result<GroundState> {
    let (energy, second, mut state) = if ham.n_sites() <= DENSE_SITE_LIMIT {
        dense_lowest(ham)?
    } else {
        lanczos_lowest(ham, opts)?
    };
    fix_phase(&mut state);
    let mut hv = vec![0.0; state.len()];
    ham.apply(state.as_slice(), &mut hv);
    let residual = hv
        .iter()
        .zip(state.iter())
        .map(|(a, b)| (a - energy * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let gap = second - energy;
    let degenerate = gap < DEGENERACY_TOL;
    if degenerate {
        warn!("ground space looks degenerate (gap {gap:.3e})");
    }
    let amax = state.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let amin = state.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let gs = GroundState {
        energy,
        gap,
        state,
        degenerate,
        min_relative_amplitude: amin / amax,
        residual,
    };
    if ham.h() > 0.0 && !gs.is_positive() {
        warn!("ground state has a nonpositive amplitude ({:.3e} relative)", gs.min_relative_amplitude);
    }
    Ok(gs)
}

fn fix_phase(v: &mut DVector<f64>) {
    let (mut best, mut idx) = (0.0, 0);
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.neg_mut();
    }
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

fn dense_lowest(ham: &Hamiltonian) -> Result<(f64, f64, DVector<f64>)> {
    let (vals, vecs) = sorted_eigen(ham.dense());
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    let second = vals.get(1).copied().unwrap_or(f64::INFINITY);
    Ok((vals[0], second, vecs.column(0).into_owned()))
}

/// Restarted Lanczos with full reorthogonalization.
fn lanczos_lowest(ham: &Hamiltonian, opts: &LanczosOptions) -> Result<(f64, f64, DVector<f64>)> {
    let dim = ham.dim();
    let kmax = opts.max_krylov.min(dim).max(2);
    let mut rng = from_seed(opts.seed);
    // a random start overlaps both spin-flip sectors, so the first pass
    // also yields a gap estimate
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut second = f64::INFINITY;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut w = vec![0.0; dim];
    for pass in 0..=opts.max_restarts {
        normalize(&mut start);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz: Option<(f64, f64, Vec<f64>)> = None;
        for j in 0..kmax {
            ham.apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w);
            alpha.push(a);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let b = norm(&w);
            let (theta, theta2, s) = tridiagonal_lowest(&alpha, &beta);
            let res = b * s.last().unwrap().abs();
            let done = res < 0.1 * opts.tol || b < 1e-14 || j + 1 == kmax || basis.len() == dim;
            ritz = Some((theta, theta2, s));
            if done {
                break;
            }
            beta.push(b);
            let next: Vec<f64> = w.iter().map(|x| x / b).collect();
            basis.push(next);
        }
        let (_, theta2, s) = ritz.ok_or_else(|| Error::Eigensolver("empty Krylov space".into()))?;
        if pass == 0 {
            second = theta2;
        }
        let mut x = vec![0.0; dim];
        for (c, v) in s.iter().zip(&basis) {
            axpy(*c, v, &mut x);
        }
        normalize(&mut x);
        ham.apply(&x, &mut w);
        let e = dot(&x, &w);
        let res = w.iter().zip(&x).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
        best = Some((e, x.clone()));
        // relative to |E| so the target stays above the rounding floor of
        // larger chains
        let target = opts.tol * e.abs().max(1.0);
        if res < target {
            break;
        }
        if pass == opts.max_restarts {
            warn!("Lanczos stopped at residual {res:.3e} (target {target:.1e})");
        }
        start = x;
    }
    let (e, x) = best.ok_or_else(|| Error::Eigensolver("no iterate".into()))?;
    Ok((e, second, DVector::from_vec(x)))
}

/// Lowest two eigenvalues and lowest eigenvector of the symmetric
/// tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let (vals, vecs) = sorted_eigen(t);
    let second = vals.get(1).copied().unwrap_or(f64::INFINITY);
    (vals[0], second, vecs.column(0).iter().copied().collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

/// `tr(e^{−βH} A) / tr(e^{−βH})` for a symmetric `A`.
pub fn thermal_expectation(ham: &Hamiltonian, beta: f64, a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != ham.dim() || a.ncols() != ham.dim() {
        return Err(Error::DimensionMismatch(a.nrows(), ham.dim()));
    }
    let (vals, vecs) = thermal_setup(ham, beta)?;
    let av = a * &vecs;
    Ok(weighted(&vals, beta, |i| vecs.column(i).dot(&av.column(i))))
}

/// As [`thermal_expectation`] for a diagonal observable.
pub fn thermal_expectation_diagonal(ham: &Hamiltonian, beta: f64, diag: &[f64]) -> Result<f64> {
    if diag.len() != ham.dim() {
        return Err(Error::DimensionMismatch(diag.len(), ham.dim()));
    }
    let (vals, vecs) = thermal_setup(ham, beta)?;
    Ok(weighted(&vals, beta, |i| {
        vecs.column(i).iter().zip(diag).map(|(v, d)| v * v * d).sum()
    }))
}

/// `e^{−t(H − E₀)}` as a dense matrix, `E₀` the ground energy.
pub fn propagator(ham: &Hamiltonian, t: f64) -> Result<DMatrix<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be finite and nonnegative, got {t}")));
    }
    let (vals, vecs) = thermal_setup(ham, 1.0)?;
    let e0 = vals[0];
    let mut scaled = vecs.clone();
    for (i, &e) in vals.iter().enumerate() {
        scaled.column_mut(i).scale_mut((-t * (e - e0)).exp());
    }
    Ok(scaled * vecs.transpose())
}

fn thermal_setup(ham: &Hamiltonian, beta: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    if ham.n_sites() > DENSE_SITE_LIMIT + 2 {
        return Err(Error::DimensionCap { sites: ham.n_sites(), cap: DENSE_SITE_LIMIT + 2 });
    }
    Ok(sorted_eigen(ham.dense()))
}

fn weighted(vals: &[f64], beta: f64, diag_elem: impl Fn(usize) -> f64) -> f64 {
    // shift by the ground energy so the largest weight is exactly 1
    let e0 = vals[0];
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &e) in vals.iter().enumerate() {
        let w = (-beta * (e - e0)).exp();
        if w == 0.0 {
            break;
        }
        num += w * diag_elem(i);
        den += w;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::sigma_z_diagonal;

    #[test]
    fn one_site_ground_state() {
        let gs = ground_state(&Hamiltonian::new(1, 1.0, 0.6).unwrap()).unwrap();
        assert!((gs.energy + 0.6).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((gs.state[0] - r).abs() < 1e-12 && (gs.state[1] - r).abs() < 1e-12);
    }

    #[test]
    fn two_site_ground_energy() {
        for &(j, h) in &[(1.0, 1.0), (0.3, 2.0), (2.0, 0.25)] {
            let gs = ground_state(&Hamiltonian::new(2, j, h).unwrap()).unwrap();
            let want = -(j * j + 4.0 * h * h as f64).sqrt();
            assert!((gs.energy - want).abs() < 1e-10, "{} vs {want}", gs.energy);
        }
    }

    #[test]
    fn perron_frobenius_positivity() {
        let gs = ground_state(&Hamiltonian::new(6, 1.0, 8.0).unwrap()).unwrap();
        assert!(gs.is_positive());
        assert!(!gs.degenerate);
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let ham = Hamiltonian::new(9, 1.0, 1.5).unwrap();
        let dense = ground_state(&ham).unwrap();
        let (e, second, v) = lanczos_lowest(&ham, &LanczosOptions::default()).unwrap();
        assert!((e - dense.energy).abs() < 1e-11);
        assert!((second - dense.energy - dense.gap).abs() < 1e-6);
        assert!((v.dot(&dense.state).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lanczos_path_converges() {
        let ham = Hamiltonian::new(12, 1.0, 4.0).unwrap();
        let gs = ground_state(&ham).unwrap();
        assert!(gs.residual < 1e-11, "{}", gs.residual);
        assert!(gs.is_positive());
    }

    #[test]
    fn single_site_thermal_sigma_x() {
        let ham = Hamiltonian::new(1, 0.0, 0.9).unwrap();
        let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        for &beta in &[0.1, 1.0, 5.0] {
            let v = thermal_expectation(&ham, beta, &sx).unwrap();
            assert!((v - (beta * 0.9f64).tanh()).abs() < 1e-12);
        }
        let id = DMatrix::identity(2, 2);
        assert!((thermal_expectation(&ham, 3.0, &id).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn propagator_semigroup() {
        let ham = Hamiltonian::new(3, 1.0, 0.7).unwrap();
        let a = propagator(&ham, 0.3).unwrap();
        let b = propagator(&ham, 0.6).unwrap();
        assert!((&a * &a - &b).amax() < 1e-12);
        assert!((propagator(&ham, 0.0).unwrap() - DMatrix::identity(8, 8)).amax() < 1e-12);
        // Perron-Frobenius: all entries positive for t > 0
        assert!(a.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn thermal_limit_is_ground_state() {
        let ham = Hamiltonian::new(4, 1.0, 0.7).unwrap();
        let gs = ground_state(&ham).unwrap();
        let zz = sigma_z_diagonal(4, &[0, 1]);
        let ground: f64 = gs.state.iter().zip(&zz).map(|(a, d)| a * a * d).sum();
        let beta = 1e4 / gs.gap;
        let th = thermal_expectation_diagonal(&ham, beta, &zz).unwrap();
        assert!((th - ground).abs() < 1e-8);
    }
}
