use std::ops::Range;

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::conventions::NEGATIVE_EIGEN_TOL;
use crate::error::{Error, Result};

/// A real symmetric, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "DensityJson", try_from = "DensityJson")]
pub struct DensityMatrix {
    matrix: DMatrix<f64>,
    /// Sorted decreasing, clipped at zero.
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    /// Normalizes by the trace and symmetrizes. Eigenvalues in
    /// `[-NEGATIVE_EIGEN_TOL, 0)` are clipped with a log message; anything
    /// more negative is an error.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        let tr = matrix.trace();
        if !(tr > 0.0) {
            return Err(Error::Eigensolver(format!("density matrix has trace {tr}")));
        }
        let m = (&matrix + matrix.transpose()) * (0.5 / tr);
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let min = eigenvalues.last().copied().unwrap_or(0.0);
        if min < -NEGATIVE_EIGEN_TOL {
            return Err(Error::Eigensolver(format!("density matrix eigenvalue {min:.3e} is negative")));
        }
        if min < 0.0 {
            log::debug!("clipping density eigenvalue {min:.3e} to zero");
            for v in eigenvalues.iter_mut().filter(|v| **v < 0.0) {
                *v = 0.0;
            }
        }
        Ok(DensityMatrix { matrix: m, eigenvalues })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_block(n_sites: usize, block: &Range<usize>) -> Result<()> {
    if block.start >= block.end || block.end > n_sites {
        return Err(Error::BlockOutsideChain(format!("{block:?} in {n_sites} sites")));
    }
    Ok(())
}

/// Split a basis index into (left, block, right) parts.
struct Layout {
    left_bits: usize,
    block_bits: usize,
    right_bits: usize,
}

impl Layout {
    fn new(n_sites: usize, block: &Range<usize>) -> Self {
        Layout { left_bits: block.start, block_bits: block.len(), right_bits: n_sites - block.end }
    }

    fn index(&self, l: usize, b: usize, r: usize) -> usize {
        (((l << self.block_bits) | b) << self.right_bits) | r
    }
}

/// Reduced density matrix of the pure state `state` on the contiguous
/// `block`, tracing out everything else.
pub fn reduced_density(state: &DVector<f64>, n_sites: usize, block: Range<usize>) -> Result<DensityMatrix> {
    check_block(n_sites, &block)?;
    if state.len() != 1 << n_sites {
        return Err(Error::DimensionMismatch(state.len(), 1 << n_sites));
    }
    let lay = Layout::new(n_sites, &block);
    let db = 1 << lay.block_bits;
    let dr = 1 << lay.right_bits;
    let mut rho = DMatrix::zeros(db, db);
    for l in 0..1usize << lay.left_bits {
        // rows of `m` are block indices, columns the right environment; the
        // state slice for fixed `l` is contiguous in row-major order
        let start = lay.index(l, 0, 0);
        let slice = &state.as_slice()[start..start + db * dr];
        let m = DMatrix::from_row_slice(db, dr, slice);
        rho.gemm(1.0, &m, &m.transpose(), 1.0);
    }
    DensityMatrix::new(rho)
}

/// Partial trace of the mixed state `rho` onto `block`.
pub fn reduced_density_mixed(rho: &DMatrix<f64>, n_sites: usize, block: Range<usize>) -> Result<DensityMatrix> {
    check_block(n_sites, &block)?;
    if rho.nrows() != 1 << n_sites || rho.ncols() != rho.nrows() {
        return Err(Error::DimensionMismatch(rho.nrows(), 1 << n_sites));
    }
    let lay = Layout::new(n_sites, &block);
    let db = 1 << lay.block_bits;
    let mut out = DMatrix::zeros(db, db);
    for l in 0..1usize << lay.left_bits {
        for r in 0..1usize << lay.right_bits {
            for a in 0..db {
                let ia = lay.index(l, a, r);
                for b in 0..db {
                    out[(a, b)] += rho[(ia, lay.index(l, b, r))];
                }
            }
        }
    }
    DensityMatrix::new(out)
}

/// `⟨ψ| O_block ⊗ 1 |ψ⟩` without forming the reduced matrix.
pub fn block_operator_expectation(
    state: &DVector<f64>,
    n_sites: usize,
    block: Range<usize>,
    op: &DMatrix<f64>,
) -> Result<f64> {
    check_block(n_sites, &block)?;
    let lay = Layout::new(n_sites, &block);
    let db = 1 << lay.block_bits;
    if op.nrows() != db || op.ncols() != db {
        return Err(Error::DimensionMismatch(op.nrows(), db));
    }
    let mut acc = 0.0;
    for l in 0..1usize << lay.left_bits {
        for r in 0..1usize << lay.right_bits {
            for a in 0..db {
                let psi_a = state[lay.index(l, a, r)];
                for b in 0..db {
                    acc += psi_a * op[(a, b)] * state[lay.index(l, b, r)];
                }
            }
        }
    }
    Ok(acc)
}

/// `−Σ α log α` in nats with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let s: f64 = rho.eigenvalues.iter().filter(|&&a| a > 0.0).map(|&a| -a * a.ln()).sum();
    s.max(0.0)
}

/// `½ Σ |λ_i(ρ₁ − ρ₂)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let diff = &a.matrix - &b.matrix;
    Ok(0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

/// Largest singular value.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    dim: usize,
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

impl From<DensityMatrix> for DensityJson {
    fn from(d: DensityMatrix) -> Self {
        let n = d.dim();
        DensityJson {
            dim: n,
            real: (0..n).map(|i| (0..n).map(|j| d.matrix[(i, j)]).collect()).collect(),
            imag: vec![vec![0.0; n]; n],
            eigenvalues: d.eigenvalues,
        }
    }
}

impl TryFrom<DensityJson> for DensityMatrix {
    type Error = String;

    fn try_from(j: DensityJson) -> std::result::Result<Self, String> {
        if j.real.len() != j.dim || j.real.iter().any(|r| r.len() != j.dim) {
            return Err("real part has the wrong shape".into());
        }
        if j.imag.iter().flatten().any(|&x| x != 0.0) {
            return Err("complex density matrices are not supported".into());
        }
        let m = DMatrix::from_fn(j.dim, j.dim, |a, b| j.real[a][b]);
        let d = DensityMatrix::new(m).map_err(|e| e.to_string())?;
        if d.eigenvalues.len() != j.eigenvalues.len() {
            warn!("ignoring stored eigenvalues of the wrong length");
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn random_state(n: usize, seed: u64) -> DVector<f64> {
        let mut rng = stream(seed, 0);
        let v = DVector::from_fn(1 << n, |_, _| rng.random::<f64>() - 0.5);
        v.normalize()
    }

    fn random_symmetric(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() - 0.5);
        &m + m.transpose()
    }

    #[test]
    fn bell_state_gives_half_identity() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi = DVector::from_vec(vec![r, 0.0, 0.0, r]);
        let rho = reduced_density(&psi, 2, 0..1).unwrap();
        assert!((rho.matrix() - DMatrix::identity(2, 2) * 0.5).norm() < 1e-15);
        assert!((von_neumann_entropy(&rho) - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn product_state_is_pure() {
        let psi = DVector::from_vec(vec![0.6, 0.8, 0.0, 0.0]);
        let rho = reduced_density(&psi, 2, 1..2).unwrap();
        assert!(von_neumann_entropy(&rho).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_defining_property() {
        let n = 6;
        let psi = random_state(n, 4);
        let block = 2..4;
        let rho = reduced_density(&psi, n, block.clone()).unwrap();
        let mut rng = stream(5, 0);
        for _ in 0..10 {
            let o = random_symmetric(4, &mut rng);
            let lhs = (rho.matrix() * &o).trace();
            let rhs = block_operator_expectation(&psi, n, block.clone(), &o).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn mixed_and_pure_partial_traces_agree() {
        let n = 5;
        let psi = random_state(n, 9);
        let proj = &psi * psi.transpose();
        for block in [0..2, 1..4, 3..5, 0..5] {
            let a = reduced_density(&psi, n, block.clone()).unwrap();
            let b = reduced_density_mixed(&proj, n, block).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-13);
        }
    }

    #[test]
    fn complement_has_equal_entropy() {
        let psi = random_state(7, 2);
        let a = reduced_density(&psi, 7, 0..3).unwrap();
        let b = reduced_density(&psi, 7, 3..7).unwrap();
        assert!((von_neumann_entropy(&a) - von_neumann_entropy(&b)).abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_entropy() {
        for d in [2usize, 3, 8] {
            let rho = DensityMatrix::new(DMatrix::identity(d, d)).unwrap();
            assert!((von_neumann_entropy(&rho) - (d as f64).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn distances() {
        let p = DensityMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        let q = DensityMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(trace_distance(&p, &p).unwrap().abs() < 1e-15);
        assert!((trace_distance(&p, &q).unwrap() - 1.0).abs() < 1e-15);
        let r = DensityMatrix::new(DMatrix::identity(4, 4)).unwrap();
        assert!(matches!(trace_distance(&p, &r), Err(Error::DimensionMismatch(2, 4))));
    }

    #[test]
    fn weyl_perturbation() {
        let mut rng = stream(13, 0);
        for _ in 0..20 {
            let a = random_symmetric(4, &mut rng);
            let b = random_symmetric(4, &mut rng);
            let pa = DensityMatrix::new(&a * &a).unwrap();
            let pb = DensityMatrix::new(&b * &b).unwrap();
            let bound = operator_norm(&(pa.matrix() - pb.matrix()));
            for (x, y) in pa.eigenvalues().iter().zip(pb.eigenvalues()) {
                assert!((x - y).abs() <= bound + 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_blocks() {
        let psi = random_state(3, 1);
        assert!(matches!(reduced_density(&psi, 3, 2..4), Err(Error::BlockOutsideChain(_))));
        assert!(reduced_density(&psi, 3, 1..1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let rho = DensityMatrix::new(DMatrix::from_row_slice(2, 2, &[0.7, 0.1, 0.1, 0.3])).unwrap();
        let s = serde_json::to_string(&rho).unwrap();
        assert!(s.contains("\"imag\":[[0.0,0.0],[0.0,0.0]]"));
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-15);
    }
}
