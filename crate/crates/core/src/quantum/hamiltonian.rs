use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conventions::{BOND_WEIGHT, MAX_SITES};
use crate::error::{invalid, Error, Result};

/// Chain `Λ_m = {-m, …, m+L}` around the block `Λ₀ = {0, …, L}`.
///
/// The block has `L + 1` sites and the chain `2m + L + 1`. In array
/// coordinates the block starts at index `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
}

impl ChainParams {
    pub fn new(m: usize, l: usize, j: f64, h: f64) -> Result<Self> {
        let p = ChainParams { m, l, j, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(invalid("block length L must be at least 1"));
        }
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return Err(invalid(format!("J must be finite and nonnegative, got {}", self.j)));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(invalid(format!("h must be positive, got {}", self.h)));
        }
        if self.n_sites() > MAX_SITES {
            return Err(Error::DimensionCap { sites: self.n_sites(), cap: MAX_SITES });
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        2 * self.m + self.l + 1
    }

    pub fn block(&self) -> std::ops::Range<usize> {
        self.m..self.m + self.l + 1
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        Hamiltonian::new(self.n_sites(), self.j, self.h)
    }
}

/// `H = -J Σ_{bonds} σ³_x σ³_{x+1} - h Σ_x σ¹_x` on an open chain.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    n_sites: usize,
    j: f64,
    h: f64,
    diag: Vec<f64>,
}

impl Hamiltonian {
    /// `h = 0` is allowed here (classical limit).
    pub fn new(n_sites: usize, j: f64, h: f64) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::EmptyInterval);
        }
        if n_sites > MAX_SITES {
            return Err(Error::DimensionCap { sites: n_sites, cap: MAX_SITES });
        }
        if !j.is_finite() || !h.is_finite() || h < 0.0 {
            return Err(invalid(format!("bad couplings J={j}, h={h}")));
        }
        let dim = 1usize << n_sites;
        let diag = (0..dim)
            .map(|s| {
                -j * BOND_WEIGHT
                    * (0..n_sites.saturating_sub(1))
                        .map(|x| spin_z(s, x, n_sites) * spin_z(s, x + 1, n_sites))
                        .sum::<f64>()
            })
            .collect();
        Ok(Hamiltonian { n_sites, j, h, diag })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Diagonal (`σ³σ³`) part.
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n_sites;
        for (s, ys) in y.iter_mut().enumerate() {
            let mut acc = self.diag[s] * x[s];
            let mut off = 0.0;
            for site in 0..n {
                off += x[s ^ site_mask(site, n)];
            }
            acc -= self.h * off;
            *ys = acc;
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.n_sites;
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for s in 0..dim {
            m[(s, s)] = self.diag[s];
            for site in 0..n {
                m[(s ^ site_mask(site, n), s)] -= self.h;
            }
        }
        m
    }
}

#[inline]
pub(crate) fn site_mask(site: usize, n_sites: usize) -> usize {
    1 << (n_sites - 1 - site)
}

/// `σ³` eigenvalue of `site` in basis state `s`.
#[inline]
pub(crate) fn spin_z(s: usize, site: usize, n_sites: usize) -> f64 {
    if s & site_mask(site, n_sites) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Diagonal of `Π_{x ∈ sites} σ³_x`.
pub fn sigma_z_diagonal(n_sites: usize, sites: &[usize]) -> Vec<f64> {
    (0..1usize << n_sites)
        .map(|s| sites.iter().map(|&x| spin_z(s, x, n_sites)).product())
        .collect()
}
