use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{compatible, Polymer};

/// Largest gas for which subset tables (`2^n` entries) are built.
pub const MAX_GAS_SIZE: usize = 22;

/// An abstract polymer gas: activities plus the incompatibility relation,
/// stored as neighbour bitmasks. Every polymer is incompatible with itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolymerGas {
    activities: Vec<f64>,
    neighbors: Vec<u32>,
}

impl PolymerGas {
    pub fn from_polymers(polymers: &[Polymer], activities: &[f64]) -> Result<Self> {
        if polymers.len() != activities.len() {
            return Err(Error::DimensionMismatch(polymers.len(), activities.len()));
        }
        let mut pairs = Vec::new();
        for i in 0..polymers.len() {
            for j in i + 1..polymers.len() {
                if !compatible(&polymers[i], &polymers[j]) {
                    pairs.push((i, j));
                }
            }
        }
        Self::from_incompatible_pairs(activities.to_vec(), &pairs)
    }

    pub fn from_incompatible_pairs(activities: Vec<f64>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = activities.len();
        if n > MAX_GAS_SIZE {
            return Err(Error::DimensionCap { sites: n, cap: MAX_GAS_SIZE });
        }
        if activities.iter().any(|a| !a.is_finite()) {
            return Err(invalid("activities must be finite"));
        }
        let mut neighbors: Vec<u32> = (0..n).map(|i| 1 << i).collect();
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(invalid(format!("pair ({i}, {j}) out of range for {n} polymers")));
            }
            neighbors[i] |= 1 << j;
            neighbors[j] |= 1 << i;
        }
        Ok(PolymerGas { activities, neighbors })
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn activities(&self) -> &[f64] {
        &self.activities
    }

    fn full(&self) -> u32 {
        ((1u64 << self.len()) - 1) as u32
    }

    /// Whether the members of `mask` form a connected incompatibility graph.
    pub fn is_cluster(&self, mask: u32) -> bool {
        if mask == 0 {
            return false;
        }
        let mut seen = 1u32 << mask.trailing_zeros();
        loop {
            let mut grown = seen;
            let mut rest = seen;
            while rest != 0 {
                let i = rest.trailing_zeros();
                rest &= rest - 1;
                grown |= self.neighbors[i as usize] & mask;
            }
            if grown == seen {
                return seen == mask;
            }
            seen = grown;
        }
    }

    /// `Z(S)` for every subset `S`, indexed by bitmask.
    fn partition_table(&self) -> Vec<f64> {
        let size = 1usize << self.len();
        let mut z = vec![0.0; size];
        z[0] = 1.0;
        for s in 1..size {
            let v = s.trailing_zeros() as usize;
            let without = s & (s - 1);
            let excluded = s & !(self.neighbors[v] as usize);
            z[s] = z[without] + self.activities[v] * z[excluded];
        }
        z
    }

    /// `Φ̂(S) = Σ_{S′⊆S} (−1)^{|S|−|S′|} log Z(S′)` for every subset.
    pub fn mobius_table(&self) -> Result<Vec<f64>> {
        let mut f = self.partition_table();
        for (s, z) in f.iter_mut().enumerate() {
            if !(*z > 0.0) {
                log::warn!("nonpositive partition function {z} on subset {s:#b}");
                return Err(Error::NonPositivePartition(*z));
            }
            *z = z.ln();
        }
        for bit in 0..self.len() {
            let b = 1usize << bit;
            for s in 0..f.len() {
                if s & b != 0 {
                    f[s] -= f[s ^ b];
                }
            }
        }
        Ok(f)
    }

    /// Connected subsets with at most `max_size` members, in increasing
    /// bitmask order.
    pub fn clusters(&self, max_size: usize) -> Vec<u32> {
        let mut out = Vec::new();
        for v in 0..self.len() {
            let above = !((2u64 << v) - 1) as u32;
            let ext = self.neighbors[v] & above;
            self.extend(1 << v, self.neighbors[v], ext, above, max_size, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn extend(&self, sub: u32, closed: u32, mut ext: u32, above: u32, max_size: usize, out: &mut Vec<u32>) {
        out.push(sub);
        if sub.count_ones() as usize >= max_size {
            return;
        }
        while ext != 0 {
            let w = ext.trailing_zeros() as usize;
            ext &= ext - 1;
            let fresh = self.neighbors[w] & !closed & above;
            self.extend(sub | 1 << w, closed | self.neighbors[w], ext | fresh, above, max_size, out);
        }
    }
}

/// `Z = Σ_{compatible collections} Π φ`, the empty collection contributing 1.
pub fn exact_partition_function(gas: &PolymerGas) -> f64 {
    let mut memo = std::collections::HashMap::new();
    z_rec(gas, gas.full(), &mut memo)
}

fn z_rec(gas: &PolymerGas, s: u32, memo: &mut std::collections::HashMap<u32, f64>) -> f64 {
    if s == 0 {
        return 1.0;
    }
    if let Some(&z) = memo.get(&s) {
        return z;
    }
    let v = s.trailing_zeros() as usize;
    let z = z_rec(gas, s & (s - 1), memo) + gas.activities[v] * z_rec(gas, s & !gas.neighbors[v], memo);
    memo.insert(s, z);
    z
}

/// Cluster coefficients `Φ̂` for every cluster of at most `max_size` polymers,
/// as (sorted member indices, coefficient).
pub fn cluster_coefficients(gas: &PolymerGas, max_size: usize) -> Result<Vec<(Vec<usize>, f64)>> {
    let table = gas.mobius_table()?;
    Ok(gas
        .clusters(max_size)
        .into_iter()
        .map(|mask| {
            let members = (0..gas.len()).filter(|&i| mask & (1 << i) != 0).collect();
            (members, table[mask as usize])
        })
        .collect())
}

/// `Σ Φ̂` over clusters of at most `max_size` polymers.
pub fn truncated_log_z(gas: &PolymerGas, max_size: usize) -> Result<f64> {
    Ok(cluster_coefficients(gas, max_size)?.iter().map(|(_, v)| v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gas(acts: &[f64], pairs: &[(usize, usize)]) -> PolymerGas {
        PolymerGas::from_incompatible_pairs(acts.to_vec(), pairs).unwrap()
    }

    #[test]
    fn small_partition_functions() {
        assert_eq!(exact_partition_function(&gas(&[], &[])), 1.0);
        assert_eq!(exact_partition_function(&gas(&[0.3], &[])), 1.3);
        let (a, b) = (0.2, 0.05);
        assert!((exact_partition_function(&gas(&[a, b], &[(0, 1)])) - (1.0 + a + b)).abs() < 1e-15);
        assert!((exact_partition_function(&gas(&[a, b], &[])) - (1.0 + a) * (1.0 + b)).abs() < 1e-15);
    }

    #[test]
    fn hand_coefficients() {
        let (a, b) = (0.2, 0.05);
        let inc = cluster_coefficients(&gas(&[a, b], &[(0, 1)]), 2).unwrap();
        assert_eq!(inc.len(), 3);
        assert!((inc[0].1 - (1.0f64 + a).ln()).abs() < 1e-15);
        let pair = inc.iter().find(|(m, _)| m.len() == 2).unwrap().1;
        let want = (1.0f64 + a + b).ln() - (1.0f64 + a).ln() - (1.0f64 + b).ln();
        assert!((pair - want).abs() < 1e-15);
        let comp = gas(&[a, b], &[]);
        assert_eq!(comp.mobius_table().unwrap()[3], 0.0);
        assert_eq!(cluster_coefficients(&comp, 2).unwrap().len(), 2);
    }

    #[test]
    fn chain_clusters() {
        let g = gas(&[0.1; 3], &[(0, 1), (1, 2)]);
        let cl = g.clusters(3);
        assert!(cl.contains(&0b111));
        assert!(!cl.contains(&0b101));
        assert_eq!(cl, vec![0b001, 0b010, 0b011, 0b100, 0b110, 0b111]);
    }

    #[test]
    fn cap_one_and_empty() {
        let g = gas(&[0.1, 0.02, 0.07], &[(0, 1), (1, 2)]);
        let want: f64 = g.activities().iter().map(|a| (1.0 + a).ln()).sum();
        assert!((truncated_log_z(&g, 1).unwrap() - want).abs() < 1e-15);
        assert_eq!(truncated_log_z(&gas(&[], &[]), 4).unwrap(), 0.0);
    }

    #[test]
    fn nonpositive_partition_reported() {
        let g = gas(&[-0.6, -0.6], &[(0, 1)]);
        assert!(matches!(cluster_coefficients(&g, 2), Err(Error::NonPositivePartition(_))));
    }

    #[test]
    fn size_guard() {
        assert!(PolymerGas::from_incompatible_pairs(vec![0.0; MAX_GAS_SIZE + 1], &[]).is_err());
    }

    fn arb_gas() -> impl Strategy<Value = PolymerGas> {
        (1usize..=6).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let m = pairs.len();
            (prop::collection::vec(0.0..0.2f64, n), prop::collection::vec(any::<bool>(), m)).prop_map(
                move |(acts, keep)| {
                    let chosen: Vec<_> = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p).collect();
                    PolymerGas::from_incompatible_pairs(acts, &chosen).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn full_cap_recovers_log_z(g in arb_gas()) {
            let exact = exact_partition_function(&g).ln();
            prop_assert!((truncated_log_z(&g, g.len()).unwrap() - exact).abs() < 1e-9);
        }

        #[test]
        fn coefficients_vanish_off_clusters(g in arb_gas()) {
            let table = g.mobius_table().unwrap();
            for s in 1u32..(1 << g.len()) {
                if s.count_ones() <= 4 && !g.is_cluster(s) {
                    prop_assert!(table[s as usize].abs() < 1e-12, "{s:#b}: {}", table[s as usize]);
                }
            }
        }

        #[test]
        fn clusters_are_connected_and_complete(g in arb_gas()) {
            let listed = g.clusters(g.len());
            let brute: Vec<u32> = (1u32..(1 << g.len())).filter(|&s| g.is_cluster(s)).collect();
            prop_assert_eq!(listed, brute);
        }
    }
}
