use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::polymer::{compatible, Polymer};

/// A set of polymers (by index into the enumerated list) whose
/// incompatibility graph is connected.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub total_norm: usize,
}

fn incompatibility_graph(polymers: &[Polymer]) -> Vec<Vec<usize>> {
    let n = polymers.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if !compatible(&polymers[i], &polymers[j]) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

/// Whether the polymers indexed by `members` form a cluster.
pub fn incompatibility_connected(polymers: &[Polymer], members: &[usize]) -> bool {
    let Some(&first) = members.first() else {
        return false;
    };
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(i) = queue.pop_front() {
        for &j in members {
            if !seen.contains(&j) && !compatible(&polymers[i], &polymers[j]) {
                seen.insert(j);
                queue.push_back(j);
            }
        }
    }
    seen.len() == members.iter().collect::<BTreeSet<_>>().len()
}

/// All clusters with at most `max_size` members, sorted by size then
/// members. Each connected set is produced once (ESU enumeration).
pub fn enumerate_clusters(polymers: &[Polymer], max_size: usize) -> Vec<Cluster> {
    let adj = incompatibility_graph(polymers);
    let mut found: Vec<Vec<usize>> = Vec::new();
    if max_size == 0 {
        return Vec::new();
    }
    for v in 0..polymers.len() {
        let ext: Vec<usize> = adj[v].iter().copied().filter(|&u| u > v).collect();
        extend(&adj, vec![v], ext, v, max_size, &mut found);
    }
    let mut out: Vec<Cluster> = found
        .into_iter()
        .map(|mut m| {
            m.sort_unstable();
            let total_norm = m.iter().map(|&i| polymers[i].norm()).sum();
            Cluster { members: m, total_norm }
        })
        .collect();
    out.sort_by(|a, b| (a.members.len(), &a.members).cmp(&(b.members.len(), &b.members)));
    out
}

fn extend(adj: &[Vec<usize>], sub: Vec<usize>, mut ext: Vec<usize>, root: usize, k: usize, out: &mut Vec<Vec<usize>>) {
    out.push(sub.clone());
    if sub.len() == k {
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in &adj[w] {
            // exclusive neighbours of w: not in sub and not adjacent to it
            if u > root
                && !sub.contains(&u)
                && !next.contains(&u)
                && !sub.iter().any(|&s| adj[s].contains(&u))
            {
                next.push(u);
            }
        }
        let mut grown = sub.clone();
        grown.push(w);
        extend(adj, grown, next, root, k, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, g_of_edge, Edge, Site};

    fn g(b: &crate::lattice::LatticeBox, x1: i32, x2: i32) -> Polymer {
        g_of_edge(&Edge::new(Site::bulk(x1, x2), Site::bulk(x1 + 1, x2)).unwrap(), b).unwrap()
    }

    #[test]
    fn small_cases() {
        let b = build_box((0, 5), 6.0, 1.0, None).unwrap();
        let a = g(&b, 0, 0);
        let c = g(&b, 3, 0);
        let cl = enumerate_clusters(&[a.clone(), c.clone()], 3);
        assert_eq!(cl.len(), 2);
        let d = g(&b, 1, 1); // shares (1,1) with a
        let cl = enumerate_clusters(&[a.clone(), d.clone()], 3);
        assert_eq!(cl.iter().map(|c| c.members.clone()).collect::<Vec<_>>(), vec![vec![0], vec![1], vec![0, 1]]);
        assert_eq!(cl[2].total_norm, 6);
    }

    #[test]
    fn chain_of_three() {
        let b = build_box((0, 5), 6.0, 1.0, None).unwrap();
        // A ≁ B ≁ C with A ∼ C
        let a = g(&b, 0, 0);
        let bb = g(&b, 1, 1);
        let c = g(&b, 2, 2);
        assert!(compatible(&a, &c));
        let ps = vec![a, bb, c];
        let cl: Vec<Vec<usize>> = enumerate_clusters(&ps, 3).into_iter().map(|c| c.members).collect();
        assert!(cl.contains(&vec![0, 1, 2]));
        assert!(!cl.contains(&vec![0, 2]));
        assert_eq!(cl.len(), 3 + 2 + 1);
    }

    #[test]
    fn esu_agrees_with_subset_scan() {
        let b = build_box((0, 2), 4.0, 1.0, None).unwrap();
        let ps = crate::lattice::enumerate_polymers(&b, 4, 1_000_000).unwrap();
        let ps: Vec<Polymer> = ps.into_iter().take(12).collect();
        let fast: BTreeSet<Vec<usize>> = enumerate_clusters(&ps, 4).into_iter().map(|c| c.members).collect();
        let mut slow = BTreeSet::new();
        for mask in 1u32..(1 << ps.len()) {
            if mask.count_ones() > 4 {
                continue;
            }
            let m: Vec<usize> = (0..ps.len()).filter(|i| mask >> i & 1 == 1).collect();
            if incompatibility_connected(&ps, &m) {
                slow.insert(m);
            }
        }
        assert_eq!(fast, slow);
    }
}
