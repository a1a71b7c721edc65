use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::geometry::{Edge, LatticeBox, Site};
use crate::error::{Error, Result};

/// Default cap on the number of connected edge sets visited by
/// [`enumerate_polymers`].
pub const DEFAULT_POLYMER_CEILING: usize = 2_000_000;

/// A connected subgraph given by its edge set; the vertex set is the set of
/// endpoints. Both lists are kept sorted, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PolymerJson", into = "PolymerJson")]
pub struct Polymer {
    vertices: Vec<Site>,
    edges: Vec<Edge>,
}

impl Polymer {
    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Polymer {
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        let vertices: BTreeSet<Site> = edges
            .iter()
            .flat_map(|e| {
                let (a, b) = e.endpoints();
                [a, b]
            })
            .collect();
        Polymer { vertices: vertices.into_iter().collect(), edges: edges.into_iter().collect() }
    }

    pub fn vertices(&self) -> &[Site] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `‖R‖ = |E(R)|`.
    pub fn norm(&self) -> usize {
        self.edges.len()
    }

    pub fn n_horizontal(&self) -> usize {
        self.edges.iter().filter(|e| e.is_horizontal()).count()
    }

    pub fn n_vertical(&self) -> usize {
        self.norm() - self.n_horizontal()
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    pub fn contains_vertex(&self, s: &Site) -> bool {
        self.vertices.binary_search(s).is_ok()
    }

    pub fn union(&self, other: &Polymer) -> Polymer {
        Polymer::from_edges(self.edges.iter().chain(&other.edges).copied())
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for e in self.edges.iter().filter(|e| e.contains(v)) {
                let w = e.other(v);
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    fn sort_key(&self) -> (usize, &[Site], &[Edge]) {
        (self.norm(), &self.vertices, &self.edges)
    }
}

/// `G_e`: the horizontal edge `e`, its endpoints, the two sites one row
/// above and the two vertical edges joining them.
pub fn g_of_edge(e: &Edge, lattice: &LatticeBox) -> Result<Polymer> {
    if !e.is_horizontal() {
        return Err(Error::NotHorizontal(e.to_string()));
    }
    if !lattice.has_edge(e) {
        return Err(Error::OutsideBox(e.to_string()));
    }
    let (a, b) = e.endpoints();
    let mut edges = vec![*e];
    for s in [a, b] {
        let up = lattice.up(s).ok_or_else(|| Error::OutsideBox(e.to_string()))?;
        let v = Edge::new(s, up)?;
        if !lattice.has_edge(&v) {
            return Err(Error::OutsideBox(e.to_string()));
        }
        edges.push(v);
    }
    Ok(Polymer::from_edges(edges))
}

/// `V(R) ∩ V(R′) = ∅`.
pub fn compatible(a: &Polymer, b: &Polymer) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.vertices.len() && j < b.vertices.len() {
        match a.vertices[i].cmp(&b.vertices[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// Whether `p` is a polymer of the box.
///
/// Checked: nonempty, inside `Δ ∪ V⁺_Δ`, connected; `G_e ⊆ R` for every
/// horizontal `e ∈ R`; if `R` meets `∂̄Δ` it contains all of `∂⁺Δ` or all
/// of `∂⁻Δ`. The second closure condition asks `G_{e″} ⊆ R` for horizontal
/// `e″` on connecting paths inside `R`, which the first condition already
/// gives. A polymer without horizontal edges only arises from boundary paths,
/// so such a subgraph must meet `∂̄Δ`.
pub fn is_polymer(p: &Polymer, lattice: &LatticeBox) -> bool {
    if p.edges.is_empty() || !p.edges.iter().all(|e| lattice.has_edge(e)) || !p.is_connected() {
        return false;
    }
    for e in p.edges.iter().filter(|e| e.is_horizontal()) {
        match g_of_edge(e, lattice) {
            Ok(g) if g.edges.iter().all(|f| p.contains_edge(f)) => {}
            _ => return false,
        }
    }
    let touches = p.vertices.iter().any(|s| lattice.is_time_boundary(*s));
    if touches {
        let plus = lattice.boundary_plus().iter().all(|s| p.contains_vertex(s));
        let minus = lattice.boundary_minus().iter().all(|s| p.contains_vertex(s));
        if !plus && !minus {
            return false;
        }
    } else if p.n_horizontal() == 0 {
        return false;
    }
    true
}

/// Edges forced into any polymer containing `edges`, or `None` if some
/// horizontal edge has no `G_e` in the box.
fn closure(edges: &[Edge], lattice: &LatticeBox) -> Option<BTreeSet<Edge>> {
    let mut out: BTreeSet<Edge> = edges.iter().copied().collect();
    for e in edges.iter().filter(|e| e.is_horizontal()) {
        out.extend(g_of_edge(e, lattice).ok()?.edges);
    }
    Some(out)
}

/// All polymers of the box with `‖R‖ ≤ max_norm`, sorted by norm, then
/// vertex list, then edge list.
///
/// Connected edge sets are grown one edge at a time; a set whose closure
/// already exceeds `max_norm` is dropped. `ceiling` bounds the number of
/// visited sets.
pub fn enumerate_polymers(lattice: &LatticeBox, max_norm: usize, ceiling: usize) -> Result<Vec<Polymer>> {
    let mut out = Vec::new();
    if max_norm == 0 {
        return Ok(out);
    }
    let within = |set: &[Edge]| closure(set, lattice).is_some_and(|c| c.len() <= max_norm);
    let mut visited = 0usize;
    let mut frontier: Vec<Vec<Edge>> = lattice
        .edges()
        .iter()
        .map(|e| vec![*e])
        .filter(|s| within(s))
        .collect();
    for size in 1..=max_norm {
        visited += frontier.len();
        if visited > ceiling {
            return Err(Error::CeilingExceeded { ceiling });
        }
        let mut next: HashSet<Vec<Edge>> = HashSet::new();
        for set in &frontier {
            let p = Polymer { vertices: Vec::new(), edges: set.clone() };
            let p = Polymer::from_edges(p.edges);
            if is_polymer(&p, lattice) {
                out.push(p.clone());
            }
            if size == max_norm {
                continue;
            }
            for v in p.vertices() {
                for f in lattice.incident(*v) {
                    if set.binary_search(f).is_ok() {
                        continue;
                    }
                    let mut grown = set.clone();
                    let pos = grown.binary_search(f).unwrap_err();
                    grown.insert(pos, *f);
                    if !next.contains(&grown) && within(&grown) {
                        next.insert(grown);
                    }
                }
            }
        }
        frontier = next.into_iter().collect();
        frontier.sort();
        if frontier.is_empty() {
            break;
        }
    }
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct PolymerJson {
    vertices: Vec<Site>,
    edges: Vec<Edge>,
    norm: usize,
}

impl From<Polymer> for PolymerJson {
    fn from(p: Polymer) -> Self {
        let norm = p.norm();
        PolymerJson { vertices: p.vertices, edges: p.edges, norm }
    }
}

impl TryFrom<PolymerJson> for Polymer {
    type Error = String;

    fn try_from(j: PolymerJson) -> std::result::Result<Self, String> {
        let p = Polymer::from_edges(j.edges);
        if p.vertices != j.vertices.iter().copied().collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>() {
            return Err("vertex list does not match the edge endpoints".into());
        }
        if p.norm() != j.norm {
            return Err(format!("norm {} does not match {} edges", j.norm, p.norm()));
        }
        Ok(p)
    }
}
