use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Bulk,
    SlitPlus,
    SlitMinus,
}

/// A lattice point. Serializes as `[x1, x2, layer]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(i32, i32, Layer)", into = "(i32, i32, Layer)")]
pub struct Site {
    pub x1: i32,
    pub x2: i32,
    pub layer: Layer,
}

impl Site {
    pub const fn bulk(x1: i32, x2: i32) -> Site {
        Site { x1, x2, layer: Layer::Bulk }
    }

    pub const fn slit(x1: i32, plus: bool) -> Site {
        Site { x1, x2: 0, layer: if plus { Layer::SlitPlus } else { Layer::SlitMinus } }
    }
}

impl From<(i32, i32, Layer)> for Site {
    fn from((x1, x2, layer): (i32, i32, Layer)) -> Self {
        Site { x1, x2, layer }
    }
}

impl From<Site> for (i32, i32, Layer) {
    fn from(s: Site) -> Self {
        (s.x1, s.x2, s.layer)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            Layer::Bulk => write!(f, "({}, {})", self.x1, self.x2),
            Layer::SlitPlus => write!(f, "({}, 0+)", self.x1),
            Layer::SlitMinus => write!(f, "({}, 0-)", self.x1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    Vertical,
    Horizontal,
}

/// An unordered nearest-neighbour pair, stored with `a < b`. Serializes as
/// `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(Site, Site)", into = "(Site, Site)")]
pub struct Edge {
    a: Site,
    b: Site,
}

impl Edge {
    pub fn new(x: Site, y: Site) -> Result<Edge> {
        let d = (x.x1 - y.x1).abs() + (x.x2 - y.x2).abs();
        if d != 1 && !(d == 0 && x.layer != y.layer) {
            return Err(invalid(format!("{x} and {y} are not adjacent")));
        }
        if d == 0 {
            // the two copies of a slit vertex are never joined
            return Err(invalid(format!("{x} and {y} are copies of one slit vertex")));
        }
        let slit_pair = x.layer != Layer::Bulk && y.layer != Layer::Bulk;
        if slit_pair && x.layer != y.layer {
            return Err(invalid(format!("{x} and {y} lie in different slit layers")));
        }
        for (s, t) in [(x, y), (y, x)] {
            match s.layer {
                Layer::SlitPlus if t.x2 < 0 => return Err(invalid(format!("{s} has no edge downwards"))),
                Layer::SlitMinus if t.x2 > 0 => return Err(invalid(format!("{s} has no edge upwards"))),
                _ => {}
            }
        }
        Ok(Edge::ordered(x, y))
    }

    fn ordered(x: Site, y: Site) -> Edge {
        if x <= y {
            Edge { a: x, b: y }
        } else {
            Edge { a: y, b: x }
        }
    }

    pub fn endpoints(&self) -> (Site, Site) {
        (self.a, self.b)
    }

    pub fn class(&self) -> EdgeClass {
        if self.a.x1 == self.b.x1 {
            EdgeClass::Vertical
        } else {
            EdgeClass::Horizontal
        }
    }

    pub fn is_horizontal(&self) -> bool {
        self.class() == EdgeClass::Horizontal
    }

    pub fn contains(&self, s: Site) -> bool {
        self.a == s || self.b == s
    }

    pub fn other(&self, s: Site) -> Site {
        if self.a == s {
            self.b
        } else {
            self.a
        }
    }
}

impl TryFrom<(Site, Site)> for Edge {
    type Error = String;

    fn try_from((a, b): (Site, Site)) -> std::result::Result<Self, String> {
        Edge::new(a, b).map_err(|e| e.to_string())
    }
}

impl From<Edge> for (Site, Site) {
    fn from(e: Edge) -> Self {
        (e.a, e.b)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.a, self.b)
    }
}

/// The box `Δ = Λ × (δℤ ∩ [−β/2, β/2])`, optionally slit at `x2 = 0` over a
/// block, together with the row `V⁺_Δ` above its top boundary.
#[derive(Clone, Debug)]
pub struct LatticeBox {
    lambda: (i32, i32),
    beta: f64,
    delta: f64,
    half: i32,
    slit: Option<(i32, i32)>,
    sites: BTreeSet<Site>,
    v_plus: BTreeSet<Site>,
    edges: Vec<Edge>,
    adjacency: BTreeMap<Site, Vec<Edge>>,
}

/// Relative tolerance when testing `β/δ` for integrality.
const RATIO_TOL: f64 = 1e-9;

/// Build `Δ` for `Λ = [lambda.0, lambda.1]`. `β/δ` must be an even integer so
/// that `±β/2` are lattice rows.
pub fn build_box(lambda: (i32, i32), beta: f64, delta: f64, slit: Option<(i32, i32)>) -> Result<LatticeBox> {
    if !(beta > 0.0 && beta.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid(format!("beta and delta must be positive, got {beta}, {delta}")));
    }
    if lambda.0 > lambda.1 {
        return Err(Error::EmptyInterval);
    }
    let ratio = beta / delta;
    let n = ratio.round();
    if n < 2.0 || (ratio - n).abs() > RATIO_TOL * ratio || n as i64 % 2 != 0 {
        return Err(Error::NonIntegralRatio { ratio });
    }
    if let Some((a, b)) = slit {
        if a > b || a < lambda.0 || b > lambda.1 {
            return Err(invalid(format!("slit block [{a}, {b}] is not inside [{}, {}]", lambda.0, lambda.1)));
        }
    }
    let half = (n as i64 / 2) as i32;
    let in_block = |x1: i32, x2: i32| x2 == 0 && slit.is_some_and(|(a, b)| a <= x1 && x1 <= b);

    let mut grid = BTreeSet::new();
    for x1 in lambda.0..=lambda.1 {
        for x2 in -half..=half {
            grid.insert(Site::bulk(x1, x2));
        }
    }
    let v_plus: BTreeSet<Site> = if lambda.1 > lambda.0 {
        (lambda.0..=lambda.1).map(|x1| Site::bulk(x1, half + 1)).collect()
    } else {
        BTreeSet::new()
    };

    // nearest-neighbour edges of the plain grid, then slit rewiring
    let all: BTreeSet<Site> = grid.union(&v_plus).copied().collect();
    let mut edges = BTreeSet::new();
    for &s in &all {
        for t in [Site::bulk(s.x1 + 1, s.x2), Site::bulk(s.x1, s.x2 + 1)] {
            if !all.contains(&t) {
                continue;
            }
            let sb = in_block(s.x1, s.x2);
            let tb = in_block(t.x1, t.x2);
            match (sb, tb) {
                (false, false) => {
                    edges.insert(Edge::ordered(s, t));
                }
                (true, true) => {
                    edges.insert(Edge::ordered(Site::slit(s.x1, true), Site::slit(t.x1, true)));
                    edges.insert(Edge::ordered(Site::slit(s.x1, false), Site::slit(t.x1, false)));
                }
                _ => {
                    let (x, y) = if sb { (s, t) } else { (t, s) };
                    if y.x2 > 0 {
                        edges.insert(Edge::ordered(Site::slit(x.x1, true), y));
                    } else if y.x2 < 0 {
                        edges.insert(Edge::ordered(Site::slit(x.x1, false), y));
                    } else {
                        edges.insert(Edge::ordered(Site::slit(x.x1, true), y));
                        edges.insert(Edge::ordered(Site::slit(x.x1, false), y));
                    }
                }
            }
        }
    }

    let mut sites: BTreeSet<Site> = grid.into_iter().filter(|s| !in_block(s.x1, s.x2)).collect();
    if let Some((a, b)) = slit {
        for x1 in a..=b {
            sites.insert(Site::slit(x1, true));
            sites.insert(Site::slit(x1, false));
        }
    }
    let edges: Vec<Edge> = edges.into_iter().collect();
    let mut adjacency: BTreeMap<Site, Vec<Edge>> = BTreeMap::new();
    for e in &edges {
        let (a, b) = e.endpoints();
        adjacency.entry(a).or_default().push(*e);
        adjacency.entry(b).or_default().push(*e);
    }
    Ok(LatticeBox { lambda, beta, delta, half, slit, sites, v_plus, edges, adjacency })
}

impl LatticeBox {
    pub fn lambda(&self) -> (i32, i32) {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `β / (2δ)`: the top row index.
    pub fn half_rows(&self) -> i32 {
        self.half
    }

    pub fn slit(&self) -> Option<(i32, i32)> {
        self.slit
    }

    pub fn width(&self) -> usize {
        (self.lambda.1 - self.lambda.0 + 1) as usize
    }

    /// Sites of `Δ` (without `V⁺_Δ`).
    pub fn sites(&self) -> &BTreeSet<Site> {
        &self.sites
    }

    /// `V⁺_Δ`, the row just above `∂⁺Δ`.
    pub fn v_plus(&self) -> &BTreeSet<Site> {
        &self.v_plus
    }

    /// Every nearest-neighbour edge inside `Δ ∪ V⁺_Δ`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn incident(&self, s: Site) -> &[Edge] {
        self.adjacency.get(&s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, s: Site) -> bool {
        self.sites.contains(&s) || self.v_plus.contains(&s)
    }

    pub fn has_edge(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    /// `∂⁺Δ`: the row `δ x2 = β/2`.
    pub fn boundary_plus(&self) -> Vec<Site> {
        (self.lambda.0..=self.lambda.1).map(|x1| Site::bulk(x1, self.half)).collect()
    }

    /// `∂⁻Δ`: the row `δ x2 = −β/2`.
    pub fn boundary_minus(&self) -> Vec<Site> {
        (self.lambda.0..=self.lambda.1).map(|x1| Site::bulk(x1, -self.half)).collect()
    }

    /// `∂̄Δ = ∂⁺Δ ∪ ∂⁻Δ`.
    pub fn is_time_boundary(&self, s: Site) -> bool {
        s.layer == Layer::Bulk && s.x2.abs() == self.half && self.lambda.0 <= s.x1 && s.x1 <= self.lambda.1
    }

    /// `∂Δ`: the time boundary plus the end columns of `Λ`.
    pub fn boundary(&self) -> BTreeSet<Site> {
        self.sites
            .iter()
            .filter(|s| self.is_time_boundary(**s) || s.x1 == self.lambda.0 || s.x1 == self.lambda.1)
            .copied()
            .collect()
    }

    /// The vertex joined to `s` by the upward vertical edge, if any.
    pub fn up(&self, s: Site) -> Option<Site> {
        let t = match s.layer {
            Layer::SlitMinus => return None,
            Layer::SlitPlus => Site::bulk(s.x1, 1),
            Layer::Bulk if s.x2 == -1 && self.in_slit(s.x1) => Site::slit(s.x1, false),
            Layer::Bulk => Site::bulk(s.x1, s.x2 + 1),
        };
        self.contains(t).then_some(t)
    }

    fn in_slit(&self, x1: i32) -> bool {
        self.slit.is_some_and(|(a, b)| a <= x1 && x1 <= b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_box() {
        let b = build_box((0, 0), 2.0, 1.0, None).unwrap();
        assert_eq!(b.sites().len(), 3);
        assert_eq!(b.boundary_plus(), vec![Site::bulk(0, 1)]);
        assert_eq!(b.boundary_minus(), vec![Site::bulk(0, -1)]);
        assert!(b.v_plus().is_empty());
        assert_eq!(b.edges().len(), 2);
    }

    #[test]
    fn non_integral_ratio() {
        assert!(matches!(build_box((0, 0), 1.5, 1.0, None), Err(Error::NonIntegralRatio { .. })));
        assert!(matches!(build_box((0, 0), 3.0, 1.0, None), Err(Error::NonIntegralRatio { .. })));
        assert!(matches!(build_box((1, 0), 2.0, 1.0, None), Err(Error::EmptyInterval)));
        assert!(build_box((0, 1), 2.0, 1.0, Some((1, 2))).is_err());
    }

    #[test]
    fn slit_doubles_the_block_row() {
        let plain = build_box((0, 1), 2.0, 1.0, None).unwrap();
        let b = build_box((0, 1), 2.0, 1.0, Some((0, 1))).unwrap();
        assert_eq!(b.sites().len(), 8);
        let h0: Vec<_> = b.edges().iter().filter(|e| e.is_horizontal() && e.endpoints().0.x2 == 0).collect();
        assert_eq!(h0.len(), 2);
        assert!(b.has_edge(&Edge::new(Site::slit(0, true), Site::slit(1, true)).unwrap()));
        assert!(b.has_edge(&Edge::new(Site::slit(0, false), Site::slit(1, false)).unwrap()));
        assert!(b.has_edge(&Edge::new(Site::slit(0, true), Site::bulk(0, 1)).unwrap()));
        assert!(b.has_edge(&Edge::new(Site::slit(0, false), Site::bulk(0, -1)).unwrap()));
        assert_eq!(b.edges().len(), plain.edges().len() + 1);
    }

    /// Sites, edges and per-layer degree sums for slit blocks of length 1..3
    /// inside a 5-wide box, counted by hand.
    #[test]
    fn slit_bookkeeping_table() {
        // (block, added sites, added edges, degree of slit-plus layer, degree of slit-minus layer)
        let table = [
            ((2, 2), 1, 2, 3, 3),
            ((1, 2), 2, 3, 6, 6),
            ((1, 3), 3, 4, 9, 9),
            ((0, 2), 3, 3, 8, 8),
        ];
        let plain = build_box((0, 4), 4.0, 1.0, None).unwrap();
        for (block, ds, de, dp, dm) in table {
            let b = build_box((0, 4), 4.0, 1.0, Some(block)).unwrap();
            assert_eq!(b.sites().len(), plain.sites().len() + ds, "{block:?}");
            assert_eq!(b.edges().len(), plain.edges().len() + de, "{block:?}");
            let deg = |layer| -> usize {
                b.sites().iter().filter(|s| s.layer == layer).map(|s| b.incident(*s).len()).sum()
            };
            assert_eq!(deg(Layer::SlitPlus), dp, "{block:?}");
            assert_eq!(deg(Layer::SlitMinus), dm, "{block:?}");
        }
    }

    #[test]
    fn edge_rules() {
        assert_eq!(Edge::new(Site::bulk(0, 0), Site::bulk(0, 1)).unwrap().class(), EdgeClass::Vertical);
        assert_eq!(Edge::new(Site::bulk(1, 0), Site::bulk(0, 0)).unwrap().class(), EdgeClass::Horizontal);
        assert!(Edge::new(Site::bulk(0, 0), Site::bulk(1, 1)).is_err());
        assert!(Edge::new(Site::slit(0, true), Site::slit(0, false)).is_err());
        assert!(Edge::new(Site::slit(0, true), Site::slit(1, false)).is_err());
        assert!(Edge::new(Site::slit(0, true), Site::bulk(0, -1)).is_err());
        assert!(Edge::new(Site::slit(0, false), Site::bulk(0, 1)).is_err());
    }

    #[test]
    fn site_json_is_a_triple() {
        let s = Site::slit(3, false);
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"[3,0,"slit_minus"]"#);
        let e = Edge::new(Site::bulk(0, 0), Site::bulk(1, 0)).unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"[[0,0,"bulk"],[1,0,"bulk"]]"#);
        assert!(serde_json::from_str::<Edge>(r#"[[0,0,"bulk"],[2,0,"bulk"]]"#).is_err());
    }
}
