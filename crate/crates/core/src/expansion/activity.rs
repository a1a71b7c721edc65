use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{Edge, LatticeBox, Polymer, Site};
use crate::spinflip::{overlap_integral, sample_stationary, Spin, Trajectory};

/// Relative standard error above which an activity estimate is flagged.
pub const FLAG_RELATIVE_ERROR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    pub c: f64,
    pub max_norm: usize,
}

impl ExpansionParams {
    pub fn new(j: f64, h: f64, c: f64, max_norm: usize) -> Result<Self> {
        if !(j >= 0.0) || !j.is_finite() {
            return Err(invalid(format!("J must be nonnegative, got {j}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid(format!("h must be positive, got {h}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid(format!("c must be positive, got {c}")));
        }
        Ok(ExpansionParams { j, h, c, max_norm })
    }

    /// `δ = 1/√h`.
    pub fn delta(&self) -> f64 {
        1.0 / self.h.sqrt()
    }

    /// Per-edge weights `(e^{J/√h} − 1, e^{−2√h})`.
    pub fn weights(&self) -> (f64, f64) {
        edge_weights(self.j, self.h)
    }

    pub fn a(&self) -> f64 {
        a_of_h(self.j, self.h)
    }
}

fn edge_weights(j: f64, h: f64) -> (f64, f64) {
    let s = h.sqrt();
    ((j / s).exp_m1(), (-2.0 * s).exp())
}

/// `a(h) = −log max{e^{J/√h} − 1, e^{−2√h}}`.
pub fn a_of_h(j: f64, h: f64) -> f64 {
    let (wh, wv) = edge_weights(j, h);
    let s = h.sqrt();
    if wh > wv {
        -wh.ln()
    } else {
        2.0 * s
    }
}

/// `(e^{J/√h} − 1)^{#horizontal} e^{−2√h #vertical}`.
///
/// Computed as `w_max^{‖R‖} (w_min/w_max)^{k}` so that the comparison with
/// `e^{−a(h)‖R‖} = w_max^{‖R‖}` holds exactly in floating point.
pub fn activity_upper_bound(p: &Polymer, params: &ExpansionParams) -> f64 {
    let (wh, wv) = params.weights();
    let n = p.norm() as i32;
    let (wmax, wmin, k) = if wh >= wv {
        (wh, wv, p.n_vertical())
    } else {
        (wv, wh, p.n_horizontal())
    };
    let envelope = wmax.powi(n);
    let b = if k == 0 { envelope } else { envelope * (wmin / wmax).powi(k as i32) };
    debug_assert!(b <= envelope);
    b
}

/// Boundary spins `ξ⁺`, `ξ⁻` on the top and bottom rows, indexed from the
/// left end of `Λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValues {
    pub plus: Vec<Spin>,
    pub minus: Vec<Spin>,
}

impl BoundaryValues {
    pub fn uniform(width: usize, value: Spin) -> Self {
        BoundaryValues { plus: vec![value; width], minus: vec![value; width] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// The polymer has vertical edges that no `G_e` or connecting path
    /// accounts for; its activity is identically zero.
    pub orphan_edges: bool,
    pub flagged: bool,
}

/// One factor of the activity integrand for a single column.
#[derive(Clone, Debug)]
enum Factor {
    /// `1{σ_u(end) = value}`, `end` = 0 or δ.
    Pin { u: usize, at_end: bool, value: Spin },
    /// `1{σ_u(δ) = σ_v(0)}`.
    Glue { u: usize, v: usize },
    /// A path that is part of the polymer: `a · b · w / 2`.
    Path { lo: Endpoint, hi: Endpoint, weight: f64 },
    /// A path bordering the polymer but not in it.
    Half,
}

#[derive(Clone, Copy, Debug)]
enum Endpoint {
    Fixed(Spin),
    /// Value of block spin `u` at local time δ.
    Top(usize),
    /// Value of block spin `u` at local time 0.
    Bottom(usize),
}

struct Plan {
    n_blocks: usize,
    horizontal: Vec<(usize, usize)>,
    factors: Vec<Factor>,
    constant: f64,
}

fn vertical(x1: i32, r: i32) -> Edge {
    Edge::new(Site::bulk(x1, r), Site::bulk(x1, r + 1)).expect("adjacent")
}

fn plan(p: &Polymer, lattice: &LatticeBox, xi: &BoundaryValues, params: &ExpansionParams) -> Result<Option<Plan>> {
    if lattice.slit().is_some() {
        return Err(invalid("activities are only defined on the unslit box"));
    }
    let (l0, l1) = lattice.lambda();
    let width = lattice.width();
    if xi.plus.len() != width || xi.minus.len() != width {
        return Err(Error::DimensionMismatch(xi.plus.len().min(xi.minus.len()), width));
    }
    if !p.edges().iter().all(|e| lattice.has_edge(e)) {
        return Err(Error::OutsideBox("polymer".into()));
    }
    let half = lattice.half_rows();
    let decay = |len: i32| (-2.0 * params.h * params.delta() * len as f64).exp();

    let mut index: BTreeMap<Site, usize> = BTreeMap::new();
    let mut horizontal = Vec::new();
    for e in p.edges().iter().filter(|e| e.is_horizontal()) {
        let (a, b) = e.endpoints();
        let n = index.len();
        let ia = *index.entry(a).or_insert(n);
        let n = index.len();
        let ib = *index.entry(b).or_insert(n);
        horizontal.push((ia, ib));
    }
    let mut factors = Vec::new();
    let mut constant = 1.0;
    let mut accounted: Vec<Edge> = Vec::new();

    for x1 in l0..=l1 {
        let col = (x1 - l0) as usize;
        let (xp, xm) = (xi.plus[col], xi.minus[col]);
        let rows: Vec<(i32, usize)> = index.iter().filter(|(s, _)| s.x1 == x1).map(|(s, &i)| (s.x2, i)).collect();
        let path_edges = |lo: i32, hi: i32| (lo..hi).map(move |r| vertical(x1, r));
        if rows.is_empty() {
            let full: Vec<Edge> = path_edges(-half, half).collect();
            if full.iter().all(|e| p.contains_edge(e)) && !full.is_empty() {
                constant *= xp.value() * xm.value() * decay(2 * half) / 2.0;
                accounted.extend(full);
            }
            continue;
        }
        // the vertical edge of each G_e
        for &(r, _) in &rows {
            accounted.push(Edge::new(Site::bulk(x1, r), lattice.up(Site::bulk(x1, r)).expect("closure")).expect("adjacent"));
        }
        let mut push_path = |lo_row: i32, hi_row: i32, lo: Endpoint, hi: Endpoint, factors: &mut Vec<Factor>| {
            let edges: Vec<Edge> = path_edges(lo_row, hi_row).collect();
            if edges.iter().all(|e| p.contains_edge(e)) {
                factors.push(Factor::Path { lo, hi, weight: decay(hi_row - lo_row) });
                accounted.extend(edges);
            } else {
                factors.push(Factor::Half);
            }
        };
        let (t1, u1) = rows[0];
        if t1 == -half {
            factors.push(Factor::Pin { u: u1, at_end: false, value: xm });
        } else {
            push_path(-half, t1, Endpoint::Fixed(xm), Endpoint::Bottom(u1), &mut factors);
        }
        for w in rows.windows(2) {
            let ((ta, ua), (tb, ub)) = (w[0], w[1]);
            if tb == ta + 1 {
                factors.push(Factor::Glue { u: ua, v: ub });
            } else {
                push_path(ta + 1, tb, Endpoint::Top(ua), Endpoint::Bottom(ub), &mut factors);
            }
        }
        let (tk, uk) = *rows.last().expect("nonempty");
        if tk == half {
            factors.push(Factor::Pin { u: uk, at_end: false, value: xp });
        } else if tk + 1 == half {
            factors.push(Factor::Pin { u: uk, at_end: true, value: xp });
        } else {
            push_path(tk + 1, half, Endpoint::Top(uk), Endpoint::Fixed(xp), &mut factors);
        }
    }
    accounted.sort();
    accounted.dedup();
    let orphan = p.edges().iter().any(|e| !e.is_horizontal() && accounted.binary_search(e).is_err());
    if orphan {
        return Ok(None);
    }
    Ok(Some(Plan { n_blocks: index.len(), horizontal, factors, constant }))
}

fn evaluate(plan: &Plan, blocks: &[Trajectory], j: f64, delta: f64) -> f64 {
    let mut v = plan.constant * 2f64.powi(plan.n_blocks as i32);
    let val = |ep: Endpoint| match ep {
        Endpoint::Fixed(s) => s.value(),
        Endpoint::Top(u) => blocks[u].final_value().value(),
        Endpoint::Bottom(u) => blocks[u].initial().value(),
    };
    for f in &plan.factors {
        v *= match *f {
            Factor::Pin { u, at_end, value } => {
                let s = if at_end { blocks[u].final_value() } else { blocks[u].initial() };
                if s == value {
                    1.0
                } else {
                    return 0.0;
                }
            }
            Factor::Glue { u, v } => {
                if blocks[u].final_value() == blocks[v].initial() {
                    1.0
                } else {
                    return 0.0;
                }
            }
            Factor::Path { lo, hi, weight } => val(lo) * val(hi) * weight / 2.0,
            Factor::Half => 0.5,
        };
    }
    for &(a, b) in &plan.horizontal {
        let w = j * overlap_integral(&blocks[a], &blocks[b], 0.0, delta).expect("same interval");
        v *= w.exp_m1();
    }
    v
}

/// Monte Carlo estimate of the activity `Φ^{h,ξ}(R)` of a polymer standing
/// alone.
///
/// Block spins on the endpoints of the horizontal edges are drawn
/// independently from the stationary process on `[0, δ]`, `δ = 1/√h`. Each
/// vertical segment of a column between consecutive such blocks, or between a
/// block and the time boundary, contributes `σσ e^{−2hδ n}/2` if its `n`
/// edges belong to `R` and `1/2` otherwise. Adjacent blocks are glued by an
/// indicator, blocks on `∂̄Δ` are pinned to `ξ`, and every horizontal edge
/// contributes `e^{W} − 1`.
pub fn estimate_activity<R: Rng + ?Sized>(
    p: &Polymer,
    lattice: &LatticeBox,
    xi: &BoundaryValues,
    params: &ExpansionParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<ActivityEstimate> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples { got: n_samples, need: 2 });
    }
    let Some(plan) = plan(p, lattice, xi, params)? else {
        return Ok(ActivityEstimate { mean: 0.0, std_error: 0.0, n_samples, orphan_edges: true, flagged: false });
    };
    let delta = params.delta();
    let mut blocks = Vec::with_capacity(plan.n_blocks);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n_samples {
        blocks.clear();
        for _ in 0..plan.n_blocks {
            blocks.push(sample_stationary(params.h, 0.0, delta, rng)?);
        }
        let v = evaluate(&plan, &blocks, params.j, delta);
        sum += v;
        sum2 += v * v;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
    let std_error = (var / n).sqrt();
    let flagged = std_error > FLAG_RELATIVE_ERROR * mean.abs();
    Ok(ActivityEstimate { mean, std_error, n_samples, orphan_edges: false, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, enumerate_polymers, g_of_edge};
    use crate::rng::stream;
    use nalgebra::Matrix2;

    fn h_edge(x1: i32, x2: i32) -> Edge {
        Edge::new(Site::bulk(x1, x2), Site::bulk(x1 + 1, x2)).unwrap()
    }

    #[test]
    fn a_of_h_values() {
        assert!((a_of_h(1.0, 1.0) + 0.541_324_854_612_918).abs() < 1e-12);
        assert!((a_of_h(1.0, 100.0) - 2.252_168_461_044_09).abs() < 1e-12);
        assert!((a_of_h(0.0, 9.0) - 6.0).abs() < 1e-15);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..12 {
            let a = a_of_h(1.0, 2f64.powi(k));
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn upper_bound_of_g_e() {
        let b = build_box((0, 2), 4.0, 0.1, None).unwrap();
        let g = g_of_edge(&h_edge(0, 0), &b).unwrap();
        let p = ExpansionParams::new(1.0, 100.0, 1.0, 6).unwrap();
        let want = (0.1f64.exp() - 1.0) * (-40.0f64).exp();
        assert!((activity_upper_bound(&g, &p) / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_below_envelope() {
        let b = build_box((0, 2), 4.0, 1.0, None).unwrap();
        let polys = enumerate_polymers(&b, 6, 1_000_000).unwrap();
        for &(j, h) in &[(1.0, 1.0), (1.0, 4.0), (1.0, 100.0), (0.0, 2.0), (3.0, 0.5)] {
            let p = ExpansionParams::new(j, h, 1.0, 6).unwrap();
            for r in &polys {
                let env = (-p.a() * r.norm() as f64).exp();
                let (wh, wv) = p.weights();
                let env_exact = wh.max(wv).powi(r.norm() as i32);
                assert!(activity_upper_bound(r, &p) <= env_exact);
                assert!((env_exact - env).abs() <= 1e-12 * env.max(1e-300));
            }
        }
    }

    /// `E[e^{J ∫_0^δ τ} ]` for `τ` a stationary ±1 flip process of rate 2h.
    fn exp_overlap_moment(j: f64, h: f64, delta: f64) -> f64 {
        let q = Matrix2::new(-2.0 * h, 2.0 * h, 2.0 * h, -2.0 * h);
        let m = (q + Matrix2::new(j, 0.0, 0.0, -j)) * delta;
        let e = m.exp();
        0.5 * e.sum()
    }

    #[test]
    fn single_interior_g_e_matches_oracle() {
        let (j, h) = (1.0, 4.0);
        let params = ExpansionParams::new(j, h, 1.0, 6).unwrap();
        let delta = params.delta();
        let b = build_box((0, 1), 6.0 * delta, delta, None).unwrap();
        let g = g_of_edge(&h_edge(0, 0), &b).unwrap();
        let xi = BoundaryValues::uniform(2, Spin::Up);
        let est = estimate_activity(&g, &b, &xi, &params, 400_000, &mut stream(3, 0)).unwrap();
        // 2^2 blocks, four bordering paths at 1/2 each
        let want = 4.0 * 0.0625 * (exp_overlap_moment(j, h, delta) - 1.0);
        assert!((est.mean - want).abs() < 4.0 * est.std_error, "{} ± {} vs {want}", est.mean, est.std_error);
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let params = ExpansionParams::new(0.0, 4.0, 1.0, 6).unwrap();
        let b = build_box((0, 2), 4.0 * params.delta(), params.delta(), None).unwrap();
        let xi = BoundaryValues::uniform(3, Spin::Up);
        for r in enumerate_polymers(&b, 5, 1_000_000).unwrap().iter().filter(|r| r.n_horizontal() > 0) {
            let est = estimate_activity(r, &b, &xi, &params, 200, &mut stream(1, 0)).unwrap();
            assert_eq!(est.mean, 0.0);
        }
    }

    #[test]
    fn interior_polymer_ignores_xi() {
        let params = ExpansionParams::new(1.0, 4.0, 1.0, 6).unwrap();
        let d = params.delta();
        let b = build_box((0, 2), 6.0 * d, d, None).unwrap();
        let g = g_of_edge(&h_edge(0, 0), &b).unwrap().union(&g_of_edge(&h_edge(1, 0), &b).unwrap());
        let up = BoundaryValues::uniform(3, Spin::Up);
        let mixed = BoundaryValues { plus: vec![Spin::Down, Spin::Up, Spin::Down], minus: vec![Spin::Up; 3] };
        let a = estimate_activity(&g, &b, &up, &params, 100_000, &mut stream(8, 0)).unwrap();
        let c = estimate_activity(&g, &b, &mixed, &params, 100_000, &mut stream(8, 0)).unwrap();
        // same stream and no boundary factors: identical
        assert_eq!(a.mean, c.mean);
    }

    #[test]
    fn orphan_vertical_edges() {
        let params = ExpansionParams::new(1.0, 4.0, 1.0, 6).unwrap();
        let d = params.delta();
        let b = build_box((0, 1), 6.0 * d, d, None).unwrap();
        let g = g_of_edge(&h_edge(0, 0), &b).unwrap();
        // one extra vertical edge above, not a whole path to ∂⁺
        let extra = Polymer::from_edges([vertical(0, 1)]);
        let r = g.union(&extra);
        let est = estimate_activity(&r, &b, &BoundaryValues::uniform(2, Spin::Up), &params, 10, &mut stream(0, 0)).unwrap();
        assert!(est.orphan_edges);
        assert_eq!(est.mean, 0.0);
    }
}
