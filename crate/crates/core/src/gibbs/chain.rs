use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{layout, line_overlap, End, FieldConfiguration, Strand};
use super::params::{GibbsParams, SpaceBc};
use crate::error::{invalid, Result};
use crate::spinflip::sampling::bridge_into;
use crate::spinflip::{sample_bridge, sample_forward, sample_stationary, Spin, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub proposed: u64,
    pub accepted: u64,
    pub n_recorded: usize,
}

impl ChainStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Metropolis acceptance probability for a log-density change `delta`.
pub(crate) fn acceptance(delta: f64) -> f64 {
    delta.exp().min(1.0)
}

/// Log of the density of `config` with respect to the free spin-flip
/// measure: `J Σ_{⟨x,y⟩} ∫ σ_x σ_y` plus the coupling to frozen exterior
/// lines. End constraints are checked, not scored.
pub fn log_relative_density(config: &FieldConfiguration, params: &GibbsParams) -> Result<f64> {
    params.validate()?;
    config.check(params)?;
    let ext = exterior(params);
    let n = params.n_sites;
    let mut e = 0.0;
    for x in 0..n.saturating_sub(1) {
        e += line_overlap(config.line(x), config.line(x + 1));
    }
    if let Some((left, right)) = &ext {
        e += line_overlap(config.line(0), left) + line_overlap(config.line(n - 1), right);
    }
    Ok(params.j * e)
}

fn exterior(params: &GibbsParams) -> Option<(Vec<Strand>, Vec<Strand>)> {
    let (lo, hi) = params.domain();
    let constant = |s: Spin| {
        vec![Strand { path: Trajectory::constant(lo, hi, s).expect("valid domain"), lo_end: End::Pinned(s), hi_end: End::Pinned(s) }]
    };
    match params.bc_space {
        SpaceBc::Free => None,
        SpaceBc::Fixed { left, right } => Some((constant(left), constant(right))),
    }
}

fn reversed(t: &Trajectory) -> Trajectory {
    let (lo, hi) = (t.t_lo(), t.t_hi());
    let mut initial = t.final_value();
    let mut flips: Vec<f64> = t.flips().iter().rev().map(|&f| lo + hi - f).collect();
    // a flip reflected onto `lo` becomes a change of starting value
    if flips.first().is_some_and(|&f| f <= lo) {
        flips.remove(0);
        initial = initial.flipped();
    }
    flips.retain(|&f| f <= hi);
    Trajectory::from_parts_unchecked(lo, hi, initial, flips)
}

/// A draw from the free measure of one strand.
fn sample_free_strand<R: Rng + ?Sized>(lo: f64, hi: f64, le: End, he: End, h: f64, rng: &mut R) -> Result<Trajectory> {
    match (le, he) {
        (End::Cyclic, _) | (_, End::Cyclic) => {
            let v = Spin::from_bool(rng.random::<bool>());
            sample_bridge(v, v, lo, hi, h, rng)
        }
        (End::Pinned(a), End::Pinned(b)) => sample_bridge(a, b, lo, hi, h, rng),
        (End::Pinned(a), End::Free) => sample_forward(a, h, lo, hi, rng),
        (End::Free, End::Pinned(b)) => Ok(reversed(&sample_forward(b, h, lo, hi, rng)?)),
        (End::Free, End::Free) => sample_stationary(h, lo, hi, rng),
    }
}

/// Resample a random time window of `strand` from the free measure
/// conditioned on everything outside the window.
///
/// The window is chosen independently of the current state, so together with
/// the Metropolis rule the move leaves the Gibbs measure invariant.
fn propose<R: Rng + ?Sized>(strand: &Strand, window: f64, h: f64, rng: &mut R) -> Trajectory {
    let p = &strand.path;
    let (s0, s1) = (p.t_lo(), p.t_hi());
    let len = s1 - s0;
    let w = window.min(len);
    if strand.lo_end == End::Cyclic {
        if w >= len {
            return sample_free_strand(s0, s1, End::Cyclic, End::Cyclic, h, rng).expect("valid strand");
        }
        let lo = s0 + rng.random::<f64>() * len;
        let hi = lo + w;
        if hi <= s1 {
            return bridged(p, lo, hi, h, rng);
        }
        // wrap through the seam
        let hi_wrapped = hi - len;
        let (va, vb) = (p.value_at(lo), p.value_at(hi_wrapped));
        let mut fresh = Vec::new();
        bridge_into(va, vb, lo, hi, h, rng, &mut fresh);
        let split = fresh.partition_point(|&f| f <= s1);
        let at_seam = va.after(split);
        if fresh[split..].first().is_some_and(|&f| f - len <= s0) {
            // a new flip landing on the seam itself; measure zero, skip
            return p.clone();
        }
        let mut flips: Vec<f64> = fresh[split..].iter().map(|&f| f - len).collect();
        flips.extend(p.flips().iter().copied().filter(|&f| f > hi_wrapped && f <= lo));
        flips.extend_from_slice(&fresh[..split]);
        if !flips.windows(2).all(|w| w[0] < w[1]) {
            return p.clone();
        }
        let initial = at_seam;
        return Trajectory::from_parts_unchecked(s0, s1, initial, flips);
    }
    let start = s0 - w + rng.random::<f64>() * (len + w);
    let lo = start.max(s0);
    let hi = (start + w).min(s1);
    if !(hi > lo) {
        return p.clone();
    }
    let free_lo = lo == s0 && strand.lo_end == End::Free;
    let free_hi = hi == s1 && strand.hi_end == End::Free;
    let piece = match (free_lo, free_hi) {
        (true, true) => sample_stationary(h, lo, hi, rng).expect("valid window"),
        (true, false) => reversed(&sample_forward(p.value_at(hi), h, lo, hi, rng).expect("valid window")),
        (false, true) => sample_forward(p.value_at(lo), h, lo, hi, rng).expect("valid window"),
        (false, false) => return bridged(p, lo, hi, h, rng),
    };
    let mut out = p.clone();
    out.splice(lo, hi, piece.initial(), piece.flips());
    out
}

fn bridged<R: Rng + ?Sized>(p: &Trajectory, lo: f64, hi: f64, h: f64, rng: &mut R) -> Trajectory {
    let (va, vb) = (p.value_at(lo), p.value_at(hi));
    let mut fresh = Vec::new();
    bridge_into(va, vb, lo, hi, h, rng, &mut fresh);
    let mut out = p.clone();
    out.splice(lo, hi, va, &fresh);
    out
}

/// A Markov chain on field configurations whose stationary law is the
/// Gibbs measure of `params`.
#[derive(Clone, Debug)]
pub struct GibbsChain {
    params: GibbsParams,
    config: FieldConfiguration,
    exterior: Option<(Vec<Strand>, Vec<Strand>)>,
    proposed: u64,
    accepted: u64,
}

impl GibbsChain {
    /// Starts from a draw of the free measure.
    pub fn new<R: Rng + ?Sized>(params: &GibbsParams, rng: &mut R) -> Result<Self> {
        params.validate()?;
        let lines = layout(params)
            .into_iter()
            .map(|strands| {
                strands
                    .into_iter()
                    .map(|(lo, hi, le, he)| {
                        Ok(Strand { path: sample_free_strand(lo, hi, le, he, params.h, rng)?, lo_end: le, hi_end: he })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GibbsChain {
            params: params.clone(),
            config: FieldConfiguration::from_lines(lines, params.slit),
            exterior: exterior(params),
            proposed: 0,
            accepted: 0,
        })
    }

    pub fn config(&self) -> &FieldConfiguration {
        &self.config
    }

    pub fn proposed(&self) -> u64 {
        self.proposed
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    fn site_energy(&self, x: usize, line: &[Strand]) -> f64 {
        let n = self.params.n_sites;
        let mut e = 0.0;
        if x > 0 {
            e += line_overlap(line, self.config.line(x - 1));
        }
        if x + 1 < n {
            e += line_overlap(line, self.config.line(x + 1));
        }
        if let Some((left, right)) = &self.exterior {
            if x == 0 {
                e += line_overlap(line, left);
            }
            if x + 1 == n {
                e += line_overlap(line, right);
            }
        }
        self.params.j * e
    }

    /// One sweep: every strand receives about `length / window` window
    /// moves.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let (h, window) = (self.params.h, self.params.window);
        for x in 0..self.params.n_sites {
            for s in 0..self.config.line(x).len() {
                let len = self.config.line(x)[s].path.length();
                let moves = (len / window).ceil().max(1.0) as usize;
                for _ in 0..moves {
                    let strand = &self.config.line(x)[s];
                    let path = propose(strand, window, h, rng);
                    let mut line = self.config.line(x).to_vec();
                    line[s].path = path;
                    let delta = if self.params.j == 0.0 {
                        0.0
                    } else {
                        self.site_energy(x, &line) - self.site_energy(x, self.config.line(x))
                    };
                    self.proposed += 1;
                    if rng.random::<f64>() < acceptance(delta) {
                        self.accepted += 1;
                        *self.config.line_mut(x) = line;
                    }
                }
            }
        }
    }
}

/// Run `n_sweeps` sweeps, passing every configuration after the first
/// `n_burn_in` sweeps to `observe`.
pub fn run_chain<R: Rng + ?Sized>(
    params: &GibbsParams,
    n_sweeps: usize,
    n_burn_in: usize,
    rng: &mut R,
    mut observe: impl FnMut(&FieldConfiguration),
) -> Result<ChainStats> {
    if n_sweeps <= n_burn_in {
        return Err(invalid(format!("n_sweeps = {n_sweeps} must exceed n_burn_in = {n_burn_in}")));
    }
    let mut chain = GibbsChain::new(params, rng)?;
    for i in 0..n_sweeps {
        chain.sweep(rng);
        if i >= n_burn_in {
            observe(chain.config());
        }
    }
    Ok(ChainStats { proposed: chain.proposed, accepted: chain.accepted, n_recorded: n_sweeps - n_burn_in })
}

/// The recorded configurations of [`run_chain`].
pub fn mc_sample<R: Rng + ?Sized>(
    params: &GibbsParams,
    n_sweeps: usize,
    n_burn_in: usize,
    rng: &mut R,
) -> Result<Vec<FieldConfiguration>> {
    let mut out = Vec::with_capacity(n_sweeps.saturating_sub(n_burn_in));
    run_chain(params, n_sweeps, n_burn_in, rng, |c| out.push(c.clone()))?;
    Ok(out)
}
