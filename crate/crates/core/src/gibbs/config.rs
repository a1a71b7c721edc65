use serde::{Deserialize, Serialize};

use super::params::{GibbsParams, TimeBc};
use crate::error::{Error, Result};
use crate::spinflip::overlap_integral;
use crate::spinflip::{Spin, Trajectory};

/// How one end of a strand is constrained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Pinned(Spin),
    Free,
    /// The strand closes on itself: value at the top equals value at the
    /// bottom.
    Cyclic,
}

/// A piece of a spin line together with its end constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strand {
    pub path: Trajectory,
    pub lo_end: End,
    pub hi_end: End,
}

impl Strand {
    pub fn honors_ends(&self) -> bool {
        let lo_ok = match self.lo_end {
            End::Pinned(s) => self.path.initial() == s,
            End::Free => true,
            End::Cyclic => self.path.initial() == self.path.final_value(),
        };
        let hi_ok = match self.hi_end {
            End::Pinned(s) => self.path.final_value() == s,
            _ => true,
        };
        lo_ok && hi_ok
    }
}

/// Strand intervals and end constraints of every site.
pub(crate) fn layout(params: &GibbsParams) -> Vec<Vec<(f64, f64, End, End)>> {
    let (lo, hi) = params.domain();
    (0..params.n_sites)
        .map(|x| {
            let (bottom, top) = match &params.bc_time {
                TimeBc::Periodic => (End::Cyclic, End::Cyclic),
                TimeBc::Free => (End::Free, End::Free),
                TimeBc::Fixed { plus, minus } => (End::Pinned(minus[x]), End::Pinned(plus[x])),
            };
            match (params.in_slit(x), &params.bc_time) {
                (false, _) => vec![(lo, hi, bottom, top)],
                // cut at the seam: one strand, both ends free
                (true, TimeBc::Periodic) => vec![(lo, hi, End::Free, End::Free)],
                (true, _) => vec![(lo, 0.0, bottom, End::Free), (0.0, hi, End::Free, top)],
            }
        })
        .collect()
}

/// One spin line per site, each made of one or two strands covering the
/// common time domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldConfiguration {
    lines: Vec<Vec<Strand>>,
    slit: Option<(usize, usize)>,
}

impl FieldConfiguration {
    pub(crate) fn from_lines(lines: Vec<Vec<Strand>>, slit: Option<(usize, usize)>) -> Self {
        FieldConfiguration { lines, slit }
    }

    /// Build from explicit strands, checked against `params`.
    pub fn new(lines: Vec<Vec<Strand>>, params: &GibbsParams) -> Result<Self> {
        let c = FieldConfiguration { lines, slit: params.slit };
        c.check(params)?;
        Ok(c)
    }

    pub fn n_sites(&self) -> usize {
        self.lines.len()
    }

    pub fn line(&self, x: usize) -> &[Strand] {
        &self.lines[x]
    }

    pub(crate) fn line_mut(&mut self, x: usize) -> &mut Vec<Strand> {
        &mut self.lines[x]
    }

    /// Spins at time zero. On slit sites this is the value just above the
    /// cut.
    pub fn time_zero(&self) -> Vec<Spin> {
        (0..self.n_sites()).map(|x| self.slit_values(x).0).collect()
    }

    /// `(σ_x(0⁺), σ_x(0⁻))`; equal off the slit.
    pub fn slit_values(&self, x: usize) -> (Spin, Spin) {
        let line = &self.lines[x];
        if line.len() == 2 {
            (line[1].path.initial(), line[0].path.final_value())
        } else {
            let p = &line[0].path;
            if p.t_lo() == 0.0 {
                // periodic frame: the seam is time zero
                (p.initial(), p.final_value())
            } else {
                let v = p.value_at(0.0);
                (v, v)
            }
        }
    }

    pub fn slit(&self) -> Option<(usize, usize)> {
        self.slit
    }

    pub(crate) fn check(&self, params: &GibbsParams) -> Result<()> {
        let shape = layout(params);
        if shape.len() != self.lines.len() {
            return Err(Error::DimensionMismatch(self.lines.len(), shape.len()));
        }
        for (x, (line, want)) in self.lines.iter().zip(&shape).enumerate() {
            if line.len() != want.len() {
                return Err(Error::BoundaryViolation(format!("site {x}: wrong number of strands")));
            }
            for (s, &(lo, hi, le, he)) in line.iter().zip(want) {
                if s.path.t_lo() != lo || s.path.t_hi() != hi {
                    return Err(Error::IntervalMismatch(format!(
                        "site {x}: strand on [{}, {}], expected [{lo}, {hi}]",
                        s.path.t_lo(),
                        s.path.t_hi()
                    )));
                }
                if s.lo_end != le || s.hi_end != he {
                    return Err(Error::BoundaryViolation(format!("site {x}: wrong end constraints")));
                }
                if !s.honors_ends() {
                    return Err(Error::BoundaryViolation(format!("site {x}: end values not honored")));
                }
            }
        }
        Ok(())
    }
}

/// `∫ σ_a σ_b dt` over the common support of two lines.
pub(crate) fn line_overlap(a: &[Strand], b: &[Strand]) -> f64 {
    let mut acc = 0.0;
    for sa in a {
        for sb in b {
            let lo = sa.path.t_lo().max(sb.path.t_lo());
            let hi = sa.path.t_hi().min(sb.path.t_hi());
            if hi > lo {
                acc += overlap_integral(&sa.path, &sb.path, lo, hi).expect("inside both strands");
            }
        }
    }
    acc
}
