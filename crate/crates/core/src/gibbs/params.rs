use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spinflip::Spin;

/// Default length of the time window resampled by one Metropolis move.
pub const DEFAULT_WINDOW: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeBc {
    Periodic,
    Free,
    /// `ξ⁺` at `β/2`, `ξ⁻` at `−β/2`, one spin per site.
    Fixed { plus: Vec<Spin>, minus: Vec<Spin> },
}

/// Spatial boundary: free, or frozen constant exterior lines next to the
/// two ends of `Λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceBc {
    Free,
    Fixed { left: Spin, right: Spin },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsParams {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    pub beta: f64,
    pub n_sites: usize,
    pub bc_time: TimeBc,
    pub bc_space: SpaceBc,
    /// Inclusive site range whose lines are cut at time zero.
    #[serde(default)]
    pub slit: Option<(usize, usize)>,
    #[serde(default = "default_window")]
    pub window: f64,
}

fn default_window() -> f64 {
    DEFAULT_WINDOW
}

impl GibbsParams {
    /// Periodic in time, free in space, no slit.
    pub fn periodic(j: f64, h: f64, beta: f64, n_sites: usize) -> Result<Self> {
        let p = GibbsParams {
            j,
            h,
            beta,
            n_sites,
            bc_time: TimeBc::Periodic,
            bc_space: SpaceBc::Free,
            slit: None,
            window: DEFAULT_WINDOW,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_slit(mut self, lo: usize, hi: usize) -> Result<Self> {
        self.slit = Some((lo, hi));
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return Err(invalid(format!("J must be finite and nonnegative, got {}", self.j)));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(invalid(format!("h must be positive, got {}", self.h)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if self.n_sites == 0 {
            return Err(invalid("at least one site is required"));
        }
        if !(self.window > 0.0) {
            return Err(invalid(format!("window must be positive, got {}", self.window)));
        }
        if let TimeBc::Fixed { plus, minus } = &self.bc_time {
            if plus.len() != self.n_sites || minus.len() != self.n_sites {
                return Err(invalid("fixed time boundary needs one spin per site on each side"));
            }
        }
        if let Some((lo, hi)) = self.slit {
            if lo > hi || hi >= self.n_sites {
                return Err(invalid(format!("slit [{lo}, {hi}] outside 0..{}", self.n_sites)));
            }
        }
        Ok(())
    }

    /// Time domain of every line: `[0, β]` for periodic b.c. (time zero at
    /// the seam), `[−β/2, β/2]` otherwise.
    pub fn domain(&self) -> (f64, f64) {
        match self.bc_time {
            TimeBc::Periodic => (0.0, self.beta),
            _ => (-0.5 * self.beta, 0.5 * self.beta),
        }
    }

    pub fn in_slit(&self, x: usize) -> bool {
        self.slit.is_some_and(|(lo, hi)| lo <= x && x <= hi)
    }

    pub fn slit_width(&self) -> usize {
        self.slit.map_or(0, |(lo, hi)| hi - lo + 1)
    }
}
