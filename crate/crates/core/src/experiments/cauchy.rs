use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{assemble, csv_table, CriterionResult, Scenario, ScenarioOutput};
use crate::error::{invalid, Result};
use crate::expansion::bound_mext;
use crate::quantum::{ground_state, operator_norm, reduced_density, ChainParams, DensityMatrix};
use crate::stats::fit_line;

/// Differences below this are numerical noise and are left out of the fit.
pub const NORM_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhoCauchyConfig {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: Vec<f64>,
    #[serde(rename = "L")]
    pub l: usize,
    pub m_max: usize,
    pub c: Vec<f64>,
    pub min_r_squared: f64,
    /// Fits are required to succeed only for `h` at or above this.
    pub fit_h_min: f64,
}

impl Default for RhoCauchyConfig {
    fn default() -> Self {
        RhoCauchyConfig { j: 1.0, h: vec![4.0, 8.0], l: 2, m_max: 5, c: vec![0.5, 1.0, 2.0, 4.0], min_r_squared: 0.9, fit_h_min: 4.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
struct Row {
    h: f64,
    m: usize,
    d_m: f64,
    in_fit: bool,
}

#[derive(Clone, Debug, Serialize)]
struct BoundRow {
    h: f64,
    c: f64,
    m: usize,
    d_m: f64,
    bound_mext: f64,
    informative: bool,
    dominates: bool,
}

#[derive(Clone, Debug, Serialize)]
struct Fit {
    h: f64,
    gamma: f64,
    prefactor: f64,
    r_squared: f64,
    n_points: usize,
    truncated: bool,
}

fn block_rho(m: usize, l: usize, j: f64, h: f64) -> Result<DensityMatrix> {
    let p = ChainParams::new(m, l, j, h)?;
    let gs = ground_state(&p.hamiltonian()?)?;
    reduced_density(&gs.state, p.n_sites(), p.block())
}

pub fn run_rho_cauchy(cfg: &RhoCauchyConfig, config_text: &str, seed: u64) -> Result<ScenarioOutput> {
    if cfg.h.is_empty() || cfg.m_max == 0 {
        return Err(invalid("need at least one h and m_max ≥ 1"));
    }
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut bound_rows = Vec::new();
    for &h in &cfg.h {
        let rhos: Vec<DensityMatrix> =
            (0..=cfg.m_max + 1).into_par_iter().map(|m| block_rho(m, cfg.l, cfg.j, h)).collect::<Result<_>>()?;
        let d: Vec<f64> = rhos.windows(2).map(|w| operator_norm(&(w[1].matrix() - w[0].matrix()))).collect();
        // fit on the leading run of points above the floor
        let kept = d.iter().take_while(|&&x| x > NORM_FLOOR).count();
        for (m, &dm) in d.iter().enumerate() {
            rows.push(Row { h, m, d_m: dm, in_fit: m < kept });
        }
        let xs: Vec<f64> = (0..kept).map(|m| m as f64).collect();
        let ys: Vec<f64> = d[..kept].iter().map(|x| x.ln()).collect();
        if let Some(f) = fit_line(&xs, &ys) {
            fits.push(Fit { h, gamma: -f.slope, prefactor: f.intercept.exp(), r_squared: f.r_squared, n_points: f.n_points, truncated: kept < d.len() });
        }
        for &c in &cfg.c {
            for (m, &dm) in d.iter().enumerate() {
                let b = bound_mext(c, m as f64)?;
                // operator norms of differences of density matrices are ≤ 1
                let informative = b.is_finite() && b < 1.0;
                bound_rows.push(BoundRow { h, c, m, d_m: dm, bound_mext: b, informative, dominates: !informative || dm <= b });
            }
        }
    }

    let mut fit_detail = Vec::new();
    let mut fit_ok = true;
    for &h in cfg.h.iter().filter(|&&h| h >= cfg.fit_h_min) {
        match fits.iter().find(|f| f.h == h) {
            Some(f) => {
                let ok = f.gamma > 0.0 && f.r_squared >= cfg.min_r_squared;
                fit_ok &= ok;
                fit_detail.push(format!("h={h}: gamma={:.4}, R2={:.4}", f.gamma, f.r_squared));
            }
            None => {
                fit_ok = false;
                fit_detail.push(format!("h={h}: fewer than two points above {NORM_FLOOR:e}"));
            }
        }
    }
    let informative = bound_rows.iter().filter(|b| b.informative).count();
    let dominated = bound_rows.iter().all(|b| b.dominates);
    let zero_ok = cfg.j != 0.0 || rows.iter().all(|r| r.d_m < NORM_FLOOR);
    // doubling h should steepen the decay
    let mut by_h: Vec<&Fit> = fits.iter().collect();
    by_h.sort_by(|a, b| a.h.total_cmp(&b.h));
    let gamma_monotone = by_h.windows(2).filter(|w| w[1].h == 2.0 * w[0].h).all(|w| w[1].gamma > w[0].gamma);

    let criteria = vec![CriterionResult::new(
        8,
        "d_m decays exponentially and bound_mext dominates it where informative",
        fit_ok && dominated && zero_ok,
        format!(
            "{}; informative bound points: {informative}, all dominated: {dominated}; gamma increases under doubling h: {gamma_monotone}",
            fit_detail.join("; ")
        ),
    )];
    let results = json!({ "informative_bound_points": informative, "gamma_increases_with_h": gamma_monotone });
    let fitted = serde_json::to_value(&fits)?;
    let tables = vec![("d_m.csv".to_string(), csv_table(&rows)?), ("bounds.csv".to_string(), csv_table(&bound_rows)?)];
    Ok(assemble(Scenario::RhoCauchy, config_text, seed, serde_json::to_value(cfg)?, results, fitted, criteria, tables))
}
