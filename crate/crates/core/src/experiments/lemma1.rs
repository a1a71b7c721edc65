use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{assemble, csv_table, CriterionResult, Scenario, ScenarioOutput};
use crate::error::{invalid, Result};
use crate::expansion::bound_psi;
use crate::gibbs::{factorization_ratios, factorization_ratios_exact, GibbsParams, SpaceBc, TimeBc, DEFAULT_WINDOW};
use crate::rng::stream;
use crate::spinflip::Spin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiPattern {
    Up,
    Down,
    /// `ξ⁺ = +1`, `ξ⁻ = −1` on every site.
    Opposite,
    /// `+ − + …` on both sides.
    Alternating,
}

impl XiPattern {
    fn spins(self, n: usize) -> (Vec<Spin>, Vec<Spin>) {
        match self {
            XiPattern::Up => (vec![Spin::Up; n], vec![Spin::Up; n]),
            XiPattern::Down => (vec![Spin::Down; n], vec![Spin::Down; n]),
            XiPattern::Opposite => (vec![Spin::Up; n], vec![Spin::Down; n]),
            XiPattern::Alternating => {
                let v: Vec<Spin> = (0..n).map(|x| Spin::from_bool(x % 2 == 0)).collect();
                (v.clone(), v)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma1Config {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub m: usize,
    pub beta: f64,
    pub c: f64,
    pub xi: Vec<XiPattern>,
    pub n_sweeps: usize,
    pub n_burn_in: usize,
    pub window: f64,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Lemma1Config {
            j: 1.0,
            h: 4.0,
            l: 1,
            m: 1,
            beta: 4.0,
            c: 1.0,
            xi: vec![XiPattern::Up, XiPattern::Opposite, XiPattern::Alternating],
            n_sweeps: 60_000,
            n_burn_in: 6_000,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct Row {
    xi: XiPattern,
    eps_plus: usize,
    eps_minus: usize,
    count: u64,
    ratio_mc: f64,
    std_error: f64,
    ratio_exact: f64,
    ratio_exact_zero_coupling: f64,
}

fn params(cfg: &Lemma1Config, j: f64, xi: XiPattern) -> Result<GibbsParams> {
    let n = 2 * cfg.m + cfg.l + 1;
    let (plus, minus) = xi.spins(n);
    GibbsParams {
        j,
        h: cfg.h,
        beta: cfg.beta,
        n_sites: n,
        bc_time: TimeBc::Fixed { plus, minus },
        bc_space: SpaceBc::Free,
        slit: None,
        window: cfg.window,
    }
    .with_slit(cfg.m, cfg.m + cfg.l)
}

/// Largest `c` with `ψ(c) ≥ max |log ratio|`; infinite when the spread is
/// at most 8, since `ψ > 8` for every `c`.
fn tightest_c(spread: f64) -> f64 {
    if spread <= 8.0 {
        f64::INFINITY
    } else {
        -2.0 * (-8.0 / spread).ln_1p()
    }
}

pub fn run_lemma1_check(cfg: &Lemma1Config, config_text: &str, seed: u64) -> Result<ScenarioOutput> {
    if cfg.l + 1 > 2 {
        return Err(invalid("the block Λ₀ = {0..L} may have at most 2 sites"));
    }
    if cfg.xi.is_empty() {
        return Err(invalid("no boundary patterns"));
    }
    let psi = bound_psi(cfg.c)?;
    let runs: Vec<_> = cfg
        .xi
        .par_iter()
        .enumerate()
        .map(|(k, &xi)| {
            let p = params(cfg, cfg.j, xi)?;
            let (mc, stats) = factorization_ratios(&p, cfg.n_sweeps, cfg.n_burn_in, &mut stream(seed, k as u64))?;
            let exact = factorization_ratios_exact(&p)?;
            let exact0 = factorization_ratios_exact(&params(cfg, 0.0, xi)?)?;
            Ok((xi, mc, stats, exact, exact0))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut undersampled = 0;
    let mut symmetry_worst: f64 = 0.0;
    for (xi, mc, _, exact, exact0) in &runs {
        undersampled += mc.undersampled.len();
        for a in 0..mc.dim {
            for b in 0..mc.dim {
                rows.push(Row {
                    xi: *xi,
                    eps_plus: a,
                    eps_minus: b,
                    count: mc.counts[a][b],
                    ratio_mc: mc.value[a][b],
                    std_error: mc.std_error[a][b],
                    ratio_exact: exact[a][b],
                    ratio_exact_zero_coupling: exact0[a][b],
                });
                let err = (mc.std_error[a][b].powi(2) + mc.std_error[b][a].powi(2)).sqrt();
                if err > 0.0 {
                    symmetry_worst = symmetry_worst.max((mc.value[a][b] - mc.value[b][a]).abs() / err);
                }
            }
        }
    }
    let spread_mc = rows.iter().map(|r| r.ratio_mc.ln().abs()).fold(0.0, f64::max);
    let spread_exact = rows.iter().map(|r| r.ratio_exact.ln().abs()).fold(0.0, f64::max);
    let zero_dev = rows.iter().map(|r| (r.ratio_exact_zero_coupling - 1.0).abs()).fold(0.0, f64::max);
    let inside = rows.iter().all(|r| r.ratio_mc.is_finite() && r.ratio_mc.ln().abs() <= psi);

    let criteria = vec![CriterionResult::new(
        9,
        "factorization ratio is 1 at J=0 and inside exp(±ψ(c)) at the configured coupling",
        zero_dev < 1e-12 && inside && undersampled == 0,
        format!(
            "J=0 max |ratio−1| = {zero_dev:.2e}; max |log ratio| MC = {spread_mc:.4}, exact = {spread_exact:.4}, ψ({}) = {psi:.4}; undersampled cells: {undersampled}; worst reflection asymmetry {symmetry_worst:.2} σ",
            cfg.c
        ),
    )];
    let acceptance: Vec<f64> = runs.iter().map(|r| r.2.acceptance_rate()).collect();
    let results = json!({
        "psi": psi,
        "max_abs_log_ratio_mc": spread_mc,
        "max_abs_log_ratio_exact": spread_exact,
        "zero_coupling_max_deviation": zero_dev,
        "reflection_asymmetry_sigma": symmetry_worst,
        "acceptance_rate": acceptance,
    });
    let fitted = json!({
        "tightest_envelope": spread_mc,
        "largest_c_with_envelope": tightest_c(spread_mc).is_finite().then(|| tightest_c(spread_mc)),
    });
    let tables = vec![("ratios.csv".to_string(), csv_table(&rows)?)];
    Ok(assemble(Scenario::Lemma1Check, config_text, seed, serde_json::to_value(cfg)?, results, fitted, criteria, tables))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tightest_c_inverts_psi() {
        let c = tightest_c(12.0);
        assert!((bound_psi(c).unwrap() - 12.0).abs() < 1e-12);
        assert!(tightest_c(3.0).is_infinite());
    }
}
