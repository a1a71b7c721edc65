use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{assemble, csv_table, CriterionResult, Scenario, ScenarioOutput};
use crate::error::{invalid, Result};
use crate::gibbs::{estimate_time_zero_observables, GibbsParams, DEFAULT_WINDOW};
use crate::quantum::{sigma_z_diagonal, thermal_expectation_diagonal, Hamiltonian};
use crate::rng::stream;
use crate::spinflip::Spin;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McVsEdConfig {
    #[serde(rename = "J")]
    pub j: f64,
    pub h: Vec<f64>,
    pub beta: Vec<f64>,
    pub n_sites: Vec<usize>,
    pub n_sweeps: usize,
    pub n_burn_in: usize,
    pub max_std_error: f64,
    pub n_sigma: f64,
    pub window: f64,
}

impl Default for McVsEdConfig {
    fn default() -> Self {
        McVsEdConfig {
            j: 1.0,
            h: vec![1.0, 2.0, 4.0],
            beta: vec![2.0, 4.0, 8.0],
            n_sites: vec![2, 3],
            n_sweeps: 1_000_000,
            n_burn_in: 20_000,
            max_std_error: 0.01,
            n_sigma: 3.0,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct Row {
    n_sites: usize,
    beta: f64,
    h: f64,
    observable: String,
    mean: f64,
    std_error: f64,
    tau_int: f64,
    n: usize,
    exact: f64,
    deviation_sigma: f64,
    pass: bool,
}

/// Observables: `σ³_0 σ³_1` and every single-site `σ³_x`.
fn observables(n: usize) -> Vec<(String, Vec<usize>)> {
    let mut out = vec![("s0*s1".to_string(), vec![0, 1])];
    out.extend((0..n).map(|x| (format!("s{x}"), vec![x])));
    out
}

pub fn run_mc_vs_ed(cfg: &McVsEdConfig, config_text: &str, seed: u64) -> Result<ScenarioOutput> {
    if cfg.n_sites.iter().any(|&n| !(2..=4).contains(&n)) {
        return Err(invalid("mc-vs-ed supports 2 to 4 sites"));
    }
    if cfg.beta.iter().any(|&b| b > 8.0) {
        return Err(invalid("mc-vs-ed supports beta ≤ 8"));
    }
    let mut grid = Vec::new();
    for &n in &cfg.n_sites {
        for &beta in &cfg.beta {
            for &h in &cfg.h {
                grid.push((n, beta, h));
            }
        }
    }
    let results: Vec<(Vec<Row>, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &(n, beta, h))| {
            let p = GibbsParams { window: cfg.window, ..GibbsParams::periodic(cfg.j, h, beta, n)? };
            let obs = observables(n);
            let fs: Vec<Box<dyn Fn(&[Spin]) -> f64 + Sync>> = obs
                .iter()
                .map(|(_, sites)| {
                    let sites = sites.clone();
                    Box::new(move |s: &[Spin]| sites.iter().map(|&x| s[x].value()).product::<f64>())
                        as Box<dyn Fn(&[Spin]) -> f64 + Sync>
                })
                .collect();
            let refs: Vec<&dyn Fn(&[Spin]) -> f64> = fs.iter().map(|f| f.as_ref() as &dyn Fn(&[Spin]) -> f64).collect();
            let (est, stats) = estimate_time_zero_observables(&p, cfg.n_sweeps, cfg.n_burn_in, &mut stream(seed, k as u64), &refs)?;
            let ham = Hamiltonian::new(n, cfg.j, h)?;
            let rows = obs
                .iter()
                .zip(&est)
                .map(|((name, sites), e)| {
                    let exact = thermal_expectation_diagonal(&ham, beta, &sigma_z_diagonal(n, sites))?;
                    let dev = (e.mean - exact).abs();
                    let sigma = if e.std_error > 0.0 { dev / e.std_error } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
                    Ok(Row {
                        n_sites: n,
                        beta,
                        h,
                        observable: name.clone(),
                        mean: e.mean,
                        std_error: e.std_error,
                        tau_int: e.integrated_autocorrelation_time,
                        n: e.n_samples,
                        exact,
                        deviation_sigma: sigma,
                        pass: sigma <= cfg.n_sigma && e.std_error <= cfg.max_std_error,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((rows, stats.acceptance_rate()))
        })
        .collect::<Result<_>>()?;
    let acceptance: Vec<f64> = results.iter().map(|r| r.1).collect();
    let rows: Vec<Row> = results.into_iter().flat_map(|r| r.0).collect();
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("|Λ|={} β={} h={} {}: {:.4}±{:.4} vs {:.4}", r.n_sites, r.beta, r.h, r.observable, r.mean, r.std_error, r.exact))
        .collect();
    let worst_sigma = rows.iter().map(|r| r.deviation_sigma).fold(0.0, f64::max);
    let worst_err = rows.iter().map(|r| r.std_error).fold(0.0, f64::max);
    let criteria = vec![CriterionResult::new(
        3,
        "path-integral Monte Carlo matches exact thermal expectations",
        failures.is_empty(),
        format!(
            "{} comparisons; worst deviation {worst_sigma:.2} σ (limit {}), largest std error {worst_err:.4} (limit {}); failures: [{}]",
            rows.len(),
            cfg.n_sigma,
            cfg.max_std_error,
            failures.join("; ")
        ),
    )];
    let results = json!({
        "comparisons": rows.len(),
        "worst_deviation_sigma": worst_sigma,
        "largest_std_error": worst_err,
        "acceptance_rate": acceptance,
    });
    let tables = vec![("observables.csv".to_string(), csv_table(&rows)?)];
    Ok(assemble(Scenario::McVsEd, config_text, seed, serde_json::to_value(cfg)?, results, json!({}), criteria, tables))
}
