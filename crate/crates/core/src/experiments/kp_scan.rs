use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{assemble, csv_table, CriterionResult, Scenario, ScenarioOutput};
use crate::error::{invalid, Result};
use crate::expansion::{kp_check_all, ExpansionParams, KpReport};
use crate::lattice::{build_box, enumerate_polymers, DEFAULT_POLYMER_CEILING};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KpScanConfig {
    #[serde(rename = "J")]
    pub j: f64,
    pub c: Vec<f64>,
    /// Doubling grid `h_min · 2^k` up to `h_max`.
    pub h_min: f64,
    pub h_max: f64,
    pub max_norm: usize,
    /// Spatial width `|Λ|` of the box.
    pub width: usize,
    /// `β/δ`, an even integer.
    pub rows: usize,
    /// The `c` whose threshold must exist.
    pub c_required: f64,
}

impl Default for KpScanConfig {
    fn default() -> Self {
        KpScanConfig { j: 1.0, c: vec![0.5, 1.0, 2.0], h_min: 1.0, h_max: 1024.0, max_norm: 6, width: 2, rows: 4, c_required: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
struct Row {
    #[serde(rename = "J")]
    j: f64,
    c: f64,
    h: f64,
    pass: bool,
    lhs: f64,
    tail: Option<f64>,
    rhs: f64,
    a_h: f64,
    inconclusive: bool,
}

impl Row {
    fn new(j: f64, r: &KpReport) -> Self {
        Row { j, c: r.c, h: r.h, pass: r.pass, lhs: r.lhs_truncated, tail: r.tail_bound, rhs: r.rhs, a_h: r.a_h, inconclusive: r.inconclusive }
    }
}

fn h_grid(cfg: &KpScanConfig) -> Result<Vec<f64>> {
    if !(cfg.h_min > 0.0) || cfg.h_max < cfg.h_min {
        return Err(invalid("need 0 < h_min ≤ h_max"));
    }
    let mut out = vec![cfg.h_min];
    while *out.last().expect("nonempty") * 2.0 <= cfg.h_max {
        out.push(out.last().expect("nonempty") * 2.0);
    }
    Ok(out)
}

pub fn run_kp_scan(cfg: &KpScanConfig, config_text: &str, seed: u64) -> Result<ScenarioOutput> {
    if cfg.rows == 0 || cfg.rows % 2 != 0 || cfg.width == 0 {
        return Err(invalid("rows must be a positive even integer and width positive"));
    }
    let hs = h_grid(cfg)?;
    // the polymer set depends only on the combinatorics of the box
    let lattice = build_box((0, cfg.width as i32 - 1), cfg.rows as f64, 1.0, None)?;
    let polymers = enumerate_polymers(&lattice, cfg.max_norm, DEFAULT_POLYMER_CEILING)?;
    let mut rows = Vec::new();
    let couplings: Vec<f64> = if cfg.j == 0.0 { vec![0.0] } else { vec![cfg.j, 0.0] };
    for &j in &couplings {
        for &c in &cfg.c {
            for &h in &hs {
                let p = ExpansionParams::new(j, h, c, cfg.max_norm)?;
                rows.push(Row::new(j, &kp_check_all(&p, &lattice, &polymers)?));
            }
        }
    }
    let threshold = |j: f64, c: f64| rows.iter().find(|r| r.j == j && r.c == c && r.pass).map(|r| r.h);
    let upward_closed = couplings.iter().all(|&j| {
        cfg.c.iter().all(|&c| {
            let passes: Vec<bool> = rows.iter().filter(|r| r.j == j && r.c == c).map(|r| r.pass).collect();
            passes.windows(2).all(|w| !w[0] || w[1])
        })
    });
    let zero_all = rows.iter().filter(|r| r.j == 0.0).all(|r| r.pass);
    let h_star = threshold(cfg.j, cfg.c_required);
    let mut cs = cfg.c.clone();
    cs.sort_by(f64::total_cmp);
    let thresholds: Vec<(f64, Option<f64>)> = cs.iter().map(|&c| (c, threshold(cfg.j, c))).collect();
    let nondecreasing_in_c = thresholds.windows(2).all(|w| match (w[0].1, w[1].1) {
        (Some(a), Some(b)) => b >= a,
        (None, Some(_)) => false,
        _ => true,
    });
    let criteria = vec![CriterionResult::new(
        6,
        "Kotecký–Preiss pass set is upward closed in h with a finite threshold",
        upward_closed && zero_all && (cfg.j == 0.0 || h_star.is_some()),
        format!(
            "{} polymers up to norm {}; upward closed: {upward_closed}; J=0 passes everywhere: {zero_all}; h*(J={}, c={}) = {:?}; h* nondecreasing in c: {nondecreasing_in_c}",
            polymers.len(),
            cfg.max_norm,
            cfg.j,
            cfg.c_required,
            h_star
        ),
    )];
    let results = json!({
        "n_polymers": polymers.len(),
        "upward_closed": upward_closed,
        "zero_coupling_passes": zero_all,
        "h_star_nondecreasing_in_c": nondecreasing_in_c,
    });
    let fitted = json!({
        "h_star": h_star,
        "h_star_by_c": thresholds.iter().map(|(c, h)| json!({"c": c, "h_star": h})).collect::<Vec<_>>(),
    });
    let tables = vec![("kp_scan.csv".to_string(), csv_table(&rows)?)];
    Ok(assemble(Scenario::KpScan, config_text, seed, serde_json::to_value(cfg)?, results, fitted, criteria, tables))
}
