//! Scenario runners behind the `tfim` command line.
//!
//! Each scenario reads a JSON config, runs a grid of computations and
//! returns a [`Report`] plus CSV tables. Given the same config text and seed
//! every output file is byte-identical: random streams are keyed by grid
//! index, parallel results are collected in grid order and no timing data is
//! written.

mod cauchy;
mod entropy;
mod kp_scan;
mod lemma1;
mod mc_ed;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};

pub use cauchy::{run_rho_cauchy, RhoCauchyConfig};
pub use entropy::{run_entropy_sweep, EntropySweepConfig};
pub use kp_scan::{run_kp_scan, KpScanConfig};
pub use lemma1::{run_lemma1_check, Lemma1Config, XiPattern};
pub use mc_ed::{run_mc_vs_ed, McVsEdConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    EntropySweep,
    RhoCauchy,
    Lemma1Check,
    McVsEd,
    KpScan,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::EntropySweep, Scenario::RhoCauchy, Scenario::Lemma1Check, Scenario::McVsEd, Scenario::KpScan];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::EntropySweep => "entropy-sweep",
            Scenario::RhoCauchy => "rho-cauchy",
            Scenario::Lemma1Check => "lemma1-check",
            Scenario::McVsEd => "mc-vs-ed",
            Scenario::KpScan => "kp-scan",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| invalid(format!("unknown scenario {s}")))
    }
}

/// Outcome of one acceptance criterion inside a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn new(criterion: u32, name: &str, pass: bool, detail: impl Into<String>) -> Self {
        CriterionResult { criterion, name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub config_sha256: String,
    pub seed: u64,
    /// The config with defaults filled in.
    pub config: Value,
    pub results: Value,
    pub fitted: Value,
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

/// Report plus named CSV tables.
#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub report: Report,
    pub tables: Vec<(String, String)>,
}

/// Git-style content hash: SHA-256 of `"blob <len>\0" + content`.
pub fn config_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn parse_config<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let mut v: Value = serde_json::from_str(text)?;
    // the scenario name may be repeated in the file
    if let Value::Object(map) = &mut v {
        map.remove("scenario");
    }
    Ok(serde_json::from_value(v)?)
}

pub(crate) fn csv_table<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn assemble(
    scenario: Scenario,
    config_text: &str,
    seed: u64,
    config: Value,
    results: Value,
    fitted: Value,
    criteria: Vec<CriterionResult>,
    tables: Vec<(String, String)>,
) -> ScenarioOutput {
    let pass = criteria.iter().all(|c| c.pass);
    ScenarioOutput {
        report: Report {
            schema_version: SCHEMA_VERSION,
            scenario,
            config_sha256: config_hash(config_text.as_bytes()),
            seed,
            config,
            results,
            fitted,
            criteria,
            pass,
        },
        tables,
    }
}

/// Run `scenario` on the JSON text of its config.
pub fn run_scenario(scenario: Scenario, config_text: &str, seed: u64) -> Result<ScenarioOutput> {
    match scenario {
        Scenario::EntropySweep => run_entropy_sweep(&parse_config(config_text)?, config_text, seed),
        Scenario::RhoCauchy => run_rho_cauchy(&parse_config(config_text)?, config_text, seed),
        Scenario::Lemma1Check => run_lemma1_check(&parse_config(config_text)?, config_text, seed),
        Scenario::McVsEd => run_mc_vs_ed(&parse_config(config_text)?, config_text, seed),
        Scenario::KpScan => run_kp_scan(&parse_config(config_text)?, config_text, seed),
    }
}

/// Write `report.json` and the CSV tables into `dir`.
pub fn write_outputs(out: &ScenarioOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(&out.report)?;
    json.push('\n');
    std::fs::write(dir.join("report.json"), json)?;
    for (name, body) in &out.tables {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob() {
        // what `git hash-object` prints in a sha256 repository
        assert_eq!(
            config_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("nope".parse::<Scenario>().is_err());
    }
}
