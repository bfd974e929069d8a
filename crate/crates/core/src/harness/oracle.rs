//! Exhaustive oracle over a family of runs.
//!
//! ```toml
//! format = "ccsim-oracle/1"
//! faulty_sets = [[3]]
//!
//! [scenario]
//! n = 4
//! t = 1
//! values = [0, 0, 0, 0]
//! layer = "l1"
//! base = "scripted:echo"
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use serde::Deserialize;

use crate::adversary::DEFAULT_SPACE_CAP;
use crate::layers::{maj, plur};
use crate::model::{Round, Value};
use crate::scenario::Scenario;
use crate::trace::RunTrace;
use crate::verification::enumerate::{enumerate_runs, family_size, Family};
use crate::verification::{EnumerationError, Verdict};

use super::checks::{evaluate_checks, Check};
use super::{parse_config, read_file, HarnessError};

pub const ORACLE_FORMAT: &str = "ccsim-oracle/1";

/// An extra expectation on failure-free decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    /// Every correct process decides the majority of the inputs.
    Maj,
    /// Every correct process decides the plurality of the inputs.
    Plur,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub format: String,
    pub faulty_sets: Vec<Vec<usize>>,
    #[serde(default)]
    pub horizon: Option<Round>,
    #[serde(default)]
    pub cap: Option<u64>,
    #[serde(default)]
    pub expect: Option<Expectation>,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Default)]
pub struct PropertyTally {
    pub pass: u64,
    pub fail: u64,
    pub inconclusive: u64,
    pub first_failure: Option<Verdict>,
}

#[derive(Debug, Clone)]
pub enum OracleReport {
    Refused { size: u128, cap: u128 },
    Done {
        runs: usize,
        tallies: BTreeMap<String, PropertyTally>,
    },
}

impl OracleReport {
    pub fn success(&self) -> bool {
        match self {
            OracleReport::Refused { .. } => false,
            OracleReport::Done { tallies, .. } => tallies.values().all(|t| t.fail == 0),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        match self {
            OracleReport::Refused { size, cap } => {
                writeln!(out, "refused: family holds {size} runs, above the cap of {cap}").unwrap();
            }
            OracleReport::Done { runs, tallies } => {
                writeln!(out, "oracle: {runs} runs").unwrap();
                for (property, t) in tallies {
                    let status = if t.fail == 0 { "PASS" } else { "FAIL" };
                    writeln!(
                        out,
                        "{status:<5} {property}: {} pass, {} fail, {} inconclusive",
                        t.pass, t.fail, t.inconclusive
                    )
                    .unwrap();
                    if let Some(v) = &t.first_failure {
                        writeln!(out, "      first failure: {v}").unwrap();
                    }
                }
            }
        }
        out
    }
}

fn expectation_verdict(trace: &RunTrace, expect: Expectation) -> Verdict {
    let property = match expect {
        Expectation::Maj => "decision-is-maj",
        Expectation::Plur => "decision-is-plur",
    };
    if !trace.scenario.faulty.is_empty() {
        return Verdict::inconclusive(property, "faults present");
    }
    let inputs: Vec<Value> = trace.scenario.values.iter().map(|v| Value(*v)).collect();
    let want = match expect {
        Expectation::Maj => maj(&inputs),
        Expectation::Plur => plur(&inputs),
    };
    match trace
        .correct_processes()
        .find(|p| trace.decisions[p.index()] != Some(want))
    {
        Some(p) => Verdict::fail(
            property,
            trace,
            crate::verification::Locus::process(p),
            format!("{p} decided {:?}, expected {want}", trace.decisions[p.index()]),
        ),
        None => Verdict::pass(property),
    }
}

/// Tallies verdicts by property name.
pub fn tally(verdicts: impl IntoIterator<Item = Verdict>) -> BTreeMap<String, PropertyTally> {
    let mut tallies: BTreeMap<String, PropertyTally> = BTreeMap::new();
    for v in verdicts {
        let t = tallies.entry(v.property.clone()).or_default();
        match v.outcome {
            crate::verification::Outcome::Pass => t.pass += 1,
            crate::verification::Outcome::Inconclusive => t.inconclusive += 1,
            crate::verification::Outcome::Fail => {
                t.fail += 1;
                if t.first_failure.is_none() {
                    t.first_failure = Some(v);
                }
            }
        }
    }
    tallies
}

pub fn cmd_oracle(path: &Path) -> Result<OracleReport, HarnessError> {
    let text = read_file(path)?;
    let mut config: OracleConfig = parse_config(path, &text)?;
    if config.format != ORACLE_FORMAT {
        return Err(HarnessError::Config {
            path: path.to_path_buf(),
            field: "format".to_string(),
            message: format!("expected `{ORACLE_FORMAT}`, got `{}`", config.format),
        });
    }
    config.scenario.faulty.clear();
    run_oracle(&config)
}

pub fn run_oracle(config: &OracleConfig) -> Result<OracleReport, HarnessError> {
    let cap = config.cap.map_or(DEFAULT_SPACE_CAP, u128::from);
    let mut family = Family::new(config.scenario.clone(), config.faulty_sets.clone());
    family.horizon = config.horizon;
    let size = family_size(&family)?;
    let runs = match enumerate_runs(&family, cap) {
        Ok(runs) => runs,
        Err(EnumerationError::TooLarge { size, cap }) => {
            return Ok(OracleReport::Refused { size, cap })
        }
        Err(e) => return Err(e.into()),
    };
    debug_assert_eq!(size, runs.len() as u128);
    let verdicts = runs.iter().flat_map(|trace| {
        let mut v = evaluate_checks(trace, &Check::ALL);
        if let Some(expect) = config.expect {
            v.push(expectation_verdict(trace, expect));
        }
        v
    });
    Ok(OracleReport::Done {
        runs: runs.len(),
        tallies: tally(verdicts),
    })
}
