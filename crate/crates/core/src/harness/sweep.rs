//! Budget sweeps over a grid of `(n, t, layer, case)` cells.
//!
//! ```toml
//! format = "ccsim-sweep/1"
//! [[cell]]
//! n = [4, 7, 10, 13]
//! layer = "l3"
//! case = "common"
//! ```
//!
//! `t` defaults to `floor((n-1)/3)`. Common cells run every input vector
//! when there are at most `max_vectors` of them and a seeded sample
//! otherwise; L1 common cells run the all-1 vector only. Uncommon cells run
//! the non-unanimous vectors failure-free for L1, and an exhaustive (or,
//! above the cap, seeded random) adversary against the last process for
//! the committee layers.

use std::fmt::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::adversary::{AdversaryConfig, Strategy, DEFAULT_SPACE_CAP};
use crate::engine::run_lenient;
use crate::layers::LayerName;
use crate::model::SystemParams;
use crate::scenario::{Scenario, MAX_SEED};
use crate::trace::RunTrace;
use crate::verification::budget::format_twice;
use crate::verification::enumerate::{family_scenarios, Family};
use crate::verification::{budget_bound_twice, check_budget, Case};

use super::{parse_config, read_file, HarnessError};

pub const SWEEP_FORMAT: &str = "ccsim-sweep/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    fn values(&self) -> Vec<usize> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn default_base() -> String {
    "scripted:echo".to_string()
}

fn default_domain() -> u32 {
    2
}

fn default_max_vectors() -> u64 {
    1 << 14
}

fn default_samples() -> u64 {
    2048
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub n: OneOrMany,
    #[serde(default)]
    pub t: Option<usize>,
    pub layer: LayerName,
    pub case: Case,
    #[serde(default = "default_domain")]
    pub domain: u32,
    #[serde(default = "default_base")]
    pub base: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub format: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_vectors")]
    pub max_vectors: u64,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(rename = "cell")]
    pub cells: Vec<CellConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub n: usize,
    pub t: usize,
    pub domain: u32,
    pub layer: LayerName,
    pub case: Case,
    pub runs: usize,
    /// Latest decision time over every run, if every correct process decided.
    pub rounds: Option<u32>,
    pub layer_bits_max: u64,
    pub bound_twice: u64,
    /// Runs whose budget verdict failed.
    pub failures: usize,
}

impl SweepRow {
    pub fn margin_twice(&self) -> i128 {
        self.bound_twice as i128 - 2 * self.layer_bits_max as i128
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn cells(&self) -> [String; 11] {
        let margin = self.margin_twice();
        let margin = if margin < 0 {
            format!("-{}", format_twice(margin.unsigned_abs() as u64))
        } else {
            format_twice(margin as u64)
        };
        [
            self.n.to_string(),
            self.t.to_string(),
            self.domain.to_string(),
            self.layer.to_string(),
            self.case.to_string(),
            self.runs.to_string(),
            self.rounds.map_or_else(|| "-".to_string(), |r| r.to_string()),
            self.layer_bits_max.to_string(),
            format_twice(self.bound_twice),
            margin,
            if self.passed() { "pass" } else { "fail" }.to_string(),
        ]
    }
}

const COLUMNS: [&str; 11] = [
    "n", "t", "domain", "layer", "case", "runs", "rounds", "layer_bits_max", "bound", "margin",
    "pass",
];

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn success(&self) -> bool {
        self.rows.iter().all(SweepRow::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = COLUMNS.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.cells().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<[String; 11]> = self.rows.iter().map(SweepRow::cells).collect();
        let widths: Vec<usize> = (0..COLUMNS.len())
            .map(|c| {
                rows.iter()
                    .map(|r| r[c].len())
                    .chain([COLUMNS[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |cells: Vec<&str>, out: &mut String| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            writeln!(out, "{}", padded.join("  ").trim_end()).unwrap();
        };
        line(COLUMNS.to_vec(), &mut out);
        for r in &rows {
            line(r.iter().map(String::as_str).collect(), &mut out);
        }
        out
    }
}

pub fn parse_sweep(path: &Path, text: &str) -> Result<SweepConfig, HarnessError> {
    let config: SweepConfig = parse_config(path, text)?;
    if config.format != SWEEP_FORMAT {
        return Err(HarnessError::Config {
            path: path.to_path_buf(),
            field: "format".to_string(),
            message: format!("expected `{SWEEP_FORMAT}`, got `{}`", config.format),
        });
    }
    Ok(config)
}

pub fn cmd_sweep(path: &Path) -> Result<SweepReport, HarnessError> {
    let config = parse_sweep(path, &read_file(path)?)?;
    run_sweep(path, &config)
}

pub fn run_sweep(path: &Path, config: &SweepConfig) -> Result<SweepReport, HarnessError> {
    let mut rows = Vec::new();
    for (c, cell) in config.cells.iter().enumerate() {
        for n in cell.n.values() {
            let t = cell.t.unwrap_or(n.saturating_sub(1) / 3);
            let bad = |field: &str, message: String| HarnessError::Config {
                path: path.to_path_buf(),
                field: format!("cell[{c}].{field}"),
                message,
            };
            let params =
                SystemParams::new(n, t, cell.domain).map_err(|e| bad("n", e.to_string()))?;
            let bound_twice = budget_bound_twice(cell.layer, &params, cell.case)
                .map_err(|e| bad("layer", e.to_string()))?;
            let cell_seed = config.seed ^ ((c as u64) << 40) ^ ((n as u64) << 20);
            let scenarios = cell_scenarios(config, cell, n, t, cell_seed)
                .map_err(|m| bad("case", m))?;
            let traces: Vec<RunTrace> = scenarios
                .par_iter()
                .map(run_lenient)
                .collect::<Result<_, _>>()?;
            let mut failures = 0;
            for trace in &traces {
                match check_budget(trace, cell.case) {
                    Ok(v) if v.passed() => {}
                    Ok(_) => failures += 1,
                    Err(e) => return Err(bad("case", e.to_string())),
                }
            }
            let rounds = traces
                .iter()
                .map(RunTrace::max_decision_time)
                .collect::<Option<Vec<_>>>()
                .and_then(|v| v.into_iter().max());
            rows.push(SweepRow {
                n,
                t,
                domain: cell.domain,
                layer: cell.layer,
                case: cell.case,
                runs: traces.len(),
                rounds,
                layer_bits_max: traces.iter().map(|t| t.layer_bits_total).max().unwrap_or(0),
                bound_twice,
                failures,
            });
        }
    }
    Ok(SweepReport { rows })
}

fn vectors(domain: u32, n: usize, max: u64, samples: u64, seed: u64) -> Vec<Vec<u32>> {
    let total = u64::from(domain).checked_pow(n as u32);
    match total {
        Some(total) if total <= max => (0..total)
            .map(|mut k| {
                let mut v = vec![0; n];
                for slot in v.iter_mut().rev() {
                    *slot = (k % u64::from(domain)) as u32;
                    k /= u64::from(domain);
                }
                v
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| (0..n).map(|_| rng.gen_range(0..domain)).collect())
                .collect()
        }
    }
}

fn cell_scenarios(
    config: &SweepConfig,
    cell: &CellConfig,
    n: usize,
    t: usize,
    seed: u64,
) -> Result<Vec<Scenario>, String> {
    let base = |values: Vec<u32>| {
        Scenario::new(n, t, cell.layer, &cell.base, values).with_domain(cell.domain)
    };
    let all = || vectors(cell.domain, n, config.max_vectors, config.samples, seed);
    Ok(match (cell.case, cell.layer) {
        (Case::Common, LayerName::L1) => vec![base(vec![1; n])],
        (Case::Common, _) => all().into_iter().map(base).collect(),
        (Case::Uncommon, LayerName::L1) => all()
            .into_iter()
            .filter(|v| v.iter().any(|x| *x != 1))
            .map(base)
            .collect(),
        (Case::Uncommon, _) => {
            let family = Family::new(base(vec![0; n]), vec![vec![n - 1]]);
            match family_scenarios(&family, DEFAULT_SPACE_CAP) {
                Ok(s) => s,
                Err(_) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..config.samples)
                        .map(|_| {
                            let values = (0..n).map(|_| rng.gen_range(0..cell.domain)).collect();
                            base(values).with_faulty(
                                vec![n - 1],
                                AdversaryConfig::new(Strategy::Random).with_seed(rng.gen_range(0..=MAX_SEED)),
                            )
                        })
                        .collect()
                }
            }
        }
    })
}
