//! Seeded adversarial fuzzing from a scenario template.
//!
//! Run `k` draws fresh inputs, a faulty set of size `0..=t` and a random
//! adversary (keeping the template's format constraint and rushing flag)
//! from a stream of the master seed, so campaigns are reproducible and
//! runs are independent of scheduling.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adversary::{AdversaryConfig, Strategy};
use crate::engine::run_lenient;
use crate::scenario::{Scenario, MAX_SEED};
use crate::trace::RunOutcome;
use crate::verification::Verdict;

use super::checks::{evaluate_checks, Check};
use super::{load_scenario, write_file, HarnessError};

/// At most this many counterexample files are written per campaign.
pub const MAX_COUNTEREXAMPLES: usize = 100;

#[derive(Debug, Clone)]
pub struct FuzzOptions {
    pub seed: u64,
    pub count: u64,
    /// Directory for counterexample scenario files; none are written when `None`.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct FuzzReport {
    pub seed: u64,
    pub runs: u64,
    /// Failed verdicts per property family.
    pub violations: BTreeMap<String, u64>,
    pub non_terminating: u64,
    /// Scenario and first failed verdict of each failing run, in run order.
    pub counterexamples: Vec<(u64, Scenario, Verdict)>,
    pub written: Vec<PathBuf>,
}

impl FuzzReport {
    pub fn total_violations(&self) -> u64 {
        self.violations.values().sum()
    }

    pub fn success(&self) -> bool {
        self.total_violations() == 0 && self.non_terminating == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "fuzz: {} runs, seed {}", self.runs, self.seed).unwrap();
        for family in ["consensus", "scr", "budget"] {
            let n = self.violations.get(family).copied().unwrap_or(0);
            writeln!(out, "{family} violations: {n}").unwrap();
        }
        writeln!(out, "non-terminating runs: {}", self.non_terminating).unwrap();
        for (k, _, v) in self.counterexamples.iter().take(5) {
            writeln!(out, "  run {k}: {v}").unwrap();
        }
        writeln!(out, "counterexamples written: {}", self.written.len()).unwrap();
        for p in &self.written {
            writeln!(out, "  {}", p.display()).unwrap();
        }
        out
    }
}

fn family_of(property: &str) -> &'static str {
    if property.starts_with("scr") {
        "scr"
    } else if property.starts_with("budget") {
        "budget"
    } else {
        "consensus"
    }
}

/// The `k`-th fuzz scenario derived from `template`.
pub fn fuzz_scenario(template: &Scenario, seed: u64, k: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let mut s = template.clone();
    s.values = (0..s.n).map(|_| rng.gen_range(0..s.domain)).collect();
    let f = rng.gen_range(0..=s.t);
    let mut faulty = sample(&mut rng, s.n, f).into_vec();
    faulty.sort_unstable();
    s.faulty = faulty;
    s.adversary = AdversaryConfig {
        strategy: Strategy::Random,
        format_constrained: template.adversary.format_constrained,
        seed: rng.gen_range(0..=MAX_SEED),
    };
    s.name = Some(format!(
        "{}-fuzz-{seed}-{k}",
        template.name.as_deref().unwrap_or("scenario")
    ));
    s
}

pub fn cmd_fuzz(path: &Path, options: &FuzzOptions) -> Result<FuzzReport, HarnessError> {
    let template = load_scenario(path)?;
    fuzz_template(&template, options)
}

pub fn fuzz_template(template: &Scenario, options: &FuzzOptions) -> Result<FuzzReport, HarnessError> {
    let results: Vec<(Scenario, Vec<Verdict>, bool)> = (0..options.count)
        .into_par_iter()
        .map(|k| {
            let s = fuzz_scenario(template, options.seed, k);
            let trace = run_lenient(&s)?;
            let verdicts = evaluate_checks(&trace, &Check::ALL);
            Ok((s, verdicts, trace.outcome != RunOutcome::Complete))
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut report = FuzzReport {
        seed: options.seed,
        runs: options.count,
        ..FuzzReport::default()
    };
    for (k, (scenario, verdicts, stuck)) in results.into_iter().enumerate() {
        if stuck {
            report.non_terminating += 1;
        }
        let failed: Vec<&Verdict> = verdicts.iter().filter(|v| v.failed()).collect();
        for v in &failed {
            *report
                .violations
                .entry(family_of(&v.property).to_string())
                .or_default() += 1;
        }
        if let Some(first) = failed.first() {
            report
                .counterexamples
                .push((k as u64, scenario, (*first).clone()));
        }
    }
    if let Some(dir) = &options.out_dir {
        for (k, s, _) in report.counterexamples.iter().take(MAX_COUNTEREXAMPLES) {
            let file = dir.join(format!("counterexample-{}-{k}.toml", options.seed));
            write_file(&file, &s.to_toml_string())?;
            report.written.push(file);
        }
    }
    Ok(report)
}
