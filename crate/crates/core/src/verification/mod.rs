//! Property checkers over run traces, the exhaustive small-instance oracle
//! and a restricted knowledge evaluator.

pub mod budget;
pub mod consensus;
pub mod enumerate;
pub mod knowledge;
pub mod silent;

use std::fmt;

use serde::Serialize;

use crate::model::{ProcessId, Round};
use crate::scenario::Scenario;
use crate::trace::RunTrace;

pub use budget::{budget_bound_twice, check_budget, BudgetError, Case};
pub use consensus::check_consensus;
pub use enumerate::{enumerate_runs, family_scenarios, EnumerationError, Family};
pub use knowledge::{knows, KnowledgeError};
pub use silent::{check_silent_broadcast, LocalFact, SilentBroadcastSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Where a property failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Locus {
    pub process: Option<ProcessId>,
    pub round: Option<Round>,
}

impl Locus {
    pub fn at(process: ProcessId, round: Round) -> Self {
        Self {
            process: Some(process),
            round: Some(round),
        }
    }

    pub fn process(process: ProcessId) -> Self {
        Self {
            process: Some(process),
            round: None,
        }
    }

    pub fn run() -> Self {
        Self {
            process: None,
            round: None,
        }
    }
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.process, self.round) {
            (Some(p), Some(r)) => write!(f, "{p} in round {r}"),
            (Some(p), None) => write!(f, "{p}"),
            (None, Some(r)) => write!(f, "round {r}"),
            (None, None) => f.write_str("run"),
        }
    }
}

/// Result of one property check. Failures carry the scenario that replays them.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub property: String,
    pub outcome: Outcome,
    pub detail: String,
    pub locus: Option<Locus>,
    pub replay: Option<Box<Scenario>>,
}

impl Verdict {
    pub fn pass(property: impl Into<String>) -> Self {
        Self {
            property: property.into(),
            outcome: Outcome::Pass,
            detail: String::new(),
            locus: None,
            replay: None,
        }
    }

    pub fn fail(
        property: impl Into<String>,
        trace: &RunTrace,
        locus: Locus,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            property: property.into(),
            outcome: Outcome::Fail,
            detail: detail.into(),
            locus: Some(locus),
            replay: Some(Box::new(trace.scenario.clone())),
        }
    }

    pub fn inconclusive(property: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            property: property.into(),
            outcome: Outcome::Inconclusive,
            detail: detail.into(),
            locus: None,
            replay: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<5} {}", self.outcome.to_string(), self.property)?;
        if let Some(locus) = &self.locus {
            write!(f, " at {locus}")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

/// Every silent-broadcast verdict registered in `trace`.
pub fn check_all_silent_broadcasts(trace: &RunTrace) -> Vec<Verdict> {
    (0..trace.silent_broadcasts.len())
        .flat_map(|i| check_silent_broadcast(trace, i))
        .collect()
}
