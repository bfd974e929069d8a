use std::fmt;
use std::str::FromStr;

use crate::trace::RunTrace;
use crate::verification::{
    check_all_silent_broadcasts, check_budget, check_consensus, BudgetError, Case, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Consensus,
    Scr,
    Budget,
}

impl Check {
    pub const ALL: [Check; 3] = [Check::Consensus, Check::Scr, Check::Budget];

    /// Parses a comma-separated list such as `consensus,scr`.
    pub fn parse_list(s: &str) -> Result<Vec<Check>, String> {
        let mut out: Vec<Check> = s
            .split(',')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Consensus => "consensus",
            Check::Scr => "scr",
            Check::Budget => "budget",
        })
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Check::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| format!("unknown check `{s}` (expected consensus, scr or budget)"))
    }
}

/// Runs the selected checkers. A budget that does not apply to the trace
/// is reported as inconclusive rather than failed.
pub fn evaluate_checks(trace: &RunTrace, checks: &[Check]) -> Vec<Verdict> {
    let mut out = Vec::new();
    for check in checks {
        match check {
            Check::Consensus => out.extend(check_consensus(trace)),
            Check::Scr => out.extend(check_all_silent_broadcasts(trace)),
            Check::Budget => out.push(match check_budget(trace, Case::of(trace)) {
                Ok(v) => v,
                Err(e @ (BudgetError::Unconstrained | BudgetError::NoBudget(_))) => {
                    Verdict::inconclusive("budget", format!("skipped: {e}"))
                }
                Err(e) => Verdict::inconclusive("budget", e.to_string()),
            }),
        }
    }
    out
}
