//! Decision, Agreement and Validity over one trace.

use crate::model::Value;
use crate::trace::{RunOutcome, RunTrace};

use super::{Locus, Verdict};

pub fn check_consensus(trace: &RunTrace) -> [Verdict; 3] {
    if trace.outcome == RunOutcome::Incomplete {
        return ["decision", "agreement", "validity"]
            .map(|p| Verdict::inconclusive(p, "trace is incomplete"));
    }
    let correct: Vec<_> = trace.correct_processes().collect();

    let decision = match correct.iter().find(|p| trace.decisions[p.index()].is_none()) {
        Some(&p) => Verdict::fail(
            "decision",
            trace,
            Locus::process(p),
            format!("{p} never decided ({})", trace.outcome),
        ),
        None => Verdict::pass("decision"),
    };

    let decided: Vec<_> = correct
        .iter()
        .filter_map(|p| trace.decisions[p.index()].map(|v| (*p, v)))
        .collect();
    let agreement = match decided.iter().find(|(_, v)| *v != decided[0].1) {
        Some((p, v)) => Verdict::fail(
            "agreement",
            trace,
            Locus::process(*p),
            format!("{p} decided {v} but {} decided {}", decided[0].0, decided[0].1),
        ),
        None => Verdict::pass("agreement"),
    };

    let inputs: Vec<Value> = correct.iter().map(|p| trace.initial_value(*p)).collect();
    let common = inputs
        .first()
        .copied()
        .filter(|v| inputs.iter().all(|u| u == v));
    let validity = match common {
        Some(v) => match decided.iter().find(|(_, d)| *d != v) {
            Some((p, d)) => Verdict::fail(
                "validity",
                trace,
                Locus::process(*p),
                format!("every correct process proposed {v} but {p} decided {d}"),
            ),
            None => Verdict::pass("validity"),
        },
        None => Verdict::pass("validity"),
    };

    [decision, agreement, validity]
}
