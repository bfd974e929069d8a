//! Knowledge relative to an enumerated run set: `i` knows `φ` at time `m`
//! in a run when `φ` holds in every enumerated run in which `i` is correct
//! and has the same local state at `m`.
//!
//! The enumerated set is a subset of all runs, so this over-approximates
//! knowledge. It is a diagnostic, never a safety check.

use thiserror::Error;

use crate::model::{Envelope, ProcessId, Time};
use crate::trace::RunTrace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnowledgeError {
    #[error("the trace is not a member of the run set")]
    NotInRunSet,
    #[error("{0} is faulty in the trace")]
    NotCorrect(ProcessId),
}

/// Local state of `i` at `time`: its input and every envelope it sent or
/// received in rounds up to `time`.
fn local_state(trace: &RunTrace, i: ProcessId, time: Time) -> (u32, Vec<&Envelope>) {
    let envelopes = trace
        .rounds
        .iter()
        .filter(|r| r.round <= time)
        .flat_map(|r| r.envelopes.iter())
        .filter(|e| e.sender == i || e.receiver == i)
        .collect();
    (trace.scenario.values[i.index()], envelopes)
}

pub fn knows(
    runs: &[RunTrace],
    trace: &RunTrace,
    i: ProcessId,
    time: Time,
    predicate: impl Fn(&RunTrace) -> bool,
) -> Result<bool, KnowledgeError> {
    if !trace.is_correct(i) {
        return Err(KnowledgeError::NotCorrect(i));
    }
    if !runs.iter().any(|r| r.scenario == trace.scenario) {
        return Err(KnowledgeError::NotInRunSet);
    }
    let mine = local_state(trace, i, time);
    Ok(runs
        .iter()
        .filter(|r| r.n() == trace.n() && r.is_correct(i))
        .filter(|r| local_state(r, i, time) == mine)
        .all(&predicate))
}
