#![allow(dead_code)]

use ccsim::adversary::{Strategy, TableEntry};
use ccsim::layers::LayerName;
use ccsim::model::{Payload, ProcessStatus, Value};
use ccsim::{run, RunTrace, Scenario};

pub fn scenario(n: usize, t: usize, layer: LayerName, base: &str, values: &[u32]) -> Scenario {
    Scenario::new(n, t, layer, base, values.to_vec())
}

pub fn run_ok(s: &Scenario) -> RunTrace {
    run(s).unwrap_or_else(|e| panic!("run failed for {:?}: {e}", s.name))
}

pub fn entry(round: u32, sender: usize, receiver: usize, payload: &str) -> TableEntry {
    TableEntry {
        round,
        sender: Some(sender),
        receiver,
        payload: payload.parse::<Payload>().unwrap(),
    }
}

pub fn table(entries: Vec<TableEntry>) -> Strategy {
    Strategy::Table { entries }
}

/// Envelopes as `(round, sender, receiver, kind, value, bits)`.
pub fn tuples(trace: &RunTrace) -> Vec<(u32, usize, usize, String, String, u32)> {
    trace
        .rounds
        .iter()
        .flat_map(|r| r.envelopes.iter())
        .map(|e| {
            (
                e.round,
                e.sender.index(),
                e.receiver.index(),
                e.payload.kind().to_string(),
                e.payload.value_text(),
                e.bits,
            )
        })
        .collect()
}

pub fn round_envelope_count(trace: &RunTrace, round: u32) -> usize {
    trace.round(round).map_or(0, |r| r.envelopes.len())
}

pub fn correct_decisions(trace: &RunTrace) -> Vec<Option<u32>> {
    trace
        .correct_processes()
        .map(|p| trace.decisions[p.index()].map(|v| v.0))
        .collect()
}

pub fn all_decided(trace: &RunTrace, v: u32, at: u32) -> bool {
    trace.correct_processes().all(|p| {
        trace.decisions[p.index()] == Some(Value(v)) && trace.decision_time[p.index()] == Some(at)
    })
}

pub fn all_halted(trace: &RunTrace) -> bool {
    trace
        .correct_processes()
        .all(|p| matches!(trace.final_statuses()[p.index()], Some(ProcessStatus::Halted(_))))
}

/// Every binary vector of length `n`, in lexicographic order.
pub fn binary_vectors(n: usize) -> impl Iterator<Item = Vec<u32>> {
    (0u32..1 << n).map(move |m| (0..n).map(|i| (m >> (n - 1 - i)) & 1).collect())
}

/// Every vector over `0..d` of length `n`.
pub fn vectors(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..d).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn majority(values: &[u32]) -> u32 {
    let ones = values.iter().filter(|v| **v == 1).count();
    u32::from(2 * ones >= values.len())
}

/// Most frequent value, smallest on ties.
pub fn plurality(values: &[u32]) -> u32 {
    let max = *values.iter().max().unwrap();
    let count = |x: u32| values.iter().filter(|v| **v == x).count();
    (0..=max).max_by_key(|x| (count(*x), std::cmp::Reverse(*x))).unwrap()
}
