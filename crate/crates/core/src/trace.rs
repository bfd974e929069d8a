//! Run traces and their line-delimited JSON form.
//!
//! Line 1 is a header naming the format and version and embedding the
//! scenario. Each following line records one round: its envelopes as
//! `[round, sender, receiver, kind, value, bits]`, the status transitions of
//! correct processes and the silent-broadcast facts evaluated before the
//! round. The last line is a summary.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Envelope, Payload, ProcessId, ProcessStatus, Round, SystemParams, Time, Value};
use crate::scenario::Scenario;
use crate::verification::silent::SilentBroadcastSpec;

pub const TRACE_FORMAT: &str = "ccsim-trace";
pub const TRACE_VERSION: u32 = 1;

/// Values of one registered fact at the time before its round, indexed by
/// process; `None` for faulty processes and non-senders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactRecord {
    pub spec: usize,
    pub values: Vec<Option<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: Round,
    /// Every envelope sent in the round, ordered by sender then receiver.
    pub envelopes: Vec<Envelope>,
    /// Status of each correct process after the round.
    pub statuses: Vec<Option<ProcessStatus>>,
    pub facts: Vec<FactRecord>,
}

impl RoundRecord {
    /// What `p` received in this round.
    pub fn inbox(&self, p: ProcessId) -> impl Iterator<Item = &Envelope> {
        self.envelopes.iter().filter(move |e| e.receiver == p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunOutcome {
    /// Every correct process halted.
    Complete,
    /// The round cap was reached first.
    RoundCap,
    /// The record ends early (no summary line).
    Incomplete,
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunOutcome::Complete => "complete",
            RunOutcome::RoundCap => "round cap reached",
            RunOutcome::Incomplete => "incomplete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub scenario: Scenario,
    pub silent_broadcasts: Vec<SilentBroadcastSpec>,
    pub handoff_time: Time,
    pub common_decision_time: Time,
    pub round_cap: Round,
    /// Status of each correct process at time 0.
    pub initial: Vec<Option<ProcessStatus>>,
    pub rounds: Vec<RoundRecord>,
    pub decisions: Vec<Option<Value>>,
    pub decision_time: Vec<Option<Time>>,
    /// Time and estimate with which each process entered the base.
    pub base_entry: Vec<Option<(Time, Value)>>,
    pub bits_correct: u64,
    pub bits_total: u64,
    pub layer_bits_correct: u64,
    pub layer_bits_total: u64,
    pub outcome: RunOutcome,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("empty trace")]
    Empty,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    format: String,
    version: u32,
    scenario: Scenario,
    silent_broadcasts: Vec<SilentBroadcastSpec>,
    handoff_time: Time,
    common_decision_time: Time,
    round_cap: Round,
    initial: Vec<Option<String>>,
}

type EnvelopeRow = (Round, usize, usize, String, String, u32);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoundLine {
    round: Round,
    envelopes: Vec<EnvelopeRow>,
    transitions: Vec<(usize, String)>,
    facts: Vec<(usize, Vec<Option<bool>>)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Summary {
    outcome: RunOutcome,
    decisions: Vec<Option<u32>>,
    decision_time: Vec<Option<Time>>,
    base_entry: Vec<Option<(Time, u32)>>,
    bits_correct: u64,
    bits_total: u64,
    layer_bits_correct: u64,
    layer_bits_total: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SummaryLine {
    summary: Summary,
}

impl RunTrace {
    pub fn params(&self) -> SystemParams {
        SystemParams::new(self.scenario.n, self.scenario.t, self.scenario.domain)
            .expect("trace scenarios are validated")
    }

    pub fn n(&self) -> usize {
        self.scenario.n
    }

    pub fn is_correct(&self, p: ProcessId) -> bool {
        p.index() < self.n() && !self.scenario.faulty.contains(&p.index())
    }

    pub fn correct_processes(&self) -> impl Iterator<Item = ProcessId> + '_ {
        (0..self.n()).map(ProcessId).filter(|p| self.is_correct(*p))
    }

    pub fn initial_value(&self, p: ProcessId) -> Value {
        Value(self.scenario.values[p.index()])
    }

    /// Status of every correct process at the end of the run.
    pub fn final_statuses(&self) -> &[Option<ProcessStatus>] {
        self.rounds
            .last()
            .map(|r| r.statuses.as_slice())
            .unwrap_or(&self.initial)
    }

    /// Latest decision time over correct processes.
    pub fn max_decision_time(&self) -> Option<Time> {
        self.correct_processes()
            .map(|p| self.decision_time[p.index()])
            .collect::<Option<Vec<_>>>()
            .and_then(|ts| ts.into_iter().max())
    }

    /// Whether any correct process ran the base.
    pub fn base_used(&self) -> bool {
        self.correct_processes()
            .any(|p| self.base_entry[p.index()].is_some())
    }

    pub fn round(&self, round: Round) -> Option<&RoundRecord> {
        self.rounds.iter().find(|r| r.round == round)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let header = HeaderLine {
            format: TRACE_FORMAT.to_string(),
            version: TRACE_VERSION,
            scenario: self.scenario.clone(),
            silent_broadcasts: self.silent_broadcasts.clone(),
            handoff_time: self.handoff_time,
            common_decision_time: self.common_decision_time,
            round_cap: self.round_cap,
            initial: self.initial.iter().map(|s| s.map(|s| s.to_string())).collect(),
        };
        push_line(&mut out, &header);
        let mut prev = self.initial.clone();
        for r in &self.rounds {
            let transitions = r
                .statuses
                .iter()
                .enumerate()
                .filter(|(i, s)| prev[*i] != **s)
                .filter_map(|(i, s)| s.map(|s| (i, s.to_string())))
                .collect();
            let line = RoundLine {
                round: r.round,
                envelopes: r
                    .envelopes
                    .iter()
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
                    .collect(),
                transitions,
                facts: r.facts.iter().map(|f| (f.spec, f.values.clone())).collect(),
            };
            push_line(&mut out, &line);
            prev.clone_from(&r.statuses);
        }
        if self.outcome != RunOutcome::Incomplete {
            let summary = Summary {
                outcome: self.outcome,
                decisions: self.decisions.iter().map(|d| d.map(|v| v.0)).collect(),
                decision_time: self.decision_time.clone(),
                base_entry: self.base_entry.iter().map(|b| b.map(|(t, v)| (t, v.0))).collect(),
                bits_correct: self.bits_correct,
                bits_total: self.bits_total,
                layer_bits_correct: self.layer_bits_correct,
                layer_bits_total: self.layer_bits_total,
            };
            push_line(&mut out, &SummaryLine { summary });
        }
        out
    }

    pub fn parse(text: &str) -> Result<RunTrace, TraceError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(TraceError::Empty)?;
        let header: HeaderLine = from_line(1, first)?;
        if header.format != TRACE_FORMAT || header.version != TRACE_VERSION {
            return Err(TraceError::Malformed {
                line: 1,
                message: format!(
                    "expected {TRACE_FORMAT} version {TRACE_VERSION}, got {} version {}",
                    header.format, header.version
                ),
            });
        }
        let n = header.scenario.n;
        let initial = header
            .initial
            .iter()
            .map(|s| s.as_deref().map(|s| parse_status(1, s)).transpose())
            .collect::<Result<Vec<_>, _>>()?;
        if initial.len() != n {
            return Err(malformed(1, "initial statuses do not match n"));
        }

        let mut rounds = Vec::new();
        let mut summary = None;
        let mut prev = initial.clone();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if summary.is_some() {
                return Err(malformed(lineno, "content after the summary line"));
            }
            if line.trim_start().starts_with("{\"summary\"") {
                let s: SummaryLine = from_line(lineno, line)?;
                summary = Some(s.summary);
                continue;
            }
            let r: RoundLine = from_line(lineno, line)?;
            let mut envelopes = Vec::with_capacity(r.envelopes.len());
            for (round, s, rcv, kind, value, bits) in r.envelopes {
                if s >= n || rcv >= n {
                    return Err(malformed(lineno, "envelope endpoint outside [0, n)"));
                }
                let payload = Payload::from_parts(&kind, &value)
                    .map_err(|e| malformed(lineno, e.to_string()))?;
                envelopes.push(Envelope {
                    round,
                    sender: ProcessId(s),
                    receiver: ProcessId(rcv),
                    payload,
                    bits,
                });
            }
            let mut statuses = prev.clone();
            for (i, s) in r.transitions {
                if i >= n {
                    return Err(malformed(lineno, "status transition outside [0, n)"));
                }
                statuses[i] = Some(parse_status(lineno, &s)?);
            }
            prev.clone_from(&statuses);
            rounds.push(RoundRecord {
                round: r.round,
                envelopes,
                statuses,
                facts: r
                    .facts
                    .into_iter()
                    .map(|(spec, values)| FactRecord { spec, values })
                    .collect(),
            });
        }

        let mut trace = RunTrace {
            scenario: header.scenario,
            silent_broadcasts: header.silent_broadcasts,
            handoff_time: header.handoff_time,
            common_decision_time: header.common_decision_time,
            round_cap: header.round_cap,
            initial,
            rounds,
            decisions: vec![None; n],
            decision_time: vec![None; n],
            base_entry: vec![None; n],
            bits_correct: 0,
            bits_total: 0,
            layer_bits_correct: 0,
            layer_bits_total: 0,
            outcome: RunOutcome::Incomplete,
        };
        match summary {
            Some(s) => {
                let lens = [s.decisions.len(), s.decision_time.len(), s.base_entry.len()];
                if lens.iter().any(|l| *l != n) {
                    return Err(malformed(0, "summary vectors do not match n"));
                }
                trace.outcome = s.outcome;
                trace.decisions = s.decisions.into_iter().map(|d| d.map(Value)).collect();
                trace.decision_time = s.decision_time;
                trace.base_entry = s
                    .base_entry
                    .into_iter()
                    .map(|b| b.map(|(t, v)| (t, Value(v))))
                    .collect();
                trace.bits_correct = s.bits_correct;
                trace.bits_total = s.bits_total;
                trace.layer_bits_correct = s.layer_bits_correct;
                trace.layer_bits_total = s.layer_bits_total;
            }
            None => trace.reconstruct_summary(),
        }
        Ok(trace)
    }

    /// Rebuilds decisions, bit totals and handoffs from the round records.
    fn reconstruct_summary(&mut self) {
        let mut timeline = vec![(0, self.initial.clone())];
        timeline.extend(self.rounds.iter().map(|r| (r.round, r.statuses.clone())));
        for (time, statuses) in &timeline {
            for (i, status) in statuses.iter().enumerate() {
                match *status {
                    Some(s) if self.decisions[i].is_none() && s.decision().is_some() => {
                        self.decisions[i] = s.decision();
                        self.decision_time[i] = Some(*time);
                    }
                    Some(ProcessStatus::Handoff(est)) if self.base_entry[i].is_none() => {
                        self.base_entry[i] = Some((*time, est));
                    }
                    _ => {}
                }
            }
        }
        for r in &self.rounds {
            for e in &r.envelopes {
                let bits = u64::from(e.bits);
                let correct = self.is_correct(e.sender);
                let layer = r.round <= self.handoff_time;
                self.bits_total += bits;
                if correct {
                    self.bits_correct += bits;
                }
                if layer {
                    self.layer_bits_total += bits;
                    if correct {
                        self.layer_bits_correct += bits;
                    }
                }
            }
        }
    }
}

fn push_line<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("trace lines serialize"));
    out.push('\n');
}

fn from_line<T: for<'de> Deserialize<'de>>(line: usize, text: &str) -> Result<T, TraceError> {
    serde_json::from_str(text).map_err(|e| malformed(line, e.to_string()))
}

fn parse_status(line: usize, s: &str) -> Result<ProcessStatus, TraceError> {
    s.parse().map_err(|e: crate::model::ModelError| malformed(line, e.to_string()))
}

fn malformed(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Malformed {
        line,
        message: message.into(),
    }
}
