//! Lockstep synchronous-round executor.
//!
//! Each round: evaluate registered silent-broadcast facts, collect the
//! correct processes' sends, let the adversary choose the faulty sends,
//! deliver everything, then advance every state machine. Faulty processes
//! keep an honest shadow that receives their real inbox.

use thiserror::Error;

use crate::adversary::{adversary_sends, AdversaryError, Observation};
use crate::model::{Envelope, ProcessId, ProcessStatus, Round, Time};
use crate::protocol::{ComposedProcess, Inbox, Protocol};
use crate::scenario::{Scenario, ScenarioError, Setup};
use crate::trace::{FactRecord, RoundRecord, RunOutcome, RunTrace};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("non-termination: correct processes still running after the round cap of {cap}")]
    NonTermination { cap: Round, trace: Box<RunTrace> },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl EngineError {
    /// The partial trace, for non-termination.
    pub fn trace(&self) -> Option<&RunTrace> {
        match self {
            EngineError::NonTermination { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

/// The global state of one run.
pub struct World {
    setup: Setup,
    procs: Vec<ComposedProcess>,
    time: Time,
    trace: RunTrace,
}

impl World {
    pub fn new(scenario: &Scenario) -> Result<Self, EngineError> {
        let setup = scenario.setup()?;
        let n = setup.params.n();
        let procs: Vec<ComposedProcess> = setup
            .params
            .processes()
            .map(|p| setup.composition.spawn(p, setup.initial[p.index()]))
            .collect();
        let correct = |p: &ComposedProcess| !setup.is_faulty(p.id());
        let initial: Vec<Option<ProcessStatus>> = procs
            .iter()
            .map(|p| correct(p).then(|| p.status()))
            .collect();
        let mut trace = RunTrace {
            scenario: scenario.clone(),
            silent_broadcasts: setup.silent_broadcasts.clone(),
            handoff_time: setup.composition.handoff_time(),
            common_decision_time: setup.composition.layer().common_decision_time(),
            round_cap: setup.round_cap,
            initial,
            rounds: Vec::new(),
            decisions: vec![None; n],
            decision_time: vec![None; n],
            base_entry: vec![None; n],
            bits_correct: 0,
            bits_total: 0,
            layer_bits_correct: 0,
            layer_bits_total: 0,
            outcome: RunOutcome::Incomplete,
        };
        for p in procs.iter().filter(|p| correct(p)) {
            note_progress(&mut trace, p, 0);
        }
        Ok(Self {
            setup,
            procs,
            time: 0,
            trace,
        })
    }

    pub fn time(&self) -> Time {
        self.time
    }

    pub fn setup(&self) -> &Setup {
        &self.setup
    }

    pub fn process(&self, p: ProcessId) -> &ComposedProcess {
        &self.procs[p.index()]
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    fn correct(&self) -> impl Iterator<Item = &ComposedProcess> {
        self.procs.iter().filter(|p| !self.setup.is_faulty(p.id()))
    }

    pub fn all_correct_halted(&self) -> bool {
        self.correct().all(|p| p.status().is_halted())
    }

    /// Executes round `time + 1`.
    pub fn step_round(&mut self) -> Result<(), EngineError> {
        let round = self.time + 1;
        let params = self.setup.params;
        let n = params.n();

        let facts: Vec<FactRecord> = self
            .setup
            .silent_broadcasts
            .iter()
            .enumerate()
            .filter(|(_, s)| s.round == round)
            .map(|(k, s)| FactRecord {
                spec: k,
                values: self
                    .procs
                    .iter()
                    .map(|p| {
                        let eligible = !self.setup.is_faulty(p.id()) && s.senders.contains(&p.id());
                        if eligible {
                            p.local_fact(&s.fact)
                        } else {
                            None
                        }
                    })
                    .collect(),
            })
            .collect();

        if let Some(p) = self.procs.iter().find(|p| p.time() != self.time) {
            return Err(EngineError::Internal(format!(
                "{} is at time {} but the world is at time {}",
                p.id(),
                p.time(),
                self.time
            )));
        }

        let mut envelopes = Vec::new();
        for p in self.correct() {
            for out in p.send(round) {
                if out.to.index() >= n {
                    return Err(EngineError::Internal(format!(
                        "{} addressed nonexistent {} in round {round}",
                        p.id(),
                        out.to
                    )));
                }
                let e = Envelope::new(round, p.id(), out.to, out.payload, &params).map_err(|e| {
                    EngineError::Internal(format!("{} sent a bad payload: {e}", p.id()))
                })?;
                envelopes.push(e);
            }
        }

        let correct_view = envelopes.clone();
        for &f in &self.setup.faulty {
            let honest = self.procs[f.index()].send(round);
            let obs = Observation {
                composition: &self.setup.composition,
                round,
                me: f,
                faulty: &self.setup.faulty,
                honest: &honest,
                rushing_view: self.trace.scenario.rushing.then_some(correct_view.as_slice()),
                history: &self.trace.rounds,
            };
            for out in adversary_sends(&self.trace.scenario.adversary, &obs)? {
                if out.to.index() >= n {
                    return Err(EngineError::Internal(format!(
                        "adversary addressed nonexistent {} in round {round}",
                        out.to
                    )));
                }
                envelopes.push(Envelope::lenient(round, f, out.to, out.payload, &params));
            }
        }
        envelopes.sort_by_key(|e| (e.sender, e.receiver));

        for p in self.procs.iter_mut() {
            let me = p.id();
            let inbox = Inbox::new(me, envelopes.iter().filter(|e| e.receiver == me).collect());
            p.receive(round, &inbox);
        }
        self.time = round;

        let prev = self.trace.final_statuses().to_vec();
        let mut statuses = vec![None; n];
        for p in self.procs.iter().filter(|p| !self.setup.is_faulty(p.id())) {
            let i = p.id().index();
            let now = p.status();
            if let Some(before) = prev[i] {
                if !before.may_become(&now) {
                    return Err(EngineError::Internal(format!(
                        "{} moved from {before} to {now} in round {round}",
                        p.id()
                    )));
                }
            }
            statuses[i] = Some(now);
            note_progress(&mut self.trace, p, round);
        }

        let layer_round = round <= self.trace.handoff_time;
        for e in &envelopes {
            let bits = u64::from(e.bits);
            let correct = !self.setup.is_faulty(e.sender);
            self.trace.bits_total += bits;
            if correct {
                self.trace.bits_correct += bits;
            }
            if layer_round {
                self.trace.layer_bits_total += bits;
                if correct {
                    self.trace.layer_bits_correct += bits;
                }
            }
        }
        self.trace.rounds.push(RoundRecord {
            round,
            envelopes,
            statuses,
            facts,
        });
        Ok(())
    }

    /// Steps until every correct process halts or the round cap is hit.
    pub fn run_to_end(mut self) -> Result<RunTrace, EngineError> {
        loop {
            if self.all_correct_halted() {
                self.trace.outcome = RunOutcome::Complete;
                return Ok(self.trace);
            }
            if self.time >= self.setup.round_cap {
                self.trace.outcome = RunOutcome::RoundCap;
                return Err(EngineError::NonTermination {
                    cap: self.setup.round_cap,
                    trace: Box::new(self.trace),
                });
            }
            self.step_round()?;
        }
    }
}

fn note_progress(trace: &mut RunTrace, p: &ComposedProcess, time: Time) {
    let i = p.id().index();
    if trace.decisions[i].is_none() {
        if let Some(v) = p.decision() {
            trace.decisions[i] = Some(v);
            trace.decision_time[i] = Some(time);
        }
    }
    if trace.base_entry[i].is_none() {
        if let Some(est) = p.base_entry() {
            trace.base_entry[i] = Some((time, est));
        }
    }
}

/// Runs a scenario to completion.
pub fn run(scenario: &Scenario) -> Result<RunTrace, EngineError> {
    World::new(scenario)?.run_to_end()
}

/// Runs a scenario and returns its trace even when the round cap was hit.
pub fn run_lenient(scenario: &Scenario) -> Result<RunTrace, EngineError> {
    match run(scenario) {
        Err(EngineError::NonTermination { trace, .. }) => Ok(*trace),
        other => other,
    }
}
