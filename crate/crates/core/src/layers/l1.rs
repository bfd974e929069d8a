//! L1: optimized for the unanimous common case where every process proposes
//! 1 and nothing fails. One round; silence decides.

use crate::model::{Payload, ProcessId, Round, SystemParams, Time, Value};
use crate::protocol::{ConfigError, Inbox, LayerOutcome, LayerProcess, LayerSpec, Outgoing};
use crate::verification::silent::{LocalFact, SilentBroadcastSpec};

use super::committee::broadcast;
use super::require_binary;

#[derive(Debug, Clone, Default)]
pub struct UnanimousLayer {
    silent_zero: bool,
}

impl UnanimousLayer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mutant_silent_zero() -> Self {
        Self { silent_zero: true }
    }
}

impl LayerSpec for UnanimousLayer {
    fn name(&self) -> &'static str {
        "l1"
    }

    fn handoff_time(&self) -> Time {
        1
    }

    fn common_decision_time(&self) -> Time {
        1
    }

    fn validate(&self, params: &SystemParams) -> Result<(), ConfigError> {
        require_binary(self.name(), params)
    }

    fn instantiate(
        &self,
        params: &SystemParams,
        _me: ProcessId,
        initial: Value,
    ) -> Box<dyn LayerProcess> {
        Box::new(L1State {
            params: *params,
            initial,
            silent_zero: self.silent_zero,
            errs: None,
            decision: None,
            est: None,
            outcome: None,
        })
    }

    fn alphabet(&self, _: &SystemParams, round: Round, _: ProcessId, _: ProcessId) -> Vec<Payload> {
        if round == 1 {
            vec![Payload::Err]
        } else {
            Vec::new()
        }
    }

    fn silent_broadcasts(&self, params: &SystemParams) -> Vec<SilentBroadcastSpec> {
        vec![SilentBroadcastSpec::confirmation(
            params,
            1,
            LocalFact::InitialValueIs(Value::ONE),
        )]
    }
}

#[derive(Debug, Clone)]
pub struct L1State {
    params: SystemParams,
    initial: Value,
    silent_zero: bool,
    errs: Option<usize>,
    decision: Option<Value>,
    est: Option<Value>,
    outcome: Option<LayerOutcome>,
}

impl L1State {
    /// Number of distinct `err` senders observed at time 1.
    pub fn errs_received(&self) -> Option<usize> {
        self.errs
    }
}

impl LayerProcess for L1State {
    fn send(&self, round: Round) -> Vec<Outgoing> {
        if round != 1 || self.initial == Value::ONE || self.silent_zero {
            return Vec::new();
        }
        broadcast(&self.params, Payload::Err)
    }

    fn receive(&mut self, round: Round, inbox: &Inbox<'_>) {
        if round != 1 {
            return;
        }
        let t = self.params.t();
        let errs = inbox.count_senders(|p| *p == Payload::Err);
        self.errs = Some(errs);
        if errs == 0 {
            self.decision = Some(Value::ONE);
            self.est = Some(Value::ONE);
            self.outcome = Some(LayerOutcome::Halt(Value::ONE));
            return;
        }
        if errs <= t {
            self.decision = Some(Value::ONE);
        }
        let est = if errs <= 2 * t { Value::ONE } else { self.initial };
        self.est = Some(est);
        self.outcome = Some(LayerOutcome::Handoff(est));
    }

    fn decision(&self) -> Option<Value> {
        self.decision
    }

    fn estimate(&self) -> Option<Value> {
        self.est
    }

    fn outcome(&self) -> Option<LayerOutcome> {
        self.outcome
    }

    fn local_fact(&self, fact: &LocalFact) -> Option<bool> {
        match fact {
            LocalFact::InitialValueIs(v) => Some(self.initial == *v),
            LocalFact::Decided => Some(self.decision.is_some()),
            LocalFact::Always => Some(true),
            LocalFact::UnanimousRecommendation => None,
        }
    }
}
