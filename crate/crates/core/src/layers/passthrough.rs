//! The empty layer: every process enters the base at time 0 with its input.

use crate::model::{Payload, ProcessId, Round, SystemParams, Time, Value};
use crate::protocol::{ConfigError, Inbox, LayerOutcome, LayerProcess, LayerSpec, Outgoing};
use crate::verification::silent::{LocalFact, SilentBroadcastSpec};

#[derive(Debug, Clone, Copy, Default)]
pub struct Passthrough;

impl LayerSpec for Passthrough {
    fn name(&self) -> &'static str {
        "none"
    }

    fn handoff_time(&self) -> Time {
        0
    }

    fn common_decision_time(&self) -> Time {
        0
    }

    fn validate(&self, _: &SystemParams) -> Result<(), ConfigError> {
        Ok(())
    }

    fn instantiate(&self, _: &SystemParams, _: ProcessId, initial: Value) -> Box<dyn LayerProcess> {
        Box::new(PassthroughState { initial })
    }

    fn alphabet(&self, _: &SystemParams, _: Round, _: ProcessId, _: ProcessId) -> Vec<Payload> {
        Vec::new()
    }

    fn silent_broadcasts(&self, _: &SystemParams) -> Vec<SilentBroadcastSpec> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PassthroughState {
    initial: Value,
}

impl LayerProcess for PassthroughState {
    fn send(&self, _: Round) -> Vec<Outgoing> {
        Vec::new()
    }

    fn receive(&mut self, _: Round, _: &Inbox<'_>) {}

    fn decision(&self) -> Option<Value> {
        None
    }

    fn estimate(&self) -> Option<Value> {
        Some(self.initial)
    }

    fn outcome(&self) -> Option<LayerOutcome> {
        Some(LayerOutcome::Handoff(self.initial))
    }

    fn local_fact(&self, fact: &LocalFact) -> Option<bool> {
        match fact {
            LocalFact::InitialValueIs(v) => Some(self.initial == *v),
            LocalFact::Always => Some(true),
            _ => None,
        }
    }
}
