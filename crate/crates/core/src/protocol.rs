//! The per-process state-machine contract and the composition of an
//! optimizer layer with a base protocol.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Envelope, Payload, ProcessId, ProcessStatus, Round, SystemParams, Time, Value};
use crate::verification::silent::{LocalFact, SilentBroadcastSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("layer `{layer}` requires a binary value domain (|V| = 2), got |V| = {domain}")]
    BinaryLayerNeedsBinaryDomain { layer: String, domain: u32 },
    #[error("base `{base}` requires n > {k}t, got n = {n}, t = {t}")]
    InsufficientResilience {
        base: String,
        k: usize,
        n: usize,
        t: usize,
    },
    #[error("common defaults must list one value per process ({expected}), got {got}")]
    DefaultsLength { expected: usize, got: usize },
    #[error("common default {0} is outside the value domain")]
    DefaultOutOfDomain(Value),
    #[error("mutation `{mutation}` does not apply to layer `{layer}`")]
    MutationMismatch { mutation: String, layer: String },
}

/// One message a process hands to the network in the current round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub to: ProcessId,
    pub payload: Payload,
}

impl Outgoing {
    pub fn new(to: ProcessId, payload: Payload) -> Self {
        Self { to, payload }
    }
}

/// Everything delivered to one receiver in one round, ordered by sender.
/// The absence of any envelope from a sender is an observable.
#[derive(Debug, Clone)]
pub struct Inbox<'a> {
    receiver: ProcessId,
    envelopes: Vec<&'a Envelope>,
}

impl<'a> Inbox<'a> {
    pub fn new(receiver: ProcessId, mut envelopes: Vec<&'a Envelope>) -> Self {
        envelopes.sort_by_key(|e| e.sender);
        Self {
            receiver,
            envelopes,
        }
    }

    pub fn empty(receiver: ProcessId) -> Self {
        Self {
            receiver,
            envelopes: Vec::new(),
        }
    }

    pub fn receiver(&self) -> ProcessId {
        self.receiver
    }

    pub fn envelopes(&self) -> &[&'a Envelope] {
        &self.envelopes
    }

    pub fn is_empty(&self) -> bool {
        self.envelopes.is_empty()
    }

    pub fn from(&self, sender: ProcessId) -> impl Iterator<Item = &'a Payload> + '_ {
        self.envelopes
            .iter()
            .filter(move |e| e.sender == sender)
            .map(|e| &e.payload)
    }

    /// The first payload received from `sender`, if any.
    pub fn first_from(&self, sender: ProcessId) -> Option<&'a Payload> {
        self.from(sender).next()
    }

    pub fn heard_from(&self, sender: ProcessId) -> bool {
        self.first_from(sender).is_some()
    }

    /// Number of distinct senders that sent at least one payload matching `pred`.
    pub fn count_senders(&self, pred: impl Fn(&Payload) -> bool) -> usize {
        let mut count = 0;
        let mut last = None;
        for e in &self.envelopes {
            if last != Some(e.sender) && pred(&e.payload) {
                count += 1;
                last = Some(e.sender);
            }
        }
        count
    }
}

/// A deterministic per-process protocol state machine.
pub trait Protocol: Send {
    /// Messages to emit in `round`. Pure in the current state.
    fn send(&self, round: Round) -> Vec<Outgoing>;
    /// Absorb everything delivered in `round`.
    fn receive(&mut self, round: Round, inbox: &Inbox<'_>);
    fn status(&self) -> ProcessStatus;
    fn local_fact(&self, _fact: &LocalFact) -> Option<bool> {
        None
    }
}

/// What a layer does once its last round has been processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerOutcome {
    Halt(Value),
    Handoff(Value),
}

/// A running optimizer-layer instance for one process.
pub trait LayerProcess: Send {
    fn send(&self, round: Round) -> Vec<Outgoing>;
    fn receive(&mut self, round: Round, inbox: &Inbox<'_>);
    fn decision(&self) -> Option<Value>;
    /// The estimate that would be handed to the base, once fixed.
    fn estimate(&self) -> Option<Value>;
    /// Set exactly when the layer has finished.
    fn outcome(&self) -> Option<LayerOutcome>;
    fn local_fact(&self, fact: &LocalFact) -> Option<bool>;

    fn status(&self) -> ProcessStatus {
        match (self.outcome(), self.decision()) {
            (Some(LayerOutcome::Halt(v)), _) => ProcessStatus::Halted(v),
            (_, Some(v)) => ProcessStatus::Decided(v),
            _ => ProcessStatus::Running,
        }
    }
}

/// Static description of an optimizer layer.
pub trait LayerSpec: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    /// Time at which non-halted processes start the base.
    fn handoff_time(&self) -> Time;
    /// Decision time in the layer's common case.
    fn common_decision_time(&self) -> Time;
    fn validate(&self, params: &SystemParams) -> Result<(), ConfigError>;
    fn instantiate(
        &self,
        params: &SystemParams,
        me: ProcessId,
        initial: Value,
    ) -> Box<dyn LayerProcess>;
    /// Payloads a correct `sender` may address to `receiver` in `round`.
    fn alphabet(
        &self,
        params: &SystemParams,
        round: Round,
        sender: ProcessId,
        receiver: ProcessId,
    ) -> Vec<Payload>;
    /// Silent-broadcast obligations the layer implements.
    fn silent_broadcasts(&self, params: &SystemParams) -> Vec<SilentBroadcastSpec>;
}

/// Static description of a base consensus protocol.
pub trait BaseSpec: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    /// The base solves consensus for `n > k t`; this returns `k`.
    fn resilience(&self) -> usize;
    /// Worst-case number of base rounds until every correct participant halts.
    fn max_rounds(&self, params: &SystemParams) -> Round;
    fn instantiate(&self, params: &SystemParams, me: ProcessId, est: Value)
        -> Box<dyn Protocol>;
    /// Payloads a correct `sender` may address to `receiver` in base round `round`.
    fn alphabet(
        &self,
        params: &SystemParams,
        round: Round,
        sender: ProcessId,
        receiver: ProcessId,
    ) -> Vec<Payload>;
}

/// `L ⊙ Base`: runs the layer verbatim, then the base from the layer's
/// handoff time for every process that did not halt.
#[derive(Debug, Clone)]
pub struct Composition {
    params: SystemParams,
    layer: Arc<dyn LayerSpec>,
    base: Arc<dyn BaseSpec>,
}

pub fn compose(
    layer: Arc<dyn LayerSpec>,
    base: Arc<dyn BaseSpec>,
    params: SystemParams,
) -> Result<Composition, ConfigError> {
    layer.validate(&params)?;
    let k = base.resilience();
    if params.n() <= k * params.t() {
        return Err(ConfigError::InsufficientResilience {
            base: base.name(),
            k,
            n: params.n(),
            t: params.t(),
        });
    }
    Ok(Composition {
        params,
        layer,
        base,
    })
}

impl Composition {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn layer(&self) -> &dyn LayerSpec {
        self.layer.as_ref()
    }

    pub fn base(&self) -> &dyn BaseSpec {
        self.base.as_ref()
    }

    pub fn handoff_time(&self) -> Time {
        self.layer.handoff_time()
    }

    /// Layer rounds, then base worst case, then two rounds of slack.
    pub fn default_round_cap(&self) -> Round {
        self.handoff_time() + self.base.max_rounds(&self.params) + 2
    }

    pub fn is_layer_round(&self, round: Round) -> bool {
        round <= self.handoff_time()
    }

    pub fn alphabet(&self, round: Round, sender: ProcessId, receiver: ProcessId) -> Vec<Payload> {
        let h = self.handoff_time();
        if round <= h {
            self.layer.alphabet(&self.params, round, sender, receiver)
        } else {
            self.base.alphabet(&self.params, round - h, sender, receiver)
        }
    }

    pub fn spawn(&self, me: ProcessId, initial: Value) -> ComposedProcess {
        let layer = self.layer.instantiate(&self.params, me, initial);
        let mut p = ComposedProcess {
            params: self.params,
            base_spec: Arc::clone(&self.base),
            handoff_time: self.handoff_time(),
            me,
            time: 0,
            layer,
            base: None,
            base_entry: None,
            decision: None,
            halted: false,
        };
        p.settle_layer();
        p
    }
}

/// One process running `L ⊙ Base`.
pub struct ComposedProcess {
    params: SystemParams,
    base_spec: Arc<dyn BaseSpec>,
    handoff_time: Time,
    me: ProcessId,
    time: Time,
    layer: Box<dyn LayerProcess>,
    base: Option<Box<dyn Protocol>>,
    base_entry: Option<Value>,
    decision: Option<Value>,
    halted: bool,
}

impl fmt::Debug for ComposedProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComposedProcess")
            .field("me", &self.me)
            .field("time", &self.time)
            .field("status", &self.status())
            .field("base_entry", &self.base_entry)
            .finish()
    }
}

impl ComposedProcess {
    pub fn id(&self) -> ProcessId {
        self.me
    }

    /// Local clock; the next round this process expects is `time() + 1`.
    pub fn time(&self) -> Time {
        self.time
    }

    pub fn layer(&self) -> &dyn LayerProcess {
        self.layer.as_ref()
    }

    /// Estimate with which the base was entered, if it was.
    pub fn base_entry(&self) -> Option<Value> {
        self.base_entry
    }

    pub fn in_base(&self) -> bool {
        self.base.is_some()
    }

    pub fn decision(&self) -> Option<Value> {
        self.decision
    }

    fn record_decision(&mut self, v: Value) {
        if self.decision.is_none() {
            self.decision = Some(v);
        }
    }

    /// Applies layer decisions and, at the handoff time, its outcome.
    fn settle_layer(&mut self) {
        if let Some(v) = self.layer.decision() {
            self.record_decision(v);
        }
        if self.time != self.handoff_time || self.base.is_some() || self.halted {
            return;
        }
        match self.layer.outcome() {
            Some(LayerOutcome::Halt(v)) => {
                self.record_decision(v);
                self.halted = true;
            }
            Some(LayerOutcome::Handoff(est)) => {
                self.base_entry = Some(est);
                self.base = Some(self.base_spec.instantiate(&self.params, self.me, est));
                self.settle_base();
            }
            None => {}
        }
    }

    /// A process that decided in the layer keeps that decision and ignores
    /// the base's output.
    fn settle_base(&mut self) {
        let Some(base) = &self.base else { return };
        match base.status() {
            ProcessStatus::Halted(d) => {
                self.record_decision(d);
                self.halted = true;
            }
            ProcessStatus::Decided(d) => self.record_decision(d),
            ProcessStatus::Running | ProcessStatus::Handoff(_) => {}
        }
    }
}

impl Protocol for ComposedProcess {
    fn send(&self, round: Round) -> Vec<Outgoing> {
        if self.halted {
            return Vec::new();
        }
        match &self.base {
            Some(base) => base.send(round - self.handoff_time),
            None if round <= self.handoff_time => self.layer.send(round),
            None => Vec::new(),
        }
    }

    fn receive(&mut self, round: Round, inbox: &Inbox<'_>) {
        self.time = round;
        if self.halted {
            return;
        }
        match &mut self.base {
            Some(base) => {
                base.receive(round - self.handoff_time, inbox);
                self.settle_base();
            }
            None => {
                if round <= self.handoff_time {
                    self.layer.receive(round, inbox);
                }
                self.settle_layer();
            }
        }
    }

    fn status(&self) -> ProcessStatus {
        match (self.halted, self.decision) {
            (true, Some(v)) => ProcessStatus::Halted(v),
            (_, Some(v)) => ProcessStatus::Decided(v),
            _ => match self.base_entry {
                Some(est) => ProcessStatus::Handoff(est),
                None => ProcessStatus::Running,
            },
        }
    }

    fn local_fact(&self, fact: &LocalFact) -> Option<bool> {
        match fact {
            LocalFact::Decided => Some(self.decision.is_some()),
            LocalFact::Always => Some(true),
            _ => self.layer.local_fact(fact),
        }
    }
}
