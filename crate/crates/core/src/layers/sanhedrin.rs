//! L2 and L2′: a committee of `2t+1` (the greater Sanhedrin) aggregates
//! proposals; a unanimous recommendation decides at time 2, and round 3
//! silently confirms that everyone decided.

use crate::model::{Payload, ProcessId, Round, SystemParams, Time, Value};
use crate::protocol::{ConfigError, Inbox, LayerOutcome, LayerProcess, LayerSpec, Outgoing};
use crate::verification::silent::{LocalFact, SilentBroadcastSpec};

use super::codec::{MvCommonDefaults, ValueCodec};
use super::committee::{broadcast, unanimous, CommitteeExchange};
use super::{require_binary, validate_codec};

#[derive(Debug, Clone)]
pub struct SanhedrinLayer {
    codec: ValueCodec,
}

impl SanhedrinLayer {
    pub fn binary() -> Self {
        Self {
            codec: ValueCodec::Split,
        }
    }

    pub fn multi_valued(defaults: MvCommonDefaults) -> Self {
        Self {
            codec: ValueCodec::Defaults(defaults),
        }
    }

    pub fn committee_size(params: &SystemParams) -> usize {
        2 * params.t() + 1
    }
}

impl LayerSpec for SanhedrinLayer {
    fn name(&self) -> &'static str {
        match self.codec {
            ValueCodec::Split => "l2",
            ValueCodec::Defaults(_) => "l2m",
        }
    }

    fn handoff_time(&self) -> Time {
        3
    }

    fn common_decision_time(&self) -> Time {
        2
    }

    fn validate(&self, params: &SystemParams) -> Result<(), ConfigError> {
        if matches!(self.codec, ValueCodec::Split) {
            require_binary(self.name(), params)?;
        }
        validate_codec(params, &self.codec)
    }

    fn instantiate(
        &self,
        params: &SystemParams,
        me: ProcessId,
        initial: Value,
    ) -> Box<dyn LayerProcess> {
        let size = Self::committee_size(params).min(params.n());
        Box::new(SanhedrinState {
            exchange: CommitteeExchange::new(*params, me, initial, size, self.codec.clone()),
            recs: None,
            decision: None,
            est: None,
            help: false,
            outcome: None,
        })
    }

    fn alphabet(
        &self,
        params: &SystemParams,
        round: Round,
        sender: ProcessId,
        receiver: ProcessId,
    ) -> Vec<Payload> {
        let size = Self::committee_size(params);
        match round {
            1 if receiver.index() < size => self.codec.proposal_alphabet(params, sender, receiver),
            2 if sender.index() < size => self.codec.recommendation_alphabet(params, receiver),
            3 => vec![Payload::Help],
            _ => Vec::new(),
        }
    }

    fn silent_broadcasts(&self, params: &SystemParams) -> Vec<SilentBroadcastSpec> {
        vec![SilentBroadcastSpec::confirmation(params, 3, LocalFact::Decided)]
    }
}

#[derive(Debug, Clone)]
pub struct SanhedrinState {
    exchange: CommitteeExchange,
    recs: Option<Vec<Value>>,
    decision: Option<Value>,
    est: Option<Value>,
    help: bool,
    outcome: Option<LayerOutcome>,
}

impl SanhedrinState {
    /// Own recommendation, committee members only.
    pub fn recommendation(&self) -> Option<Value> {
        self.exchange.recommendation
    }

    /// Recommendations decoded at time 2, one per committee member.
    pub fn decoded_recommendations(&self) -> Option<&[Value]> {
        self.recs.as_deref()
    }
}

impl LayerProcess for SanhedrinState {
    fn send(&self, round: Round) -> Vec<Outgoing> {
        match round {
            1 => self.exchange.send_proposals(),
            2 => self.exchange.send_recommendations(),
            3 if self.help => broadcast(&self.exchange.params, Payload::Help),
            _ => Vec::new(),
        }
    }

    fn receive(&mut self, round: Round, inbox: &Inbox<'_>) {
        match round {
            1 => self.exchange.receive_proposals(inbox),
            2 => {
                let recs = self.exchange.decode_recommendations(inbox);
                if let Some(rec) = unanimous(&recs) {
                    self.est = Some(rec);
                    self.decision = Some(rec);
                } else {
                    let t = self.exchange.params.t();
                    // at most one value can have more than t of 2t+1 recommenders
                    let backed = self
                        .exchange
                        .params
                        .values()
                        .find(|v| recs.iter().filter(|r| *r == v).count() > t);
                    self.est = Some(backed.unwrap_or(self.exchange.initial));
                    self.help = true;
                }
                self.recs = Some(recs);
            }
            3 => {
                let est = self.est.unwrap_or(self.exchange.initial);
                let helps = inbox.count_senders(|p| *p == Payload::Help);
                self.outcome = Some(match self.decision {
                    Some(v) if helps == 0 => LayerOutcome::Halt(v),
                    _ => LayerOutcome::Handoff(est),
                });
            }
            _ => {}
        }
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
            LocalFact::InitialValueIs(v) => Some(self.exchange.initial == *v),
            LocalFact::Decided => Some(self.decision.is_some()),
            LocalFact::UnanimousRecommendation => {
                Some(self.recs.as_deref().and_then(unanimous).is_some())
            }
            LocalFact::Always => Some(true),
        }
    }
}
