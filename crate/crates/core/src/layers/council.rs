//! L3 and L3′: a committee of `t+1` (the smaller Council) recommends; a
//! unanimous recommendation is confirmed by a silent `err` round and
//! decided at time 3, then a silent `help` round lets everyone halt.

use crate::model::{Payload, ProcessId, Round, SystemParams, Time, Value};
use crate::protocol::{ConfigError, Inbox, LayerOutcome, LayerProcess, LayerSpec, Outgoing};
use crate::verification::silent::{LocalFact, SilentBroadcastSpec};

use super::codec::{MvCommonDefaults, ValueCodec};
use super::committee::{broadcast, unanimous, CommitteeExchange};
use super::{require_binary, validate_codec};

#[derive(Debug, Clone)]
pub struct CouncilLayer {
    codec: ValueCodec,
    skip_err: bool,
}

impl CouncilLayer {
    pub fn binary() -> Self {
        Self {
            codec: ValueCodec::Split,
            skip_err: false,
        }
    }

    pub fn multi_valued(defaults: MvCommonDefaults) -> Self {
        Self {
            codec: ValueCodec::Defaults(defaults),
            skip_err: false,
        }
    }

    /// Mutant: never broadcast `err` after a split recommendation.
    pub fn with_skip_err(mut self, skip: bool) -> Self {
        self.skip_err = skip;
        self
    }

    pub fn committee_size(params: &SystemParams) -> usize {
        params.t() + 1
    }
}

impl LayerSpec for CouncilLayer {
    fn name(&self) -> &'static str {
        match self.codec {
            ValueCodec::Split => "l3",
            ValueCodec::Defaults(_) => "l3m",
        }
    }

    fn handoff_time(&self) -> Time {
        4
    }

    fn common_decision_time(&self) -> Time {
        3
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
        Box::new(CouncilState {
            exchange: CommitteeExchange::new(*params, me, initial, size, self.codec.clone()),
            skip_err: self.skip_err,
            unanimous: None,
            est: None,
            send_err: false,
            send_help: false,
            decision: None,
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
            3 => vec![Payload::Err],
            4 => vec![Payload::Help],
            _ => Vec::new(),
        }
    }

    fn silent_broadcasts(&self, params: &SystemParams) -> Vec<SilentBroadcastSpec> {
        vec![
            SilentBroadcastSpec::confirmation(params, 3, LocalFact::UnanimousRecommendation),
            SilentBroadcastSpec::confirmation(params, 4, LocalFact::Decided),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct CouncilState {
    exchange: CommitteeExchange,
    skip_err: bool,
    unanimous: Option<bool>,
    est: Option<Value>,
    send_err: bool,
    send_help: bool,
    decision: Option<Value>,
    outcome: Option<LayerOutcome>,
}

impl CouncilState {
    pub fn recommendation(&self) -> Option<Value> {
        self.exchange.recommendation
    }
}

impl LayerProcess for CouncilState {
    fn send(&self, round: Round) -> Vec<Outgoing> {
        match round {
            1 => self.exchange.send_proposals(),
            2 => self.exchange.send_recommendations(),
            3 if self.send_err => broadcast(&self.exchange.params, Payload::Err),
            4 if self.send_help => broadcast(&self.exchange.params, Payload::Help),
            _ => Vec::new(),
        }
    }

    fn receive(&mut self, round: Round, inbox: &Inbox<'_>) {
        match round {
            1 => self.exchange.receive_proposals(inbox),
            2 => {
                let recs = self.exchange.decode_recommendations(inbox);
                match unanimous(&recs) {
                    Some(rec) => {
                        self.unanimous = Some(true);
                        self.est = Some(rec);
                    }
                    None => {
                        self.unanimous = Some(false);
                        self.est = Some(self.exchange.initial);
                        self.send_err = !self.skip_err;
                    }
                }
            }
            3 => {
                if inbox.count_senders(|p| *p == Payload::Err) == 0 {
                    self.decision = self.est;
                } else {
                    self.send_help = true;
                }
            }
            4 => {
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
            LocalFact::UnanimousRecommendation => Some(self.unanimous == Some(true)),
            LocalFact::Always => Some(true),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Envelope, ProcessStatus};

    fn inbox_of(round: Round, me: usize, senders: &[usize], payload: Payload) -> Vec<Envelope> {
        senders
            .iter()
            .map(|s| Envelope {
                round,
                sender: ProcessId(*s),
                receiver: ProcessId(me),
                payload,
                bits: 1,
            })
            .collect()
    }

    fn past_round_two(recs_present: &[usize]) -> Box<dyn LayerProcess> {
        let params = SystemParams::binary(4, 1).unwrap();
        let mut p = CouncilLayer::binary().instantiate(&params, ProcessId(3), Value::ZERO);
        p.receive(1, &Inbox::empty(ProcessId(3)));
        let es = inbox_of(2, 3, recs_present, Payload::ValueBit(0));
        p.receive(2, &Inbox::new(ProcessId(3), es.iter().collect()));
        p
    }

    #[test]
    fn split_recommendation_sends_err() {
        // process 3 is odd: silence decodes 1, a message decodes 0
        let p = past_round_two(&[0]);
        assert_eq!(p.estimate(), Some(Value::ZERO));
        assert_eq!(p.send(3).len(), 4);
        assert!(p.send(3).iter().all(|o| o.payload == Payload::Err));
    }

    #[test]
    fn unanimous_recommendation_is_silent_then_decides() {
        let mut p = past_round_two(&[]);
        assert_eq!(p.estimate(), Some(Value::ONE));
        assert!(p.send(3).is_empty());
        p.receive(3, &Inbox::empty(ProcessId(3)));
        assert_eq!(p.status(), ProcessStatus::Decided(Value::ONE));
        assert!(p.send(4).is_empty());
        p.receive(4, &Inbox::empty(ProcessId(3)));
        assert_eq!(p.outcome(), Some(LayerOutcome::Halt(Value::ONE)));
    }

    #[test]
    fn one_err_blocks_decision_and_requests_help() {
        let mut p = past_round_two(&[]);
        let es = inbox_of(3, 3, &[2], Payload::Err);
        p.receive(3, &Inbox::new(ProcessId(3), es.iter().collect()));
        assert_eq!(p.decision(), None);
        assert_eq!(p.send(4).len(), 4);
        let es = inbox_of(4, 3, &[3], Payload::Help);
        p.receive(4, &Inbox::new(ProcessId(3), es.iter().collect()));
        assert_eq!(p.outcome(), Some(LayerOutcome::Handoff(Value::ONE)));
    }

    #[test]
    fn mutant_stays_silent_on_split() {
        let params = SystemParams::binary(4, 1).unwrap();
        let mut p = CouncilLayer::binary()
            .with_skip_err(true)
            .instantiate(&params, ProcessId(3), Value::ZERO);
        p.receive(1, &Inbox::empty(ProcessId(3)));
        let es = inbox_of(2, 3, &[0], Payload::ValueBit(0));
        p.receive(2, &Inbox::new(ProcessId(3), es.iter().collect()));
        assert!(p.send(3).is_empty());
    }
}
