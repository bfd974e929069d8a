//! Rounds 1 and 2 shared by the Sanhedrin and Council layers: every process
//! reports its proposal to the committee, and every committee member
//! broadcasts a recommendation computed from the reports.

use crate::model::{ProcessId, SystemParams, Value};
use crate::protocol::{Inbox, Outgoing};

use super::codec::ValueCodec;

#[derive(Debug, Clone)]
pub(crate) struct CommitteeExchange {
    pub params: SystemParams,
    pub me: ProcessId,
    pub initial: Value,
    pub size: usize,
    pub codec: ValueCodec,
    /// Own recommendation, for committee members after time 1.
    pub recommendation: Option<Value>,
}

impl CommitteeExchange {
    pub fn new(
        params: SystemParams,
        me: ProcessId,
        initial: Value,
        size: usize,
        codec: ValueCodec,
    ) -> Self {
        Self {
            params,
            me,
            initial,
            size,
            codec,
            recommendation: None,
        }
    }

    pub fn members(&self) -> impl Iterator<Item = ProcessId> {
        (0..self.size).map(ProcessId)
    }

    pub fn is_member(&self, p: ProcessId) -> bool {
        p.index() < self.size
    }

    pub fn send_proposals(&self) -> Vec<Outgoing> {
        self.members()
            .filter_map(|j| {
                self.codec
                    .encode_proposal(self.me, self.initial, j)
                    .map(|p| Outgoing::new(j, p))
            })
            .collect()
    }

    /// Members decode one report per process and vote.
    pub fn receive_proposals(&mut self, inbox: &Inbox<'_>) {
        if !self.is_member(self.me) {
            return;
        }
        let values: Vec<Value> = self
            .params
            .processes()
            .map(|i| {
                self.codec
                    .decode_proposal(&self.params, i, self.me, inbox.first_from(i))
            })
            .collect();
        self.recommendation = Some(self.codec.vote(&values));
    }

    pub fn send_recommendations(&self) -> Vec<Outgoing> {
        let Some(rec) = self.recommendation else {
            return Vec::new();
        };
        self.params
            .processes()
            .filter_map(|i| {
                self.codec
                    .encode_recommendation(rec, i)
                    .map(|p| Outgoing::new(i, p))
            })
            .collect()
    }

    /// The recommendation decoded from each committee member, in id order.
    pub fn decode_recommendations(&self, inbox: &Inbox<'_>) -> Vec<Value> {
        self.members()
            .map(|j| {
                self.codec
                    .decode_recommendation(&self.params, self.me, inbox.first_from(j))
            })
            .collect()
    }
}

pub(crate) fn unanimous(recs: &[Value]) -> Option<Value> {
    let first = *recs.first()?;
    recs.iter().all(|r| *r == first).then_some(first)
}

pub(crate) fn broadcast(
    params: &SystemParams,
    payload: crate::model::Payload,
) -> Vec<Outgoing> {
    params
        .processes()
        .map(|p| Outgoing::new(p, payload))
        .collect()
}
