//! Phase King with `t + 1` phases of two rounds each, for `n > 4t`.
//!
//! Exchange round: everyone broadcasts its preference and takes the
//! plurality `m` with multiplicity `mult`. King round: the phase king
//! (process `k - 1` in phase `k`) broadcasts its `m`; a process keeps its
//! own `m` when `mult > n/2 + t` and adopts the king's value otherwise.
//! Missing or malformed messages count as the smallest value.

use crate::layers::voting::plurality_with_count;
use crate::model::{Payload, ProcessId, ProcessStatus, Round, SystemParams, Value};
use crate::protocol::{BaseSpec, Inbox, Outgoing, Protocol};

#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseKing;

impl PhaseKing {
    fn phase_of(round: Round) -> u32 {
        round.div_ceil(2)
    }

    fn king_of(round: Round) -> ProcessId {
        ProcessId(Self::phase_of(round) as usize - 1)
    }
}

impl BaseSpec for PhaseKing {
    fn name(&self) -> String {
        "phase-king".to_string()
    }

    fn resilience(&self) -> usize {
        4
    }

    fn max_rounds(&self, params: &SystemParams) -> Round {
        2 * (params.t() as Round + 1)
    }

    fn instantiate(&self, params: &SystemParams, me: ProcessId, est: Value) -> Box<dyn Protocol> {
        Box::new(PhaseKingState {
            params: *params,
            me,
            pref: est,
            m: est,
            mult: 0,
            done: false,
        })
    }

    fn alphabet(
        &self,
        params: &SystemParams,
        round: Round,
        sender: ProcessId,
        _receiver: ProcessId,
    ) -> Vec<Payload> {
        let in_range = round >= 1 && round <= self.max_rounds(params);
        let speaks = round % 2 == 1 || Self::king_of(round) == sender;
        if in_range && speaks {
            params.values().map(Payload::ValueWide).collect()
        } else {
            Vec::new()
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhaseKingState {
    params: SystemParams,
    me: ProcessId,
    pref: Value,
    m: Value,
    mult: usize,
    done: bool,
}

impl PhaseKingState {
    pub fn preference(&self) -> Value {
        self.pref
    }

    fn decode(&self, observed: Option<&Payload>) -> Value {
        match observed {
            Some(Payload::ValueWide(v)) if self.params.contains(*v) => *v,
            _ => self.params.default_value(),
        }
    }

    fn broadcast(&self, v: Value) -> Vec<Outgoing> {
        self.params
            .processes()
            .map(|p| Outgoing::new(p, Payload::ValueWide(v)))
            .collect()
    }
}

impl Protocol for PhaseKingState {
    fn send(&self, round: Round) -> Vec<Outgoing> {
        if self.done {
            return Vec::new();
        }
        if round % 2 == 1 {
            self.broadcast(self.pref)
        } else if PhaseKing::king_of(round) == self.me {
            self.broadcast(self.m)
        } else {
            Vec::new()
        }
    }

    fn receive(&mut self, round: Round, inbox: &Inbox<'_>) {
        if self.done {
            return;
        }
        if round % 2 == 1 {
            let prefs: Vec<Value> = self
                .params
                .processes()
                .map(|j| self.decode(inbox.first_from(j)))
                .collect();
            let (m, mult) = plurality_with_count(&prefs).expect("n > 0");
            self.m = m;
            self.mult = mult;
            return;
        }
        let king = self.decode(inbox.first_from(PhaseKing::king_of(round)));
        let n = self.params.n();
        let t = self.params.t();
        self.pref = if 2 * self.mult > n + 2 * t { self.m } else { king };
        if PhaseKing::phase_of(round) as usize == t + 1 {
            self.done = true;
        }
    }

    fn status(&self) -> ProcessStatus {
        if self.done {
            ProcessStatus::Halted(self.pref)
        } else {
            ProcessStatus::Running
        }
    }
}
