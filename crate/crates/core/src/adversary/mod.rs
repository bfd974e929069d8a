//! Byzantine behaviour for the faulty processes of a scenario.
//!
//! Every faulty process keeps an honest shadow state machine fed with its
//! real inbox, so strategies can deviate from correct behaviour only where
//! they choose to.

pub mod space;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Envelope, Payload, ProcessId, Round, Value};
use crate::protocol::{Composition, Outgoing};
use crate::trace::RoundRecord;

pub use space::{enumerate_strategy_space, Slot, SpaceTooLarge, StrategySpace, DEFAULT_SPACE_CAP};

/// One scripted send: in `round`, `sender` (or every faulty process when
/// omitted) sends `payload` to `receiver`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub round: Round,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sender: Option<usize>,
    pub receiver: usize,
    pub payload: Payload,
}

impl TableEntry {
    fn applies(&self, round: Round, me: ProcessId) -> bool {
        self.round == round && self.sender.is_none_or(|s| s == me.index())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    /// Follow the protocol.
    Honest,
    /// Never send anything.
    Silent,
    /// Follow the protocol through `after_round`, then go silent.
    Crash { after_round: Round },
    /// Use the table in the rounds it mentions; follow the protocol elsewhere.
    Equivocate { entries: Vec<TableEntry> },
    /// Send `help` to `targets` only in `round` (the layer's last round by
    /// default); follow the protocol elsewhere.
    FalseHelper {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        round: Option<Round>,
        targets: Vec<usize>,
    },
    /// Send exactly what the table lists and nothing else.
    Table {
        #[serde(default)]
        entries: Vec<TableEntry>,
    },
    /// Pick, per round and receiver, silence or a random payload.
    Random,
    /// Rushing only: replay the current-round sends of the lowest-id
    /// correct sender.
    Mimic,
}

impl Strategy {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Strategy::Honest => "honest",
            Strategy::Silent => "silent",
            Strategy::Crash { .. } => "crash",
            Strategy::Equivocate { .. } => "equivocate",
            Strategy::FalseHelper { .. } => "false-helper",
            Strategy::Table { .. } => "table",
            Strategy::Random => "random",
            Strategy::Mimic => "mimic",
        }
    }

    /// Parameter keys accepted for this kind in scenario files.
    pub fn parameter_keys(kind: &str) -> Option<&'static [&'static str]> {
        Some(match kind {
            "honest" | "silent" | "random" | "mimic" => &[],
            "crash" => &["after_round"],
            "equivocate" | "table" => &["entries"],
            "false-helper" => &["round", "targets"],
            _ => return None,
        })
    }

    pub fn entries(&self) -> &[TableEntry] {
        match self {
            Strategy::Equivocate { entries } | Strategy::Table { entries } => entries,
            _ => &[],
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    #[serde(flatten)]
    pub strategy: Strategy,
    /// Restrict every faulty payload to what a correct process could send
    /// in the same slot.
    #[serde(default = "yes")]
    pub format_constrained: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        Self::new(Strategy::Silent)
    }
}

impl AdversaryConfig {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            format_constrained: true,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn unconstrained(mut self) -> Self {
        self.format_constrained = false;
        self
    }
}

impl fmt::Display for AdversaryConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.strategy.kind_name())?;
        if !self.format_constrained {
            f.write_str(" (unconstrained)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error(
        "strategy `{strategy}` sent `{payload}` from {sender} to {receiver} in round {round}, \
         outside the protocol alphabet"
    )]
    OutOfAlphabet {
        strategy: String,
        round: Round,
        sender: ProcessId,
        receiver: ProcessId,
        payload: Payload,
    },
}

/// What a faulty process can see when choosing its round-`round` sends.
pub struct Observation<'a> {
    pub composition: &'a Composition,
    pub round: Round,
    pub me: ProcessId,
    pub faulty: &'a [ProcessId],
    /// What the honest shadow of `me` would send this round.
    pub honest: &'a [Outgoing],
    /// Correct processes' envelopes of this round, in rushing mode only.
    pub rushing_view: Option<&'a [Envelope]>,
    /// Completed rounds.
    pub history: &'a [RoundRecord],
}

impl Observation<'_> {
    /// Envelopes delivered to faulty processes in completed rounds.
    pub fn faulty_inboxes(&self) -> impl Iterator<Item = &Envelope> {
        self.history
            .iter()
            .flat_map(|r| r.envelopes.iter())
            .filter(|e| self.faulty.contains(&e.receiver))
    }
}

/// The sends of faulty process `obs.me` in `obs.round`.
pub fn adversary_sends(
    config: &AdversaryConfig,
    obs: &Observation<'_>,
) -> Result<Vec<Outgoing>, AdversaryError> {
    let round = obs.round;
    let me = obs.me;
    let table = |entries: &[TableEntry]| -> Vec<Outgoing> {
        entries
            .iter()
            .filter(|e| e.applies(round, me))
            .map(|e| Outgoing::new(ProcessId(e.receiver), e.payload))
            .collect()
    };
    let sends = match &config.strategy {
        Strategy::Honest => obs.honest.to_vec(),
        Strategy::Silent => Vec::new(),
        Strategy::Crash { after_round } if round <= *after_round => obs.honest.to_vec(),
        Strategy::Crash { .. } => Vec::new(),
        Strategy::Equivocate { entries } => {
            if entries.iter().any(|e| e.round == round) {
                table(entries)
            } else {
                obs.honest.to_vec()
            }
        }
        Strategy::FalseHelper { round: r, targets } => {
            let help_round = r.unwrap_or_else(|| obs.composition.handoff_time());
            if round == help_round {
                targets
                    .iter()
                    .map(|t| Outgoing::new(ProcessId(*t), Payload::Help))
                    .collect()
            } else {
                obs.honest.to_vec()
            }
        }
        Strategy::Table { entries } => table(entries),
        Strategy::Random => random_sends(config, obs),
        Strategy::Mimic => mimic_sends(obs),
    };
    if config.format_constrained {
        for out in &sends {
            if !obs
                .composition
                .alphabet(round, me, out.to)
                .contains(&out.payload)
            {
                return Err(AdversaryError::OutOfAlphabet {
                    strategy: config.strategy.kind_name().to_string(),
                    round,
                    sender: me,
                    receiver: out.to,
                    payload: out.payload,
                });
            }
        }
    }
    Ok(sends)
}

fn random_sends(config: &AdversaryConfig, obs: &Observation<'_>) -> Vec<Outgoing> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream((u64::from(obs.round) << 32) | obs.me.index() as u64);
    let params = obs.composition.params();
    let mut sends = Vec::new();
    for to in params.processes().filter(|p| *p != obs.me) {
        let mut pool = obs.composition.alphabet(obs.round, obs.me, to);
        if !config.format_constrained {
            pool.extend([
                Payload::Err,
                Payload::Help,
                Payload::ValueBit(rng.gen_range(0..=1)),
                Payload::ValueWide(Value(rng.gen_range(0..params.domain_size() + 2))),
                Payload::BaseMsg {
                    content: rng.gen(),
                    width: rng.gen_range(1..=16),
                },
            ]);
        }
        let pick = rng.gen_range(0..=pool.len());
        if pick > 0 {
            sends.push(Outgoing::new(to, pool[pick - 1]));
        }
    }
    sends
}

fn mimic_sends(obs: &Observation<'_>) -> Vec<Outgoing> {
    let Some(view) = obs.rushing_view else {
        return Vec::new();
    };
    let Some(model) = view.iter().map(|e| e.sender).min() else {
        return Vec::new();
    };
    view.iter()
        .filter(|e| e.sender == model && e.receiver != model)
        .map(|e| Outgoing::new(e.receiver, e.payload))
        .filter(|o| {
            obs.composition
                .alphabet(obs.round, obs.me, o.to)
                .contains(&o.payload)
        })
        .collect()
}
