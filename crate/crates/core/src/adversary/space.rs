//! Exhaustive enumeration of format-constrained adversary tables.

use thiserror::Error;

use crate::model::{Payload, ProcessId, Round};
use crate::protocol::Composition;

use super::{Strategy, TableEntry};

pub const DEFAULT_SPACE_CAP: u128 = 1_000_000;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("space holds {size} members, above the cap of {cap}")]
pub struct SpaceTooLarge {
    pub size: u128,
    pub cap: u128,
}

/// One independent choice: silence or one alphabet payload from `sender`
/// to `receiver` in `round`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub round: Round,
    pub sender: ProcessId,
    pub receiver: ProcessId,
    pub alphabet: Vec<Payload>,
}

impl Slot {
    fn radix(&self) -> u128 {
        self.alphabet.len() as u128 + 1
    }
}

/// Every table a set of faulty processes can play against correct
/// receivers in rounds `1..=horizon`, indexed in mixed radix.
#[derive(Debug, Clone)]
pub struct StrategySpace {
    slots: Vec<Slot>,
    size: u128,
}

impl StrategySpace {
    pub fn new(composition: &Composition, faulty: &[ProcessId], horizon: Round) -> Self {
        let params = composition.params();
        let mut slots = Vec::new();
        for round in 1..=horizon {
            for &sender in faulty {
                for receiver in params.processes().filter(|p| !faulty.contains(p)) {
                    let mut alphabet = composition.alphabet(round, sender, receiver);
                    alphabet.sort();
                    alphabet.dedup();
                    if !alphabet.is_empty() {
                        slots.push(Slot {
                            round,
                            sender,
                            receiver,
                            alphabet,
                        });
                    }
                }
            }
        }
        let size = slots
            .iter()
            .try_fold(1u128, |acc, s| acc.checked_mul(s.radix()))
            .unwrap_or(u128::MAX);
        Self { slots, size }
    }

    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// The `index`-th table; digit 0 of a slot is silence.
    pub fn strategy(&self, mut index: u128) -> Strategy {
        assert!(index < self.size, "strategy index out of range");
        let mut entries = Vec::new();
        for slot in &self.slots {
            let digit = (index % slot.radix()) as usize;
            index /= slot.radix();
            if digit > 0 {
                entries.push(TableEntry {
                    round: slot.round,
                    sender: Some(slot.sender.index()),
                    receiver: slot.receiver.index(),
                    payload: slot.alphabet[digit - 1],
                });
            }
        }
        Strategy::Table { entries }
    }
}

/// All tables of the space, or the computed size when above `cap`.
pub fn enumerate_strategy_space(
    composition: &Composition,
    faulty: &[ProcessId],
    horizon: Round,
    cap: u128,
) -> Result<Vec<Strategy>, SpaceTooLarge> {
    let space = StrategySpace::new(composition, faulty, horizon);
    if space.size() > cap {
        return Err(SpaceTooLarge {
            size: space.size(),
            cap,
        });
    }
    Ok((0..space.size()).map(|i| space.strategy(i)).collect())
}
