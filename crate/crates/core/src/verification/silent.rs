//! Silent broadcasts: a round in which each sender in `S` messages every
//! receiver in `T` unless its local fact holds, so an empty inbox from `S`
//! certifies that the fact held at every correct sender one step earlier.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{ProcessId, Round, SystemParams, Time, Value};
use crate::trace::RunTrace;

use super::{Locus, Verdict};

/// A predicate on one process's local state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalFact {
    InitialValueIs(Value),
    Decided,
    /// Every committee recommendation decoded at time 2 was the same.
    UnanimousRecommendation,
    Always,
}

impl fmt::Display for LocalFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalFact::InitialValueIs(v) => write!(f, "initial={v}"),
            LocalFact::Decided => f.write_str("decided"),
            LocalFact::UnanimousRecommendation => f.write_str("unanimous-recommendation"),
            LocalFact::Always => f.write_str("always"),
        }
    }
}

impl FromStr for LocalFact {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "decided" => Ok(LocalFact::Decided),
            "unanimous-recommendation" => Ok(LocalFact::UnanimousRecommendation),
            "always" => Ok(LocalFact::Always),
            _ => s
                .strip_prefix("initial=")
                .and_then(|v| v.parse().ok())
                .map(|v| LocalFact::InitialValueIs(Value(v)))
                .ok_or_else(|| {
                    format!(
                        "unknown fact `{s}` (expected initial=V, decided, \
                         unanimous-recommendation or always)"
                    )
                }),
        }
    }
}

impl Serialize for LocalFact {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LocalFact {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A registered silent broadcast of `fact` in `round`, from `senders` to
/// `receivers`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SilentBroadcastSpec {
    pub round: Round,
    pub senders: Vec<ProcessId>,
    pub receivers: Vec<ProcessId>,
    pub fact: LocalFact,
}

impl SilentBroadcastSpec {
    /// A silent confirmation round: everyone to everyone.
    pub fn confirmation(params: &SystemParams, round: Round, fact: LocalFact) -> Self {
        Self::between(
            round,
            params.processes().collect(),
            params.processes().collect(),
            fact,
        )
    }

    pub fn between(
        round: Round,
        senders: Vec<ProcessId>,
        receivers: Vec<ProcessId>,
        fact: LocalFact,
    ) -> Self {
        Self {
            round,
            senders,
            receivers,
            fact,
        }
    }

    /// The time at which the fact is evaluated.
    pub fn fact_time(&self) -> Time {
        self.round - 1
    }

    pub fn label(&self) -> String {
        format!("scr[round {}, {}]", self.round, self.fact)
    }
}

/// Checks the implementation obligation and the truth consequence of the
/// `index`-th silent broadcast registered in `trace`.
pub fn check_silent_broadcast(trace: &RunTrace, index: usize) -> [Verdict; 2] {
    let spec = &trace.silent_broadcasts[index];
    let obligation = format!("{}.obligation", spec.label());
    let truth = format!("{}.truth", spec.label());

    let Some(record) = trace.rounds.iter().find(|r| r.round == spec.round) else {
        let why = format!("round {} was never executed", spec.round);
        return [
            Verdict::inconclusive(obligation, why.clone()),
            Verdict::inconclusive(truth, why),
        ];
    };
    let Some(facts) = record.facts.iter().find(|f| f.spec == index) else {
        let why = format!("fact not recorded at time {}", spec.fact_time());
        return [
            Verdict::inconclusive(obligation, why.clone()),
            Verdict::inconclusive(truth, why),
        ];
    };

    let correct_senders: Vec<ProcessId> = spec
        .senders
        .iter()
        .copied()
        .filter(|i| trace.is_correct(*i))
        .collect();
    let fact_of = |i: ProcessId| facts.values.get(i.index()).copied().flatten();
    let sent = |i: ProcessId, j: ProcessId| {
        record
            .envelopes
            .iter()
            .any(|e| e.sender == i && e.receiver == j)
    };

    let mut obligation_verdict = Verdict::pass(obligation.clone());
    'outer: for &i in &correct_senders {
        match fact_of(i) {
            None => {
                obligation_verdict = Verdict::inconclusive(
                    obligation.clone(),
                    format!("fact not evaluable at {i}"),
                );
                break;
            }
            Some(true) => {}
            Some(false) => {
                for &j in &spec.receivers {
                    if !sent(i, j) {
                        obligation_verdict = Verdict::fail(
                            obligation.clone(),
                            trace,
                            Locus::at(i, spec.round),
                            format!(
                                "{i} did not hold `{}` at time {} yet sent nothing to {j}",
                                spec.fact,
                                spec.fact_time()
                            ),
                        );
                        break 'outer;
                    }
                }
            }
        }
    }

    let mut truth_verdict = Verdict::pass(truth.clone());
    for &j in spec.receivers.iter().filter(|j| trace.is_correct(**j)) {
        let heard = spec.senders.iter().any(|&i| sent(i, j));
        if heard {
            continue;
        }
        if let Some(&i) = correct_senders.iter().find(|&&i| fact_of(i) != Some(true)) {
            truth_verdict = Verdict::fail(
                truth,
                trace,
                Locus::at(j, spec.round),
                format!(
                    "{j} heard nothing from the senders in round {} but `{}` did not hold at {i}",
                    spec.round, spec.fact
                ),
            );
            break;
        }
    }
    [obligation_verdict, truth_verdict]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fact_text_round_trips() {
        for f in [
            LocalFact::InitialValueIs(Value(3)),
            LocalFact::Decided,
            LocalFact::UnanimousRecommendation,
            LocalFact::Always,
        ] {
            assert_eq!(f.to_string().parse::<LocalFact>().unwrap(), f);
        }
        assert!("initial=x".parse::<LocalFact>().is_err());
    }

    #[test]
    fn confirmation_covers_everyone() {
        let params = SystemParams::binary(5, 1).unwrap();
        let spec = SilentBroadcastSpec::confirmation(&params, 3, LocalFact::Decided);
        assert_eq!(spec.senders.len(), 5);
        assert_eq!(spec.receivers, spec.senders);
        assert_eq!(spec.fact_time(), 2);
    }
}
