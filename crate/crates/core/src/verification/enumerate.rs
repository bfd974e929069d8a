//! Exhaustive small-instance oracle: every correct-input vector crossed
//! with every format-constrained adversary table over a round horizon.

use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::{AdversaryConfig, StrategySpace};
use crate::engine::run_lenient;
use crate::model::{ProcessId, Round};
use crate::scenario::{Scenario, ScenarioError};
use crate::trace::RunTrace;

/// A scenario template plus the faulty sets to enumerate. Faulty processes
/// get input 0; the template's values are otherwise ignored.
#[derive(Debug, Clone)]
pub struct Family {
    pub template: Scenario,
    pub faulty_sets: Vec<Vec<usize>>,
    /// Rounds covered by the adversary tables; the layer length by default.
    pub horizon: Option<Round>,
}

impl Family {
    pub fn new(template: Scenario, faulty_sets: Vec<Vec<usize>>) -> Self {
        Self {
            template,
            faulty_sets,
            horizon: None,
        }
    }

    pub fn with_horizon(mut self, horizon: Round) -> Self {
        self.horizon = Some(horizon);
        self
    }
}

#[derive(Debug, Error)]
pub enum EnumerationError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("family holds {size} runs, above the cap of {cap}")]
    TooLarge { size: u128, cap: u128 },
    #[error("run {index} failed: {message}")]
    Run { index: usize, message: String },
}

struct Member {
    template: Scenario,
    space: StrategySpace,
    inputs: u128,
}

fn members(family: &Family) -> Result<Vec<Member>, EnumerationError> {
    let mut out = Vec::new();
    for faulty in &family.faulty_sets {
        let mut template = family.template.clone();
        template.faulty = faulty.clone();
        template.values = vec![0; template.n];
        template.adversary = AdversaryConfig {
            strategy: crate::adversary::Strategy::Table { entries: vec![] },
            format_constrained: true,
            seed: family.template.adversary.seed,
        };
        let setup = template.setup()?;
        let horizon = family
            .horizon
            .unwrap_or_else(|| setup.composition.handoff_time());
        let space = StrategySpace::new(&setup.composition, &setup.faulty, horizon);
        let correct = template.n - faulty.len();
        let inputs = u128::from(template.domain)
            .checked_pow(correct as u32)
            .unwrap_or(u128::MAX);
        out.push(Member {
            template,
            space,
            inputs,
        });
    }
    Ok(out)
}

/// Number of runs in the family.
pub fn family_size(family: &Family) -> Result<u128, EnumerationError> {
    Ok(members(family)?
        .iter()
        .map(|m| m.inputs.saturating_mul(m.space.size()))
        .fold(0u128, u128::saturating_add))
}

/// Every scenario of the family, ordered by faulty set, then correct-input
/// vector (lexicographic), then strategy index.
pub fn family_scenarios(family: &Family, cap: u128) -> Result<Vec<Scenario>, EnumerationError> {
    let members = members(family)?;
    let size = members
        .iter()
        .map(|m| m.inputs.saturating_mul(m.space.size()))
        .fold(0u128, u128::saturating_add);
    if size > cap {
        return Err(EnumerationError::TooLarge { size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    for m in &members {
        let correct: Vec<usize> = (0..m.template.n)
            .filter(|i| !m.template.faulty.contains(i))
            .collect();
        let domain = u128::from(m.template.domain);
        for input in 0..m.inputs {
            let mut values = vec![0u32; m.template.n];
            let mut rest = input;
            for &i in correct.iter().rev() {
                values[i] = (rest % domain) as u32;
                rest /= domain;
            }
            for s in 0..m.space.size() {
                let mut scenario = m.template.clone();
                scenario.values.clone_from(&values);
                scenario.adversary.strategy = m.space.strategy(s);
                out.push(scenario);
            }
        }
    }
    Ok(out)
}

/// Runs every scenario of the family in parallel; output order matches
/// [`family_scenarios`].
pub fn enumerate_runs(family: &Family, cap: u128) -> Result<Vec<RunTrace>, EnumerationError> {
    run_all(&family_scenarios(family, cap)?)
}

/// Runs a batch in parallel, keeping input order.
pub fn run_all(scenarios: &[Scenario]) -> Result<Vec<RunTrace>, EnumerationError> {
    scenarios
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            run_lenient(s).map_err(|e| EnumerationError::Run {
                index,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Faulty sets of size exactly `k` among `n` processes, lexicographic.
pub fn faulty_sets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Ids of a faulty set, as process ids.
pub fn as_processes(set: &[usize]) -> Vec<ProcessId> {
    set.iter().copied().map(ProcessId).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_counted() {
        assert_eq!(faulty_sets_of_size(4, 1).len(), 4);
        assert_eq!(faulty_sets_of_size(5, 2).len(), 10);
        assert_eq!(faulty_sets_of_size(4, 0), vec![Vec::<usize>::new()]);
    }
}
