//! Layer bit budgets and timing per case.
//!
//! Bounds are kept doubled so the `n(t + 1.5)` budget stays an integer.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layers::LayerName;
use crate::model::{value_width, SystemParams, Value};
use crate::trace::RunTrace;

use super::{Locus, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Failure-free (and, for L1, every input 1).
    Common,
    Uncommon,
}

impl Case {
    /// The case a trace falls in.
    pub fn of(trace: &RunTrace) -> Case {
        let s = &trace.scenario;
        let failure_free = s.faulty.is_empty();
        let unanimous_one = s.values.iter().all(|v| *v == 1);
        if failure_free && (s.layer != LayerName::L1 || unanimous_one) {
            Case::Common
        } else {
            Case::Uncommon
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Common => "common",
            Case::Uncommon => "uncommon",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BudgetError {
    #[error("bit budgets are only asserted against format-constrained adversaries")]
    Unconstrained,
    #[error("trace is not in the common case (faults present or, for l1, some input is not 1)")]
    NotCommon,
    #[error("layer `{0}` has no bit budget")]
    NoBudget(LayerName),
}

/// Twice the layer-phase bit budget of `layer` in `case`.
pub fn budget_bound_twice(
    layer: LayerName,
    params: &SystemParams,
    case: Case,
) -> Result<u64, BudgetError> {
    let n = params.n() as u64;
    let t = params.t() as u64;
    let w = u64::from(value_width(params));
    let (common, extra) = match layer {
        LayerName::L1 => (0, 2 * n * n),
        LayerName::L2 => (4 * n * (t + 1), 2 * n * n),
        LayerName::L3 => (2 * n * t + 3 * n, 4 * n * n),
        LayerName::L2m => (8 * n * (t + 1) * w, 2 * n * n),
        LayerName::L3m => (4 * n * (t + 1) * w, 4 * n * n),
        LayerName::None => return Err(BudgetError::NoBudget(layer)),
    };
    Ok(match case {
        Case::Common => common,
        Case::Uncommon => common + extra,
    })
}

/// Renders a doubled bound as a decimal.
pub fn format_twice(twice: u64) -> String {
    if twice.is_multiple_of(2) {
        (twice / 2).to_string()
    } else {
        format!("{}.5", twice / 2)
    }
}

/// Asserts the layer-phase bits and the decision or handoff times of `case`.
pub fn check_budget(trace: &RunTrace, case: Case) -> Result<Verdict, BudgetError> {
    let s = &trace.scenario;
    if !s.adversary.format_constrained && !s.faulty.is_empty() {
        return Err(BudgetError::Unconstrained);
    }
    if case == Case::Common && Case::of(trace) != Case::Common {
        return Err(BudgetError::NotCommon);
    }
    let params = trace.params();
    let bound = budget_bound_twice(s.layer, &params, case)?;
    let property = format!("budget.{}.{}", s.layer, case);
    let bits = trace.layer_bits_total;
    if 2 * bits > bound {
        return Ok(Verdict::fail(
            property,
            trace,
            Locus::run(),
            format!("layer bits {bits} exceed the bound {}", format_twice(bound)),
        ));
    }

    let handoff = trace.handoff_time;
    for p in trace.correct_processes() {
        if let Some((time, _)) = trace.base_entry[p.index()] {
            if time != handoff {
                return Ok(Verdict::fail(
                    property,
                    trace,
                    Locus::process(p),
                    format!("{p} entered the base at time {time}, expected {handoff}"),
                ));
            }
            if case == Case::Common {
                return Ok(Verdict::fail(
                    property,
                    trace,
                    Locus::process(p),
                    format!("{p} entered the base in the common case"),
                ));
            }
        }
    }

    if case == Case::Common {
        let expected = trace.common_decision_time;
        for p in trace.correct_processes() {
            let at = trace.decision_time[p.index()];
            if at != Some(expected) {
                return Ok(Verdict::fail(
                    property,
                    trace,
                    Locus::process(p),
                    format!("{p} decided at {at:?}, expected time {expected}"),
                ));
            }
        }
        if s.layer == LayerName::L1 && trace.decisions.iter().flatten().any(|v| *v != Value::ONE)
        {
            return Ok(Verdict::fail(
                property,
                trace,
                Locus::run(),
                "unanimous common case decided something other than 1",
            ));
        }
    }
    Ok(Verdict::pass(property))
}
