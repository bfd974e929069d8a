//! Scenario files: one experiment, in TOML.
//!
//! ```toml
//! format = "ccsim-scenario/1"
//! n = 4
//! t = 1
//! values = [1, 1, 0, 0]
//! layer = "l2"
//! base = "phase-king"
//! faulty = [3]
//!
//! [adversary]
//! kind = "false-helper"
//! targets = [0]
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryConfig, Strategy};
use crate::base::build_base;
use crate::layers::{build_layer, LayerName, MvCommonDefaults, Mutation};
use crate::model::{ModelError, ProcessId, Round, SystemParams, Value};
use crate::protocol::{compose, Composition, ConfigError};
use crate::verification::silent::SilentBroadcastSpec;

pub const SCENARIO_FORMAT: &str = "ccsim-scenario/1";

/// Largest adversary seed; scenario files store integers as signed 64-bit.
pub const MAX_SEED: u64 = i64::MAX as u64;

fn default_format() -> String {
    SCENARIO_FORMAT.to_string()
}

fn binary_domain() -> u32 {
    2
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub t: usize,
    /// Size of the value domain `{0, ..., domain-1}`.
    #[serde(default = "binary_domain")]
    pub domain: u32,
    /// Initial value of every process, faulty ones included.
    pub values: Vec<u32>,
    pub layer: LayerName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
    pub base: String,
    #[serde(default)]
    pub faulty: Vec<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub rushing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_cap: Option<Round>,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mv_defaults: Option<MvCommonDefaults>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub silent_broadcasts: Vec<SilentBroadcastSpec>,
}

/// A scenario problem, with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub field: String,
    pub message: String,
}

impl ScenarioError {
    fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ScenarioError {}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub params: SystemParams,
    pub composition: Composition,
    pub faulty: Vec<ProcessId>,
    pub initial: Vec<Value>,
    pub round_cap: Round,
    pub silent_broadcasts: Vec<SilentBroadcastSpec>,
}

impl Setup {
    pub fn is_faulty(&self, p: ProcessId) -> bool {
        self.faulty.contains(&p)
    }
}

impl Scenario {
    /// A failure-free scenario with a silent adversary.
    pub fn new(n: usize, t: usize, layer: LayerName, base: &str, values: Vec<u32>) -> Self {
        Self {
            format: default_format(),
            name: None,
            n,
            t,
            domain: 2,
            values,
            layer,
            mutation: None,
            base: base.to_string(),
            faulty: Vec::new(),
            rushing: false,
            round_cap: None,
            adversary: AdversaryConfig::default(),
            mv_defaults: None,
            silent_broadcasts: Vec::new(),
        }
    }

    pub fn with_domain(mut self, domain: u32) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_faulty(mut self, faulty: Vec<usize>, adversary: AdversaryConfig) -> Self {
        self.faulty = faulty;
        self.adversary = adversary;
        self
    }

    pub fn with_strategy(self, faulty: Vec<usize>, strategy: Strategy) -> Self {
        self.with_faulty(faulty, AdversaryConfig::new(strategy))
    }

    pub fn with_mutation(mut self, mutation: Mutation) -> Self {
        self.mutation = Some(mutation);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn rushing(mut self, rushing: bool) -> Self {
        self.rushing = rushing;
        self
    }

    /// Parses and validates a scenario file.
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        check_adversary_keys(text)?;
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|sp| locate_key(text, sp.start))
                .unwrap_or_else(|| "scenario".to_string());
            ScenarioError::new(field, e.message())
        })?;
        s.setup()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    pub fn params(&self) -> Result<SystemParams, ScenarioError> {
        SystemParams::new(self.n, self.t, self.domain).map_err(|e| {
            let field = match e {
                ModelError::TooFewProcesses(_) => "n",
                ModelError::BadFaultBound { .. } => "t",
                _ => "domain",
            };
            ScenarioError::new(field, e)
        })
    }

    /// Validates every field and builds the composed protocol.
    pub fn setup(&self) -> Result<Setup, ScenarioError> {
        if self.format != SCENARIO_FORMAT {
            return Err(ScenarioError::new(
                "format",
                format!("expected `{SCENARIO_FORMAT}`, got `{}`", self.format),
            ));
        }
        let params = self.params()?;
        if self.values.len() != params.n() {
            return Err(ScenarioError::new(
                "values",
                format!("expected {} entries, got {}", params.n(), self.values.len()),
            ));
        }
        let mut initial = Vec::with_capacity(params.n());
        for (i, v) in self.values.iter().enumerate() {
            initial.push(
                params
                    .check_value(Value(*v))
                    .map_err(|e| ScenarioError::new(format!("values[{i}]"), e))?,
            );
        }

        let mut faulty = BTreeSet::new();
        for (k, f) in self.faulty.iter().enumerate() {
            let field = format!("faulty[{k}]");
            params
                .check_process(ProcessId(*f))
                .map_err(|e| ScenarioError::new(field.clone(), e))?;
            if !faulty.insert(ProcessId(*f)) {
                return Err(ScenarioError::new(field, format!("process {f} listed twice")));
            }
        }
        if faulty.len() > params.t() {
            return Err(ScenarioError::new(
                "faulty",
                format!("{} faulty processes exceed t = {}", faulty.len(), params.t()),
            ));
        }

        if let Some(d) = &self.mv_defaults {
            if !self.layer.is_multi_valued() {
                return Err(ScenarioError::new(
                    "mv_defaults",
                    format!("layer `{}` does not use common defaults", self.layer),
                ));
            }
            if d.common_proposal.len() != params.n() {
                return Err(ScenarioError::new(
                    "mv_defaults.common_proposal",
                    format!("expected {} entries, got {}", params.n(), d.common_proposal.len()),
                ));
            }
        }
        let layer = build_layer(self.layer, self.mutation, &params, self.mv_defaults.clone())
            .map_err(|e| {
                let field = match e {
                    ConfigError::MutationMismatch { .. } => "mutation",
                    ConfigError::DefaultsLength { .. } | ConfigError::DefaultOutOfDomain(_) => {
                        "mv_defaults"
                    }
                    _ => "layer",
                };
                ScenarioError::new(field, e)
            })?;
        let base = build_base(&self.base, &params).map_err(|e| ScenarioError::new("base", e))?;
        let composition =
            compose(Arc::clone(&layer), base, params).map_err(|e| ScenarioError::new("base", e))?;

        self.check_adversary(&params)?;

        let mut silent_broadcasts = layer.silent_broadcasts(&params);
        for (k, spec) in self.silent_broadcasts.iter().enumerate() {
            let field = format!("silent_broadcasts[{k}]");
            if spec.round == 0 {
                return Err(ScenarioError::new(field + ".round", "rounds start at 1"));
            }
            for p in spec.senders.iter().chain(&spec.receivers) {
                params
                    .check_process(*p)
                    .map_err(|e| ScenarioError::new(field.clone(), e))?;
            }
            silent_broadcasts.push(spec.clone());
        }

        let round_cap = match self.round_cap {
            Some(0) => return Err(ScenarioError::new("round_cap", "must be at least 1")),
            Some(cap) => cap,
            None => composition.default_round_cap(),
        };

        Ok(Setup {
            params,
            composition,
            faulty: faulty.into_iter().collect(),
            initial,
            round_cap,
            silent_broadcasts,
        })
    }

    fn check_adversary(&self, params: &SystemParams) -> Result<(), ScenarioError> {
        let check = |field: String, id: usize| {
            params
                .check_process(ProcessId(id))
                .map(|_| ())
                .map_err(|e| ScenarioError::new(field, e))
        };
        if self.adversary.seed > MAX_SEED {
            return Err(ScenarioError::new(
                "adversary.seed",
                format!("must be at most {MAX_SEED} to fit a scenario file"),
            ));
        }
        for (k, e) in self.adversary.strategy.entries().iter().enumerate() {
            let field = format!("adversary.entries[{k}]");
            if e.round == 0 {
                return Err(ScenarioError::new(field + ".round", "rounds start at 1"));
            }
            check(format!("{field}.receiver"), e.receiver)?;
            if let Some(s) = e.sender {
                check(format!("{field}.sender"), s)?;
                if !self.faulty.contains(&s) {
                    return Err(ScenarioError::new(
                        format!("{field}.sender"),
                        format!("process {s} is not faulty"),
                    ));
                }
            }
        }
        if let Strategy::FalseHelper { targets, .. } = &self.adversary.strategy {
            for (k, t) in targets.iter().enumerate() {
                check(format!("adversary.targets[{k}]"), *t)?;
            }
        }
        Ok(())
    }

    /// Lexicographic key used to order batches of runs.
    pub fn sort_key(&self) -> String {
        self.to_toml_string()
    }
}

/// Rejects unknown keys in the `[adversary]` table, which serde cannot do
/// through the flattened strategy.
fn check_adversary_keys(text: &str) -> Result<(), ScenarioError> {
    let Ok(doc) = text.parse::<toml::Table>() else {
        // syntax errors are reported by the typed parse
        return Ok(());
    };
    let Some(toml::Value::Table(adv)) = doc.get("adversary") else {
        return Ok(());
    };
    let Some(kind) = adv.get("kind").and_then(toml::Value::as_str) else {
        return Ok(());
    };
    let Some(params) = Strategy::parameter_keys(kind) else {
        return Ok(());
    };
    for key in adv.keys() {
        let known = ["kind", "format_constrained", "seed"].contains(&key.as_str())
            || params.contains(&key.as_str());
        if !known {
            return Err(ScenarioError::new(
                format!("adversary.{key}"),
                format!("unknown field for adversary kind `{kind}`"),
            ));
        }
    }
    Ok(())
}

/// Best-effort dotted path of the key a parse error points into.
fn locate_key(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let mut table = String::new();
    for line in before.lines() {
        let l = line.trim();
        if let Some(h) = l.strip_prefix("[[").and_then(|h| h.strip_suffix("]]")) {
            table = h.trim().to_string();
        } else if let Some(h) = l.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            table = h.trim().to_string();
        }
    }
    let line = before.rsplit('\n').next().unwrap_or_default();
    let current = text[before.len() - line.len()..]
        .lines()
        .next()
        .unwrap_or_default();
    let key = current
        .split_once('=')
        .map(|(k, _)| k.trim().to_string())
        .filter(|k| !k.starts_with('['));
    match (table.is_empty(), key) {
        (true, Some(k)) => k,
        (false, Some(k)) => format!("{table}.{k}"),
        (false, None) => table,
        (true, None) => "scenario".to_string(),
    }
}
