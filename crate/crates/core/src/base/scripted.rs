//! A message-free test stub standing in for a real base protocol. Each
//! participant halts on a scripted value after a scripted number of rounds.
//!
//! Script syntax: `RULE[;PID=RULE]...` where `RULE` is `echo` or
//! `always=V`, optionally followed by `/R` (rounds, default 0).
//! Examples: `echo`, `always=1/1`, `echo/2;3=always=0`.

use std::collections::BTreeMap;
use std::fmt;

use crate::model::{Payload, ProcessId, ProcessStatus, Round, SystemParams, Value};
use crate::protocol::{BaseSpec, Inbox, Outgoing, Protocol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptRule {
    /// Decide the estimate the base was entered with.
    Echo,
    Always(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptEntry {
    pub rule: ScriptRule,
    pub rounds: Round,
}

impl ScriptEntry {
    fn parse(s: &str) -> Result<Self, String> {
        let (rule, rounds) = match s.split_once('/') {
            Some((rule, r)) => (
                rule,
                r.parse()
                    .map_err(|_| format!("bad round count `{r}` in script entry `{s}`"))?,
            ),
            None => (s, 0),
        };
        let rule = if rule == "echo" {
            ScriptRule::Echo
        } else if let Some(v) = rule.strip_prefix("always=") {
            ScriptRule::Always(Value(
                v.parse()
                    .map_err(|_| format!("bad value `{v}` in script entry `{s}`"))?,
            ))
        } else {
            return Err(format!("unknown script rule `{rule}` (expected echo or always=V)"));
        };
        Ok(Self { rule, rounds })
    }
}

impl fmt::Display for ScriptEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            ScriptRule::Echo => f.write_str("echo")?,
            ScriptRule::Always(v) => write!(f, "always={v}")?,
        }
        if self.rounds > 0 {
            write!(f, "/{}", self.rounds)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptedBase {
    default: ScriptEntry,
    overrides: BTreeMap<usize, ScriptEntry>,
}

impl ScriptedBase {
    pub fn echo() -> Self {
        Self::uniform(ScriptEntry {
            rule: ScriptRule::Echo,
            rounds: 0,
        })
    }

    pub fn uniform(entry: ScriptEntry) -> Self {
        Self {
            default: entry,
            overrides: BTreeMap::new(),
        }
    }

    pub fn parse(script: &str) -> Result<Self, String> {
        let mut parts = script.split(';');
        let default = ScriptEntry::parse(parts.next().unwrap_or_default())?;
        let mut overrides = BTreeMap::new();
        for part in parts {
            let (pid, entry) = part
                .split_once('=')
                .ok_or_else(|| format!("override `{part}` must look like PID=RULE"))?;
            let pid: usize = pid
                .parse()
                .map_err(|_| format!("bad process id `{pid}` in override `{part}`"))?;
            overrides.insert(pid, ScriptEntry::parse(entry)?);
        }
        Ok(Self { default, overrides })
    }

    pub fn entry_for(&self, p: ProcessId) -> ScriptEntry {
        self.overrides.get(&p.index()).copied().unwrap_or(self.default)
    }

    pub fn check_domain(&self, params: &SystemParams) -> Result<(), String> {
        for (pid, e) in std::iter::once((None, &self.default))
            .chain(self.overrides.iter().map(|(p, e)| (Some(*p), e)))
        {
            if let Some(p) = pid {
                if p >= params.n() {
                    return Err(format!("script override for process {p} but n = {}", params.n()));
                }
            }
            if let ScriptRule::Always(v) = e.rule {
                params.check_value(v).map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for ScriptedBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scripted:{}", self.default)?;
        for (p, e) in &self.overrides {
            write!(f, ";{p}={e}")?;
        }
        Ok(())
    }
}

impl BaseSpec for ScriptedBase {
    fn name(&self) -> String {
        self.to_string()
    }

    fn resilience(&self) -> usize {
        3
    }

    fn max_rounds(&self, _: &SystemParams) -> Round {
        std::iter::once(&self.default)
            .chain(self.overrides.values())
            .map(|e| e.rounds)
            .max()
            .unwrap_or(0)
    }

    fn instantiate(&self, _: &SystemParams, me: ProcessId, est: Value) -> Box<dyn Protocol> {
        let entry = self.entry_for(me);
        let value = match entry.rule {
            ScriptRule::Echo => est,
            ScriptRule::Always(v) => v,
        };
        Box::new(ScriptedState {
            value,
            remaining: entry.rounds,
        })
    }

    fn alphabet(&self, _: &SystemParams, _: Round, _: ProcessId, _: ProcessId) -> Vec<Payload> {
        Vec::new()
    }
}

#[derive(Debug, Clone)]
struct ScriptedState {
    value: Value,
    remaining: Round,
}

impl Protocol for ScriptedState {
    fn send(&self, _: Round) -> Vec<Outgoing> {
        Vec::new()
    }

    fn receive(&mut self, _: Round, _: &Inbox<'_>) {
        self.remaining = self.remaining.saturating_sub(1);
    }

    fn status(&self) -> ProcessStatus {
        if self.remaining == 0 {
            ProcessStatus::Halted(self.value)
        } else {
            ProcessStatus::Running
        }
    }
}
