//! Domain types shared by every module: system parameters, process ids,
//! consensus values, message payloads and their bit accounting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A synchronous round number. Round `m + 1` spans time `m` to time `m + 1`.
pub type Round = u32;

/// A point in global time. Time 0 precedes round 1.
pub type Time = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("n must be greater than 2 (got n = {0})")]
    TooFewProcesses(usize),
    #[error("t must satisfy 1 <= t < n (got n = {n}, t = {t})")]
    BadFaultBound { n: usize, t: usize },
    #[error("value domain must contain at least 2 values (got {0})")]
    DomainTooSmall(u32),
    #[error("value {value} is outside the value domain of size {domain}")]
    ValueOutOfDomain { value: u32, domain: u32 },
    #[error("process id {id} is outside [0, {n})")]
    ProcessOutOfRange { id: usize, n: usize },
    #[error("base payload width must be at least 1 bit")]
    ZeroWidthBasePayload,
    #[error("malformed payload `{0}`")]
    MalformedPayload(String),
    #[error("unknown process status `{0}`")]
    MalformedStatus(String),
}

/// Identity of a process in `{0, ..., n-1}`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ProcessId(pub usize);

impl ProcessId {
    pub fn index(self) -> usize {
        self.0
    }

    /// Parity of the id, used by the split-broadcast codec.
    pub fn parity(self) -> u8 {
        (self.0 % 2) as u8
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// A consensus value. The value domain is the canonical ordered set
/// `{0, 1, ..., |V|-1}`; binary consensus uses `{0, 1}`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct Value(pub u32);

impl Value {
    pub const ZERO: Value = Value(0);
    pub const ONE: Value = Value(1);

    pub fn bit(b: u8) -> Value {
        Value(u32::from(b & 1))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Process count, fault bound and value domain of one system instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemParams {
    n: usize,
    t: usize,
    domain: u32,
}

impl SystemParams {
    pub fn new(n: usize, t: usize, domain: u32) -> Result<Self, ModelError> {
        if n <= 2 {
            return Err(ModelError::TooFewProcesses(n));
        }
        if t < 1 || t >= n {
            return Err(ModelError::BadFaultBound { n, t });
        }
        if domain < 2 {
            return Err(ModelError::DomainTooSmall(domain));
        }
        Ok(Self { n, t, domain })
    }

    pub fn binary(n: usize, t: usize) -> Result<Self, ModelError> {
        Self::new(n, t, 2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Size of the value domain `|V|`.
    pub fn domain_size(&self) -> u32 {
        self.domain
    }

    pub fn is_binary(&self) -> bool {
        self.domain == 2
    }

    pub fn processes(&self) -> impl Iterator<Item = ProcessId> + Clone {
        (0..self.n).map(ProcessId)
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + Clone {
        (0..self.domain).map(Value)
    }

    /// Smallest element of the value domain.
    pub fn default_value(&self) -> Value {
        Value::ZERO
    }

    pub fn contains(&self, v: Value) -> bool {
        v.0 < self.domain
    }

    pub fn check_value(&self, v: Value) -> Result<Value, ModelError> {
        if self.contains(v) {
            Ok(v)
        } else {
            Err(ModelError::ValueOutOfDomain {
                value: v.0,
                domain: self.domain,
            })
        }
    }

    pub fn check_process(&self, p: ProcessId) -> Result<ProcessId, ModelError> {
        if p.0 < self.n {
            Ok(p)
        } else {
            Err(ModelError::ProcessOutOfRange { id: p.0, n: self.n })
        }
    }
}

/// `ceil(log2 |V|)`, the width of an explicitly transmitted value.
pub fn value_width(params: &SystemParams) -> u32 {
    bits_to_represent(params.domain_size())
}

/// Number of bits needed to distinguish `count` symbols.
fn bits_to_represent(count: u32) -> u32 {
    if count <= 1 {
        1
    } else {
        32 - (count - 1).leading_zeros()
    }
}

/// Message content carried by one envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    /// A single binary symbol.
    ValueBit(u8),
    /// An explicitly encoded element of the value domain.
    ValueWide(Value),
    Err,
    Help,
    /// Base-protocol message with opaque content and a declared width.
    BaseMsg { content: u64, width: u32 },
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::ValueBit(_) => PayloadKind::Bit,
            Payload::ValueWide(_) => PayloadKind::Wide,
            Payload::Err => PayloadKind::Err,
            Payload::Help => PayloadKind::Help,
            Payload::BaseMsg { .. } => PayloadKind::Base,
        }
    }

    /// The value part as written in trace records.
    pub fn value_text(&self) -> String {
        match self {
            Payload::ValueBit(b) => b.to_string(),
            Payload::ValueWide(v) => v.0.to_string(),
            Payload::Err | Payload::Help => "-".to_string(),
            Payload::BaseMsg { content, width } => format!("{content}/{width}"),
        }
    }

    pub fn from_parts(kind: &str, value: &str) -> Result<Payload, ModelError> {
        let bad = || ModelError::MalformedPayload(format!("{kind}:{value}"));
        match kind {
            "bit" => {
                let b: u8 = value.parse().map_err(|_| bad())?;
                if b > 1 {
                    return Err(bad());
                }
                Ok(Payload::ValueBit(b))
            }
            "wide" => Ok(Payload::ValueWide(Value(
                value.parse().map_err(|_| bad())?,
            ))),
            "err" => Ok(Payload::Err),
            "help" => Ok(Payload::Help),
            "base" => {
                let (c, w) = value.split_once('/').ok_or_else(bad)?;
                Ok(Payload::BaseMsg {
                    content: c.parse().map_err(|_| bad())?,
                    width: w.parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Err | Payload::Help => write!(f, "{}", self.kind()),
            _ => write!(f, "{}:{}", self.kind(), self.value_text()),
        }
    }
}

impl FromStr for Payload {
    type Err = ModelError;

    /// Accepts `err`, `help`, `bit:B`, `wide:V` and `base:C/W`.
    fn from_str(s: &str) -> Result<Self, ModelError> {
        match s.split_once(':') {
            Some((kind, value)) => Payload::from_parts(kind, value),
            None => Payload::from_parts(s, "-"),
        }
    }
}

impl Serialize for Payload {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Payload {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PayloadKind {
    Bit,
    Wide,
    Err,
    Help,
    Base,
}

impl fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayloadKind::Bit => "bit",
            PayloadKind::Wide => "wide",
            PayloadKind::Err => "err",
            PayloadKind::Help => "help",
            PayloadKind::Base => "base",
        })
    }
}

/// Bit width of a payload under the given value domain.
pub fn payload_bits(payload: &Payload, params: &SystemParams) -> Result<u32, ModelError> {
    match payload {
        Payload::ValueBit(b) if *b <= 1 => Ok(1),
        Payload::ValueBit(_) => Err(ModelError::MalformedPayload(payload.to_string())),
        Payload::Err | Payload::Help => Ok(1),
        Payload::ValueWide(v) => {
            params.check_value(*v)?;
            Ok(value_width(params))
        }
        Payload::BaseMsg { width: 0, .. } => Err(ModelError::ZeroWidthBasePayload),
        Payload::BaseMsg { width, .. } => Ok(*width),
    }
}

/// Width charged on the wire for a payload that may be malformed (faulty
/// senders only): the declared width when well formed, otherwise the bits
/// needed to carry the raw symbol.
pub fn wire_bits(payload: &Payload, params: &SystemParams) -> u32 {
    match payload_bits(payload, params) {
        Ok(bits) => bits,
        Err(_) => match payload {
            Payload::ValueWide(v) => bits_to_represent(v.0.saturating_add(1)),
            Payload::ValueBit(b) => bits_to_represent(u32::from(*b) + 1),
            _ => 1,
        },
    }
}

/// One point-to-point message in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub round: Round,
    pub sender: ProcessId,
    pub receiver: ProcessId,
    pub payload: Payload,
    pub bits: u32,
}

impl Envelope {
    /// Builds an envelope, charging nothing for self-delivery.
    pub fn new(
        round: Round,
        sender: ProcessId,
        receiver: ProcessId,
        payload: Payload,
        params: &SystemParams,
    ) -> Result<Self, ModelError> {
        let bits = if sender == receiver {
            0
        } else {
            payload_bits(&payload, params)?
        };
        Ok(Self {
            round,
            sender,
            receiver,
            payload,
            bits,
        })
    }

    /// Like [`Envelope::new`] but never fails; used for adversary output.
    pub fn lenient(
        round: Round,
        sender: ProcessId,
        receiver: ProcessId,
        payload: Payload,
        params: &SystemParams,
    ) -> Self {
        let bits = if sender == receiver {
            0
        } else {
            wire_bits(&payload, params)
        };
        Self {
            round,
            sender,
            receiver,
            payload,
            bits,
        }
    }
}

/// Per-process lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessStatus {
    Running,
    Decided(Value),
    Halted(Value),
    /// Executing the base protocol, undecided, with the estimate it entered with.
    Handoff(Value),
}

impl ProcessStatus {
    pub fn decision(&self) -> Option<Value> {
        match self {
            ProcessStatus::Decided(v) | ProcessStatus::Halted(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, ProcessStatus::Halted(_))
    }

    /// Whether `next` is a legal successor of `self`: halting is terminal
    /// and a decision never changes.
    pub fn may_become(&self, next: &ProcessStatus) -> bool {
        match (self, next) {
            (ProcessStatus::Halted(a), ProcessStatus::Halted(b)) => a == b,
            (ProcessStatus::Halted(_), _) => false,
            (ProcessStatus::Decided(a), n) => n.decision() == Some(*a),
            _ => true,
        }
    }
}

impl fmt::Display for ProcessStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessStatus::Running => f.write_str("running"),
            ProcessStatus::Decided(v) => write!(f, "decided={v}"),
            ProcessStatus::Halted(v) => write!(f, "halted={v}"),
            ProcessStatus::Handoff(v) => write!(f, "handoff={v}"),
        }
    }
}

impl FromStr for ProcessStatus {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::MalformedStatus(s.to_string());
        if s == "running" {
            return Ok(ProcessStatus::Running);
        }
        let (tag, v) = s.split_once('=').ok_or_else(bad)?;
        let v = Value(v.parse().map_err(|_| bad())?);
        match tag {
            "decided" => Ok(ProcessStatus::Decided(v)),
            "halted" => Ok(ProcessStatus::Halted(v)),
            "handoff" => Ok(ProcessStatus::Handoff(v)),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(domain: u32) -> SystemParams {
        SystemParams::new(4, 1, domain).unwrap()
    }

    #[test]
    fn payload_widths() {
        assert_eq!(payload_bits(&Payload::Err, &params(2)), Ok(1));
        assert_eq!(payload_bits(&Payload::Help, &params(2)), Ok(1));
        assert_eq!(payload_bits(&Payload::ValueBit(0), &params(2)), Ok(1));
        assert_eq!(payload_bits(&Payload::ValueWide(Value(3)), &params(4)), Ok(2));
        assert_eq!(
            payload_bits(&Payload::ValueWide(Value(4)), &params(4)),
            Err(ModelError::ValueOutOfDomain {
                value: 4,
                domain: 4
            })
        );
        assert_eq!(
            payload_bits(
                &Payload::BaseMsg {
                    content: 9,
                    width: 0
                },
                &params(2)
            ),
            Err(ModelError::ZeroWidthBasePayload)
        );
    }

    #[test]
    fn value_widths() {
        assert_eq!(value_width(&params(2)), 1);
        assert_eq!(value_width(&params(3)), 2);
        assert_eq!(value_width(&params(4)), 2);
        assert_eq!(value_width(&params(5)), 3);
        assert_eq!(value_width(&params(8)), 3);
        assert_eq!(value_width(&params(9)), 4);
    }

    #[test]
    fn params_invariants() {
        assert_eq!(
            SystemParams::new(2, 1, 2),
            Err(ModelError::TooFewProcesses(2))
        );
        assert_eq!(
            SystemParams::new(4, 4, 2),
            Err(ModelError::BadFaultBound { n: 4, t: 4 })
        );
        assert_eq!(
            SystemParams::new(4, 0, 2),
            Err(ModelError::BadFaultBound { n: 4, t: 0 })
        );
        assert_eq!(SystemParams::new(4, 1, 1), Err(ModelError::DomainTooSmall(1)));
    }

    #[test]
    fn self_delivery_is_free() {
        let p = params(4);
        let e = Envelope::new(1, ProcessId(2), ProcessId(2), Payload::ValueWide(Value(3)), &p)
            .unwrap();
        assert_eq!(e.bits, 0);
        let e = Envelope::new(1, ProcessId(2), ProcessId(1), Payload::ValueWide(Value(3)), &p)
            .unwrap();
        assert_eq!(e.bits, 2);
    }

    #[test]
    fn payload_text_round_trip() {
        for p in [
            Payload::Err,
            Payload::Help,
            Payload::ValueBit(1),
            Payload::ValueWide(Value(7)),
            Payload::BaseMsg {
                content: 12,
                width: 5,
            },
        ] {
            assert_eq!(p.to_string().parse::<Payload>().unwrap(), p);
            assert_eq!(
                Payload::from_parts(&p.kind().to_string(), &p.value_text()).unwrap(),
                p
            );
        }
        assert!("bit:2".parse::<Payload>().is_err());
        assert!("nope".parse::<Payload>().is_err());
    }

    #[test]
    fn status_lattice() {
        use ProcessStatus::*;
        assert!(Running.may_become(&Decided(Value(1))));
        assert!(Decided(Value(1)).may_become(&Halted(Value(1))));
        assert!(!Decided(Value(1)).may_become(&Halted(Value(0))));
        assert!(!Decided(Value(1)).may_become(&Running));
        assert!(!Halted(Value(1)).may_become(&Decided(Value(1))));
        assert!(Handoff(Value(0)).may_become(&Halted(Value(1))));
        for s in [Running, Decided(Value(2)), Halted(Value(0)), Handoff(Value(1))] {
            assert_eq!(s.to_string().parse::<ProcessStatus>().unwrap(), s);
        }
    }
}
