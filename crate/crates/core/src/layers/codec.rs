//! Silence-encoded value broadcast.
//!
//! The binary split codec conveys a bit `b` to receiver `j` by silence when
//! `j mod 2 = b` and by a one-bit message otherwise. The multi-valued codec
//! conveys an agreed default by silence and anything else explicitly.

use serde::{Deserialize, Serialize};

use crate::model::{Payload, ProcessId, SystemParams, Value};

use super::voting::{maj, plur};

/// Encodes bit `b` for `receiver`; `None` means stay silent.
pub fn split_encode(b: u8, receiver: ProcessId) -> Option<Payload> {
    if receiver.parity() == b & 1 {
        None
    } else {
        Some(Payload::ValueBit(b & 1))
    }
}

/// Decodes what `receiver` observed from one sender. Any message at all
/// decodes to the opposite parity, whatever its content.
pub fn split_decode(observed: Option<&Payload>, receiver: ProcessId) -> u8 {
    match observed {
        None => receiver.parity(),
        Some(_) => 1 - receiver.parity(),
    }
}

/// Per-process common proposals and the common recommendation, known to
/// every process in advance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MvCommonDefaults {
    pub common_proposal: Vec<Value>,
    pub common_decision: Value,
}

impl MvCommonDefaults {
    /// Every common proposal is the smallest value; the common decision is
    /// their plurality.
    pub fn standard(params: &SystemParams) -> Self {
        let common_proposal = vec![params.default_value(); params.n()];
        let common_decision = plur(&common_proposal);
        Self {
            common_proposal,
            common_decision,
        }
    }

    pub fn proposal_of(&self, p: ProcessId) -> Value {
        self.common_proposal[p.index()]
    }
}

/// The value broadcast scheme of a committee layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueCodec {
    Split,
    Defaults(MvCommonDefaults),
}

impl ValueCodec {
    pub fn encode_proposal(&self, me: ProcessId, v: Value, to: ProcessId) -> Option<Payload> {
        match self {
            ValueCodec::Split => split_encode(v.0 as u8, to),
            ValueCodec::Defaults(d) if v == d.proposal_of(me) => None,
            ValueCodec::Defaults(_) => Some(Payload::ValueWide(v)),
        }
    }

    pub fn decode_proposal(
        &self,
        params: &SystemParams,
        from: ProcessId,
        at: ProcessId,
        observed: Option<&Payload>,
    ) -> Value {
        match self {
            ValueCodec::Split => Value::bit(split_decode(observed, at)),
            ValueCodec::Defaults(d) => decode_wide(params, observed, d.proposal_of(from)),
        }
    }

    pub fn encode_recommendation(&self, rec: Value, to: ProcessId) -> Option<Payload> {
        match self {
            ValueCodec::Split => split_encode(rec.0 as u8, to),
            ValueCodec::Defaults(d) if rec == d.common_decision => None,
            ValueCodec::Defaults(_) => Some(Payload::ValueWide(rec)),
        }
    }

    pub fn decode_recommendation(
        &self,
        params: &SystemParams,
        at: ProcessId,
        observed: Option<&Payload>,
    ) -> Value {
        match self {
            ValueCodec::Split => Value::bit(split_decode(observed, at)),
            ValueCodec::Defaults(d) => decode_wide(params, observed, d.common_decision),
        }
    }

    pub fn vote(&self, values: &[Value]) -> Value {
        match self {
            ValueCodec::Split => maj(values),
            ValueCodec::Defaults(_) => plur(values),
        }
    }

    /// Explicit proposals `sender` could address to `receiver`.
    pub fn proposal_alphabet(
        &self,
        params: &SystemParams,
        sender: ProcessId,
        receiver: ProcessId,
    ) -> Vec<Payload> {
        match self {
            ValueCodec::Split => vec![Payload::ValueBit(1 - receiver.parity())],
            ValueCodec::Defaults(d) => params
                .values()
                .filter(|v| *v != d.proposal_of(sender))
                .map(Payload::ValueWide)
                .collect(),
        }
    }

    /// Explicit recommendations a committee member could address to `receiver`.
    pub fn recommendation_alphabet(&self, params: &SystemParams, receiver: ProcessId) -> Vec<Payload> {
        match self {
            ValueCodec::Split => vec![Payload::ValueBit(1 - receiver.parity())],
            ValueCodec::Defaults(d) => params
                .values()
                .filter(|v| *v != d.common_decision)
                .map(Payload::ValueWide)
                .collect(),
        }
    }
}

/// Malformed or out-of-domain payloads decode like silence.
fn decode_wide(params: &SystemParams, observed: Option<&Payload>, silent: Value) -> Value {
    match observed {
        Some(Payload::ValueWide(v)) if params.contains(*v) => *v,
        _ => silent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn split_examples() {
        assert_eq!(split_encode(0, ProcessId(2)), None);
        assert_eq!(split_encode(1, ProcessId(2)), Some(Payload::ValueBit(1)));
        assert_eq!(split_encode(1, ProcessId(3)), None);
        assert_eq!(split_encode(0, ProcessId(3)), Some(Payload::ValueBit(0)));
        assert_eq!(split_decode(None, ProcessId(4)), 0);
        assert_eq!(split_decode(Some(&Payload::ValueBit(1)), ProcessId(4)), 1);
        // content is irrelevant, only presence
        assert_eq!(split_decode(Some(&Payload::ValueBit(0)), ProcessId(4)), 1);
        assert_eq!(split_decode(Some(&Payload::Help), ProcessId(5)), 0);
    }

    #[test]
    fn wide_defaults_silence_and_malformed() {
        let params = SystemParams::new(4, 1, 4).unwrap();
        let codec = ValueCodec::Defaults(MvCommonDefaults::standard(&params));
        assert_eq!(codec.encode_proposal(ProcessId(1), Value(0), ProcessId(0)), None);
        assert_eq!(
            codec.encode_proposal(ProcessId(1), Value(3), ProcessId(0)),
            Some(Payload::ValueWide(Value(3)))
        );
        let malformed = Payload::ValueWide(Value(9));
        assert_eq!(
            codec.decode_proposal(&params, ProcessId(1), ProcessId(0), Some(&malformed)),
            Value(0)
        );
        assert_eq!(
            codec.decode_recommendation(&params, ProcessId(0), Some(&Payload::Err)),
            Value(0)
        );
    }

    proptest! {
        #[test]
        fn split_codec_inverse(b in 0u8..2, j in 0usize..64) {
            let sent = split_encode(b, ProcessId(j));
            prop_assert_eq!(split_decode(sent.as_ref(), ProcessId(j)), b);
        }

        #[test]
        fn defaults_codec_inverse(
            domain in 2u32..9,
            proposals in proptest::collection::vec(0u32..9, 4),
            dec in 0u32..9,
            v in 0u32..9,
            from in 0usize..4,
            to in 0usize..4,
        ) {
            let params = SystemParams::new(4, 1, domain).unwrap();
            let clamp = |x: u32| Value(x % domain);
            let defaults = MvCommonDefaults {
                common_proposal: proposals.iter().map(|x| clamp(*x)).collect(),
                common_decision: clamp(dec),
            };
            let codec = ValueCodec::Defaults(defaults);
            let v = clamp(v);
            let sent = codec.encode_proposal(ProcessId(from), v, ProcessId(to));
            prop_assert_eq!(codec.decode_proposal(&params, ProcessId(from), ProcessId(to), sent.as_ref()), v);
            let sent = codec.encode_recommendation(v, ProcessId(to));
            prop_assert_eq!(codec.decode_recommendation(&params, ProcessId(to), sent.as_ref()), v);
        }
    }
}
