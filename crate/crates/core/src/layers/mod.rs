//! Optimizer layers: L1 (unanimous common case), the greater-Sanhedrin
//! layers L2/L2′, the smaller-Council layers L3/L3′, and a pass-through
//! layer that hands straight to the base.

pub mod codec;
mod committee;
pub mod council;
pub mod l1;
pub mod passthrough;
pub mod sanhedrin;
pub mod voting;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::SystemParams;
use crate::protocol::{ConfigError, LayerSpec};

pub use codec::{split_decode, split_encode, MvCommonDefaults, ValueCodec};
pub use council::CouncilLayer;
pub use l1::UnanimousLayer;
pub use passthrough::Passthrough;
pub use sanhedrin::SanhedrinLayer;
pub use voting::{maj, plur};

/// Harness name of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerName {
    L1,
    L2,
    L3,
    L2m,
    L3m,
    None,
}

impl LayerName {
    pub const ALL: [LayerName; 6] = [
        LayerName::L1,
        LayerName::L2,
        LayerName::L3,
        LayerName::L2m,
        LayerName::L3m,
        LayerName::None,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LayerName::L1 => "l1",
            LayerName::L2 => "l2",
            LayerName::L3 => "l3",
            LayerName::L2m => "l2m",
            LayerName::L3m => "l3m",
            LayerName::None => "none",
        }
    }

    pub fn is_multi_valued(&self) -> bool {
        matches!(self, LayerName::L2m | LayerName::L3m)
    }
}

impl fmt::Display for LayerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        LayerName::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown layer `{s}` (expected l1, l2, l3, l2m, l3m or none)"))
    }
}

/// Deliberately broken layer variants, used to check that the harness
/// catches protocol bugs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// L1: a 0-proposer stays silent instead of broadcasting `err`.
    SilentZeroProposer,
    /// L3/L3′: a process without a unanimous recommendation does not
    /// broadcast `err` at time 2.
    SkipErrBroadcast,
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mutation::SilentZeroProposer => "silent-zero-proposer",
            Mutation::SkipErrBroadcast => "skip-err-broadcast",
        })
    }
}

/// Builds the layer named `name`.
pub fn build_layer(
    name: LayerName,
    mutation: Option<Mutation>,
    params: &SystemParams,
    defaults: Option<MvCommonDefaults>,
) -> Result<Arc<dyn LayerSpec>, ConfigError> {
    let mismatch = |m: Mutation| ConfigError::MutationMismatch {
        mutation: m.to_string(),
        layer: name.to_string(),
    };
    let defaults = || defaults.clone().unwrap_or_else(|| MvCommonDefaults::standard(params));
    let layer: Arc<dyn LayerSpec> = match (name, mutation) {
        (LayerName::L1, None) => Arc::new(UnanimousLayer::new()),
        (LayerName::L1, Some(Mutation::SilentZeroProposer)) => {
            Arc::new(UnanimousLayer::mutant_silent_zero())
        }
        (LayerName::L2, None) => Arc::new(SanhedrinLayer::binary()),
        (LayerName::L2m, None) => Arc::new(SanhedrinLayer::multi_valued(defaults())),
        (LayerName::L3, m @ (None | Some(Mutation::SkipErrBroadcast))) => {
            Arc::new(CouncilLayer::binary().with_skip_err(m.is_some()))
        }
        (LayerName::L3m, m @ (None | Some(Mutation::SkipErrBroadcast))) => {
            Arc::new(CouncilLayer::multi_valued(defaults()).with_skip_err(m.is_some()))
        }
        (LayerName::None, None) => Arc::new(Passthrough),
        (_, Some(m)) => return Err(mismatch(m)),
    };
    layer.validate(params)?;
    Ok(layer)
}

fn require_binary(name: &str, params: &SystemParams) -> Result<(), ConfigError> {
    if params.is_binary() {
        Ok(())
    } else {
        Err(ConfigError::BinaryLayerNeedsBinaryDomain {
            layer: name.to_string(),
            domain: params.domain_size(),
        })
    }
}

fn validate_codec(params: &SystemParams, codec: &ValueCodec) -> Result<(), ConfigError> {
    let ValueCodec::Defaults(d) = codec else {
        return Ok(());
    };
    if d.common_proposal.len() != params.n() {
        return Err(ConfigError::DefaultsLength {
            expected: params.n(),
            got: d.common_proposal.len(),
        });
    }
    for v in d.common_proposal.iter().chain([&d.common_decision]) {
        if !params.contains(*v) {
            return Err(ConfigError::DefaultOutOfDomain(*v));
        }
    }
    Ok(())
}
