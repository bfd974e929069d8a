//! Base consensus protocols run after a layer hands off.

pub mod phase_king;
pub mod scripted;

use std::sync::Arc;

use crate::model::SystemParams;
use crate::protocol::BaseSpec;

pub use phase_king::PhaseKing;
pub use scripted::{ScriptEntry, ScriptRule, ScriptedBase};

/// Parses a harness base name: `phase-king` or `scripted:<script>`.
pub fn build_base(name: &str, params: &SystemParams) -> Result<Arc<dyn BaseSpec>, String> {
    if name == "phase-king" {
        return Ok(Arc::new(PhaseKing));
    }
    match name.strip_prefix("scripted:") {
        Some(script) => {
            let base = ScriptedBase::parse(script)?;
            base.check_domain(params)?;
            Ok(Arc::new(base))
        }
        None => Err(format!(
            "unknown base `{name}` (expected phase-king or scripted:<script>)"
        )),
    }
}
