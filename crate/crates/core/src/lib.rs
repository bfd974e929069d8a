//! Deterministic simulator and verification harness for common-case
//! optimized Byzantine consensus.
//!
//! Optimizer layers ([`layers`]) are composed with a base protocol
//! ([`base`]) and executed in lockstep synchronous rounds ([`engine`])
//! against Byzantine adversaries ([`adversary`]). Every run yields a
//! [`trace::RunTrace`] that the checkers in [`verification`] judge.

pub mod adversary;
pub mod base;
pub mod engine;
pub mod harness;
pub mod layers;
pub mod model;
pub mod protocol;
pub mod scenario;
pub mod trace;
pub mod verification;

pub use engine::{run, run_lenient, EngineError, World};
pub use model::{Envelope, Payload, ProcessId, ProcessStatus, SystemParams, Value};
pub use scenario::Scenario;
pub use trace::RunTrace;
