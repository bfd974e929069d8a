//! C ABI over the simulator: parse a scenario, run it, inspect or
//! serialize the trace, apply the checkers.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`CcsimStatus`]; the message of the last failure on the calling thread
//! is available from [`ccsim_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ccsim::engine::{run, EngineError};
use ccsim::harness::{evaluate_checks, Check};
use ccsim::model::ProcessId;
use ccsim::{RunTrace, Scenario};

/// Opaque scenario handle.
pub struct CcsimScenario(Scenario);

/// Opaque trace handle.
pub struct CcsimTrace(RunTrace);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidScenario = 3,
    RunFailed = 4,
    /// The run hit its round cap; a trace is still returned.
    NonTermination = 5,
    OutOfRange = 6,
    InvalidTrace = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CcsimDecision {
    pub decided: bool,
    pub value: u32,
    pub time: u32,
    pub faulty: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CcsimBits {
    pub bits_correct: u64,
    pub bits_total: u64,
    pub layer_bits_correct: u64,
    pub layer_bits_total: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> CcsimStatus) -> CcsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            CcsimStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, CcsimStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(CcsimStatus::NullArgument);
    }
    // SAFETY: caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        CcsimStatus::InvalidUtf8
    })
}

fn null_arg(what: &str) -> CcsimStatus {
    set_error(format!("null {what}"));
    CcsimStatus::NullArgument
}

/// Message of the last failure on this thread. Valid until the next call
/// into this library from the same thread; never null.
#[no_mangle]
pub extern "C" fn ccsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ccsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsim_scenario_parse(
    toml: *const c_char,
    out: *mut *mut CcsimScenario,
) -> CcsimStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("output pointer");
        }
        // SAFETY: forwarded from the caller's contract.
        let text = match unsafe { read_str(toml) } {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::from_toml_str(text) {
            Ok(s) => {
                // SAFETY: `out` is non-null and writable per the contract.
                unsafe { *out = Box::into_raw(Box::new(CcsimScenario(s))) };
                CcsimStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CcsimStatus::InvalidScenario
            }
        }
    })
}

/// # Safety
/// `scenario` must be null or a handle from [`ccsim_scenario_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ccsim_scenario_free(scenario: *mut CcsimScenario) {
    if !scenario.is_null() {
        // SAFETY: the handle was created by Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Runs a scenario. On [`CcsimStatus::NonTermination`] the partial trace is
/// still written to `out`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsim_run(
    scenario: *const CcsimScenario,
    out: *mut *mut CcsimTrace,
) -> CcsimStatus {
    guard(|| {
        if scenario.is_null() {
            return null_arg("scenario");
        }
        if out.is_null() {
            return null_arg("output pointer");
        }
        // SAFETY: live handle per the contract.
        let scenario = unsafe { &(*scenario).0 };
        let (trace, status) = match run(scenario) {
            Ok(t) => (t, CcsimStatus::Ok),
            Err(EngineError::NonTermination { trace, .. }) => {
                set_error("round cap reached with correct processes still running");
                (*trace, CcsimStatus::NonTermination)
            }
            Err(e) => {
                set_error(e.to_string());
                return CcsimStatus::RunFailed;
            }
        };
        // SAFETY: `out` is non-null and writable.
        unsafe { *out = Box::into_raw(Box::new(CcsimTrace(trace))) };
        status
    })
}

/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn ccsim_trace_free(trace: *mut CcsimTrace) {
    if !trace.is_null() {
        // SAFETY: created by Box::into_raw, freed once.
        drop(unsafe { Box::from_raw(trace) });
    }
}

/// Serializes a trace to its line-delimited text form. Free the result
/// with [`ccsim_string_free`].
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsim_trace_serialize(
    trace: *const CcsimTrace,
    out: *mut *mut c_char,
) -> CcsimStatus {
    guard(|| {
        if trace.is_null() {
            return null_arg("trace");
        }
        if out.is_null() {
            return null_arg("output pointer");
        }
        // SAFETY: live handle.
        let text = unsafe { &(*trace).0 }.serialize();
        match CString::new(text) {
            Ok(c) => {
                // SAFETY: `out` is writable.
                unsafe { *out = c.into_raw() };
                CcsimStatus::Ok
            }
            Err(_) => {
                set_error("trace text contains NUL");
                CcsimStatus::InvalidTrace
            }
        }
    })
}

/// Parses a serialized trace.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsim_trace_parse(
    text: *const c_char,
    out: *mut *mut CcsimTrace,
) -> CcsimStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("output pointer");
        }
        // SAFETY: forwarded contract.
        let text = match unsafe { read_str(text) } {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunTrace::parse(text) {
            Ok(t) => {
                // SAFETY: `out` is writable.
                unsafe { *out = Box::into_raw(Box::new(CcsimTrace(t))) };
                CcsimStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                CcsimStatus::InvalidTrace
            }
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ccsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Number of processes in the traced scenario, 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccsim_trace_process_count(trace: *const CcsimTrace) -> usize {
    if trace.is_null() {
        return 0;
    }
    // SAFETY: live handle.
    unsafe { &(*trace).0 }.n()
}

/// Decision of process `pid`.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsim_trace_decision(
    trace: *const CcsimTrace,
    pid: usize,
    out: *mut CcsimDecision,
) -> CcsimStatus {
    guard(|| {
        if trace.is_null() {
            return null_arg("trace");
        }
        if out.is_null() {
            return null_arg("output pointer");
        }
        // SAFETY: live handle.
        let t = unsafe { &(*trace).0 };
        if pid >= t.n() {
            set_error(format!("process {pid} outside [0, {})", t.n()));
            return CcsimStatus::OutOfRange;
        }
        let d = CcsimDecision {
            decided: t.decisions[pid].is_some(),
            value: t.decisions[pid].map_or(0, |v| v.0),
            time: t.decision_time[pid].unwrap_or(0),
            faulty: !t.is_correct(ProcessId(pid)),
        };
        // SAFETY: `out` is writable.
        unsafe { *out = d };
        CcsimStatus::Ok
    })
}

/// Bit counters of a trace.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsim_trace_bits(
    trace: *const CcsimTrace,
    out: *mut CcsimBits,
) -> CcsimStatus {
    guard(|| {
        if trace.is_null() {
            return null_arg("trace");
        }
        if out.is_null() {
            return null_arg("output pointer");
        }
        // SAFETY: live handle.
        let t = unsafe { &(*trace).0 };
        // SAFETY: `out` is writable.
        unsafe {
            *out = CcsimBits {
                bits_correct: t.bits_correct,
                bits_total: t.bits_total,
                layer_bits_correct: t.layer_bits_correct,
                layer_bits_total: t.layer_bits_total,
            }
        };
        CcsimStatus::Ok
    })
}

/// Applies the consensus, silent-broadcast and budget checkers. Writes the
/// number of verdicts and of failed verdicts; the first failure's text is
/// left in [`ccsim_last_error`].
///
/// # Safety
/// `trace` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccsim_trace_check(
    trace: *const CcsimTrace,
    verdicts: *mut u32,
    failed: *mut u32,
) -> CcsimStatus {
    guard(|| {
        if trace.is_null() {
            return null_arg("trace");
        }
        if verdicts.is_null() || failed.is_null() {
            return null_arg("output pointer");
        }
        // SAFETY: live handle.
        let t = unsafe { &(*trace).0 };
        let all = evaluate_checks(t, &Check::ALL);
        let failures: Vec<_> = all.iter().filter(|v| v.failed()).collect();
        if let Some(first) = failures.first() {
            set_error(first.to_string());
        }
        // SAFETY: outputs are writable.
        unsafe {
            *verdicts = all.len() as u32;
            *failed = failures.len() as u32;
        }
        CcsimStatus::Ok
    })
}
