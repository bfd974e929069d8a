use std::fmt::Write;
use std::path::{Path, PathBuf};

use crate::engine::{run, EngineError};
use crate::model::Value;
use crate::trace::RunTrace;
use crate::verification::Verdict;

use super::checks::{evaluate_checks, Check};
use super::{load_scenario, write_file, HarnessError};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Forces rushing mode on.
    pub rushing: bool,
    /// Checks to apply; all of them when `None`.
    pub checks: Option<Vec<Check>>,
    /// Where to write the trace; `<stem>.trace.jsonl` in the working
    /// directory when `None`.
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RunReport {
    pub trace: RunTrace,
    pub verdicts: Vec<Verdict>,
    pub trace_path: PathBuf,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.trace.outcome == crate::trace::RunOutcome::Complete
            && !self.verdicts.iter().any(Verdict::failed)
    }

    pub fn render(&self) -> String {
        let t = &self.trace;
        let s = &t.scenario;
        let mut out = String::new();
        let name = s.name.as_deref().unwrap_or("unnamed");
        writeln!(
            out,
            "scenario {name}: n={} t={} |V|={} layer={} base={} faulty={:?} adversary={}{}",
            s.n,
            s.t,
            s.domain,
            s.layer,
            s.base,
            s.faulty,
            s.adversary,
            if s.rushing { " rushing" } else { "" }
        )
        .unwrap();
        writeln!(out, "outcome: {} after {} rounds", t.outcome, t.rounds.len()).unwrap();
        for p in t.correct_processes() {
            let i = p.index();
            let decision = match (t.decisions[i], t.decision_time[i]) {
                (Some(v), Some(at)) => format!("decided@{at} decision={v}"),
                _ => "undecided".to_string(),
            };
            let base = match t.base_entry[i] {
                Some((at, est)) => format!(" base@{at} est={est}"),
                None => String::new(),
            };
            writeln!(out, "  {p}: {decision}{base}").unwrap();
        }
        writeln!(out, "{}", summary_line(t)).unwrap();
        writeln!(
            out,
            "bits: correct={} total={} layer_correct={} layer_total={}",
            t.bits_correct, t.bits_total, t.layer_bits_correct, t.layer_bits_total
        )
        .unwrap();
        for v in &self.verdicts {
            writeln!(out, "{v}").unwrap();
        }
        writeln!(out, "trace: {}", self.trace_path.display()).unwrap();
        out
    }
}

/// `decided@T, decision=V, bits=B` with the latest decision time.
pub fn summary_line(t: &RunTrace) -> String {
    let decided_at = t
        .max_decision_time()
        .map_or_else(|| "undecided".to_string(), |at| format!("decided@{at}"));
    let values: Vec<Value> = t
        .correct_processes()
        .filter_map(|p| t.decisions[p.index()])
        .collect();
    let decision = match values.first() {
        Some(v) if values.iter().all(|u| u == v) => v.to_string(),
        Some(_) => "split".to_string(),
        None => "-".to_string(),
    };
    format!("{decided_at}, decision={decision}, bits={}", t.bits_total)
}

pub fn cmd_run(path: &Path, options: &RunOptions) -> Result<RunReport, HarnessError> {
    let mut scenario = load_scenario(path)?;
    if options.rushing {
        scenario.rushing = true;
    }
    let trace = match run(&scenario) {
        Ok(trace) => trace,
        Err(EngineError::NonTermination { trace, .. }) => *trace,
        Err(e) => return Err(e.into()),
    };
    let checks = options.checks.clone().unwrap_or_else(|| Check::ALL.to_vec());
    let verdicts = evaluate_checks(&trace, &checks);
    let trace_path = options.trace_out.clone().unwrap_or_else(|| {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        PathBuf::from(format!("{stem}.trace.jsonl"))
    });
    write_file(&trace_path, &trace.serialize())?;
    Ok(RunReport {
        trace,
        verdicts,
        trace_path,
    })
}
