//! Acceptance suite. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line regardless of outcome; exits non-zero if any fails.

mod common;

use std::fs;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use ccsim::adversary::{Strategy, TableEntry, DEFAULT_SPACE_CAP};
use ccsim::harness::fuzz::fuzz_scenario;
use ccsim::harness::{cmd_oracle, cmd_run, cmd_sweep, fuzz_template, load_scenario, FuzzOptions, RunOptions};
use ccsim::layers::LayerName;
use ccsim::model::{value_width, Payload, ProcessId, SystemParams, Value};
use ccsim::verification::enumerate::{run_all, Family};
use ccsim::verification::{check_all_silent_broadcasts, check_consensus, enumerate_runs};
use ccsim::{RunTrace, Scenario};
use common::*;

/// Failure messages kept per criterion; the rest are only counted.
const KEPT_FAILURES: usize = 3;
const FUZZ_SEED: u64 = 8;
const FUZZ_RUNS: u64 = 10_000;
/// Fuzz runs per corpus template when checking determinism.
const CORPUS_FUZZ_RUNS: u64 = 500;

#[derive(Default)]
struct Tally {
    runs: usize,
    failures: usize,
    messages: Vec<String>,
    notes: Vec<String>,
    digest: DefaultHasher,
}

impl Tally {
    fn trace(&mut self, t: &RunTrace) {
        self.runs += 1;
        t.serialize().hash(&mut self.digest);
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures += 1;
            if self.messages.len() < KEPT_FAILURES {
                self.messages.push(what());
            }
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn digest(&self) -> u64 {
        self.digest.finish()
    }

    fn line(&self) -> String {
        let mut out = format!("{} runs", self.runs);
        for n in &self.notes {
            out.push_str("; ");
            out.push_str(n);
        }
        if self.failures > 0 {
            out.push_str(&format!("; {} failed checks, first: {}", self.failures, self.messages.join(" | ")));
        }
        out
    }
}

fn t_of(n: usize) -> usize {
    (n - 1) / 3
}

fn inputs(t: &RunTrace) -> String {
    let v: Vec<String> = t.scenario.values.iter().map(u32::to_string).collect();
    format!("n={} inputs ({})", t.n(), v.join(","))
}

fn halted_at(t: &RunTrace, p: ProcessId, time: u32) -> bool {
    let status = if time == 0 { t.initial[p.index()] } else { t.rounds.get(time as usize - 1).and_then(|r| r.statuses[p.index()]) };
    status.is_some_and(|s| s.is_halted())
}

fn runs_of(scenarios: &[Scenario]) -> Vec<RunTrace> {
    run_all(scenarios).expect("every acceptance scenario runs")
}

fn c1() -> Tally {
    let mut c = Tally::default();
    for n in [4, 7, 10, 13] {
        let t = run_ok(&scenario(n, t_of(n), LayerName::L1, "scripted:echo", &vec![1; n]));
        c.trace(&t);
        for p in t.correct_processes() {
            c.expect(t.decisions[p.index()] == Some(Value(1)) && t.decision_time[p.index()] == Some(1), || {
                format!("n={n}: {p} did not decide 1 at time 1")
            });
            c.expect(halted_at(&t, p, 1), || format!("n={n}: {p} not halted at time 1"));
        }
        c.expect(t.bits_total == 0, || format!("n={n}: {} bits sent", t.bits_total));
    }
    c
}

fn c2() -> Tally {
    let mut c = Tally::default();
    let mut max_margin = u64::MAX;
    for n in 4..=8 {
        let scenarios: Vec<Scenario> = binary_vectors(n)
            .map(|v| scenario(n, t_of(n), LayerName::L1, "scripted:echo", &v))
            .collect();
        let bound = (n * (n - 1)) as u64;
        for t in runs_of(&scenarios) {
            c.trace(&t);
            c.expect(t.layer_bits_total <= bound && bound <= (n * n) as u64, || {
                format!("{}: {} layer bits > {bound}", inputs(&t), t.layer_bits_total)
            });
            max_margin = max_margin.min(bound - t.layer_bits_total.min(bound));
            for p in t.correct_processes() {
                let ok = halted_at(&t, p, 1) || matches!(t.base_entry[p.index()], Some((1, _)));
                c.expect(ok, || format!("{}: {p} neither halted nor handed off at time 1", inputs(&t)));
            }
        }
    }
    c.note(format!("tightest margin {max_margin} bits"));
    c
}

/// Failure-free runs over every binary input vector, n = 4..8.
fn failure_free_binary(
    layer: LayerName,
    decide_at: u32,
    bound_twice: impl Fn(u64, u64) -> u64,
    extra: impl Fn(&RunTrace, &mut Tally),
) -> Tally {
    let mut c = Tally::default();
    let mut peak = 0u64;
    for n in 4..=8 {
        let scenarios: Vec<Scenario> =
            binary_vectors(n).map(|v| scenario(n, t_of(n), layer, "scripted:echo", &v)).collect();
        let bound = bound_twice(n as u64, t_of(n) as u64);
        for t in runs_of(&scenarios) {
            c.trace(&t);
            let m = majority(&t.scenario.values);
            c.expect(all_decided(&t, m, decide_at), || {
                format!("{}: not all decided maj={m} at time {decide_at}", inputs(&t))
            });
            c.expect(2 * t.layer_bits_total <= bound, || {
                format!("{}: {} layer bits over the bound", inputs(&t), t.layer_bits_total)
            });
            peak = peak.max(t.layer_bits_total);
            extra(&t, &mut c);
        }
    }
    c.note(format!("peak {peak} layer bits"));
    c
}

fn c3() -> Tally {
    failure_free_binary(LayerName::L2, 2, |n, t| 2 * 2 * n * (t + 1), |_, _| {})
}

fn c4() -> Tally {
    // n(t + 1.5), doubled
    failure_free_binary(LayerName::L3, 3, |n, t| n * (2 * t + 3), |t, c| {
        for r in [3, 4] {
            let count = round_envelope_count(t, r);
            c.expect(count == 0, || format!("{}: {count} envelopes in round {r}", inputs(t)));
        }
    })
}

fn c5() -> Tally {
    let mut c = Tally::default();
    let n = 4u64;
    let t = 1u64;
    // doubled bounds and the handoff time of each layer
    let cases = [
        (LayerName::L2, 2 * (2 * n * (t + 1) + n * n), 3),
        (LayerName::L3, n * (2 * t + 3) + 4 * n * n, 4),
    ];
    for (layer, bound, handoff) in cases {
        let family = Family::new(
            scenario(4, 1, layer, "scripted:echo", &[0; 4]),
            vec![vec![], vec![0], vec![1], vec![2], vec![3]],
        );
        let runs = enumerate_runs(&family, DEFAULT_SPACE_CAP).expect("family within cap");
        let mut peak = 0;
        let mut handed_off = 0;
        for tr in &runs {
            c.trace(tr);
            peak = peak.max(tr.layer_bits_total);
            c.expect(2 * tr.layer_bits_total <= bound, || {
                format!("{layer} F={:?} {}: {} layer bits", tr.scenario.faulty, inputs(tr), tr.layer_bits_total)
            });
            let entries: Vec<u32> =
                tr.correct_processes().filter_map(|p| tr.base_entry[p.index()].map(|e| e.0)).collect();
            if !entries.is_empty() {
                handed_off += 1;
            }
            c.expect(entries.iter().all(|at| *at == handoff), || {
                format!("{layer} F={:?} {}: base entered at {entries:?}", tr.scenario.faulty, inputs(tr))
            });
        }
        c.note(format!("{layer}: {} runs, {handed_off} hand off, peak {peak} bits", runs.len()));
    }
    c
}

fn c6() -> Tally {
    let mut c = Tally::default();
    for (layer, decide_at, factor) in [(LayerName::L2m, 2, 4u64), (LayerName::L3m, 3, 2)] {
        for d in [3u32, 4] {
            for n in 4..=7 {
                let t = t_of(n);
                let w = u64::from(value_width(&SystemParams::new(n, t, d).unwrap()));
                let bound = factor * n as u64 * (t as u64 + 1) * w;
                let scenarios: Vec<Scenario> = vectors(n, d)
                    .into_iter()
                    .map(|v| Scenario::new(n, t, layer, "scripted:echo", v).with_domain(d))
                    .collect();
                for tr in runs_of(&scenarios) {
                    c.trace(&tr);
                    let p = plurality(&tr.scenario.values);
                    c.expect(all_decided(&tr, p, decide_at), || {
                        format!("{layer} |V|={d} {}: not all decided plur={p} at {decide_at}", inputs(&tr))
                    });
                    c.expect(tr.layer_bits_total <= bound, || {
                        format!("{layer} |V|={d} {}: {} bits > {bound}", inputs(&tr), tr.layer_bits_total)
                    });
                }
            }
        }
    }
    c
}

fn echo_family(layer: LayerName) -> Vec<RunTrace> {
    let family = Family::new(scenario(4, 1, layer, "scripted:echo", &[0; 4]), vec![vec![3]]);
    enumerate_runs(&family, DEFAULT_SPACE_CAP).expect("family within cap")
}

fn c7() -> Tally {
    let mut c = Tally::default();
    for layer in [LayerName::L1, LayerName::L2, LayerName::L3] {
        let runs = echo_family(layer);
        let mut bad = 0;
        for tr in &runs {
            c.trace(tr);
            let failed: Vec<String> =
                check_consensus(tr).iter().filter(|v| !v.passed()).map(|v| v.property.clone()).collect();
            if !failed.is_empty() {
                bad += 1;
            }
            c.expect(failed.is_empty(), || {
                let sends: Vec<String> = tr
                    .scenario
                    .adversary
                    .strategy
                    .entries()
                    .iter()
                    .map(|e| format!("r{} 3->{} {}", e.round, e.receiver, e.payload))
                    .collect();
                format!("{layer} {} sends [{}]: {}", inputs(tr), sends.join(", "), failed.join(","))
            });
        }
        c.note(format!("{layer}: {bad}/{} violate", runs.len()));
    }
    c
}

fn check_scr(tr: &RunTrace, c: &mut Tally) -> usize {
    let verdicts = check_all_silent_broadcasts(tr);
    for v in &verdicts {
        c.expect(v.passed(), || format!("{} {}: {v}", tr.scenario.layer, inputs(tr)));
    }
    verdicts.len()
}

fn c8() -> Tally {
    let mut c = Tally::default();
    let mut verdicts = 0;
    for layer in [LayerName::L1, LayerName::L2, LayerName::L3] {
        for tr in echo_family(layer) {
            c.trace(&tr);
            verdicts += check_scr(&tr, &mut c);
        }
    }
    for layer in [LayerName::L2, LayerName::L3] {
        let template = scenario(5, 1, layer, "phase-king", &[0; 5]);
        let scenarios: Vec<Scenario> = (0..FUZZ_RUNS).map(|k| fuzz_scenario(&template, FUZZ_SEED, k)).collect();
        for tr in runs_of(&scenarios) {
            c.trace(&tr);
            let k = check_scr(&tr, &mut c);
            c.expect(k > 0, || format!("{layer} {}: no silent broadcast registered", inputs(&tr)));
            verdicts += k;
        }
    }
    c.note(format!("{verdicts} verdicts"));
    c
}

fn c9() -> Tally {
    let mut c = Tally::default();
    let mut degraded = 0;
    for layer in [LayerName::L2, LayerName::L3] {
        for targets in [vec![0], vec![0, 2], vec![0, 1, 2, 3]] {
            for values in binary_vectors(5) {
                let honest = scenario(5, 1, layer, "phase-king", &values).with_strategy(vec![4], Strategy::Honest);
                let reference = run_ok(&honest);
                // only runs where every correct process decides in the layer
                if !reference.correct_processes().all(|p| {
                    reference.decision_time[p.index()] == Some(reference.common_decision_time)
                }) {
                    continue;
                }
                let false_help = Strategy::FalseHelper { round: None, targets: targets.clone() };
                let tr = run_ok(&scenario(5, 1, layer, "phase-king", &values).with_strategy(vec![4], false_help));
                c.trace(&tr);
                if tr.base_used() {
                    degraded += 1;
                }
                c.expect(tr.decisions == reference.decisions, || {
                    format!("{layer} targets {targets:?} {}: decisions changed", inputs(&tr))
                });
                for v in check_consensus(&tr) {
                    c.expect(v.passed(), || format!("{layer} targets {targets:?} {}: {v}", inputs(&tr)));
                }
            }
        }
    }
    c.expect(degraded == c.runs, || format!("only {degraded} of the runs entered the base"));
    c.note(format!("{degraded} base runs triggered"));
    c
}

/// Receiver partitions used by the scripted equivocations.
const PATTERNS: [fn(usize) -> u32; 4] = [
    |j| (j % 2) as u32,
    |j| 1 - (j % 2) as u32,
    |j| u32::from(j >= 2),
    |j| u32::from(j < 2),
];

fn equivocations(faulty: usize) -> Vec<Vec<TableEntry>> {
    // exchange rounds, plus the king round of the faulty process's own phase
    let mut rounds = vec![1, 3];
    if faulty < 2 {
        rounds.push(2 * faulty as u32 + 2);
    }
    let mut out = vec![Vec::new()];
    for r in rounds {
        out = out
            .into_iter()
            .flat_map(|entries: Vec<TableEntry>| {
                PATTERNS.iter().map(move |pattern| {
                    let mut e = entries.clone();
                    e.extend((0..5).filter(|j| *j != faulty).map(|j| TableEntry {
                        round: r,
                        sender: Some(faulty),
                        receiver: j,
                        payload: Payload::ValueWide(Value(pattern(j))),
                    }));
                    e
                })
            })
            .collect();
    }
    out
}

fn c10() -> Tally {
    let mut c = Tally::default();
    let check = |tr: &RunTrace, c: &mut Tally| {
        c.trace(tr);
        for v in check_consensus(tr) {
            c.expect(v.passed(), || format!("F={:?} {}: {v}", tr.scenario.faulty, inputs(tr)));
        }
        let late = tr.correct_processes().filter(|p| tr.decision_time[p.index()].is_none_or(|d| d > 4)).count();
        c.expect(late == 0, || format!("F={:?} {}: {late} decided after round 4", tr.scenario.faulty, inputs(tr)));
    };
    let mut scenarios = Vec::new();
    for f in 0..5 {
        for values in binary_vectors(5) {
            let base = scenario(5, 1, LayerName::None, "phase-king", &values);
            scenarios.push(base.clone().with_strategy(vec![f], Strategy::Silent));
            for entries in equivocations(f) {
                scenarios.push(base.clone().with_strategy(vec![f], Strategy::Equivocate { entries }));
            }
        }
    }
    let scripted = scenarios.len();
    for tr in runs_of(&scenarios) {
        check(&tr, &mut c);
    }
    let family = Family::new(scenario(5, 1, LayerName::None, "phase-king", &[0; 5]), vec![vec![4]]).with_horizon(4);
    let exhaustive = enumerate_runs(&family, DEFAULT_SPACE_CAP).expect("family within cap");
    for tr in &exhaustive {
        check(tr, &mut c);
    }
    c.note(format!("{scripted} scripted, {} exhaustive for a non-king", exhaustive.len()));
    c
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Rendered output of every corpus file, in file-name order.
fn corpus_outputs(scratch: &Path) -> Vec<(String, String)> {
    let mut files: Vec<PathBuf> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|path| {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let out = if name.ends_with(".sweep.toml") {
                cmd_sweep(path).map(|r| r.to_csv())
            } else if name.ends_with(".oracle.toml") {
                cmd_oracle(path).map(|r| r.render())
            } else if name.ends_with(".fuzz.toml") {
                load_scenario(path).and_then(|s| {
                    let opts = FuzzOptions { seed: FUZZ_SEED, count: CORPUS_FUZZ_RUNS, out_dir: None };
                    fuzz_template(&s, &opts).map(|r| r.render())
                })
            } else {
                let trace_out = scratch.join(name.replace(".toml", ".trace.jsonl"));
                let opts = RunOptions { trace_out: Some(trace_out.clone()), ..RunOptions::default() };
                cmd_run(path, &opts).map(|r| r.render() + &fs::read_to_string(&trace_out).unwrap())
            };
            (name, out.unwrap_or_else(|e| format!("error: {e}")))
        })
        .collect()
}

type Criterion = (u32, &'static str, fn() -> Tally);

const CRITERIA: [Criterion; 10] = [
    (1, "l1 unanimous common case", c1),
    (2, "l1 uncommon case", c2),
    (3, "l2 failure-free", c3),
    (4, "l3 failure-free", c4),
    (5, "l2/l3 uncommon", c5),
    (6, "multi-valued layers", c6),
    (7, "exhaustive consensus oracle", c7),
    (8, "silent broadcast truth", c8),
    (9, "redundant execution", c9),
    (10, "phase king standalone", c10),
];

fn report(id: u32, title: &str, passed: bool, detail: &str) -> bool {
    println!("criterion {id:>2}  {}  {title}: {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut passed = 0;
    let mut digests = Vec::new();
    for (id, title, f) in CRITERIA {
        let c = f();
        passed += usize::from(report(id, title, c.failures == 0 && c.runs > 0, &c.line()));
        digests.push(c.digest());
    }

    let scratch = tempfile::tempdir().expect("scratch directory");
    let mut differing: Vec<String> = CRITERIA
        .iter()
        .zip(&digests)
        .filter(|((_, _, f), d)| f().digest() != **d)
        .map(|((id, _, _), _)| format!("criterion {id}"))
        .collect();
    let (first, second) = (corpus_outputs(scratch.path()), corpus_outputs(scratch.path()));
    differing.extend(first.iter().zip(&second).filter(|(x, y)| x != y).map(|(x, _)| x.0.clone()));
    let errors: Vec<&String> = first.iter().filter(|(_, o)| o.starts_with("error:")).map(|(n, _)| n).collect();
    let ok = differing.is_empty() && errors.is_empty() && !first.is_empty();
    let detail = if ok {
        format!("criteria 1-10 and {} corpus outputs byte-identical on re-run", first.len())
    } else {
        format!("differing: {differing:?}; corpus errors: {errors:?}")
    };
    passed += usize::from(report(11, "determinism", ok, &detail));

    let total = CRITERIA.len() + 1;
    println!("acceptance: {passed} of {total} criteria pass ({:.1}s)", start.elapsed().as_secs_f64());
    if passed == total {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
