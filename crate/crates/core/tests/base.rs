mod common;

use ccsim::adversary::Strategy;
use ccsim::layers::LayerName;
use ccsim::model::Value;
use ccsim::verification::check_consensus;
use common::*;

#[test]
fn unanimous_preferences_are_kept() {
    for v in 0..2 {
        let t = run_ok(
            &scenario(5, 1, LayerName::None, "phase-king", &[v; 5])
                .with_strategy(vec![2], Strategy::Random),
        );
        assert_eq!(correct_decisions(&t), vec![Some(v); 4]);
    }
}

#[test]
fn silent_fault_with_split_preferences() {
    let t = run_ok(
        &scenario(5, 1, LayerName::None, "phase-king", &[1, 1, 0, 0, 0])
            .with_strategy(vec![4], Strategy::Silent),
    );
    assert!(all_decided(&t, 0, 4));
    assert_eq!(t.rounds.len(), 4);
    assert_eq!(t.bits_total, 40);
}

#[test]
fn correct_second_king_restores_agreement() {
    // process 0 is king of phase 1 and lies in both of its rounds
    let lies = vec![
        entry(1, 0, 1, "wide:1"),
        entry(1, 0, 2, "wide:1"),
        entry(1, 0, 3, "wide:0"),
        entry(1, 0, 4, "wide:0"),
        entry(2, 0, 1, "wide:0"),
        entry(2, 0, 2, "wide:0"),
        entry(2, 0, 3, "wide:1"),
        entry(2, 0, 4, "wide:1"),
    ];
    let t = run_ok(
        &scenario(5, 1, LayerName::None, "phase-king", &[0, 1, 1, 1, 0])
            .with_strategy(vec![0], Strategy::Equivocate { entries: lies }),
    );
    assert!(all_decided(&t, 1, 4));
    assert!(check_consensus(&t).iter().all(|v| v.passed()));
}

#[test]
fn phase_king_base_bits_per_phase() {
    // each correct process sends at most 2(n-1) wide values per phase
    for values in binary_vectors(5) {
        let t = run_ok(&scenario(5, 1, LayerName::None, "phase-king", &values));
        for p in 0..5 {
            for phase in 0..2u32 {
                let sent: u32 = t
                    .rounds
                    .iter()
                    .filter(|r| r.round == 2 * phase + 1 || r.round == 2 * phase + 2)
                    .flat_map(|r| r.envelopes.iter())
                    .filter(|e| e.sender.index() == p)
                    .map(|e| e.bits)
                    .sum();
                assert!(sent <= 2 * 4);
            }
        }
    }
}

#[test]
fn scripted_always_after_one_round() {
    let t = run_ok(&scenario(4, 1, LayerName::L1, "scripted:always=0/1", &[0, 0, 0, 0]));
    assert!(all_decided(&t, 0, 2));
}

#[test]
fn scripted_echo_decides_at_handoff() {
    let t = run_ok(&scenario(4, 1, LayerName::L3, "scripted:echo", &[1, 0, 1, 0]).with_strategy(
        vec![3],
        table(vec![entry(3, 3, 0, "err")]),
    ));
    for p in t.correct_processes() {
        let (at, est) = t.base_entry[p.index()].expect("everyone enters the base");
        assert_eq!(at, 4);
        assert_eq!(t.decisions[p.index()], Some(est));
        assert!(matches!(t.decision_time[p.index()], Some(3) | Some(4)));
    }
}

#[test]
fn per_process_script_overrides() {
    let t = run_ok(&scenario(4, 1, LayerName::L1, "scripted:echo;2=always=0/2", &[0, 0, 0, 0]));
    assert_eq!(t.decisions[2], Some(Value(0)));
    assert_eq!(t.decision_time[2], Some(3));
    assert_eq!(t.decision_time[0], Some(1));
}

#[test]
fn phase_king_needs_n_above_four_t() {
    let s = scenario(8, 2, LayerName::None, "phase-king", &[0; 8]);
    assert_eq!(s.setup().unwrap_err().field, "base");
}
