mod common;

use ccsim::layers::{
    maj, plur, split_decode, split_encode, CouncilLayer, LayerName, SanhedrinLayer,
    UnanimousLayer,
};
use ccsim::model::{Envelope, Payload, ProcessId, ProcessStatus, SystemParams, Value};
use ccsim::protocol::{Inbox, LayerOutcome, LayerProcess, LayerSpec};
use common::*;

fn vals(v: &[u32]) -> Vec<Value> {
    v.iter().map(|x| Value(*x)).collect()
}

fn deliver(
    p: &mut dyn LayerProcess,
    params: &SystemParams,
    me: usize,
    round: u32,
    from: &[(usize, Payload)],
) {
    let envs: Vec<Envelope> = from
        .iter()
        .map(|(s, pl)| Envelope::new(round, ProcessId(*s), ProcessId(me), *pl, params).unwrap())
        .collect();
    p.receive(round, &Inbox::new(ProcessId(me), envs.iter().collect()));
}

#[test]
fn maj_examples() {
    assert_eq!(maj(&vals(&[1, 1, 0, 0])), Value(1));
    assert_eq!(maj(&vals(&[0, 0, 0])), Value(0));
    assert_eq!(maj(&vals(&[1, 0, 0, 0, 0])), Value(0));
}

#[test]
fn plur_examples() {
    assert_eq!(plur(&vals(&[2, 2, 3])), Value(2));
    assert_eq!(plur(&vals(&[1, 1, 2, 2])), Value(1));
    assert_eq!(plur(&vals(&[0, 1, 2, 3])), Value(0));
}

#[test]
fn split_codec_examples() {
    assert_eq!(split_encode(0, ProcessId(2)), None);
    assert_eq!(split_encode(1, ProcessId(2)), Some(Payload::ValueBit(1)));
    assert_eq!(split_encode(1, ProcessId(3)), None);
    assert_eq!(split_decode(None, ProcessId(4)), 0);
    assert_eq!(split_decode(Some(&Payload::Err), ProcessId(4)), 1);
}

#[test]
fn l1_time_one_outcomes() {
    let params = SystemParams::binary(4, 1).unwrap();
    let l1 = UnanimousLayer::default();

    let mut p = l1.instantiate(&params, ProcessId(0), Value(1));
    assert_eq!(p.status(), ProcessStatus::Running);
    assert!(p.send(1).is_empty());
    deliver(p.as_mut(), &params, 0, 1, &[]);
    assert_eq!(p.status(), ProcessStatus::Halted(Value(1)));

    let mut p = l1.instantiate(&params, ProcessId(0), Value(1));
    deliver(p.as_mut(), &params, 0, 1, &[(3, Payload::Err)]);
    assert_eq!(p.decision(), Some(Value(1)));
    assert_eq!(p.outcome(), Some(LayerOutcome::Handoff(Value(1))));

    let mut p = l1.instantiate(&params, ProcessId(0), Value(0));
    assert_eq!(p.send(1).len(), 4);
    let errs: Vec<_> = (0..3).map(|s| (s, Payload::Err)).collect();
    deliver(p.as_mut(), &params, 0, 1, &errs);
    assert_eq!(p.decision(), None);
    assert_eq!(p.outcome(), Some(LayerOutcome::Handoff(Value(0))));
}

#[test]
fn l2_split_recommendations_set_est_and_call_for_help() {
    let params = SystemParams::binary(4, 1).unwrap();
    let mut p = SanhedrinLayer::binary().instantiate(&params, ProcessId(3), Value(0));
    deliver(p.as_mut(), &params, 3, 1, &[]);
    // members 0 and 1 recommend 1 (silence at odd receiver 3); member 2 recommends 0
    deliver(p.as_mut(), &params, 3, 2, &[(2, Payload::ValueBit(0))]);
    assert_eq!(p.status(), ProcessStatus::Running);
    assert_eq!(p.estimate(), Some(Value(1)));
    let help = p.send(3);
    assert_eq!(help.len(), 4);
    assert!(help.iter().all(|o| o.payload == Payload::Help));
}

#[test]
fn l2_unanimous_recommendation_decides() {
    let params = SystemParams::binary(4, 1).unwrap();
    let mut p = SanhedrinLayer::binary().instantiate(&params, ProcessId(3), Value(0));
    deliver(p.as_mut(), &params, 3, 1, &[]);
    deliver(p.as_mut(), &params, 3, 2, &[]);
    assert_eq!(p.status(), ProcessStatus::Decided(Value(1)));
    assert!(p.send(3).is_empty());
    deliver(p.as_mut(), &params, 3, 3, &[]);
    assert_eq!(p.status(), ProcessStatus::Halted(Value(1)));
}

#[test]
fn l3_conflict_and_err_paths() {
    let params = SystemParams::binary(4, 1).unwrap();
    let mut p = CouncilLayer::binary().instantiate(&params, ProcessId(2), Value(0));
    deliver(p.as_mut(), &params, 2, 1, &[]);
    // council member 0 recommends 0 (silence at even 2), member 1 recommends 1
    deliver(p.as_mut(), &params, 2, 2, &[(1, Payload::ValueBit(1))]);
    assert_eq!(p.estimate(), Some(Value(0)));
    let err = p.send(3);
    assert_eq!(err.len(), 4);
    assert!(err.iter().all(|o| o.payload == Payload::Err));

    let mut q = CouncilLayer::binary().instantiate(&params, ProcessId(2), Value(0));
    deliver(q.as_mut(), &params, 2, 1, &[]);
    deliver(q.as_mut(), &params, 2, 2, &[]);
    assert!(q.send(3).is_empty());
    deliver(q.as_mut(), &params, 2, 3, &[(3, Payload::Err)]);
    assert_eq!(q.decision(), None);
    assert!(q.send(4).iter().all(|o| o.payload == Payload::Help));
    deliver(q.as_mut(), &params, 2, 4, &[(2, Payload::Help)]);
    assert_eq!(q.outcome(), Some(LayerOutcome::Handoff(Value(0))));
}

#[test]
fn l3_failure_free_example() {
    let t = run_ok(&scenario(4, 1, LayerName::L3, "scripted:echo", &[0, 0, 1, 0]));
    assert!(all_decided(&t, 0, 3));
    assert!(all_halted(&t));
    assert_eq!(t.rounds.len(), 4);
    assert!(t.layer_bits_total <= 10);
    assert_eq!(round_envelope_count(&t, 3) + round_envelope_count(&t, 4), 0);
}

#[test]
fn l2m_plurality_example() {
    let t = run_ok(
        &scenario(4, 1, LayerName::L2m, "scripted:echo", &[2, 2, 1, 0]).with_domain(3),
    );
    assert!(all_decided(&t, 2, 2));
}

#[test]
fn multi_valued_round_one_widths() {
    let params = SystemParams::new(4, 1, 4).unwrap();
    let l2m = SanhedrinLayer::multi_valued(ccsim::layers::MvCommonDefaults::standard(&params));
    let quiet = l2m.instantiate(&params, ProcessId(3), Value(0));
    assert!(quiet.send(1).is_empty());
    let loud = l2m.instantiate(&params, ProcessId(3), Value(3));
    let sends = loud.send(1);
    assert_eq!(sends.len(), 3);
    for o in &sends {
        assert_eq!(o.payload, Payload::ValueWide(Value(3)));
        let e = Envelope::new(1, ProcessId(3), o.to, o.payload, &params).unwrap();
        assert_eq!(e.bits, 2);
    }
}

#[test]
fn l1_compositions_with_scripted_base() {
    let t = run_ok(&scenario(4, 1, LayerName::L1, "scripted:always=1", &[1, 1, 1, 1]));
    assert!(!t.base_used());
    let t = run_ok(&scenario(4, 1, LayerName::L1, "scripted:always=1/1", &[1, 1, 1, 0]));
    assert!(t.base_entry.iter().all(|b| *b == Some((1, Value(1)))));
    assert_eq!(correct_decisions(&t), vec![Some(1); 4]);
    assert!(all_halted(&t));
    assert_eq!(t.rounds.len(), 2);
}

#[test]
fn l2_exact_failure_free_count_matches_explicit_sends() {
    for values in binary_vectors(7) {
        let t = run_ok(&scenario(7, 2, LayerName::L2, "scripted:echo", &values));
        let committee = 0..5usize;
        let rec = majority(&values) as usize;
        let round1: usize = (0..7)
            .map(|i| committee.clone().filter(|j| *j != i && j % 2 != values[i] as usize).count())
            .sum();
        let round2: usize = committee
            .clone()
            .map(|j| (0..7).filter(|p| *p != j && p % 2 != rec).count())
            .sum();
        assert_eq!(t.layer_bits_total as usize, round1 + round2, "{values:?}");
        assert!(t.layer_bits_total <= 42);
    }
}

#[test]
fn l2_counts_for_selected_vectors() {
    for (values, bits) in [
        ([0, 0, 0, 0, 0, 0, 0], 25),
        ([1, 1, 1, 1, 1, 1, 1], 35),
        ([1, 1, 0, 0, 1, 0, 1], 32),
        ([0, 1, 0, 1, 0, 1, 0], 30),
        ([1, 0, 1, 0, 1, 0, 1], 30),
    ] {
        let t = run_ok(&scenario(7, 2, LayerName::L2, "scripted:echo", &values));
        assert_eq!(t.layer_bits_total, bits, "{values:?}");
    }
}
