//! Voting functions used by committee members to form recommendations.

use crate::model::Value;

/// Binary majority: 1 iff at least half of the votes are 1.
pub fn maj(votes: &[Value]) -> Value {
    let ones = votes.iter().filter(|v| **v == Value::ONE).count();
    if 2 * ones >= votes.len() {
        Value::ONE
    } else {
        Value::ZERO
    }
}

/// Most frequent value; ties go to the smallest value.
pub fn plur(votes: &[Value]) -> Value {
    plurality_with_count(votes).map_or(Value::ZERO, |(v, _)| v)
}

/// The plurality value together with its multiplicity.
pub fn plurality_with_count(votes: &[Value]) -> Option<(Value, usize)> {
    let mut sorted = votes.to_vec();
    sorted.sort_unstable();
    let mut best: Option<(Value, usize)> = None;
    for chunk in sorted.chunk_by(|a, b| a == b) {
        let candidate = (chunk[0], chunk.len());
        // strictly greater keeps the smallest value on ties
        if best.is_none_or(|(_, c)| candidate.1 > c) {
            best = Some(candidate);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vs(xs: &[u32]) -> Vec<Value> {
        xs.iter().copied().map(Value).collect()
    }

    #[test]
    fn maj_examples() {
        assert_eq!(maj(&vs(&[1, 1, 0, 0])), Value::ONE);
        assert_eq!(maj(&vs(&[0, 0, 0])), Value::ZERO);
        assert_eq!(maj(&vs(&[1, 0, 0, 0, 0])), Value::ZERO);
        assert_eq!(maj(&vs(&[1, 1, 0, 0, 0])), Value::ZERO);
        assert_eq!(maj(&vs(&[1, 1, 1, 0, 0])), Value::ONE);
    }

    #[test]
    fn plur_examples() {
        assert_eq!(plur(&vs(&[2, 2, 3])), Value(2));
        assert_eq!(plur(&vs(&[1, 1, 2, 2])), Value(1));
        assert_eq!(plur(&vs(&[0, 1, 2, 3])), Value(0));
        assert_eq!(plur(&vs(&[3, 1, 3, 2, 1, 3])), Value(3));
        assert_eq!(plurality_with_count(&vs(&[2, 0, 2])), Some((Value(2), 2)));
    }

    proptest! {
        #[test]
        fn plur_matches_counting_oracle(votes in proptest::collection::vec(0u32..5, 1..12)) {
            let votes = vs(&votes);
            let mut counts = [0usize; 5];
            for v in &votes { counts[v.0 as usize] += 1; }
            let max = *counts.iter().max().unwrap();
            let expected = counts.iter().position(|c| *c == max).unwrap() as u32;
            prop_assert_eq!(plur(&votes), Value(expected));
        }

        #[test]
        fn plur_agrees_with_maj_off_ties(votes in proptest::collection::vec(0u32..2, 1..12)) {
            let votes = vs(&votes);
            let ones = votes.iter().filter(|v| v.0 == 1).count();
            if 2 * ones != votes.len() {
                prop_assert_eq!(plur(&votes), maj(&votes));
            }
        }
    }
}
