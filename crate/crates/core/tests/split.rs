use std::collections::BTreeMap;

use ngrc_core::data::split_train_test;
use ngrc_core::{IQTrace, Layout, Shot, ShotSet};
use proptest::prelude::*;

fn set(counts: &[usize]) -> ShotSet {
    let mut shots = Vec::new();
    for (label, &c) in counts.iter().enumerate() {
        for k in 0..c {
            let v = (shots.len() * 7 + k) as f64;
            shots.push(Shot::new(vec![IQTrace::new(vec![v], vec![-v]).unwrap()], label as u64).unwrap());
        }
    }
    ShotSet::new(shots, 1, counts.len(), Layout::PerQubitDemodulated, BTreeMap::new()).unwrap()
}

fn ids(s: &ShotSet) -> Vec<i64> {
    s.shots().iter().map(|x| x.channels[0].i()[0] as i64).collect()
}

#[test]
fn seeds_change_membership_not_counts() {
    let s = set(&[30, 30]);
    let (a, _) = split_train_test(&s, 0.5, 1).unwrap();
    let (b, _) = split_train_test(&s, 0.5, 2).unwrap();
    let (c, _) = split_train_test(&s, 0.5, 1).unwrap();
    assert_eq!(a, c);
    assert_ne!(ids(&a), ids(&b));
    assert_eq!(a.label_counts(), b.label_counts());
}

#[test]
fn out_of_range_fraction_is_rejected() {
    let s = set(&[2, 2]);
    assert!(split_train_test(&s, 0.0, 1).is_err());
    assert!(split_train_test(&s, 1.0, 1).is_err());
}

proptest! {
    #[test]
    fn split_is_a_stratified_partition(
        counts in proptest::collection::vec(1usize..40, 2..5),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let s = set(&counts);
        let (train, test) = split_train_test(&s, fraction, seed).unwrap();
        let mut all = ids(&train);
        all.extend(ids(&test));
        all.sort_unstable();
        let mut want = ids(&s);
        want.sort_unstable();
        prop_assert_eq!(all, want);
        let tc = train.label_counts();
        for (label, &c) in counts.iter().enumerate() {
            let got = tc.get(&(label as u64)).copied().unwrap_or(0) as f64;
            prop_assert!((got - (fraction * c as f64).round()).abs() <= 1.0);
        }
    }
}
