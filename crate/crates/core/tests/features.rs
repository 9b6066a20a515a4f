mod common;

use ngrc_core::features::{binomial, count_complexity, enumerate_monomials, Term};
use ngrc_core::select::reduced_spec;
use ngrc_core::{Degree, FeatureSpec, IQTrace, Shot};
use proptest::prelude::*;

fn shot(n: usize, seed: u64, scale: f64) -> Shot {
    let v = common::uniform_vec(2 * n, seed);
    let i = v[..n].iter().map(|x| x * scale).collect();
    let q = v[n..].iter().map(|x| x * scale).collect();
    Shot::new(vec![IQTrace::new(i, q).unwrap()], 0).unwrap()
}

#[test]
fn monomial_counts_follow_binomials() {
    assert_eq!(enumerate_monomials(84, 2).len(), 3570);
    let cubic = enumerate_monomials(26, 3);
    assert_eq!(cubic.iter().filter(|m| m.degree() == 2).count(), 351);
    assert_eq!(cubic.iter().filter(|m| m.degree() == 3).count(), 3276);
    for n in 1..12 {
        let all = enumerate_monomials(n, 3);
        assert_eq!(all.len(), binomial(n + 1, 2) + binomial(n + 2, 3));
        // graded, then lexicographic within a degree
        assert!(all.windows(2).all(|w| (w[0].degree(), w[0].vars()) < (w[1].degree(), w[1].vars())));
    }
}

#[test]
fn map_order_matches_enumeration() {
    let spec = FeatureSpec::new(Degree::Cubic, 2, 1, 6);
    let map = spec.compile().unwrap();
    let n_lin = map.n_linear();
    let listed = enumerate_monomials(n_lin, 3);
    for (k, m) in listed.iter().enumerate() {
        assert_eq!(map.term(1 + n_lin + k), Term::Product(*m));
    }
    // every cubic value is the product of its three linear values
    let s = shot(6, 4, 1.0);
    let full = map.build_full(&s).unwrap();
    let lin = &full[1..1 + n_lin];
    for (k, m) in listed.iter().enumerate() {
        let want: f64 = m.vars().iter().map(|&v| lin[v]).product();
        assert!((full[1 + n_lin + k] - want).abs() < 1e-15);
    }
}

#[test]
fn hand_enumerated_quadratics() {
    let s = Shot::new(vec![IQTrace::new(vec![2.0, 0.0], vec![3.0, 0.0]).unwrap()], 0).unwrap();
    let spec = FeatureSpec::new(Degree::Quadratic, 1, 1, 2);
    let v = spec.compile().unwrap().build(&s).unwrap();
    assert_eq!(v, vec![1.0, 2.0, 3.0, 0.0, 0.0, 4.0, 6.0, 0.0, 0.0, 9.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let zero = Shot::new(vec![IQTrace::zeros(2)], 0).unwrap();
    let z = spec.compile().unwrap().build(&zero).unwrap();
    assert_eq!(z[0], 1.0);
    assert!(z[1..].iter().all(|&x| x == 0.0));
}

#[test]
fn wrong_channel_count_is_a_layout_error() {
    let spec = FeatureSpec::new(Degree::Linear, 1, 2, 4);
    let err = spec.compile().unwrap().build(&shot(4, 1, 1.0)).unwrap_err();
    assert!(matches!(err, ngrc_core::Error::LayoutMismatch(_)));
}

#[test]
fn reduced_specs_emit_and_cost_less() {
    let spec = FeatureSpec::new(Degree::Quadratic, 2, 1, 8);
    let all: Vec<usize> = (0..spec.n_features()).collect();
    assert_eq!(reduced_spec(&spec, &all).unwrap().n_features(), spec.n_features());

    let small = reduced_spec(&spec, &[0, 5, 20]).unwrap();
    let s = shot(8, 9, 1.0);
    let full = spec.compile().unwrap().build(&s).unwrap();
    assert_eq!(small.compile().unwrap().build(&s).unwrap(), vec![full[0], full[5], full[20]]);
    // composing picks positions inside the current subset
    let smaller = reduced_spec(&small, &[2]).unwrap();
    assert_eq!(smaller.term_subset, Some(vec![20]));
    assert!(reduced_spec(&small, &[3]).is_err());

    let c_full = count_complexity(&spec, 1).unwrap();
    let c_small = count_complexity(&small, 1).unwrap();
    assert!(c_small.parameters < c_full.parameters);
    assert!(c_small.multiplications < c_full.multiplications);
}

proptest! {
    #[test]
    fn blocks_scale_with_their_degree(seed in any::<u64>(), s in 0.1f64..4.0, w in 1usize..4) {
        let spec = FeatureSpec::new(Degree::Cubic, w, 1, 6);
        let map = spec.compile().unwrap();
        let base = map.build(&shot(6, seed, 1.0)).unwrap();
        let scaled = map.build(&shot(6, seed, s)).unwrap();
        for (k, (a, b)) in base.iter().zip(&scaled).enumerate() {
            let d = match map.term(k) {
                Term::Constant => 0,
                Term::Linear(_) => 1,
                Term::Product(m) => m.degree(),
            };
            let want = a * s.powi(d as i32);
            prop_assert!((b - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn feature_vectors_do_not_depend_on_shot_order(seed in any::<u64>()) {
        let spec = FeatureSpec::new(Degree::Quadratic, 3, 1, 9);
        let map = spec.compile().unwrap();
        let shots = vec![shot(9, seed, 1.0), shot(9, seed ^ 1, 1.0)];
        let swapped = vec![shots[1].clone(), shots[0].clone()];
        let a = map.build_matrix(&shots).unwrap();
        let b = map.build_matrix(&swapped).unwrap();
        prop_assert_eq!(a.column(0), b.column(1));
        prop_assert_eq!(a.column(1), b.column(0));
    }
}
