mod common;

use common::{gaussian_matrix, rel_frobenius, ridge_by_inverse};
use ngrc_core::trainer::{ridge_fit, seq_init, seq_solve, seq_update, RidgeAccumulator};
use ngrc_core::Matrix;
use proptest::prelude::*;

fn columns(m: &Matrix, range: std::ops::Range<usize>) -> Matrix {
    Matrix::from_fn(m.rows(), range.len(), |r, c| m[(r, range.start + c)])
}

#[test]
fn closed_form_matches_dense_inverse() {
    let f = gaussian_matrix(5, 40, 1);
    let y = gaussian_matrix(1, 40, 2);
    let w = ridge_fit(&f, &y, 0.1).unwrap();
    assert!(rel_frobenius(&w, &ridge_by_inverse(&f, &y, 0.1)) < 1e-10);
}

#[test]
fn huge_alpha_shrinks_weights() {
    let f = gaussian_matrix(6, 30, 3);
    let y = gaussian_matrix(2, 30, 4);
    let w = ridge_fit(&f, &y, 1e9).unwrap();
    let bound = y.matmul(&f.transpose()).unwrap().frobenius_norm() / 1e9;
    assert!(w.frobenius_norm() <= bound);
}

#[test]
fn fifteen_batches_equal_one_fit() {
    let f = gaussian_matrix(40, 1500, 5);
    let y = gaussian_matrix(1, 1500, 6);
    let mut acc = seq_init(1e-3, 40, 1).unwrap();
    for b in 0..15 {
        let r = b * 100..(b + 1) * 100;
        acc = seq_update(acc, &columns(&f, r.clone()), &columns(&y, r)).unwrap();
    }
    assert_eq!(acc.n_seen(), 1500);
    let w = seq_solve(&acc).unwrap();
    assert!(rel_frobenius(&w, &ridge_fit(&f, &y, 1e-3).unwrap()) < 1e-8);
}

#[test]
fn shifted_solve_equals_fresh_alpha() {
    let f = gaussian_matrix(12, 80, 7);
    let y = gaussian_matrix(3, 80, 8);
    let mut acc = RidgeAccumulator::new(0.0, 12, 3).unwrap();
    acc.update(&f, &y).unwrap();
    for alpha in [1e-7, 1e-2, 10.0] {
        let w = acc.solve_shifted(alpha, false).unwrap();
        assert!(rel_frobenius(&w, &ridge_fit(&f, &y, alpha).unwrap()) < 1e-10);
    }
}

#[test]
fn merged_accumulators_equal_sequential_updates() {
    let f = gaussian_matrix(8, 60, 9);
    let y = gaussian_matrix(2, 60, 10);
    let mut a = RidgeAccumulator::new(0.5, 8, 2).unwrap();
    let mut b = RidgeAccumulator::new(0.5, 8, 2).unwrap();
    a.update(&columns(&f, 0..25), &columns(&y, 0..25)).unwrap();
    b.update(&columns(&f, 25..60), &columns(&y, 25..60)).unwrap();
    a.merge(&b).unwrap();
    let mut whole = RidgeAccumulator::new(0.5, 8, 2).unwrap();
    whole.update(&f, &y).unwrap();
    assert!(rel_frobenius(a.p_acc(), whole.p_acc()) < 1e-12);
    assert!(rel_frobenius(a.q_acc(), whole.q_acc()) < 1e-12);
    assert_eq!(a.n_seen(), 60);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn batches_in_any_order_match_closed_form(
        nf in 1usize..30,
        extra in 0usize..200,
        cuts in proptest::collection::vec(0.0f64..1.0, 0..14),
        alpha_exp in -7i32..=3,
        zero_alpha in any::<bool>(),
        seed in any::<u64>(),
        reverse in any::<bool>(),
    ) {
        let m = nf + 5 + extra;
        let alpha = if zero_alpha { 0.0 } else { 10f64.powi(alpha_exp) };
        let f = gaussian_matrix(nf, m, seed);
        let y = gaussian_matrix(2, m, seed ^ 0x55);
        let mut bounds: Vec<usize> = cuts.iter().map(|c| (c * m as f64) as usize).collect();
        bounds.push(0);
        bounds.push(m);
        bounds.sort_unstable();
        let mut batches: Vec<_> = bounds.windows(2).map(|w| w[0]..w[1]).collect();
        if reverse {
            batches.reverse();
        }
        let mut acc = seq_init(alpha, nf, 2).unwrap();
        for r in batches {
            acc = seq_update(acc, &columns(&f, r.clone()), &columns(&y, r)).unwrap();
        }
        let w = seq_solve(&acc).unwrap();
        let reference = ridge_fit(&f, &y, alpha).unwrap();
        prop_assert!(rel_frobenius(&w, &reference) < 1e-8);
    }

    #[test]
    fn stronger_ridge_never_grows_weights(seed in any::<u64>(), a1 in -7i32..3, gap in 1i32..4) {
        let f = gaussian_matrix(6, 20, seed);
        let y = gaussian_matrix(1, 20, seed.wrapping_add(1));
        let small = ridge_fit(&f, &y, 10f64.powi(a1)).unwrap();
        let large = ridge_fit(&f, &y, 10f64.powi(a1 + gap)).unwrap();
        prop_assert!(small.frobenius_norm() >= large.frobenius_norm());
    }
}
