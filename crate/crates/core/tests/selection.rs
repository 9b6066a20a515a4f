mod common;

use common::gaussian_matrix;
use ngrc_core::linalg::Matrix;
use ngrc_core::rng::stream_rng;
use ngrc_core::select::{select_terms, truncate_terms, InfoCriterion};
use ngrc_core::trainer::ridge_fit;
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

fn row_matrix(v: Vec<f64>) -> Matrix {
    let n = v.len();
    Matrix::from_vec(1, n, v).unwrap()
}

fn rss_of_fit(features: &Matrix, y: &Matrix, rows: &[usize], alpha: f64) -> f64 {
    let sub = Matrix::from_fn(rows.len(), features.cols(), |r, c| features[(rows[r], c)]);
    let w = ridge_fit(&sub, y, alpha).unwrap();
    let pred = w.matmul(&sub).unwrap();
    pred.as_slice().iter().zip(y.as_slice()).map(|(p, t)| (p - t) * (p - t)).sum()
}

/// Rows orthonormalized by modified Gram–Schmidt.
fn orthonormal(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut m = gaussian_matrix(rows, cols, seed);
    for r in 0..rows {
        for p in 0..r {
            let d: f64 = (0..cols).map(|c| m[(r, c)] * m[(p, c)]).sum();
            for c in 0..cols {
                let v = m[(p, c)];
                m.row_mut(r)[c] -= d * v;
            }
        }
        let norm: f64 = m.row(r).iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in m.row_mut(r) {
            *x /= norm;
        }
    }
    m
}

#[test]
fn scaled_term_wins_over_brute_force_alternatives() {
    let f = gaussian_matrix(10, 60, 21);
    let y = row_matrix(f.row(3).iter().map(|x| 2.0 * x).collect());
    let s = select_terms(&f, &y, 3, 0.0, InfoCriterion::Aic).unwrap();
    let best_single = (0..10)
        .min_by(|&a, &b| rss_of_fit(&f, &y, &[a], 0.0).total_cmp(&rss_of_fit(&f, &y, &[b], 0.0)))
        .unwrap();
    assert_eq!(best_single, 3);
    assert_eq!(s.terms[0], 3);
    assert!(s.rss[0] < 1e-20);
}

#[test]
fn orthonormal_library_sorts_by_correlation() {
    let f = orthonormal(12, 80, 5);
    let y = gaussian_matrix(1, 80, 6);
    let s = select_terms(&f, &y, 12, 0.0, InfoCriterion::Aic).unwrap();
    let mut order: Vec<usize> = (0..12).collect();
    let corr = |i: usize| -> f64 { f.row(i).iter().zip(y.row(0)).map(|(a, b)| a * b).sum::<f64>().abs() };
    order.sort_by(|&a, &b| corr(b).total_cmp(&corr(a)));
    assert_eq!(s.terms, order);
    // with a ridge penalty the ordering of equal-norm rows is unchanged
    let ridged = select_terms(&f, &y, 12, 0.3, InfoCriterion::Aic).unwrap();
    assert_eq!(ridged.terms, order);
}

#[test]
fn planted_terms_are_recovered() {
    let mut hits = 0;
    for seed in 0..10 {
        let f = gaussian_matrix(30, 400, 100 + seed);
        let planted = [4usize, 17, 26];
        let mut rng = stream_rng(seed, 3);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let y: Vec<f64> = (0..400)
            .map(|c| 0.8 * f[(4, c)] - 0.5 * f[(17, c)] + 0.3 * f[(26, c)] + noise.sample(&mut rng))
            .collect();
        let s = select_terms(&f, &row_matrix(y), 5, 1e-6, InfoCriterion::Aic).unwrap();
        if planted.iter().all(|p| s.terms.contains(p)) {
            hits += 1;
        }
    }
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn truncation_matches_direct_evaluation() {
    let info: [f64; 5] = [10.0, 5.0, 4.99, 4.0, 3.0];
    let range: f64 = 10.0 - 3.0;
    let direct = (0..info.len() - 1)
        .find(|&k| (info[k + 1] - info[k]).abs() < 0.01 * range)
        .map_or(info.len(), |k| k + 1);
    assert_eq!(truncate_terms(&info).unwrap(), direct);
    assert_eq!(direct, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residual_never_grows_and_reduced_fits_are_worse(seed in any::<u64>(), nf in 3usize..16, lam in 0.0f64..0.5) {
        let f = gaussian_matrix(nf, 50, seed);
        let y = gaussian_matrix(1, 50, seed ^ 9);
        let s = select_terms(&f, &y, nf, lam, InfoCriterion::Aic).unwrap();
        prop_assert!(s.rss.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let all: Vec<usize> = (0..nf).collect();
        let full = rss_of_fit(&f, &y, &all, 0.01);
        let reduced = rss_of_fit(&f, &y, &s.terms[..nf / 2], 0.01);
        prop_assert!(reduced >= full - 1e-9);
    }

    #[test]
    fn permuting_the_library_permutes_the_selection(seed in any::<u64>(), shift in 1usize..9) {
        let nf = 9;
        let f = gaussian_matrix(nf, 40, seed);
        let y = gaussian_matrix(1, 40, seed ^ 1);
        let perm: Vec<usize> = (0..nf).map(|i| (i + shift) % nf).collect();
        let permuted = Matrix::from_fn(nf, 40, |r, c| f[(perm[r], c)]);
        let a = select_terms(&f, &y, 5, 0.0, InfoCriterion::Aic).unwrap();
        let b = select_terms(&permuted, &y, 5, 0.0, InfoCriterion::Aic).unwrap();
        let mapped: Vec<usize> = b.terms.iter().map(|&t| perm[t]).collect();
        prop_assert_eq!(a.terms, mapped);
    }
}
