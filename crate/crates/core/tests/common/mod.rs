#![allow(dead_code)]

use ngrc_core::rng::stream_rng;
use ngrc_core::Matrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|r| a.row(r).to_vec()).collect();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| f64::from(u8::from(r == c))).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        for c in 0..n {
            m[col][c] /= p;
            inv[col][c] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..n {
                        m[r][c] -= f * m[col][c];
                        inv[r][c] -= f * inv[col][c];
                    }
                }
            }
        }
    }
    Matrix::from_vec(n, n, inv.into_iter().flatten().collect()).unwrap()
}

/// `Y Oᵀ (O Oᵀ + αI)⁻¹` by explicit products and inverse.
pub fn ridge_by_inverse(features: &Matrix, targets: &Matrix, alpha: f64) -> Matrix {
    let ft = features.transpose();
    let mut gram = features.matmul(&ft).unwrap();
    gram.add_diagonal(alpha);
    targets.matmul(&ft).unwrap().matmul(&inverse(&gram)).unwrap()
}

pub fn rel_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    let diff: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    diff.sqrt() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = stream_rng(seed, 11);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

pub fn uniform_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 12);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
