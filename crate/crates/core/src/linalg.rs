//! Dense row-major matrices and the symmetric positive-definite solver
//! behind every ridge fit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// Adds `shift` to every diagonal entry.
    pub fn add_diagonal(&mut self, shift: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += shift;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Dot product with a fixed four-way accumulation order.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Cholesky factor `A = L Lᵀ` of a symmetric matrix.
///
/// In strict mode a pivot at or below `n · ε · max(diag A)` is a failure. In
/// pseudo mode such pivots mark the variable as dropped: its row and column
/// of `L` are zeroed and the solve pins it to zero, which yields a basic
/// least-squares solution over the retained variables.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
    dropped: Vec<bool>,
}

impl Cholesky {
    pub fn factor(a: &Matrix) -> Option<Self> {
        Self::factor_inner(a, false)
    }

    pub fn factor_pseudo(a: &Matrix) -> Self {
        Self::factor_inner(a, true).expect("pseudo factorization never fails")
    }

    fn factor_inner(a: &Matrix, pseudo: bool) -> Option<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "Cholesky needs a square matrix");
        let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
        let tol = n as f64 * f64::EPSILON * max_diag;
        let mut l = Matrix::zeros(n, n);
        let mut dropped = vec![false; n];
        for j in 0..n {
            let (head, tail) = l.data.split_at_mut(j * n);
            let row_j = &mut tail[..n];
            // Off-diagonal entries of row j, using rows 0..j (already final).
            for k in 0..j {
                if dropped[k] {
                    continue;
                }
                let row_k = &head[k * n..k * n + k];
                let s = a[(j, k)] - dot(&row_j[..k], row_k);
                row_j[k] = s / head[k * n + k];
            }
            let d = a[(j, j)] - dot(&row_j[..j], &row_j[..j]);
            if !(d > tol) || !d.is_finite() {
                if !pseudo {
                    return None;
                }
                dropped[j] = true;
                row_j[..j].fill(0.0);
                row_j[j] = 0.0;
                continue;
            }
            row_j[j] = libm::sqrt(d);
        }
        Some(Self { l, dropped })
    }

    pub fn rank(&self) -> usize {
        self.dropped.iter().filter(|d| !**d).count()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        for i in 0..n {
            if self.dropped[i] {
                b[i] = 0.0;
                continue;
            }
            let row = self.l.row(i);
            b[i] = (b[i] - dot(&row[..i], &b[..i])) / row[i];
        }
        for i in (0..n).rev() {
            if self.dropped[i] {
                b[i] = 0.0;
                continue;
            }
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }
}

/// Solves `X A = B` for symmetric positive-definite `A`, i.e. each row of
/// `X` solves `A x = b` against the matching row of `B`.
pub fn solve_rows_spd(a: &Matrix, b: &Matrix, alpha_for_error: f64, allow_pseudo: bool) -> Result<Matrix> {
    if a.rows() != a.cols() || b.cols() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "system {}x{} with right-hand sides {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let chol = match Cholesky::factor(a) {
        Some(c) => c,
        None if allow_pseudo => Cholesky::factor_pseudo(a),
        None => return Err(Error::Singular { alpha: alpha_for_error }),
    };
    let mut x = b.clone();
    for r in 0..x.rows() {
        chol.solve_in_place(x.row_mut(r));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gauss-Jordan inverse with partial pivoting, kept separate from the
    /// Cholesky path.
    pub(crate) fn gauss_jordan_inverse(a: &Matrix) -> Matrix {
        let n = a.rows();
        let mut m = a.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| m[(x, col)].abs().partial_cmp(&m[(y, col)].abs()).unwrap())
                .unwrap();
            for c in 0..n {
                let t = m[(col, c)];
                m[(col, c)] = m[(pivot, c)];
                m[(pivot, c)] = t;
                let t = inv[(col, c)];
                inv[(col, c)] = inv[(pivot, c)];
                inv[(pivot, c)] = t;
            }
            let p = m[(col, col)];
            for c in 0..n {
                m[(col, c)] /= p;
                inv[(col, c)] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = m[(r, col)];
                    for c in 0..n {
                        m[(r, c)] -= f * m[(col, c)];
                        inv[(r, c)] -= f * inv[(col, c)];
                    }
                }
            }
        }
        inv
    }

    fn spd(n: usize) -> Matrix {
        let b = Matrix::from_fn(n, n, |r, c| libm::sin((r * 7 + c * 3) as f64) + if r == c { 2.0 } else { 0.0 });
        let mut a = b.matmul(&b.transpose()).unwrap();
        a.add_diagonal(0.1);
        a
    }

    #[test]
    fn cholesky_solve_matches_inverse() {
        let a = spd(6);
        let b = Matrix::from_fn(2, 6, |r, c| (r + 2 * c) as f64 - 3.0);
        let x = solve_rows_spd(&a, &b, 0.0, false).unwrap();
        let oracle = b.matmul(&gauss_jordan_inverse(&a)).unwrap();
        for (u, v) in x.as_slice().iter().zip(oracle.as_slice()) {
            assert!((u - v).abs() < 1e-10 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Matrix::zeros(3, 3);
        let b = Matrix::zeros(1, 3);
        assert_eq!(solve_rows_spd(&a, &b, 0.0, false), Err(Error::Singular { alpha: 0.0 }));
    }

    #[test]
    fn pseudo_solution_pins_dependent_variable() {
        // Second column duplicates the first.
        let a = Matrix::from_vec(3, 3, vec![2.0, 2.0, 0.0, 2.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let b = Matrix::from_vec(1, 3, vec![4.0, 4.0, 3.0]).unwrap();
        let x = solve_rows_spd(&a, &b, 0.0, true).unwrap();
        let expected = [2.0, 0.0, 3.0];
        for (got, want) in x.as_slice().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn dot_handles_remainders() {
        let a: Vec<f64> = (0..7).map(|x| x as f64).collect();
        assert_eq!(dot(&a, &a), 91.0);
    }
}
