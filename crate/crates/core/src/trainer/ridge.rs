use alloc::format;

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, solve_rows_spd, Matrix};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha", "must be finite and non-negative"));
    }
    Ok(())
}

/// Ridge weights `W = Y Oᵀ (O Oᵀ + αI)⁻¹` for features `O` (`N_f × M`)
/// and targets `Y` (`d × M`).
///
/// The symmetric system is factored; no inverse is formed. With `alpha = 0`
/// and rank-deficient features this fails with [`Error::Singular`].
pub fn ridge_fit(features: &Matrix, targets: &Matrix, alpha: f64) -> Result<Matrix> {
    if features.cols() == 0 {
        return Err(Error::EmptyInput);
    }
    let mut acc = RidgeAccumulator::new(alpha, features.rows(), targets.rows())?;
    acc.update(features, targets)?;
    acc.solve()
}

/// Running sums `Q = α·0 + Σ Ỹ Õᵀ` and `P = αI + Σ Õ Õᵀ` of batched ridge
/// regression. Solving at any point gives the ridge solution over every
/// batch seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeAccumulator {
    q_acc: Matrix,
    p_acc: Matrix,
    alpha: f64,
    n_seen: usize,
}

impl RidgeAccumulator {
    /// `Q₀ = 0`, `P₀ = αI`.
    pub fn new(alpha: f64, n_features: usize, n_outputs: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let mut p_acc = Matrix::zeros(n_features, n_features);
        p_acc.add_diagonal(alpha);
        Ok(Self {
            q_acc: Matrix::zeros(n_outputs, n_features),
            p_acc,
            alpha,
            n_seen: 0,
        })
    }

    pub fn q_acc(&self) -> &Matrix {
        &self.q_acc
    }

    pub fn p_acc(&self) -> &Matrix {
        &self.p_acc
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_seen(&self) -> usize {
        self.n_seen
    }

    pub fn n_features(&self) -> usize {
        self.p_acc.rows()
    }

    pub fn n_outputs(&self) -> usize {
        self.q_acc.rows()
    }

    /// Rank-`k` update with a batch of `k` feature columns and matching targets.
    pub fn update(&mut self, features: &Matrix, targets: &Matrix) -> Result<()> {
        let nf = self.n_features();
        if features.rows() != nf || targets.rows() != self.n_outputs() || features.cols() != targets.cols() {
            return Err(Error::ShapeMismatch(format!(
                "batch features {}x{} and targets {}x{} for an accumulator of {} features, {} outputs",
                features.rows(),
                features.cols(),
                targets.rows(),
                targets.cols(),
                nf,
                self.n_outputs()
            )));
        }
        if features.cols() == 0 {
            return Ok(());
        }
        for i in 0..nf {
            let fi = features.row(i);
            for j in 0..=i {
                let v = dot(fi, features.row(j));
                self.p_acc[(i, j)] += v;
            }
        }
        for i in 0..nf {
            for j in i + 1..nf {
                self.p_acc[(i, j)] = self.p_acc[(j, i)];
            }
        }
        for r in 0..self.n_outputs() {
            let yr = targets.row(r);
            for i in 0..nf {
                let v = dot(yr, features.row(i));
                self.q_acc[(r, i)] += v;
            }
        }
        self.n_seen += features.cols();
        Ok(())
    }

    /// Adds another accumulator's data sums (its own `αI` is not added twice).
    pub fn merge(&mut self, other: &RidgeAccumulator) -> Result<()> {
        if other.n_features() != self.n_features() || other.n_outputs() != self.n_outputs() {
            return Err(Error::ShapeMismatch("accumulators of different shapes".into()));
        }
        let nf = self.n_features();
        for i in 0..nf {
            for j in 0..nf {
                let mut v = other.p_acc[(i, j)];
                if i == j {
                    v -= other.alpha;
                }
                self.p_acc[(i, j)] += v;
            }
        }
        for r in 0..self.n_outputs() {
            for i in 0..nf {
                self.q_acc[(r, i)] += other.q_acc[(r, i)];
            }
        }
        self.n_seen += other.n_seen;
        Ok(())
    }

    /// `W = Q P⁻¹`.
    pub fn solve(&self) -> Result<Matrix> {
        solve_rows_spd(&self.p_acc, &self.q_acc, self.alpha, false)
    }

    /// Solves with `P + extra·I`, i.e. as if the accumulator had been
    /// initialized with `alpha + extra`. With `allow_pseudo`, a singular
    /// system yields a basic solution over the well-conditioned features
    /// instead of an error.
    pub fn solve_shifted(&self, extra: f64, allow_pseudo: bool) -> Result<Matrix> {
        check_alpha(extra)?;
        if extra == 0.0 {
            return solve_rows_spd(&self.p_acc, &self.q_acc, self.alpha, allow_pseudo);
        }
        let mut p = self.p_acc.clone();
        p.add_diagonal(extra);
        solve_rows_spd(&p, &self.q_acc, self.alpha + extra, allow_pseudo)
    }
}

pub fn seq_init(alpha: f64, n_features: usize, n_outputs: usize) -> Result<RidgeAccumulator> {
    RidgeAccumulator::new(alpha, n_features, n_outputs)
}

pub fn seq_update(mut acc: RidgeAccumulator, batch_features: &Matrix, batch_targets: &Matrix) -> Result<RidgeAccumulator> {
    acc.update(batch_features, batch_targets)?;
    Ok(acc)
}

pub fn seq_solve(acc: &RidgeAccumulator) -> Result<Matrix> {
    acc.solve()
}
