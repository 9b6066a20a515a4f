//! Ridge-regression training, prediction and decoding.

mod ridge;
mod sweep;

use alloc::format;
use alloc::vec::Vec;

pub use ridge::{ridge_fit, seq_init, seq_solve, seq_update, RidgeAccumulator};
pub use sweep::{sweep, DecodeKind, GridRow, SweepOptions, SweepOutcome};

use crate::data::Shot;
use crate::error::{invalid, Error, Result};
use crate::features::FeatureSpec;
use crate::linalg::{dot, Matrix};

/// Rule turning raw outputs into a class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decode {
    /// Single output; class 1 iff `ŷ > t`.
    Threshold(f64),
    /// One output per class; the largest wins, lowest index on ties.
    Argmax,
}

/// A trained per-qubit (or single-qubit) model.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub w_out: Matrix,
    pub spec: FeatureSpec,
    pub decode: Decode,
    pub alpha: f64,
    pub target_qubit: Option<usize>,
}

impl Discriminator {
    pub fn new(w_out: Matrix, spec: FeatureSpec, decode: Decode, alpha: f64, target_qubit: Option<usize>) -> Result<Self> {
        spec.validate()?;
        if w_out.cols() != spec.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "weights have {} columns, spec emits {} features",
                w_out.cols(),
                spec.n_features()
            )));
        }
        match decode {
            Decode::Threshold(_) if w_out.rows() != 1 => {
                return Err(invalid("decode", "threshold decoding needs exactly one output"))
            }
            Decode::Argmax if w_out.rows() < 2 => return Err(invalid("decode", "argmax needs at least two outputs")),
            _ => {}
        }
        if !w_out.is_finite() {
            return Err(invalid("w_out", "weights must be finite"));
        }
        if !(alpha >= 0.0) {
            return Err(invalid("alpha", "must be non-negative"));
        }
        Ok(Self {
            w_out,
            spec,
            decode,
            alpha,
            target_qubit,
        })
    }

    pub fn n_outputs(&self) -> usize {
        self.w_out.rows()
    }

    pub fn predict(&self, features: &Matrix) -> Result<Matrix> {
        predict(&self.w_out, features)
    }

    pub fn decode(&self, outputs: &Matrix) -> Vec<usize> {
        decode(self.decode, outputs)
    }

    /// Builds features, predicts and decodes every shot.
    pub fn classify(&self, shots: &[Shot]) -> Result<Vec<usize>> {
        let map = self.spec.compile()?;
        shots
            .iter()
            .map(|s| {
                let f = map.build(s)?;
                Ok(self.classify_features(&f))
            })
            .collect()
    }

    /// Decodes a single feature vector.
    pub fn classify_features(&self, features: &[f64]) -> usize {
        let outputs: Vec<f64> = (0..self.n_outputs()).map(|r| dot(self.w_out.row(r), features)).collect();
        decode_one(self.decode, &outputs)
    }
}

/// `ŷ = W 𝒪` for features with one column per shot.
pub fn predict(w_out: &Matrix, features: &Matrix) -> Result<Matrix> {
    if w_out.cols() != features.rows() {
        return Err(Error::ShapeMismatch(format!(
            "weights expect {} features, got {}",
            w_out.cols(),
            features.rows()
        )));
    }
    w_out.matmul(features)
}

fn decode_one(rule: Decode, outputs: &[f64]) -> usize {
    match rule {
        Decode::Threshold(t) => usize::from(outputs[0] > t),
        Decode::Argmax => argmax(outputs),
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Decodes every column of `outputs`.
pub fn decode(rule: Decode, outputs: &Matrix) -> Vec<usize> {
    let mut column = alloc::vec![0.0; outputs.rows()];
    (0..outputs.cols())
        .map(|m| {
            for (r, c) in column.iter_mut().enumerate() {
                *c = outputs[(r, m)];
            }
            decode_one(rule, &column)
        })
        .collect()
}

/// Number of 0.01 steps in the threshold grid over `[0, 1]`.
pub const THRESHOLD_STEPS: usize = 100;

/// `{0.00, 0.01, …, 1.00}`.
pub fn threshold_grid() -> Vec<f64> {
    (0..=THRESHOLD_STEPS).map(|k| k as f64 / THRESHOLD_STEPS as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSearch {
    pub threshold: f64,
    pub fidelity: f64,
    /// Fidelity at every grid point.
    pub curve: Vec<f64>,
}

/// Best threshold on the default grid; ties go to the smallest threshold.
pub fn threshold_search(outputs: &[f64], labels: &[usize]) -> Result<ThresholdSearch> {
    threshold_search_on(outputs, labels, &threshold_grid())
}

/// Best threshold on an explicit grid, scanned in order.
pub fn threshold_search_on(outputs: &[f64], labels: &[usize], grid: &[f64]) -> Result<ThresholdSearch> {
    if outputs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: outputs.len(),
            found: labels.len(),
        });
    }
    if outputs.is_empty() || grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(invalid("labels", "threshold search needs binary labels"));
    }
    let m = outputs.len() as f64;
    let curve: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let correct = outputs.iter().zip(labels).filter(|(&y, &l)| usize::from(y > t) == l).count();
            correct as f64 / m
        })
        .collect();
    let mut best = 0;
    for k in 1..curve.len() {
        if curve[k] > curve[best] {
            best = k;
        }
    }
    Ok(ThresholdSearch {
        threshold: grid[best],
        fidelity: curve[best],
        curve,
    })
}

/// `{0} ∪ {10^(lo + k/per_decade)}` for `k = 0..=(hi-lo)·per_decade`.
pub fn log_alpha_grid(lo_exp: i32, hi_exp: i32, per_decade: usize, include_zero: bool) -> Vec<f64> {
    let n = ((hi_exp - lo_exp).max(0) as usize) * per_decade;
    let mut out = Vec::with_capacity(n + 2);
    if include_zero {
        out.push(0.0);
    }
    for k in 0..=n {
        let e = lo_exp as f64 + k as f64 / per_decade as f64;
        out.push(libm::pow(10.0, e));
    }
    out
}

/// α = 0 plus 13 points from 1e-7 to 1e-1, two per decade.
pub fn single_qubit_alphas() -> Vec<f64> {
    log_alpha_grid(-7, -1, 2, true)
}

/// α = 0 plus 21 points from 1e-7 to 1e3, two per decade.
pub fn multi_qubit_alphas() -> Vec<f64> {
    log_alpha_grid(-7, 3, 2, true)
}
