//! Fidelity, infidelity reduction, geometric-mean fidelity and
//! cross-fidelity.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::data::qubit_state;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;

/// Fraction of predictions equal to the truth.
pub fn fidelity(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let correct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / pred.len() as f64)
}

/// `((1 − f_mf) − (1 − f_ml)) / (1 − f_mf)`.
pub fn infidelity_reduction(f_mf: f64, f_ml: f64) -> Result<f64> {
    if f_mf >= 1.0 {
        return Err(Error::UndefinedReduction);
    }
    Ok(((1.0 - f_mf) - (1.0 - f_ml)) / (1.0 - f_mf))
}

/// `(Π f_r)^{1/N_q}`; zero if any entry is zero.
pub fn geometric_mean_fidelity(f: &[f64]) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptyInput);
    }
    if f.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(invalid("fidelities", "must be finite and non-negative"));
    }
    if f.contains(&0.0) {
        return Ok(0.0);
    }
    let log_mean = f.iter().map(|&x| libm::log(x)).sum::<f64>() / f.len() as f64;
    Ok(libm::exp(log_mean))
}

/// `1 − [P(1_j | 0_k) + P(0_j | 1_k)]` for binary qubits.
///
/// `pred_j` holds predictions for qubit `j`, `labels` the packed prepared
/// labels. The conditional probabilities are estimated separately for
/// every configuration of the qubits other than `k` and then averaged
/// over those configurations; configurations missing either state of `k`
/// are skipped.
pub fn cross_fidelity(pred_j: &[usize], labels: &[u64], k: usize) -> Result<f64> {
    if pred_j.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: pred_j.len(),
        });
    }
    if k >= 64 {
        return Err(invalid("k", "qubit index exceeds the packed label width"));
    }
    // (rest of the label) -> [[count, wrong] for k = 0, for k = 1]
    let mut groups: BTreeMap<u64, [[usize; 2]; 2]> = BTreeMap::new();
    let bit = 1u64 << k;
    for (&p, &label) in pred_j.iter().zip(labels) {
        let state = qubit_state(label, k, 2);
        let g = groups.entry(label & !bit).or_default();
        g[state][0] += 1;
        // `0_k` counts predictions of 1, `1_k` counts predictions of 0.
        if p != 1 - state {
            continue;
        }
        g[state][1] += 1;
    }
    for state in 0..2 {
        if !groups.values().any(|g| g[state][0] > 0) {
            return Err(Error::MissingConditioningClass { qubit: k, state });
        }
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for g in groups.values() {
        if g[0][0] == 0 || g[1][0] == 0 {
            continue;
        }
        let p10 = g[0][1] as f64 / g[0][0] as f64;
        let p01 = g[1][1] as f64 / g[1][0] as f64;
        sum += p10 + p01;
        n += 1;
    }
    if n == 0 {
        return Err(Error::MissingConditioningClass { qubit: k, state: 1 });
    }
    Ok(1.0 - sum / n as f64)
}

/// `F^CF_jk` for every ordered pair; `preds[j]` are predictions for qubit `j`.
pub fn cross_fidelity_matrix(preds: &[Vec<usize>], labels: &[u64]) -> Result<Matrix> {
    let n = preds.len();
    let mut out = Matrix::zeros(n, n);
    for (j, p) in preds.iter().enumerate() {
        for k in 0..n {
            out[(j, k)] = cross_fidelity(p, labels, k)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSummary {
    /// `⟨|F^CF|⟩` over ordered pairs with `|j − k| = Δk`, for `Δk = 1..N_q−1`.
    pub per_distance: Vec<f64>,
    /// Mean of the per-distance means.
    pub overall: f64,
}

/// Mean absolute off-diagonal cross-fidelity per qubit distance.
pub fn cross_fidelity_by_distance(cf: &Matrix) -> Result<DistanceSummary> {
    let n = cf.rows();
    if cf.cols() != n {
        return Err(Error::ShapeMismatch("cross-fidelity matrix must be square".into()));
    }
    if n < 2 {
        return Err(invalid("cf", "need at least two qubits"));
    }
    let per_distance: Vec<f64> = (1..n)
        .map(|d| {
            let mut sum = 0.0;
            for j in 0..n - d {
                sum += cf[(j, j + d)].abs() + cf[(j + d, j)].abs();
            }
            sum / (2 * (n - d)) as f64
        })
        .collect();
    let overall = mean(&per_distance);
    Ok(DistanceSummary { per_distance, overall })
}

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fidelity_counts() {
        assert_eq!(fidelity(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(fidelity(&[0, 1], &[1, 0]).unwrap(), 0.0);
        let truth = [0usize; 10];
        let mut pred = [0usize; 10];
        pred[3] = 1;
        assert_eq!(fidelity(&pred, &truth).unwrap(), 0.9);
        assert_eq!(fidelity(&[], &[]), Err(Error::EmptyInput));
    }

    #[test]
    fn reduction_formula() {
        assert_eq!(infidelity_reduction(0.9, 0.9).unwrap(), 0.0);
        assert_eq!(infidelity_reduction(0.8, 1.0).unwrap(), 1.0);
        assert_eq!(infidelity_reduction(1.0, 1.0), Err(Error::UndefinedReduction));
    }

    #[test]
    fn geometric_mean_edge_cases() {
        assert!((geometric_mean_fidelity(&[0.7; 4]).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(geometric_mean_fidelity(&[0.9, 0.0]).unwrap(), 0.0);
        assert!(geometric_mean_fidelity(&[]).is_err());
    }

    #[test]
    fn perfect_self_cross_fidelity_is_one() {
        let labels: Vec<u64> = (0..8).collect();
        let pred: Vec<usize> = labels.iter().map(|&l| qubit_state(l, 1, 2)).collect();
        assert_eq!(cross_fidelity(&pred, &labels, 1).unwrap(), 1.0);
        assert_eq!(cross_fidelity(&pred, &labels, 0).unwrap(), 0.0);
    }

    #[test]
    fn missing_state_is_reported() {
        assert_eq!(
            cross_fidelity(&[0, 1], &[0, 2], 0),
            Err(Error::MissingConditioningClass { qubit: 0, state: 1 })
        );
    }

    #[test]
    fn distance_buckets() {
        let mut cf = Matrix::zeros(5, 5);
        cf[(1, 2)] = 0.01;
        cf[(2, 1)] = 0.01;
        let s = cross_fidelity_by_distance(&cf).unwrap();
        assert!((s.per_distance[0] - 0.0025).abs() < 1e-15);
        assert_eq!(&s.per_distance[1..], &[0.0, 0.0, 0.0]);
        assert_eq!(vec![s.overall], vec![0.0025 / 4.0]);
    }
}
