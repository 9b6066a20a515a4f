//! Greedy forward term selection with ridge-penalized orthogonal least
//! squares, plus the information-value truncation rule.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::features::FeatureSpec;
use crate::linalg::{dot, Matrix};

/// Default number of selection steps for nonlinear libraries.
pub const DEFAULT_MAX_TERMS: usize = 30;

/// Fraction of the information-value range below which truncation stops.
pub const TRUNCATION_FRACTION: f64 = 0.01;

/// Per-step information value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InfoCriterion {
    /// `M ln(RSS/M) + 2n`.
    #[default]
    Aic,
    /// `M ln(RSS/M) + n ln M`.
    Bic,
}

impl InfoCriterion {
    pub fn value(self, rss: f64, m: usize, n_terms: usize) -> f64 {
        let mf = m as f64;
        let fit = mf * libm::log((rss / mf).max(f64::MIN_POSITIVE));
        match self {
            InfoCriterion::Aic => fit + 2.0 * n_terms as f64,
            InfoCriterion::Bic => fit + n_terms as f64 * libm::log(mf),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Selected library rows in selection order.
    pub terms: Vec<usize>,
    /// Information value after each selection.
    pub info_values: Vec<f64>,
    /// Residual sum of squares after each selection.
    pub rss: Vec<f64>,
}

/// Relative squared norm under which an orthogonalized candidate counts as
/// linearly dependent on the terms already chosen.
const DEPENDENT_TOL: f64 = 1e-10;

/// Forward orthogonal selection of up to `max_terms` rows of `features`
/// (`N_f × M`) to fit `targets` (`d × M`).
///
/// Every candidate is kept orthogonal to the selected terms by incremental
/// Gram–Schmidt. A candidate `w` fitted to the residual `r` with ridge
/// penalty `λ` lowers the residual sum of squares by
/// `(wᵀr)² (wᵀw + 2λ) / (wᵀw + λ)²`; the largest drop wins and ties go to
/// the lower row index. Selection stops early when every remaining
/// candidate is dependent on the chosen ones.
pub fn select_terms(
    features: &Matrix,
    targets: &Matrix,
    max_terms: usize,
    ridge_param: f64,
    criterion: InfoCriterion,
) -> Result<Selection> {
    let (nf, m) = (features.rows(), features.cols());
    if max_terms == 0 {
        return Err(invalid("max_terms", "must be positive"));
    }
    if max_terms > nf {
        return Err(invalid("max_terms", format!("{max_terms} exceeds the {nf} library terms")));
    }
    if targets.cols() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: targets.cols(),
        });
    }
    if m == 0 || targets.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if !(ridge_param >= 0.0) || !ridge_param.is_finite() {
        return Err(invalid("ridge_param", "must be finite and non-negative"));
    }

    let mut cand = features.clone();
    let original: Vec<f64> = (0..nf).map(|i| dot(cand.row(i), cand.row(i))).collect();
    let mut norms = original.clone();
    let mut residual = targets.clone();
    let mut rss: f64 = residual.as_slice().iter().map(|x| x * x).sum();
    let mut chosen = alloc::vec![false; nf];

    let mut out = Selection {
        terms: Vec::new(),
        info_values: Vec::new(),
        rss: Vec::new(),
    };
    let mut proj = alloc::vec![0.0; targets.rows()];
    for step in 0..max_terms {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..nf {
            let ww = norms[i];
            if chosen[i] || !(ww > DEPENDENT_TOL * original[i]) || ww == 0.0 {
                continue;
            }
            let w = cand.row(i);
            let mut s = 0.0;
            for r in 0..targets.rows() {
                let p = dot(w, residual.row(r));
                s += p * p;
            }
            let score = s * (ww + 2.0 * ridge_param) / ((ww + ridge_param) * (ww + ridge_param));
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        let Some((pick, drop)) = best else { break };
        chosen[pick] = true;
        let w: Vec<f64> = cand.row(pick).to_vec();
        let ww = norms[pick];
        for (r, p) in proj.iter_mut().enumerate() {
            *p = dot(&w, residual.row(r)) / (ww + ridge_param);
        }
        for (r, &p) in proj.iter().enumerate() {
            for (x, &wi) in residual.row_mut(r).iter_mut().zip(&w) {
                *x -= p * wi;
            }
        }
        rss = (rss - drop).max(0.0);
        // Recompute from the residual every few steps to stop drift.
        if step % 8 == 7 {
            rss = residual.as_slice().iter().map(|x| x * x).sum();
        }
        for j in 0..nf {
            if chosen[j] || norms[j] == 0.0 {
                continue;
            }
            let row = cand.row_mut(j);
            let c = dot(&w, row) / ww;
            if c != 0.0 {
                for (x, &wi) in row.iter_mut().zip(&w) {
                    *x -= c * wi;
                }
                norms[j] = dot(row, row);
            }
        }
        out.terms.push(pick);
        out.rss.push(rss);
        out.info_values.push(criterion.value(rss, m, step + 1));
    }
    Ok(out)
}

/// Number of terms to keep: the smallest `n` (1-based) at which the step
/// from the `n`-th to the `(n+1)`-th information value is below 1 % of the
/// range of all values. A flat sequence keeps one term and a sequence that
/// never levels off keeps all of them.
pub fn truncate_terms(info_values: &[f64]) -> Result<usize> {
    if info_values.len() < 2 {
        return Err(invalid("info_values", "need at least two values"));
    }
    let max = info_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = info_values.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range == 0.0 {
        return Ok(1);
    }
    let limit = TRUNCATION_FRACTION * range;
    Ok(info_values
        .windows(2)
        .position(|p| (p[1] - p[0]).abs() < limit)
        .map_or(info_values.len(), |k| k + 1))
}

/// `spec` restricted to `selected`, given as positions in the vector
/// `spec` currently emits. Composes with an existing subset.
pub fn reduced_spec(spec: &FeatureSpec, selected: &[usize]) -> Result<FeatureSpec> {
    let emitted = spec.n_features();
    if let Some(&bad) = selected.iter().find(|&&s| s >= emitted) {
        return Err(invalid("selected", format!("index {bad} outside the {emitted} emitted features")));
    }
    let subset: Vec<usize> = match &spec.term_subset {
        Some(existing) => selected.iter().map(|&s| existing[s]).collect(),
        None => selected.to_vec(),
    };
    let reduced = spec.clone().with_term_subset(subset);
    reduced.validate()?;
    Ok(reduced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_column_is_taken_first() {
        let f = Matrix::from_fn(4, 6, |r, c| ((r + 1) * (c + 2) % 7) as f64 + r as f64 * 0.5);
        let y = Matrix::from_vec(1, 6, f.row(2).to_vec()).unwrap();
        let s = select_terms(&f, &y, 2, 0.0, InfoCriterion::Aic).unwrap();
        assert_eq!(s.terms[0], 2);
        assert!(s.rss[0] < 1e-20);
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(truncate_terms(&[10.0, 5.0, 4.99, 4.0]).unwrap(), 2);
        assert_eq!(truncate_terms(&[3.0, 3.0, 3.0]).unwrap(), 1);
        assert_eq!(truncate_terms(&[10.0, 6.0, 3.0, 1.0]).unwrap(), 4);
        assert!(truncate_terms(&[1.0]).is_err());
    }

    #[test]
    fn dependent_library_stops_early() {
        let f = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap();
        let y = Matrix::from_vec(1, 3, vec![1.0, 0.0, 1.0]).unwrap();
        let s = select_terms(&f, &y, 2, 0.0, InfoCriterion::Aic).unwrap();
        assert_eq!(s.terms.len(), 1);
    }
}
