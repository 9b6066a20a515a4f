//! Boxcar and matched filters with a complex-plane threshold discriminator.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;

use crate::data::IQTrace;
use crate::error::{invalid, Error, Result};

/// Unweighted complex sum of `trace` over `range`.
pub fn boxcar_filter(trace: &IQTrace, range: Range<usize>) -> Result<Complex64> {
    if range.start >= range.end || range.end > trace.len() {
        return Err(invalid("range", format!("{range:?} is empty or past {} samples", trace.len())));
    }
    let (i, q) = (trace.i(), trace.q());
    let re: f64 = i[range.clone()].iter().sum();
    let im: f64 = q[range].iter().sum();
    Ok(Complex64::new(re, im))
}

/// Complex per-step weights of a matched filter.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedFilterWeights {
    k: Vec<Complex64>,
}

impl MatchedFilterWeights {
    pub fn new(k: Vec<Complex64>) -> Result<Self> {
        if let Some(index) = k.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { k })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// Per-step mean and population variance (`var I + var Q`) of a class.
fn step_moments(traces: &[&IQTrace], n: usize) -> (Complex64, f64) {
    let m = traces.len() as f64;
    let mean = traces.iter().map(|t| t.sample(n)).sum::<Complex64>() / m;
    let var = traces.iter().map(|t| (t.sample(n) - mean).norm_sqr()).sum::<f64>() / m;
    (mean, var)
}

/// Weights `k_n = <S0_n - S1_n> / (var S0_n + var S1_n)`.
///
/// Means are complex and the variance of a complex sample is the sum of
/// the population variances of its I and Q parts.
pub fn matched_filter_weights(ground: &[&IQTrace], excited: &[&IQTrace]) -> Result<MatchedFilterWeights> {
    if ground.len() < 2 || excited.len() < 2 {
        return Err(invalid("shots", "need at least two shots per class"));
    }
    let n = ground[0].len();
    if let Some(t) = ground.iter().chain(excited).find(|t| t.len() != n) {
        return Err(Error::LengthMismatch { expected: n, found: t.len() });
    }
    let mut k = Vec::with_capacity(n);
    for step in 0..n {
        let (m0, v0) = step_moments(ground, step);
        let (m1, v1) = step_moments(excited, step);
        let denom = v0 + v1;
        if denom <= 0.0 {
            return Err(Error::ZeroVariance { step });
        }
        k.push((m0 - m1) / denom);
    }
    MatchedFilterWeights::new(k)
}

/// `Σ k_n (I_n + i Q_n)`.
pub fn matched_filter_apply(trace: &IQTrace, weights: &MatchedFilterWeights) -> Result<Complex64> {
    if trace.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            found: trace.len(),
        });
    }
    Ok(weights.k.iter().zip(trace.iter()).map(|(k, z)| k * z).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisRule {
    /// Line through the two class means.
    #[default]
    ClassMeans,
    /// Fisher direction `Σ_w⁻¹ (μ1 − μ0)` using the pooled IQ covariance.
    Fisher,
}

/// Projects filtered values on an axis and thresholds the projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDiscriminator {
    pub origin: Complex64,
    /// Unit vector pointing from class 0 toward class 1.
    pub axis: Complex64,
    pub threshold: f64,
}

impl ComplexDiscriminator {
    pub fn project(&self, z: Complex64) -> f64 {
        let d = z - self.origin;
        d.re * self.axis.re + d.im * self.axis.im
    }

    pub fn classify(&self, z: Complex64) -> usize {
        usize::from(self.project(z) > self.threshold)
    }
}

fn class_mean(values: &[Complex64], labels: &[usize], class: usize) -> (Complex64, usize) {
    let (sum, n) = values
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == class)
        .fold((Complex64::new(0.0, 0.0), 0usize), |(s, n), (z, _)| (s + z, n + 1));
    (sum / n.max(1) as f64, n)
}

fn fisher_axis(values: &[Complex64], labels: &[usize], m0: Complex64, m1: Complex64) -> Option<Complex64> {
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (z, &l) in values.iter().zip(labels) {
        let d = z - if l == 0 { m0 } else { m1 };
        sxx += d.re * d.re;
        sxy += d.re * d.im;
        syy += d.im * d.im;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det > 0.0) {
        return None;
    }
    let dm = m1 - m0;
    let a = Complex64::new((syy * dm.re - sxy * dm.im) / det, (sxx * dm.im - sxy * dm.re) / det);
    let norm = a.norm();
    (norm > 0.0).then(|| a / norm)
}

/// Fits a projection axis and the threshold that maximizes training
/// fidelity; returns the discriminator and that fidelity.
///
/// Candidate thresholds are the midpoints between consecutive sorted
/// projections plus one below and one above the data. When several
/// candidates tie, the middle of the first tied run is used.
pub fn fit_complex_discriminator(
    values: &[Complex64],
    labels: &[usize],
    rule: AxisRule,
) -> Result<(ComplexDiscriminator, f64)> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: values.len(),
            found: labels.len(),
        });
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(invalid("labels", "binary discriminator needs labels 0 or 1"));
    }
    let (m0, n0) = class_mean(values, labels, 0);
    let (m1, n1) = class_mean(values, labels, 1);
    if n0 == 0 || n1 == 0 {
        return Err(invalid("labels", "both classes must be present"));
    }
    let dm = m1 - m0;
    let dist = dm.norm();
    if !(dist > 0.0) {
        return Err(Error::DegenerateMeans);
    }
    let axis = match rule {
        AxisRule::ClassMeans => dm / dist,
        AxisRule::Fisher => fisher_axis(values, labels, m0, m1).unwrap_or(dm / dist),
    };
    let mut disc = ComplexDiscriminator {
        origin: m0,
        axis,
        threshold: 0.0,
    };
    let mut proj: Vec<(f64, usize)> = values.iter().zip(labels).map(|(&z, &l)| (disc.project(z), l)).collect();
    proj.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Threshold below everything: all predicted 1.
    let mut correct = n1;
    let mut candidates = Vec::with_capacity(proj.len() + 1);
    candidates.push((proj[0].0 - 1.0, correct));
    let mut idx = 0;
    while idx < proj.len() {
        let value = proj[idx].0;
        while idx < proj.len() && proj[idx].0 == value {
            if proj[idx].1 == 0 {
                correct += 1;
            } else {
                correct -= 1;
            }
            idx += 1;
        }
        let t = if idx < proj.len() { 0.5 * (value + proj[idx].0) } else { value + 1.0 };
        candidates.push((t, correct));
    }
    let best = candidates.iter().map(|c| c.1).max().unwrap_or(0);
    let start = candidates.iter().position(|c| c.1 == best).unwrap_or(0);
    let run = candidates[start..].iter().take_while(|c| c.1 == best).count();
    disc.threshold = candidates[start + (run - 1) / 2].0;
    Ok((disc, best as f64 / values.len() as f64))
}
