//! NG-RC feature vectors.
//!
//! A feature vector is laid out as
//!
//! ```text
//! [constant?] [linear features] [quadratic monomials] [cubic monomials]
//! ```
//!
//! Linear features are window averages of every selected channel, channel
//! by channel, window by window, with I before Q. Monomials are taken with
//! repetition in graded-lexicographic order over the linear indices (see
//! [`enumerate_monomials`]). Positions in this full layout are the
//! *canonical indices* used by term subsets.
//!
//! Cubic monomials are evaluated as one cached quadratic times one linear
//! value, so a full cubic model costs one product per quadratic and one per
//! cubic.

mod complexity;
mod monomials;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use complexity::{count_complexity, Complexity};
pub use monomials::{binomial, cubic_count, enumerate_monomials, quadratic_count, Monomial};

use crate::data::{Shot, IQTrace};
use crate::dsp::{active_windows, demodulate_prefix, window_average_prefix};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    Linear = 1,
    Quadratic = 2,
    Cubic = 3,
}

impl Degree {
    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            1 => Ok(Self::Linear),
            2 => Ok(Self::Quadratic),
            3 => Ok(Self::Cubic),
            _ => Err(invalid("degree", format!("{order} is not one of 1, 2, 3"))),
        }
    }

    pub fn order(self) -> usize {
        self as usize
    }
}

/// How stored channels become the per-qubit traces that get windowed.
#[derive(Debug, Clone, PartialEq)]
pub enum Frontend {
    /// Window the stored channels as they are (baseband data, or raw
    /// multiplexed samples used directly as linear features).
    Direct,
    /// Demodulate a single raw multiplexed channel at each intermediate
    /// frequency; output channel `j` belongs to qubit `j`.
    Demodulate { if_freqs: Vec<f64>, filter_len: usize },
}

/// Everything needed to turn a shot into a feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub degree: Degree,
    pub window: usize,
    pub include_constant: bool,
    /// Samples per stored channel.
    pub n_samples: usize,
    /// Stored channels per shot.
    pub n_channels: usize,
    pub frontend: Frontend,
    /// Per output channel boxcar end step; `None` keeps every sample.
    pub masks: Option<Vec<usize>>,
    /// Whether a per-qubit model may see other qubits' channels.
    pub cross_qubit: bool,
    /// With `cross_qubit`, restricts a model to channels within this index distance.
    pub neighbor_radius: Option<usize>,
    /// Explicit output channels feeding this spec; `None` means all.
    pub channels: Option<Vec<usize>>,
    /// Canonical indices to emit, in order; `None` emits the full vector.
    pub term_subset: Option<Vec<usize>>,
}

/// Identity of one linear feature: window `window` of `channel`,
/// quadrature 0 (I) or 1 (Q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearVar {
    pub channel: usize,
    pub window: usize,
    pub quadrature: u8,
}

/// What sits at a canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Constant,
    Linear(usize),
    Product(Monomial),
}

impl FeatureSpec {
    /// Direct-frontend spec with a constant, no masks and cross-qubit terms.
    pub fn new(degree: Degree, window: usize, n_channels: usize, n_samples: usize) -> Self {
        Self {
            degree,
            window,
            include_constant: true,
            n_samples,
            n_channels,
            frontend: Frontend::Direct,
            masks: None,
            cross_qubit: true,
            neighbor_radius: None,
            channels: None,
            term_subset: None,
        }
    }

    pub fn with_demodulation(mut self, if_freqs: Vec<f64>, filter_len: usize) -> Self {
        self.frontend = Frontend::Demodulate { if_freqs, filter_len };
        self
    }

    pub fn with_masks(mut self, masks: Vec<usize>) -> Self {
        self.masks = Some(masks);
        self
    }

    pub fn with_constant(mut self, include: bool) -> Self {
        self.include_constant = include;
        self
    }

    pub fn with_cross_qubit(mut self, cross: bool) -> Self {
        self.cross_qubit = cross;
        self
    }

    pub fn with_term_subset(mut self, subset: Vec<usize>) -> Self {
        self.term_subset = Some(subset);
        self
    }

    pub fn output_channels(&self) -> usize {
        match &self.frontend {
            Frontend::Direct => self.n_channels,
            Frontend::Demodulate { if_freqs, .. } => if_freqs.len(),
        }
    }

    /// Boxcar end of output channel `c`.
    pub fn channel_end(&self, c: usize) -> usize {
        self.masks.as_ref().map_or(self.n_samples, |m| m[c])
    }

    pub fn selected_channels(&self) -> Vec<usize> {
        self.channels
            .clone()
            .unwrap_or_else(|| (0..self.output_channels()).collect())
    }

    pub fn n_linear(&self) -> usize {
        self.selected_channels()
            .iter()
            .map(|&c| 2 * active_windows(self.channel_end(c), self.window))
            .sum()
    }

    /// Length of the full canonical vector, ignoring any term subset.
    pub fn n_full(&self) -> usize {
        let n_lin = self.n_linear();
        let mut n = usize::from(self.include_constant) + n_lin;
        if self.degree >= Degree::Quadratic {
            n += quadratic_count(n_lin);
        }
        if self.degree >= Degree::Cubic {
            n += cubic_count(n_lin);
        }
        n
    }

    /// Length of the emitted feature vector.
    pub fn n_features(&self) -> usize {
        self.term_subset.as_ref().map_or_else(|| self.n_full(), Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(invalid("window", "must be positive"));
        }
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be positive"));
        }
        if self.n_channels == 0 {
            return Err(invalid("n_channels", "must be positive"));
        }
        if let Frontend::Demodulate { if_freqs, filter_len } = &self.frontend {
            if self.n_channels != 1 {
                return Err(invalid("n_channels", "demodulation reads exactly one raw channel"));
            }
            if if_freqs.is_empty() {
                return Err(invalid("if_freqs", "need at least one intermediate frequency"));
            }
            if if_freqs.iter().any(|f| !(0.0..0.5).contains(f)) {
                return Err(invalid("if_freqs", "each must lie in [0, 0.5)"));
            }
            if *filter_len == 0 {
                return Err(invalid("filter_len", "must be positive"));
            }
        }
        let n_out = self.output_channels();
        if let Some(masks) = &self.masks {
            if masks.len() != n_out {
                return Err(invalid("masks", format!("expected {n_out} entries, found {}", masks.len())));
            }
            if masks.iter().any(|&m| m == 0 || m > self.n_samples) {
                return Err(invalid("masks", "each end step must lie in 1..=n_samples"));
            }
        }
        if let Some(channels) = &self.channels {
            if channels.is_empty() || channels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("channels", "must be non-empty, sorted and unique"));
            }
            if channels.iter().any(|&c| c >= n_out) {
                return Err(invalid("channels", "index past the last output channel"));
            }
        }
        if let Some(subset) = &self.term_subset {
            let full = self.n_full();
            let mut seen = vec![false; full];
            for &t in subset {
                if t >= full || core::mem::replace(&mut seen[t], true) {
                    return Err(invalid("term_subset", format!("index {t} is out of range or repeated")));
                }
            }
        }
        Ok(())
    }

    /// The spec a per-qubit model for `target` uses.
    ///
    /// Single-output-channel specs are returned unchanged. Otherwise a
    /// model sees only its own channel unless `cross_qubit` is set, in
    /// which case it sees every channel, or those within `neighbor_radius`.
    pub fn for_target(&self, target: usize) -> Result<FeatureSpec> {
        let n_out = self.output_channels();
        if n_out == 1 || self.channels.is_some() {
            return Ok(self.clone());
        }
        if target >= n_out {
            return Err(invalid("target", format!("qubit {target} has no channel (have {n_out})")));
        }
        let mut spec = self.clone();
        spec.channels = match (self.cross_qubit, self.neighbor_radius) {
            (false, _) => Some(vec![target]),
            (true, None) => None,
            (true, Some(r)) => Some((target.saturating_sub(r)..=(target + r).min(n_out - 1)).collect()),
        };
        Ok(spec)
    }

    pub fn compile(&self) -> Result<FeatureMap> {
        FeatureMap::new(self.clone())
    }
}

/// A compiled [`FeatureSpec`]: monomial tables are built once and shared.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    spec: FeatureSpec,
    channels: Vec<usize>,
    linear_vars: Vec<LinearVar>,
    n_quad: usize,
    /// For each cubic, (index into the quadratic block, linear index).
    cubic_parents: Vec<(u32, u32)>,
}

impl FeatureMap {
    pub fn new(spec: FeatureSpec) -> Result<Self> {
        spec.validate()?;
        let channels = spec.selected_channels();
        let mut linear_vars = Vec::new();
        for &c in &channels {
            for window in 0..active_windows(spec.channel_end(c), spec.window) {
                for quadrature in 0..2 {
                    linear_vars.push(LinearVar { channel: c, window, quadrature });
                }
            }
        }
        let n_lin = linear_vars.len();
        let n_quad = if spec.degree >= Degree::Quadratic { quadratic_count(n_lin) } else { 0 };
        let mut cubic_parents = Vec::new();
        if spec.degree >= Degree::Cubic {
            cubic_parents.reserve(cubic_count(n_lin));
            for i in 0..n_lin {
                for j in i..n_lin {
                    let parent = monomials::quadratic_index(n_lin, i, j) as u32;
                    for k in j..n_lin {
                        cubic_parents.push((parent, k as u32));
                    }
                }
            }
        }
        Ok(Self {
            spec,
            channels,
            linear_vars,
            n_quad,
            cubic_parents,
        })
    }

    pub fn spec(&self) -> &FeatureSpec {
        &self.spec
    }

    pub fn linear_vars(&self) -> &[LinearVar] {
        &self.linear_vars
    }

    pub fn n_linear(&self) -> usize {
        self.linear_vars.len()
    }

    pub fn full_len(&self) -> usize {
        usize::from(self.spec.include_constant) + self.n_linear() + self.n_quad + self.cubic_parents.len()
    }

    /// Emitted vector length.
    pub fn len(&self) -> usize {
        self.spec.term_subset.as_ref().map_or_else(|| self.full_len(), Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Canonical indices that are emitted, in emission order.
    pub fn emitted_terms(&self) -> Vec<usize> {
        self.spec
            .term_subset
            .clone()
            .unwrap_or_else(|| (0..self.full_len()).collect())
    }

    /// Decodes a canonical index.
    pub fn term(&self, canonical: usize) -> Term {
        let mut idx = canonical;
        if self.spec.include_constant {
            if idx == 0 {
                return Term::Constant;
            }
            idx -= 1;
        }
        let n_lin = self.n_linear();
        if idx < n_lin {
            return Term::Linear(idx);
        }
        idx -= n_lin;
        if idx < self.n_quad {
            return Term::Product(self.quadratic_at(idx));
        }
        idx -= self.n_quad;
        let (parent, k) = self.cubic_parents[idx];
        let q = self.quadratic_at(parent as usize);
        Term::Product(Monomial::cubic(q.vars()[0], q.vars()[1], k as usize))
    }

    fn quadratic_at(&self, mut idx: usize) -> Monomial {
        let n = self.n_linear();
        let mut i = 0;
        while idx >= n - i {
            idx -= n - i;
            i += 1;
        }
        Monomial::quadratic(i, i + idx)
    }

    fn check_shot(&self, shot: &Shot) -> Result<()> {
        let expected = match self.spec.frontend {
            Frontend::Direct => self.spec.n_channels,
            Frontend::Demodulate { .. } => 1,
        };
        if shot.channels.len() != expected {
            return Err(Error::LayoutMismatch(format!(
                "spec expects {expected} stored channels, shot has {}",
                shot.channels.len()
            )));
        }
        if shot.n_samples() != self.spec.n_samples {
            return Err(Error::LayoutMismatch(format!(
                "spec expects {} samples, shot has {}",
                self.spec.n_samples,
                shot.n_samples()
            )));
        }
        Ok(())
    }

    /// Window-averaged linear features of `shot`.
    pub fn linear_values(&self, shot: &Shot) -> Result<Vec<f64>> {
        self.check_shot(shot)?;
        let spec = &self.spec;
        let mut out = Vec::with_capacity(self.n_linear());
        for &c in &self.channels {
            let end = spec.channel_end(c);
            let n_windows = active_windows(end, spec.window);
            let demod;
            let trace: &IQTrace = match &spec.frontend {
                Frontend::Direct => &shot.channels[c],
                Frontend::Demodulate { if_freqs, filter_len } => {
                    demod = demodulate_prefix(&shot.channels[0], if_freqs[c], *filter_len, end)?;
                    &demod
                }
            };
            let (wi, wq) = window_average_prefix(
                &trace.i()[..end],
                &trace.q()[..end],
                spec.n_samples,
                spec.window,
                n_windows,
            );
            for (a, b) in wi.into_iter().zip(wq) {
                out.push(a);
                out.push(b);
            }
        }
        Ok(out)
    }

    /// Full canonical vector of `shot`, ignoring any term subset.
    pub fn build_full(&self, shot: &Shot) -> Result<Vec<f64>> {
        let lin = self.linear_values(shot)?;
        Ok(self.expand(&lin))
    }

    /// Full canonical vector from precomputed linear features.
    pub fn expand(&self, lin: &[f64]) -> Vec<f64> {
        let n_lin = lin.len();
        let mut out = Vec::with_capacity(self.full_len());
        if self.spec.include_constant {
            out.push(1.0);
        }
        out.extend_from_slice(lin);
        let quad_start = out.len();
        if self.n_quad > 0 {
            for i in 0..n_lin {
                let xi = lin[i];
                for &xj in &lin[i..] {
                    out.push(xi * xj);
                }
            }
        }
        for &(parent, k) in &self.cubic_parents {
            let v = out[quad_start + parent as usize] * lin[k as usize];
            out.push(v);
        }
        out
    }

    /// Emitted feature vector of `shot`.
    pub fn build(&self, shot: &Shot) -> Result<Vec<f64>> {
        let full = self.build_full(shot)?;
        Ok(match &self.spec.term_subset {
            None => full,
            Some(subset) => subset.iter().map(|&t| full[t]).collect(),
        })
    }

    /// Feature matrix with one column per shot (`N_f × M`).
    pub fn build_matrix(&self, shots: &[Shot]) -> Result<Matrix> {
        let nf = self.len();
        let m = shots.len();
        let mut data = vec![0.0; nf * m];
        for (col, shot) in shots.iter().enumerate() {
            let v = self.build(shot)?;
            for (row, x) in v.into_iter().enumerate() {
                data[row * m + col] = x;
            }
        }
        Matrix::from_vec(nf, m, data)
    }
}

/// One-off feature construction; prefer [`FeatureMap`] for many shots.
pub fn build_features(shot: &Shot, spec: &FeatureSpec) -> Result<Vec<f64>> {
    spec.compile()?.build(shot)
}
