//! Readout records: IQ traces, labeled shots and shot sets.
//!
//! Labels pack one state digit per qubit in radix `n_classes`, least
//! significant digit first. For two-level qubits this is the usual bit
//! packing with qubit 1 in bit 0.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

/// One channel of digitized in-phase/quadrature samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IQTrace {
    i: Vec<f64>,
    q: Vec<f64>,
}

impl IQTrace {
    pub fn new(i: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if i.len() != q.len() {
            return Err(Error::LengthMismatch {
                expected: i.len(),
                found: q.len(),
            });
        }
        if i.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = i
            .iter()
            .zip(&q)
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { i, q })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            i: alloc::vec![0.0; n],
            q: alloc::vec![0.0; n],
        }
    }

    pub fn from_complex(samples: &[Complex64]) -> Result<Self> {
        Self::new(
            samples.iter().map(|z| z.re).collect(),
            samples.iter().map(|z| z.im).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn i(&self) -> &[f64] {
        &self.i
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn sample(&self, n: usize) -> Complex64 {
        Complex64::new(self.i[n], self.q[n])
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.i.iter().zip(&self.q).map(|(&a, &b)| Complex64::new(a, b))
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.iter().collect()
    }

    /// Scales every sample by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            i: self.i.iter().map(|x| x * s).collect(),
            q: self.q.iter().map(|x| x * s).collect(),
        }
    }

    pub(crate) fn from_parts_unchecked(i: Vec<f64>, q: Vec<f64>) -> Self {
        debug_assert_eq!(i.len(), q.len());
        Self { i, q }
    }
}

/// A single readout measurement with its prepared-state label.
#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub channels: Vec<IQTrace>,
    pub label: u64,
}

impl Shot {
    pub fn new(channels: Vec<IQTrace>, label: u64) -> Result<Self> {
        let first = channels.first().ok_or(Error::EmptyInput)?.len();
        for ch in &channels[1..] {
            if ch.len() != first {
                return Err(Error::LengthMismatch {
                    expected: first,
                    found: ch.len(),
                });
            }
        }
        Ok(Self { channels, label })
    }

    pub fn n_samples(&self) -> usize {
        self.channels[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Layout {
    /// One channel holding the frequency-multiplexed intermediate-frequency record.
    RawMultiplexed = 0,
    /// One baseband channel per qubit.
    PerQubitDemodulated = 1,
}

impl Layout {
    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Self::RawMultiplexed),
            1 => Some(Self::PerQubitDemodulated),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::RawMultiplexed => "raw-multiplexed",
            Self::PerQubitDemodulated => "per-qubit-demodulated",
        }
    }
}

/// The dataset unit: homogeneous labeled shots plus free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotSet {
    shots: Vec<Shot>,
    n_qubits: usize,
    n_classes: usize,
    layout: Layout,
    pub meta: BTreeMap<String, String>,
}

/// Metadata key holding the expected number of shots per prepared configuration.
pub const META_SHOTS_PER_CONFIG: &str = "shots_per_config";

impl ShotSet {
    pub fn new(
        shots: Vec<Shot>,
        n_qubits: usize,
        n_classes: usize,
        layout: Layout,
        meta: BTreeMap<String, String>,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(invalid("n_qubits", "must be positive"));
        }
        if n_classes < 2 {
            return Err(invalid("n_classes", "must be at least 2"));
        }
        let n_configs = checked_configs(n_qubits, n_classes)?;
        if let Some(first) = shots.first() {
            let n_channels = first.channels.len();
            let n_samples = first.n_samples();
            for (idx, shot) in shots.iter().enumerate() {
                if shot.channels.len() != n_channels {
                    return Err(Error::Inhomogeneous(format!(
                        "shot {idx} has {} channels, expected {n_channels}",
                        shot.channels.len()
                    )));
                }
                if shot.n_samples() != n_samples {
                    return Err(Error::Inhomogeneous(format!(
                        "shot {idx} has {} samples, expected {n_samples}",
                        shot.n_samples()
                    )));
                }
                if shot.label >= n_configs {
                    return Err(Error::LabelOutOfRange {
                        label: shot.label,
                        limit: n_configs,
                    });
                }
            }
            if layout == Layout::RawMultiplexed && n_channels != 1 {
                return Err(Error::Inhomogeneous(format!(
                    "raw multiplexed layout needs one channel, found {n_channels}"
                )));
            }
        }
        let set = Self {
            shots,
            n_qubits,
            n_classes,
            layout,
            meta,
        };
        set.check_declared_counts()?;
        Ok(set)
    }

    fn check_declared_counts(&self) -> Result<()> {
        let Some(declared) = self.meta.get(META_SHOTS_PER_CONFIG) else {
            return Ok(());
        };
        let declared: usize = declared
            .parse()
            .map_err(|_| invalid("shots_per_config", format!("not an integer: {declared}")))?;
        let counts = self.label_counts();
        for label in 0..self.n_configurations() {
            let found = counts.get(&label).copied().unwrap_or(0);
            if found != declared {
                return Err(Error::Inhomogeneous(format!(
                    "configuration {label} has {found} shots, metadata declares {declared}"
                )));
            }
        }
        Ok(())
    }

    pub fn shots(&self) -> &[Shot] {
        &self.shots
    }

    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn n_channels(&self) -> usize {
        self.shots.first().map_or(0, |s| s.channels.len())
    }

    pub fn n_samples(&self) -> usize {
        self.shots.first().map_or(0, Shot::n_samples)
    }

    pub fn n_configurations(&self) -> u64 {
        (self.n_classes as u64).pow(self.n_qubits as u32)
    }

    pub fn labels(&self) -> Vec<u64> {
        self.shots.iter().map(|s| s.label).collect()
    }

    /// Prepared state of `qubit` for every shot.
    pub fn qubit_states(&self, qubit: usize) -> Vec<usize> {
        self.shots
            .iter()
            .map(|s| qubit_state(s.label, qubit, self.n_classes))
            .collect()
    }

    pub fn label_counts(&self) -> BTreeMap<u64, usize> {
        let mut counts = BTreeMap::new();
        for shot in &self.shots {
            *counts.entry(shot.label).or_insert(0) += 1;
        }
        counts
    }

    /// New set with the shots at `indices`, in the given order. The
    /// per-configuration count declaration is dropped since it no longer holds.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut meta = self.meta.clone();
        meta.remove(META_SHOTS_PER_CONFIG);
        Self {
            shots: indices.iter().map(|&i| self.shots[i].clone()).collect(),
            n_qubits: self.n_qubits,
            n_classes: self.n_classes,
            layout: self.layout,
            meta,
        }
    }
}

fn checked_configs(n_qubits: usize, n_classes: usize) -> Result<u64> {
    u32::try_from(n_qubits)
        .ok()
        .and_then(|q| (n_classes as u64).checked_pow(q))
        .ok_or_else(|| invalid("n_qubits", "configuration count overflows u64"))
}

/// State digit of `qubit` inside a packed label.
pub fn qubit_state(label: u64, qubit: usize, n_classes: usize) -> usize {
    let radix = n_classes as u64;
    ((label / radix.pow(qubit as u32)) % radix) as usize
}

/// Packs per-qubit states (qubit 1 first) into a label.
pub fn pack_label(states: &[usize], n_classes: usize) -> u64 {
    states
        .iter()
        .rev()
        .fold(0u64, |acc, &s| acc * n_classes as u64 + s as u64)
}

/// Stratified, seeded train/test partition.
///
/// Each prepared configuration is shuffled independently and
/// `round(fraction * count)` of its shots go to the training side. Both
/// outputs keep the original relative order of their shots.
pub fn split_train_test(set: &ShotSet, train_fraction: f64, seed: u64) -> Result<(ShotSet, ShotSet)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(invalid("train_fraction", "must lie strictly between 0 and 1"));
    }
    if set.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (idx, shot) in set.shots.iter().enumerate() {
        groups.entry(shot.label).or_default().push(idx);
    }
    let mut rng = stream_rng(seed, u64::MAX);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for members in groups.values_mut() {
        members.shuffle(&mut rng);
        let n_train = libm::round(train_fraction * members.len() as f64) as usize;
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((set.subset(&train), set.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy_set(labels: &[u64]) -> ShotSet {
        let shots = labels
            .iter()
            .enumerate()
            .map(|(k, &label)| {
                let v = k as f64;
                Shot::new(vec![IQTrace::new(vec![v, v + 1.0], vec![-v, 0.5]).unwrap()], label).unwrap()
            })
            .collect();
        ShotSet::new(shots, 1, 2, Layout::PerQubitDemodulated, BTreeMap::new()).unwrap()
    }

    #[test]
    fn trace_rejects_length_mismatch_and_nan() {
        assert_eq!(
            IQTrace::new(vec![1.0, 2.0], vec![1.0]),
            Err(Error::LengthMismatch { expected: 2, found: 1 })
        );
        assert_eq!(
            IQTrace::new(vec![1.0, f64::NAN], vec![1.0, 2.0]),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn label_packing_is_lsb_first() {
        // prepared 01000 (qubit 2 excited)
        assert_eq!(pack_label(&[0, 1, 0, 0, 0], 2), 0b00010);
        assert_eq!(qubit_state(0b00010, 1, 2), 1);
        assert_eq!(qubit_state(0b00010, 0, 2), 0);
        assert_eq!(pack_label(&[2], 3), 2);
    }

    #[test]
    fn shotset_rejects_out_of_range_label() {
        let shot = Shot::new(vec![IQTrace::zeros(3)], 2).unwrap();
        let err = ShotSet::new(vec![shot], 1, 2, Layout::PerQubitDemodulated, BTreeMap::new());
        assert_eq!(err, Err(Error::LabelOutOfRange { label: 2, limit: 2 }));
    }

    #[test]
    fn shotset_checks_declared_counts() {
        let shots = vec![Shot::new(vec![IQTrace::zeros(3)], 0).unwrap()];
        let mut meta = BTreeMap::new();
        meta.insert(META_SHOTS_PER_CONFIG.into(), "1".into());
        assert!(matches!(
            ShotSet::new(shots, 1, 2, Layout::PerQubitDemodulated, meta),
            Err(Error::Inhomogeneous(_))
        ));
    }

    #[test]
    fn split_hundred_shots_in_half() {
        let labels: Vec<u64> = (0..100).map(|k| k % 2).collect();
        let set = toy_set(&labels);
        let (train, test) = split_train_test(&set, 0.5, 3).unwrap();
        assert_eq!((train.len(), test.len()), (50, 50));
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let labels: Vec<u64> = (0..20).map(|k| (k >= 10) as u64).collect();
        let set = toy_set(&labels);
        let (a_train, a_test) = split_train_test(&set, 0.5, 11).unwrap();
        assert_eq!(a_train.label_counts().values().copied().collect::<Vec<_>>(), vec![5, 5]);
        assert_eq!(a_test.label_counts().values().copied().collect::<Vec<_>>(), vec![5, 5]);
        let (b_train, _) = split_train_test(&set, 0.5, 11).unwrap();
        assert_eq!(a_train, b_train);
        let (c_train, _) = split_train_test(&set, 0.5, 12).unwrap();
        assert_ne!(a_train.shots(), c_train.shots());
        assert_eq!(a_train.label_counts(), c_train.label_counts());
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let set = toy_set(&[0, 1, 0, 1]);
        assert!(split_train_test(&set, 0.0, 1).is_err());
        assert!(split_train_test(&set, 1.0, 1).is_err());
    }
}
