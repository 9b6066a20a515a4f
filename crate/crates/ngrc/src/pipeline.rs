//! Parallel dataset generation, baselines, training and evaluation.

use std::ops::Range;

use ngrc_core::baseline::{
    boxcar_filter, fit_complex_discriminator, matched_filter_apply, matched_filter_weights, AxisRule,
    ComplexDiscriminator,
};
use ngrc_core::dsp::demodulate;
use ngrc_core::metrics::{cross_fidelity_by_distance, cross_fidelity_matrix, fidelity, DistanceSummary};
use ngrc_core::select::{reduced_spec, select_terms, truncate_terms, InfoCriterion, Selection};
use ngrc_core::sim::SimConfig;
use ngrc_core::trainer::{sweep, SweepOptions, SweepOutcome};
use ngrc_core::{Discriminator, FeatureSpec, Frontend, IQTrace, Layout, Matrix, Shot, ShotSet};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Context, Error, Result};
use crate::io::MatchedFilterModel;

/// Caps the global worker pool. Only the first call has an effect.
pub fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads.filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Generates the dataset of `config` with shots drawn in parallel. The
/// result is identical to the sequential generator for any worker count.
pub fn generate(config: &SimConfig, seed: u64) -> Result<ShotSet> {
    config.validate().context(|| "simulator config".into())?;
    let shots = (0..config.n_shots())
        .into_par_iter()
        .map(|m| config.shot(seed, m).map(|t| t.shot))
        .collect::<std::result::Result<Vec<Shot>, _>>()
        .context(|| "simulation".into())?;
    config.assemble(seed, shots).context(|| "simulation".into())
}

/// How to obtain one baseband trace per qubit from stored shots.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseband {
    /// Channel `j` already holds qubit `j`.
    Channels,
    /// Demodulate the single raw channel at each frequency.
    Demodulate { if_freqs: Vec<f64>, filter_len: usize },
}

impl Baseband {
    /// Follows the spec's frontend for raw data.
    pub fn for_data(set: &ShotSet, spec: Option<&FeatureSpec>) -> Result<Self> {
        match (set.layout(), spec.map(|s| &s.frontend)) {
            (Layout::PerQubitDemodulated, _) => Ok(Baseband::Channels),
            (Layout::RawMultiplexed, Some(Frontend::Demodulate { if_freqs, filter_len })) => Ok(Baseband::Demodulate {
                if_freqs: if_freqs.clone(),
                filter_len: *filter_len,
            }),
            (Layout::RawMultiplexed, _) => Baseband::from_meta(set),
        }
    }

    /// Reads `q{j}.if_freq` and `filter_len` from simulator metadata.
    pub fn from_meta(set: &ShotSet) -> Result<Self> {
        let missing = |k: &str| Error::Config(format!("raw data needs `{k}` in its metadata for baseband filters"));
        let if_freqs = (0..set.n_qubits())
            .map(|j| {
                let k = format!("q{j}.if_freq");
                set.meta.get(&k).and_then(|v| v.parse().ok()).ok_or_else(|| missing(&k))
            })
            .collect::<Result<Vec<f64>>>()?;
        let filter_len = set
            .meta
            .get("filter_len")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| missing("filter_len"))?;
        Ok(Baseband::Demodulate { if_freqs, filter_len })
    }

    /// Traces indexed `[qubit][shot]`.
    pub fn traces(&self, set: &ShotSet) -> Result<Vec<Vec<IQTrace>>> {
        (0..set.n_qubits())
            .map(|j| {
                set.shots()
                    .par_iter()
                    .map(|s| match self {
                        Baseband::Channels => s
                            .channels
                            .get(j)
                            .cloned()
                            .ok_or(ngrc_core::Error::LayoutMismatch(format!("no channel for qubit {j}"))),
                        Baseband::Demodulate { if_freqs, filter_len } => {
                            demodulate(&s.channels[0], if_freqs[j], *filter_len)
                        }
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .context(|| format!("baseband traces of qubit {j}"))
            })
            .collect()
    }
}

fn binary_states(set: &ShotSet, qubit: usize) -> Result<Vec<usize>> {
    if set.n_classes() != 2 {
        return Err(Error::Config("filter baselines need two classes per qubit".into()));
    }
    Ok(set.qubit_states(qubit))
}

/// Fits a matched filter per qubit on `train`, with the threshold that
/// maximizes training fidelity.
pub fn fit_matched_filters(train: &ShotSet, baseband: &Baseband) -> Result<Vec<MatchedFilterModel>> {
    let traces = baseband.traces(train)?;
    traces
        .iter()
        .enumerate()
        .map(|(j, tr)| {
            let states = binary_states(train, j)?;
            let ground: Vec<&IQTrace> = tr.iter().zip(&states).filter(|(_, &s)| s == 0).map(|x| x.0).collect();
            let excited: Vec<&IQTrace> = tr.iter().zip(&states).filter(|(_, &s)| s == 1).map(|x| x.0).collect();
            let weights = matched_filter_weights(&ground, &excited).context(|| format!("matched filter {j}"))?;
            let values = apply_all(tr, |t| matched_filter_apply(t, &weights))?;
            let (discriminator, _) =
                fit_complex_discriminator(&values, &states, AxisRule::ClassMeans).context(|| format!("matched filter {j}"))?;
            Ok(MatchedFilterModel { weights, discriminator })
        })
        .collect()
}

/// Unit-weight filter over `range` with a trained decision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxcarModel {
    pub range: Range<usize>,
    pub discriminator: ComplexDiscriminator,
}

pub fn fit_boxcars(train: &ShotSet, baseband: &Baseband, range: Range<usize>) -> Result<Vec<BoxcarModel>> {
    let traces = baseband.traces(train)?;
    traces
        .iter()
        .enumerate()
        .map(|(j, tr)| {
            let states = binary_states(train, j)?;
            let values = apply_all(tr, |t| boxcar_filter(t, range.clone()))?;
            let (discriminator, _) =
                fit_complex_discriminator(&values, &states, AxisRule::ClassMeans).context(|| format!("boxcar {j}"))?;
            Ok(BoxcarModel {
                range: range.clone(),
                discriminator,
            })
        })
        .collect()
}

fn apply_all(
    traces: &[IQTrace],
    f: impl Fn(&IQTrace) -> ngrc_core::Result<Complex64> + Sync + Send,
) -> Result<Vec<Complex64>> {
    traces
        .par_iter()
        .map(f)
        .collect::<std::result::Result<Vec<_>, _>>()
        .context(|| "filter".into())
}

/// Predictions `[qubit][shot]` of per-qubit matched filters.
pub fn classify_matched_filters(models: &[MatchedFilterModel], set: &ShotSet, baseband: &Baseband) -> Result<Vec<Vec<usize>>> {
    let traces = baseband.traces(set)?;
    models
        .iter()
        .zip(&traces)
        .map(|(m, tr)| classify_values(tr, &m.discriminator, |t| matched_filter_apply(t, &m.weights)))
        .collect()
}

pub fn classify_boxcars(models: &[BoxcarModel], set: &ShotSet, baseband: &Baseband) -> Result<Vec<Vec<usize>>> {
    let traces = baseband.traces(set)?;
    models
        .iter()
        .zip(&traces)
        .map(|(m, tr)| classify_values(tr, &m.discriminator, |t| boxcar_filter(t, m.range.clone())))
        .collect()
}

fn classify_values(
    traces: &[IQTrace],
    disc: &ComplexDiscriminator,
    f: impl Fn(&IQTrace) -> ngrc_core::Result<Complex64> + Sync + Send,
) -> Result<Vec<usize>> {
    Ok(apply_all(traces, f)?.into_iter().map(|z| disc.classify(z)).collect())
}

/// Classifies every shot with one model, building features in parallel.
pub fn classify(model: &Discriminator, shots: &[Shot]) -> Result<Vec<usize>> {
    let map = model.spec.compile().context(|| "feature spec".into())?;
    shots
        .par_iter()
        .map(|s| map.build(s).map(|f| model.classify_features(&f)))
        .collect::<std::result::Result<Vec<_>, _>>()
        .context(|| "classification".into())
}

/// Predictions `[qubit][shot]`; model `j` must target qubit `j`.
pub fn classify_all(models: &[Discriminator], set: &ShotSet) -> Result<Vec<Vec<usize>>> {
    models.iter().map(|m| classify(m, set.shots())).collect()
}

/// Per-qubit fidelities of predictions `[qubit][shot]`.
pub fn per_qubit_fidelity(preds: &[Vec<usize>], set: &ShotSet) -> Result<Vec<f64>> {
    preds
        .iter()
        .enumerate()
        .map(|(j, p)| fidelity(p, &set.qubit_states(j)).context(|| format!("fidelity of qubit {j}")))
        .collect()
}

/// Cross-fidelity matrix and its distance summary.
pub fn crosstalk(preds: &[Vec<usize>], set: &ShotSet) -> Result<(Matrix, DistanceSummary)> {
    let cf = cross_fidelity_matrix(preds, &set.labels()).context(|| "cross-fidelity".into())?;
    let summary = cross_fidelity_by_distance(&cf).context(|| "cross-fidelity".into())?;
    Ok((cf, summary))
}

/// Trains per-qubit models, selecting α and threshold on `select`.
pub fn train(train: &ShotSet, select: &ShotSet, spec: &FeatureSpec, opts: &SweepOptions) -> Result<SweepOutcome> {
    sweep(train, select, spec, opts).context(|| "training sweep".into())
}

/// Forward term selection for one target qubit on the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct TermChoice {
    pub selection: Selection,
    pub kept: usize,
    pub spec: FeatureSpec,
}

pub fn choose_terms(
    train: &ShotSet,
    spec: &FeatureSpec,
    target: usize,
    max_terms: usize,
    ridge_param: f64,
    criterion: InfoCriterion,
) -> Result<TermChoice> {
    let resolved = spec.for_target(target).context(|| format!("spec for qubit {target}"))?;
    let map = resolved.compile().context(|| "feature spec".into())?;
    let columns = train
        .shots()
        .par_iter()
        .map(|s| map.build(s))
        .collect::<std::result::Result<Vec<_>, _>>()
        .context(|| "features".into())?;
    let features = Matrix::from_fn(map.len(), columns.len(), |r, c| columns[c][r]);
    let y: Vec<f64> = train.qubit_states(target).iter().map(|&s| s as f64).collect();
    let targets = Matrix::from_vec(1, y.len(), y).context(|| "targets".into())?;
    let selection = select_terms(&features, &targets, max_terms.min(map.len()), ridge_param, criterion)
        .context(|| format!("term selection for qubit {target}"))?;
    let kept = if selection.info_values.len() >= 2 {
        truncate_terms(&selection.info_values).context(|| "truncation".into())?
    } else {
        selection.terms.len()
    };
    let spec = reduced_spec(&resolved, &selection.terms[..kept]).context(|| "reduced spec".into())?;
    Ok(TermChoice { selection, kept, spec })
}
