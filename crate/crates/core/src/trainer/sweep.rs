use alloc::vec;
use alloc::vec::Vec;

use super::{argmax, threshold_grid, threshold_search_on, Decode, Discriminator, RidgeAccumulator};
use crate::data::{qubit_state, Shot, ShotSet};
use crate::error::{invalid, Error, Result};
use crate::features::FeatureSpec;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeKind {
    /// Threshold for two-level qubits, argmax otherwise.
    #[default]
    Auto,
    Threshold,
    /// One-hot targets even for two classes.
    Argmax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub alphas: Vec<f64>,
    /// Training shots per accumulator update.
    pub batch_size: usize,
    pub decode: DecodeKind,
    pub thresholds: Vec<f64>,
    /// Fall back to a pseudo-solution instead of skipping singular α.
    pub allow_pseudo: bool,
}

impl SweepOptions {
    pub fn new(alphas: Vec<f64>) -> Self {
        Self {
            alphas,
            batch_size: usize::MAX,
            decode: DecodeKind::Auto,
            thresholds: threshold_grid(),
            allow_pseudo: false,
        }
    }
}

/// Selection-set fidelity of one (target, α, threshold) combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub target: usize,
    pub alpha: f64,
    /// `None` for argmax models.
    pub threshold: Option<f64>,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Best model per qubit, in qubit order.
    pub models: Vec<Discriminator>,
    /// Selection-set fidelity of each best model.
    pub fidelities: Vec<f64>,
    pub grid: Vec<GridRow>,
    /// `(target, α)` pairs whose system was singular.
    pub singular: Vec<(usize, f64)>,
}

struct TargetSlot {
    target: usize,
    row: usize,
    decode: DecodeKind,
    best: Option<(f64, f64, Decode, Matrix)>,
}

fn resolve_decode(kind: DecodeKind, n_classes: usize) -> Result<DecodeKind> {
    match (kind, n_classes) {
        (DecodeKind::Auto, 2) | (DecodeKind::Threshold, 2) => Ok(DecodeKind::Threshold),
        (DecodeKind::Threshold, _) => Err(invalid("decode", "threshold decoding needs two classes")),
        _ => Ok(DecodeKind::Argmax),
    }
}

fn width(kind: DecodeKind, n_classes: usize) -> usize {
    if kind == DecodeKind::Threshold {
        1
    } else {
        n_classes
    }
}

fn targets_matrix(shots: &[Shot], slots: &[TargetSlot], n_outputs: usize, n_classes: usize) -> Matrix {
    let mut y = Matrix::zeros(n_outputs, shots.len());
    for (m, shot) in shots.iter().enumerate() {
        for slot in slots {
            let state = qubit_state(shot.label, slot.target, n_classes);
            match slot.decode {
                DecodeKind::Threshold => y[(slot.row, m)] = state as f64,
                _ => y[(slot.row + state, m)] = 1.0,
            }
        }
    }
    y
}

/// Trains one model per qubit for every α and keeps the (α, threshold)
/// with the highest fidelity on `select`.
///
/// Qubits whose resolved feature specs coincide share one feature
/// accumulator and one factorization per α. The accumulator is built once
/// with α = 0 and each α is applied as a diagonal shift. Ties keep the
/// earliest α in grid order and the smallest threshold.
pub fn sweep(train: &ShotSet, select: &ShotSet, spec: &FeatureSpec, opts: &SweepOptions) -> Result<SweepOutcome> {
    if opts.alphas.is_empty() || opts.thresholds.is_empty() {
        return Err(invalid("alphas", "grids must be non-empty"));
    }
    if opts.batch_size == 0 {
        return Err(invalid("batch_size", "must be positive"));
    }
    if train.is_empty() || select.is_empty() {
        return Err(Error::EmptyInput);
    }
    if train.n_qubits() != select.n_qubits() || train.n_classes() != select.n_classes() {
        return Err(invalid("select", "training and selection sets describe different systems"));
    }
    let n_classes = train.n_classes();
    let decode = resolve_decode(opts.decode, n_classes)?;

    // Group qubits by the feature spec their model sees.
    let mut groups: Vec<(FeatureSpec, Vec<usize>)> = Vec::new();
    for target in 0..train.n_qubits() {
        let resolved = spec.for_target(target)?;
        match groups.iter_mut().find(|(s, _)| *s == resolved) {
            Some((_, members)) => members.push(target),
            None => groups.push((resolved, vec![target])),
        }
    }

    let select_labels: Vec<u64> = select.labels();
    let mut grid = Vec::new();
    let mut singular = Vec::new();
    let mut finished: Vec<(usize, Discriminator, f64)> = Vec::new();

    for (group_spec, members) in groups {
        let map = group_spec.compile()?;
        let mut slots = Vec::with_capacity(members.len());
        let mut n_outputs = 0;
        for &target in &members {
            slots.push(TargetSlot {
                target,
                row: n_outputs,
                decode,
                best: None,
            });
            n_outputs += width(decode, n_classes);
        }

        let mut acc = RidgeAccumulator::new(0.0, map.len(), n_outputs)?;
        for batch in train.shots().chunks(opts.batch_size.min(train.len())) {
            let f = map.build_matrix(batch)?;
            let y = targets_matrix(batch, &slots, n_outputs, n_classes);
            acc.update(&f, &y)?;
        }
        let f_select = map.build_matrix(select.shots())?;

        for &alpha in &opts.alphas {
            let w = match acc.solve_shifted(alpha, opts.allow_pseudo) {
                Ok(w) => w,
                Err(Error::Singular { .. }) => {
                    singular.extend(slots.iter().map(|s| (s.target, alpha)));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let outputs = w.matmul(&f_select)?;
            for slot in &mut slots {
                let truth: Vec<usize> = select_labels
                    .iter()
                    .map(|&l| qubit_state(l, slot.target, n_classes))
                    .collect();
                let (fidelity, rule) = match slot.decode {
                    DecodeKind::Threshold => {
                        let row = outputs.row(slot.row);
                        let search = threshold_search_on(row, &truth, &opts.thresholds)?;
                        for (&t, &f) in opts.thresholds.iter().zip(&search.curve) {
                            grid.push(GridRow {
                                target: slot.target,
                                alpha,
                                threshold: Some(t),
                                fidelity: f,
                            });
                        }
                        (search.fidelity, Decode::Threshold(search.threshold))
                    }
                    _ => {
                        let mut column = vec![0.0; n_classes];
                        let correct = (0..outputs.cols())
                            .filter(|&m| {
                                for (c, v) in column.iter_mut().enumerate() {
                                    *v = outputs[(slot.row + c, m)];
                                }
                                argmax(&column) == truth[m]
                            })
                            .count();
                        let f = correct as f64 / outputs.cols() as f64;
                        grid.push(GridRow {
                            target: slot.target,
                            alpha,
                            threshold: None,
                            fidelity: f,
                        });
                        (f, Decode::Argmax)
                    }
                };
                if slot.best.as_ref().is_none_or(|b| fidelity > b.0) {
                    let rows = width(slot.decode, n_classes);
                    let weights = Matrix::from_fn(rows, w.cols(), |r, c| w[(slot.row + r, c)]);
                    slot.best = Some((fidelity, alpha, rule, weights));
                }
            }
        }

        for slot in slots {
            let (fidelity, alpha, rule, weights) = slot.best.ok_or(Error::AllSingular)?;
            let target_qubit = Some(slot.target);
            let disc = Discriminator::new(weights, group_spec.clone(), rule, alpha, target_qubit)?;
            finished.push((slot.target, disc, fidelity));
        }
    }

    finished.sort_by_key(|(t, _, _)| *t);
    grid.sort_by_key(|r| r.target);
    Ok(SweepOutcome {
        fidelities: finished.iter().map(|f| f.2).collect(),
        models: finished.into_iter().map(|f| f.1).collect(),
        grid,
        singular,
    })
}
