use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{FeatureSpec, Frontend, LinearVar, Term};
use crate::dsp::DEMOD_MULTIPLICATIONS_PER_SAMPLE;
use crate::error::Result;

/// Evaluation cost of a bank of per-qubit NG-RC models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Complexity {
    pub parameters: usize,
    pub multiplications: usize,
    pub activations: usize,
    /// Real multiplications spent demodulating retained samples.
    pub demodulation: usize,
    /// Distinct monomial products, shared by every model.
    pub products: usize,
    /// One multiplication per weight, the constant included.
    pub weights: usize,
}

/// Counts parameters and multiplications for `n_models` models built from `spec`.
///
/// When the spec has one output channel per model, model `j` uses
/// `spec.for_target(j)`; otherwise every model uses `spec` itself.
/// Demodulation is charged four multiplications per sample before the
/// boxcar end of every channel some model reads. Each distinct monomial
/// product is charged once however many models use it, and a retained
/// cubic also needs its quadratic prefix. Window-average divisions are
/// folded into the weights and cost nothing.
pub fn count_complexity(spec: &FeatureSpec, n_models: usize) -> Result<Complexity> {
    spec.validate()?;
    let per_target = spec.output_channels() > 1 && spec.channels.is_none() && n_models == spec.output_channels();
    let mut quads: BTreeSet<[LinearVar; 2]> = BTreeSet::new();
    let mut cubics: BTreeSet<[LinearVar; 3]> = BTreeSet::new();
    let mut channels: BTreeSet<usize> = BTreeSet::new();
    let mut weights = 0;
    for target in 0..n_models {
        let model_spec = if per_target { spec.for_target(target)? } else { spec.clone() };
        let map = model_spec.compile()?;
        let vars = map.linear_vars();
        for canonical in map.emitted_terms() {
            weights += 1;
            match map.term(canonical) {
                Term::Constant => {}
                Term::Linear(k) => {
                    channels.insert(vars[k].channel);
                }
                Term::Product(m) => {
                    let v: Vec<LinearVar> = m.vars().iter().map(|&k| vars[k]).collect();
                    channels.extend(v.iter().map(|x| x.channel));
                    match v.len() {
                        2 => {
                            quads.insert([v[0], v[1]]);
                        }
                        _ => {
                            quads.insert([v[0], v[1]]);
                            cubics.insert([v[0], v[1], v[2]]);
                        }
                    }
                }
            }
        }
    }
    let demodulation = match spec.frontend {
        Frontend::Direct => 0,
        Frontend::Demodulate { .. } => {
            DEMOD_MULTIPLICATIONS_PER_SAMPLE * channels.iter().map(|&c| spec.channel_end(c)).sum::<usize>()
        }
    };
    let products = quads.len() + cubics.len();
    Ok(Complexity {
        parameters: weights,
        multiplications: demodulation + products + weights,
        activations: 0,
        demodulation,
        products,
        weights,
    })
}
