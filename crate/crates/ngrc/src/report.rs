//! Metrics reports (JSON, CSV, gnuplot data) and sweep tables.
//!
//! JSON keys:
//!
//! - `n_shots`, `n_qubits`: size of the evaluated set.
//! - `models[]`: `name`, `kind` (`ngrc` | `matched_filter` | `boxcar`),
//!   `window`, `degree`, `qubits[]` (`qubit`, `fidelity`, `alpha`, `eta`),
//!   `geometric_mean`, `parameters`, `multiplications`.
//! - `cross_fidelity[]`: `model`, `matrix` (rows j, columns k, diagonal 1),
//!   `per_distance` (index 0 is Δk = 1) and `overall`.
//! - `notices[]`: omitted fields and why.
//!
//! Every float is written with 6 significant digits. The CSV has the
//! columns `model,kind,qubit,window,degree,alpha,fidelity,eta`; the row
//! with qubit `gm` carries the geometric mean.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ngrc_core::metrics::{geometric_mean_fidelity, infidelity_reduction, DistanceSummary};
use ngrc_core::trainer::GridRow;
use ngrc_core::Matrix;
use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ngrc,
    MatchedFilter,
    Boxcar,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ngrc => "ngrc",
            ModelKind::MatchedFilter => "matched_filter",
            ModelKind::Boxcar => "boxcar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitResult {
    pub qubit: usize,
    pub fidelity: f64,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelResult {
    pub name: String,
    pub kind: ModelKind,
    pub window: Option<usize>,
    pub degree: Option<String>,
    pub qubits: Vec<QubitResult>,
    pub geometric_mean: f64,
    pub parameters: Option<usize>,
    pub multiplications: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossFidelityTable {
    pub model: String,
    pub matrix: Vec<Vec<f64>>,
    pub per_distance: Vec<f64>,
    pub overall: f64,
}

impl CrossFidelityTable {
    pub fn new(model: &str, cf: &Matrix, summary: &DistanceSummary) -> Self {
        Self {
            model: model.to_string(),
            matrix: (0..cf.rows()).map(|r| cf.row(r).to_vec()).collect(),
            per_distance: summary.per_distance.clone(),
            overall: summary.overall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n_shots: usize,
    pub n_qubits: usize,
    pub models: Vec<ModelResult>,
    pub cross_fidelity: Vec<CrossFidelityTable>,
    pub notices: Vec<String>,
}

/// Predictions and metadata of one evaluated model.
#[derive(Debug, Clone)]
pub struct Run {
    pub name: String,
    pub kind: ModelKind,
    pub window: Option<usize>,
    pub degree: Option<String>,
    pub alphas: Vec<Option<f64>>,
    pub fidelities: Vec<f64>,
    pub parameters: Option<usize>,
    pub multiplications: Option<usize>,
    pub cross_fidelity: Option<(Matrix, DistanceSummary)>,
}

/// Collates runs; η is computed against the matched-filter run when one
/// is present and omitted with a notice otherwise.
pub fn assemble_report(n_shots: usize, n_qubits: usize, runs: &[Run]) -> Result<MetricsReport> {
    let mut notices = Vec::new();
    let baseline = runs.iter().find(|r| r.kind == ModelKind::MatchedFilter);
    if baseline.is_none() && runs.iter().any(|r| r.kind != ModelKind::MatchedFilter) {
        notices.push("eta omitted: no matched-filter baseline in this run".to_string());
    }
    let mut models = Vec::new();
    let mut cross_fidelity = Vec::new();
    for run in runs {
        let mut qubits = Vec::new();
        for (j, &f) in run.fidelities.iter().enumerate() {
            let eta = match baseline {
                Some(b) if run.kind != ModelKind::MatchedFilter => match infidelity_reduction(b.fidelities[j], f) {
                    Ok(eta) => Some(eta),
                    Err(e) => {
                        notices.push(format!("eta omitted for {} qubit {j}: {e}", run.name));
                        None
                    }
                },
                _ => None,
            };
            qubits.push(QubitResult {
                qubit: j,
                fidelity: f,
                alpha: run.alphas.get(j).copied().flatten(),
                eta,
            });
        }
        models.push(ModelResult {
            name: run.name.clone(),
            kind: run.kind,
            window: run.window,
            degree: run.degree.clone(),
            qubits,
            geometric_mean: geometric_mean_fidelity(&run.fidelities)?,
            parameters: run.parameters,
            multiplications: run.multiplications,
        });
        if let Some((cf, summary)) = &run.cross_fidelity {
            cross_fidelity.push(CrossFidelityTable::new(&run.name, cf, summary));
        }
    }
    if n_qubits < 2 {
        cross_fidelity.clear();
    }
    Ok(MetricsReport {
        n_shots,
        n_qubits,
        models,
        cross_fidelity,
        notices,
    })
}

/// `x` rounded to 6 significant digits.
pub fn sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn fmt6(x: f64) -> String {
    format!("{}", sig6(x))
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(sig6).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        round_json(&mut v);
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    pub fn to_csv(&self) -> Result<String> {
        let opt = |x: Option<f64>| x.map(fmt6).unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "kind", "qubit", "window", "degree", "alpha", "fidelity", "eta"])?;
        for m in &self.models {
            let window = m.window.map(|w| w.to_string()).unwrap_or_default();
            let degree = m.degree.clone().unwrap_or_default();
            for q in &m.qubits {
                w.write_record([
                    m.name.clone(),
                    m.kind.name().into(),
                    q.qubit.to_string(),
                    window.clone(),
                    degree.clone(),
                    opt(q.alpha),
                    fmt6(q.fidelity),
                    opt(q.eta),
                ])?;
            }
            w.write_record([
                m.name.clone(),
                m.kind.name().into(),
                "gm".into(),
                window,
                degree,
                String::new(),
                fmt6(m.geometric_mean),
                String::new(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Config(format!("csv buffer: {e}")))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    /// Gnuplot data: one block per model with `dk mean_abs_cf`, then the
    /// matrix as `j k value` triples.
    pub fn to_gnuplot(&self) -> String {
        let mut out = String::new();
        for t in &self.cross_fidelity {
            let _ = writeln!(out, "# model {}\n# dk mean_abs_cf", t.model);
            for (d, v) in t.per_distance.iter().enumerate() {
                let _ = writeln!(out, "{} {}", d + 1, fmt6(*v));
            }
            let _ = writeln!(out, "\n\n# j k cf");
            for (j, row) in t.matrix.iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    let _ = writeln!(out, "{j} {k} {}", fmt6(*v));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

/// One row per (target, α): the best threshold at that α.
pub fn sweep_table(model: &str, window: usize, degree: &str, grid: &[GridRow]) -> Result<String> {
    let mut best: BTreeMap<(usize, u64), (usize, f64, Option<f64>, f64)> = BTreeMap::new();
    let mut order = 0usize;
    for row in grid {
        let key = (row.target, row.alpha.to_bits());
        match best.get_mut(&key) {
            Some(b) if row.fidelity > b.3 => {
                b.2 = row.threshold;
                b.3 = row.fidelity;
            }
            Some(_) => {}
            None => {
                best.insert(key, (order, row.alpha, row.threshold, row.fidelity));
                order += 1;
            }
        }
    }
    let mut rows: Vec<(usize, usize, f64, Option<f64>, f64)> =
        best.into_iter().map(|((t, _), (o, a, th, f))| (t, o, a, th, f)).collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "target", "window", "degree", "alpha", "threshold", "fidelity"])?;
    for (t, _, a, th, f) in rows {
        w.write_record([
            model.to_string(),
            t.to_string(),
            window.to_string(),
            degree.to_string(),
            fmt6(a),
            th.map(fmt6).unwrap_or_default(),
            fmt6(f),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Config(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}
