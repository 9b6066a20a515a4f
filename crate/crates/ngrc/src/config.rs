//! Flat `key = value` configuration files and named presets.
//!
//! Blank lines and lines starting with `#` are ignored. A `preset = name`
//! line loads a built-in preset first; every other key in the file then
//! overrides it. Keys nobody reads are reported by name.
//!
//! Simulator keys: `kind` (`single` | `multiplexed`), `n_samples`,
//! `shots_per_class`, `shots_per_config`, `n_qubits`, `radius`, `phases`
//! (comma-separated radians, one per class), `kappa`, `t1_steps` (`inf`
//! disables relaxation), `excitation_prob`, `noise_sigma`, `noise`
//! (`gaussian` | `student_t`), `nu`, `if_freqs`, `coupling`,
//! `coupling_range` (`all` | `nearest`), `layout` (`raw` | `demodulated`),
//! `filter_len`.
//!
//! Feature keys: `degree` (`linear` | `quadratic` | `cubic`), `window`,
//! `include_constant`, `n_samples`, `n_channels`, `frontend` (`direct` |
//! `demodulate`), `if_freqs`, `filter_len`, `masks` (comma list or
//! `none`), `cross_qubit`, `neighbor_radius`, `channels`, `term_subset`,
//! `n_models`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::str::FromStr;

use ngrc_core::sim::{CrosstalkModel, Noise, QubitSimParams, SimConfig};
use ngrc_core::{Degree, FeatureSpec, Frontend, Layout, Matrix};

use crate::error::{Error, Result};

/// Intermediate frequencies of the five multiplexed qubits, in cycles per
/// sample. Spaced 0.1 apart so the 10-tap demodulation filter nulls the
/// neighbours.
pub const FIVE_QUBIT_IFS: [f64; 5] = [0.05, 0.15, 0.25, 0.35, 0.45];
/// Per-qubit boxcar end steps of the 500-sample five-qubit record.
pub const FIVE_QUBIT_BOXCAR_ENDS: [usize; 5] = [500, 500, 282, 479, 295];
pub const FIVE_QUBIT_FILTER_LEN: usize = 10;

/// Simulator presets.
pub const SIM_PRESETS: &[(&str, &str)] = &[
    (
        "1q-demo",
        "kind=single\nn_samples=100\nshots_per_class=100\nradius=1\nphases=0,2\nkappa=0.05\nnoise_sigma=4",
    ),
    (
        "1q-gauss",
        "kind=single\nn_samples=100\nshots_per_class=2000\nradius=1\nphases=0,2\nkappa=0.03\nnoise_sigma=4",
    ),
    (
        "1q-relax",
        "kind=single\nn_samples=100\nshots_per_class=20000\nradius=1\nphases=0,2\nkappa=0.1\nt1_steps=50\nnoise_sigma=1",
    ),
    (
        "1q-3state",
        "kind=single\nn_samples=60\nshots_per_class=500\nradius=1\nphases=-0.5,0,0.5\nkappa=0.2\nnoise_sigma=1.5",
    ),
    (
        "5q-coupled",
        "kind=multiplexed\nn_qubits=5\nn_samples=100\nshots_per_config=50\nradius=1\nphases=0,2\nkappa=0.1\n\
         noise_sigma=1.5\nif_freqs=0.05,0.15,0.25,0.35,0.45\ncoupling=0.1\ncoupling_range=all\nlayout=raw\nfilter_len=10",
    ),
    (
        "5q-coupled-large",
        "kind=multiplexed\nn_qubits=5\nn_samples=100\nshots_per_config=200\nradius=1\nphases=0,2\nkappa=0.1\n\
         noise_sigma=1.5\nif_freqs=0.05,0.15,0.25,0.35,0.45\ncoupling=0.1\ncoupling_range=all\nlayout=raw\nfilter_len=10",
    ),
];

/// Feature presets for the five-qubit 500-sample record.
pub const SPEC_PRESETS: &[(&str, &str)] = &[
    (
        "5q-linear-raw",
        "degree=linear\nwindow=1\nn_samples=500\nn_channels=1\nfrontend=direct\nn_models=5",
    ),
    (
        "5q-linear-w10",
        "degree=linear\nwindow=10\nn_samples=500\nn_channels=1\nfrontend=demodulate\n\
         if_freqs=0.05,0.15,0.25,0.35,0.45\nfilter_len=10\nmasks=500,500,282,479,295\nn_models=5",
    ),
    (
        "5q-quadratic-w50",
        "degree=quadratic\nwindow=50\nn_samples=500\nn_channels=1\nfrontend=demodulate\n\
         if_freqs=0.05,0.15,0.25,0.35,0.45\nfilter_len=10\nmasks=500,500,282,479,295\nn_models=5",
    ),
    (
        "5q-cubic-w200",
        "degree=cubic\nwindow=200\nn_samples=500\nn_channels=1\nfrontend=demodulate\n\
         if_freqs=0.05,0.15,0.25,0.35,0.45\nfilter_len=10\nmasks=500,500,282,479,295\nn_models=5",
    ),
];

/// Parsed key/value pairs that remember which keys were read.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl KvConfig {
    /// Parses `text`, expanding `preset` from `presets`.
    pub fn parse(text: &str, presets: &[(&str, &str)]) -> Result<Self> {
        let own = parse_pairs(text)?;
        let mut values = BTreeMap::new();
        if let Some(name) = own.get("preset") {
            let (_, body) = presets.iter().find(|(n, _)| n == name).ok_or_else(|| {
                let known: Vec<&str> = presets.iter().map(|p| p.0).collect();
                Error::Config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
            })?;
            values = parse_pairs(body)?;
        }
        for (k, v) in own {
            if k != "preset" {
                values.insert(k, v);
            }
        }
        Ok(Self {
            values,
            used: BTreeSet::new(),
        })
    }

    pub fn preset(name: &str, presets: &[(&str, &str)]) -> Result<Self> {
        Self::parse(&format!("preset={name}"), presets)
    }

    /// Sets or replaces a key.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.values.get(key).cloned()
    }

    pub fn opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{v}`"))),
        }
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.opt(key)?
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    /// Comma-separated list; `none` or an empty value gives `None`.
    pub fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let v = v.trim();
        if v.is_empty() || v == "none" {
            return Ok(None);
        }
        v.split(',')
            .map(|s| s.trim().parse())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map(Some)
            .map_err(|_| Error::Config(format!("key `{key}`: cannot parse list `{v}`")))
    }

    /// Fails with the names of keys that were never read.
    pub fn finish(self) -> Result<()> {
        let unknown: Vec<String> = self.values.keys().filter(|k| !self.used.contains(*k)).cloned().collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::UnknownKeys(unknown))
        }
    }
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("key `{k}` given twice")));
        }
    }
    Ok(out)
}

/// Reads simulator keys.
pub fn sim_config(cfg: &mut KvConfig) -> Result<SimConfig> {
    let kind: String = cfg.get("kind")?;
    let n_samples: usize = cfg.get("n_samples")?;
    let radius: f64 = cfg.get_or("radius", 1.0)?;
    let phases: Vec<f64> = cfg.list("phases")?.ok_or_else(|| Error::Config("missing required key `phases`".into()))?;
    let mut qubit = QubitSimParams::on_circle(radius, &phases, cfg.get("kappa")?, cfg.get("noise_sigma")?);
    qubit.t1_steps = cfg.get_or("t1_steps", f64::INFINITY)?;
    qubit.excitation_prob = cfg.get_or("excitation_prob", 0.0)?;
    qubit.noise = match cfg.get_or("noise", "gaussian".to_string())?.as_str() {
        "gaussian" => Noise::Gaussian,
        "student_t" => Noise::StudentT { nu: cfg.get("nu")? },
        other => return Err(Error::Config(format!("key `noise`: unknown value `{other}`"))),
    };
    let config = match kind.as_str() {
        "single" => SimConfig::SingleQubit {
            qubit,
            n_samples,
            shots_per_class: cfg.get("shots_per_class")?,
        },
        "multiplexed" => {
            let n_qubits: usize = cfg.get("n_qubits")?;
            let ifs: Vec<f64> = cfg
                .list("if_freqs")?
                .ok_or_else(|| Error::Config("missing required key `if_freqs`".into()))?;
            if ifs.len() != n_qubits {
                return Err(Error::Config(format!(
                    "key `if_freqs`: {} frequencies for {n_qubits} qubits",
                    ifs.len()
                )));
            }
            let coupling: f64 = cfg.get_or("coupling", 0.0)?;
            let crosstalk = match cfg.get_or("coupling_range", "all".to_string())?.as_str() {
                "all" => {
                    let m = Matrix::from_fn(n_qubits, n_qubits, |j, k| if j == k { 1.0 } else { coupling });
                    CrosstalkModel::new(m)
                }
                "nearest" => CrosstalkModel::nearest_neighbour(n_qubits, coupling),
                other => return Err(Error::Config(format!("key `coupling_range`: unknown value `{other}`"))),
            }
            .map_err(|e| Error::Config(format!("key `coupling`: {e}")))?;
            let layout = match cfg.get_or("layout", "raw".to_string())?.as_str() {
                "raw" => Layout::RawMultiplexed,
                "demodulated" => Layout::PerQubitDemodulated,
                other => return Err(Error::Config(format!("key `layout`: unknown value `{other}`"))),
            };
            SimConfig::Multiplexed {
                qubits: ifs
                    .iter()
                    .map(|&f| QubitSimParams {
                        if_freq: f,
                        ..qubit.clone()
                    })
                    .collect(),
                crosstalk,
                n_samples,
                shots_per_config: cfg.get("shots_per_config")?,
                layout,
                filter_len: cfg.get_or("filter_len", FIVE_QUBIT_FILTER_LEN)?,
            }
        }
        other => return Err(Error::Config(format!("key `kind`: unknown value `{other}`"))),
    };
    config.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(config)
}

/// Parses a simulator config file body, rejecting unknown keys.
pub fn parse_sim_config(text: &str) -> Result<SimConfig> {
    let mut cfg = KvConfig::parse(text, SIM_PRESETS)?;
    let sim = sim_config(&mut cfg)?;
    cfg.finish()?;
    Ok(sim)
}

pub fn sim_preset(name: &str) -> Result<SimConfig> {
    parse_sim_config(&format!("preset={name}"))
}

/// Shape defaults taken from a dataset when the config leaves them out.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShapeDefaults {
    pub n_samples: Option<usize>,
    pub n_channels: Option<usize>,
}

/// Reads feature keys. `n_models` is returned separately.
pub fn feature_spec(cfg: &mut KvConfig, shape: ShapeDefaults) -> Result<(FeatureSpec, Option<usize>)> {
    let degree = match cfg.get::<String>("degree")?.as_str() {
        "linear" | "1" => Degree::Linear,
        "quadratic" | "2" => Degree::Quadratic,
        "cubic" | "3" => Degree::Cubic,
        other => return Err(Error::Config(format!("key `degree`: unknown value `{other}`"))),
    };
    let shape_key = |cfg: &mut KvConfig, key: &str, default: Option<usize>| -> Result<usize> {
        cfg.opt(key)?
            .or(default)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    };
    let n_samples = shape_key(cfg, "n_samples", shape.n_samples)?;
    let n_channels = shape_key(cfg, "n_channels", shape.n_channels)?;
    let mut spec = FeatureSpec::new(degree, cfg.get("window")?, n_channels, n_samples)
        .with_constant(cfg.get_or("include_constant", true)?)
        .with_cross_qubit(cfg.get_or("cross_qubit", true)?);
    match cfg.get_or("frontend", "direct".to_string())?.as_str() {
        "direct" => {}
        "demodulate" => {
            let ifs = cfg
                .list("if_freqs")?
                .ok_or_else(|| Error::Config("missing required key `if_freqs`".into()))?;
            spec = spec.with_demodulation(ifs, cfg.get("filter_len")?);
        }
        other => return Err(Error::Config(format!("key `frontend`: unknown value `{other}`"))),
    }
    spec.masks = cfg.list("masks")?;
    spec.neighbor_radius = cfg.opt("neighbor_radius")?;
    spec.channels = cfg.list("channels")?;
    spec.term_subset = cfg.list("term_subset")?;
    let n_models = cfg.opt("n_models")?;
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok((spec, n_models))
}

pub fn parse_feature_spec(text: &str, shape: ShapeDefaults) -> Result<(FeatureSpec, Option<usize>)> {
    let mut cfg = KvConfig::parse(text, SPEC_PRESETS)?;
    let out = feature_spec(&mut cfg, shape)?;
    cfg.finish()?;
    Ok(out)
}

pub fn spec_preset(name: &str) -> Result<(FeatureSpec, Option<usize>)> {
    parse_feature_spec(&format!("preset={name}"), ShapeDefaults::default())
}

fn join<T: Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

/// Serializes a spec to the key/value form read by [`parse_feature_spec`].
pub fn spec_to_text(spec: &FeatureSpec) -> String {
    let degree = match spec.degree {
        Degree::Linear => "linear",
        Degree::Quadratic => "quadratic",
        Degree::Cubic => "cubic",
    };
    let mut lines = vec![
        format!("degree={degree}"),
        format!("window={}", spec.window),
        format!("include_constant={}", spec.include_constant),
        format!("n_samples={}", spec.n_samples),
        format!("n_channels={}", spec.n_channels),
        format!("cross_qubit={}", spec.cross_qubit),
    ];
    match &spec.frontend {
        Frontend::Direct => lines.push("frontend=direct".into()),
        Frontend::Demodulate { if_freqs, filter_len } => {
            lines.push("frontend=demodulate".into());
            lines.push(format!("if_freqs={}", join(if_freqs)));
            lines.push(format!("filter_len={filter_len}"));
        }
    }
    let mut opt_list = |key: &str, v: &Option<Vec<usize>>| {
        if let Some(v) = v {
            lines.push(format!("{key}={}", join(v)));
        }
    };
    opt_list("masks", &spec.masks);
    opt_list("channels", &spec.channels);
    opt_list("term_subset", &spec.term_subset);
    if let Some(r) = spec.neighbor_radius {
        lines.push(format!("neighbor_radius={r}"));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

pub fn spec_from_text(text: &str) -> Result<FeatureSpec> {
    Ok(parse_feature_spec(text, ShapeDefaults::default())?.0)
}
