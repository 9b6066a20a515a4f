//! Synthetic dispersive-readout shots.
//!
//! Each class has a complex steady state; its mean trajectory rings up as
//! `s_c (1 - exp(-κ n))`. A shot follows its class trajectory, may jump once
//! (down to class 0 by relaxation or up one class by excitation) and then
//! continues on the new class trajectory, and gets i.i.d. noise on both
//! quadratures. Multiplexed shots mix the per-qubit baseband responses
//! through a crosstalk matrix and place each on its own carrier.
//!
//! Randomness per shot, in draw order: for each qubit one uniform for the
//! relaxation time and one for the excitation time, then the noise samples
//! (I before Q, sample by sample, qubit by qubit). Zero noise draws nothing.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::data::{pack_label, qubit_state, IQTrace, Layout, Shot, ShotSet, META_SHOTS_PER_CONFIG};
use crate::dsp::demodulate;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream_rng, ShotRng};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Noise {
    #[default]
    Gaussian,
    /// Student-t with `nu` degrees of freedom, scaled by `noise_sigma`.
    StudentT { nu: f64 },
}

/// Simulator parameters of one qubit; times are in samples.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSimParams {
    /// Steady-state response per class.
    pub steady_states: Vec<Complex64>,
    /// Ring-up rate per step.
    pub kappa: f64,
    /// Mean relaxation time; `f64::INFINITY` disables relaxation.
    pub t1_steps: f64,
    /// Probability per step of jumping up one class.
    pub excitation_prob: f64,
    pub noise_sigma: f64,
    pub noise: Noise,
    /// Carrier frequency in cycles per step, used by multiplexed synthesis.
    pub if_freq: f64,
}

impl QubitSimParams {
    /// Steady states at `radius · e^{iφ}` for each phase, no relaxation,
    /// no excitation, Gaussian noise.
    pub fn on_circle(radius: f64, phases: &[f64], kappa: f64, noise_sigma: f64) -> Self {
        Self {
            steady_states: phases.iter().map(|&p| Complex64::from_polar(radius, p)).collect(),
            kappa,
            t1_steps: f64::INFINITY,
            excitation_prob: 0.0,
            noise_sigma,
            noise: Noise::Gaussian,
            if_freq: 0.0,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.steady_states.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.steady_states.len() < 2 {
            return Err(invalid("steady_states", "need at least two classes"));
        }
        if self.steady_states.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(invalid("steady_states", "must be finite"));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(invalid("kappa", "must be finite and positive"));
        }
        if !(self.t1_steps > 0.0) {
            return Err(invalid("t1_steps", "must be positive (infinity disables relaxation)"));
        }
        if !(0.0..=1.0).contains(&self.excitation_prob) {
            return Err(invalid("excitation_prob", "must lie in [0, 1]"));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(invalid("noise_sigma", "must be finite and non-negative"));
        }
        if let Noise::StudentT { nu } = self.noise {
            if !(nu > 0.0) || !nu.is_finite() {
                return Err(invalid("nu", "must be finite and positive"));
            }
        }
        if !(0.0..0.5).contains(&self.if_freq) {
            return Err(invalid("if_freq", "must lie in [0, 0.5)"));
        }
        Ok(())
    }

    /// Noiseless, jump-free response of `class` at step `n`.
    pub fn mean_at(&self, class: usize, n: usize) -> Complex64 {
        self.steady_states[class] * (1.0 - libm::exp(-self.kappa * n as f64))
    }

    pub fn mean_trajectory(&self, class: usize, n_samples: usize) -> Result<IQTrace> {
        self.check_class(class)?;
        let z: Vec<Complex64> = (0..n_samples).map(|n| self.mean_at(class, n)).collect();
        IQTrace::from_complex(&z)
    }

    fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.n_classes() {
            return Err(Error::LabelOutOfRange {
                label: class as u64,
                limit: self.n_classes() as u64,
            });
        }
        Ok(())
    }
}

/// A state change during a shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jump {
    /// First sample on the new trajectory.
    pub index: usize,
    pub to_class: usize,
}

/// A simulated shot together with the jump each qubit took.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedShot {
    pub shot: Shot,
    pub jumps: Vec<Option<Jump>>,
}

fn sample_jump(params: &QubitSimParams, class: usize, n_samples: usize, rng: &mut ShotRng) -> Option<Jump> {
    let u_relax: f64 = rng.random();
    let u_excite: f64 = rng.random();
    let relax = (class > 0 && params.t1_steps.is_finite()).then(|| {
        let tau = -params.t1_steps * libm::log1p(-u_relax);
        tau as usize
    });
    let excite = (class + 1 < params.n_classes() && params.excitation_prob > 0.0).then(|| {
        if params.excitation_prob >= 1.0 {
            0
        } else {
            // failures before the first success of a per-step Bernoulli trial
            let k = libm::log1p(-u_excite) / libm::log1p(-params.excitation_prob);
            if k.is_finite() {
                k as usize
            } else {
                usize::MAX
            }
        }
    });
    let relax = relax.filter(|&i| i < n_samples).map(|index| Jump { index, to_class: 0 });
    let excite = excite.filter(|&i| i < n_samples).map(|index| Jump {
        index,
        to_class: class + 1,
    });
    match (relax, excite) {
        (Some(r), Some(e)) => Some(if e.index < r.index { e } else { r }),
        (r, e) => r.or(e),
    }
}

fn baseband(params: &QubitSimParams, class: usize, jump: Option<Jump>, n_samples: usize) -> Vec<Complex64> {
    (0..n_samples)
        .map(|n| {
            let c = match jump {
                Some(j) if n >= j.index => j.to_class,
                _ => class,
            };
            params.mean_at(c, n)
        })
        .collect()
}

fn noise_sample(params: &QubitSimParams, rng: &mut ShotRng) -> f64 {
    let x: f64 = match params.noise {
        Noise::Gaussian => StandardNormal.sample(rng),
        Noise::StudentT { nu } => match StudentT::new(nu) {
            Ok(d) => d.sample(rng),
            Err(_) => f64::NAN,
        },
    };
    params.noise_sigma * x
}

fn add_noise(params: &QubitSimParams, z: &mut [Complex64], rng: &mut ShotRng) {
    if params.noise_sigma == 0.0 {
        return;
    }
    for s in z.iter_mut() {
        let i = noise_sample(params, rng);
        let q = noise_sample(params, rng);
        *s += Complex64::new(i, q);
    }
}

/// One baseband shot of a single qubit prepared in `class`.
pub fn simulate_shot_traced(
    params: &QubitSimParams,
    class: usize,
    n_samples: usize,
    rng: &mut ShotRng,
) -> Result<TracedShot> {
    params.validate()?;
    params.check_class(class)?;
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be positive"));
    }
    let jump = sample_jump(params, class, n_samples, rng);
    let mut z = baseband(params, class, jump, n_samples);
    add_noise(params, &mut z, rng);
    let shot = Shot::new(vec![IQTrace::from_complex(&z)?], class as u64)?;
    Ok(TracedShot { shot, jumps: vec![jump] })
}

/// [`simulate_shot_traced`] on stream 0 of `seed`, without the trace.
pub fn simulate_shot(params: &QubitSimParams, class: usize, n_samples: usize, seed: u64) -> Result<Shot> {
    let mut rng = stream_rng(seed, 0);
    Ok(simulate_shot_traced(params, class, n_samples, &mut rng)?.shot)
}

/// Entry `(j, k)` scales how much of qubit `k`'s baseband response appears
/// on qubit `j`'s carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkModel {
    coupling: Matrix,
}

impl CrosstalkModel {
    pub fn new(coupling: Matrix) -> Result<Self> {
        if coupling.rows() != coupling.cols() || coupling.rows() == 0 {
            return Err(invalid("coupling", "must be a non-empty square matrix"));
        }
        if !coupling.is_finite() {
            return Err(invalid("coupling", "entries must be finite"));
        }
        if (0..coupling.rows()).any(|d| coupling[(d, d)] != 1.0) {
            return Err(invalid("coupling", "diagonal entries must be 1"));
        }
        Ok(Self { coupling })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            coupling: Matrix::identity(n),
        }
    }

    /// Nearest-neighbour coupling `c` between adjacent qubits.
    pub fn nearest_neighbour(n: usize, c: f64) -> Result<Self> {
        Self::new(Matrix::from_fn(n, n, |j, k| match j.abs_diff(k) {
            0 => 1.0,
            1 => c,
            _ => 0.0,
        }))
    }

    pub fn coupling(&self) -> &Matrix {
        &self.coupling
    }

    pub fn n_qubits(&self) -> usize {
        self.coupling.rows()
    }
}

fn check_multiplexed(params: &[QubitSimParams], crosstalk: &CrosstalkModel) -> Result<usize> {
    let first = params.first().ok_or(Error::EmptyInput)?;
    if crosstalk.n_qubits() != params.len() {
        return Err(invalid(
            "crosstalk",
            format!("{} qubits but a {}x{} coupling matrix", params.len(), crosstalk.n_qubits(), crosstalk.n_qubits()),
        ));
    }
    for (j, p) in params.iter().enumerate() {
        p.validate()?;
        if p.n_classes() != first.n_classes() {
            return Err(invalid("steady_states", "every qubit needs the same number of classes"));
        }
        if params[..j].iter().any(|o| o.if_freq == p.if_freq) {
            return Err(invalid("if_freq", format!("qubit {j} repeats carrier {}", p.if_freq)));
        }
    }
    Ok(first.n_classes())
}

/// One raw multiplexed shot: `Σ_j (Σ_k C_jk b_k[n] + noise_j[n]) e^{2πi f_j n}`.
pub fn simulate_multiplexed_traced(
    params: &[QubitSimParams],
    crosstalk: &CrosstalkModel,
    states: &[usize],
    n_samples: usize,
    rng: &mut ShotRng,
) -> Result<TracedShot> {
    let n_classes = check_multiplexed(params, crosstalk)?;
    if states.len() != params.len() {
        return Err(Error::LengthMismatch {
            expected: params.len(),
            found: states.len(),
        });
    }
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be positive"));
    }
    let mut jumps = Vec::with_capacity(params.len());
    let mut bases = Vec::with_capacity(params.len());
    for (p, &s) in params.iter().zip(states) {
        p.check_class(s)?;
        let jump = sample_jump(p, s, n_samples, rng);
        bases.push(baseband(p, s, jump, n_samples));
        jumps.push(jump);
    }
    let c = crosstalk.coupling();
    let mut raw = vec![Complex64::new(0.0, 0.0); n_samples];
    for (j, p) in params.iter().enumerate() {
        let mut mixed = vec![Complex64::new(0.0, 0.0); n_samples];
        for (k, b) in bases.iter().enumerate() {
            let ck = c[(j, k)];
            if ck != 0.0 {
                for (m, x) in mixed.iter_mut().zip(b) {
                    *m += x * ck;
                }
            }
        }
        add_noise(p, &mut mixed, rng);
        for (n, (r, m)) in raw.iter_mut().zip(&mixed).enumerate() {
            let theta = 2.0 * PI * p.if_freq * n as f64;
            *r += m * Complex64::new(libm::cos(theta), libm::sin(theta));
        }
    }
    let shot = Shot::new(vec![IQTrace::from_complex(&raw)?], pack_label(states, n_classes))?;
    Ok(TracedShot { shot, jumps })
}

/// [`simulate_multiplexed_traced`] on stream 0 of `seed`, without the trace.
pub fn simulate_multiplexed(
    params: &[QubitSimParams],
    crosstalk: &CrosstalkModel,
    states: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<Shot> {
    let mut rng = stream_rng(seed, 0);
    Ok(simulate_multiplexed_traced(params, crosstalk, states, n_samples, &mut rng)?.shot)
}

/// A full dataset description.
#[derive(Debug, Clone, PartialEq)]
pub enum SimConfig {
    /// Baseband shots of one qubit, `shots_per_class` per class, class-major.
    SingleQubit {
        qubit: QubitSimParams,
        n_samples: usize,
        shots_per_class: usize,
    },
    /// Every prepared configuration of several multiplexed qubits,
    /// configuration-major.
    Multiplexed {
        qubits: Vec<QubitSimParams>,
        crosstalk: CrosstalkModel,
        n_samples: usize,
        shots_per_config: usize,
        /// `PerQubitDemodulated` stores one demodulated channel per qubit.
        layout: Layout,
        /// Moving-average length used when `layout` demodulates.
        filter_len: usize,
    },
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            SimConfig::SingleQubit { qubit, n_samples, .. } => {
                qubit.validate()?;
                if *n_samples == 0 {
                    return Err(invalid("n_samples", "must be positive"));
                }
            }
            SimConfig::Multiplexed {
                qubits,
                crosstalk,
                n_samples,
                filter_len,
                ..
            } => {
                check_multiplexed(qubits, crosstalk)?;
                if *n_samples == 0 {
                    return Err(invalid("n_samples", "must be positive"));
                }
                if *filter_len == 0 {
                    return Err(invalid("filter_len", "must be positive"));
                }
                let n_conf = libm::pow(qubits[0].n_classes() as f64, qubits.len() as f64);
                if n_conf > (1u64 << 32) as f64 {
                    return Err(invalid("qubits", "too many prepared configurations"));
                }
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            SimConfig::SingleQubit { .. } => 1,
            SimConfig::Multiplexed { qubits, .. } => qubits.len(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            SimConfig::SingleQubit { qubit, .. } => qubit.n_classes(),
            SimConfig::Multiplexed { qubits, .. } => qubits.first().map_or(0, |q| q.n_classes()),
        }
    }

    pub fn n_samples(&self) -> usize {
        match self {
            SimConfig::SingleQubit { n_samples, .. } | SimConfig::Multiplexed { n_samples, .. } => *n_samples,
        }
    }

    pub fn shots_per_config(&self) -> usize {
        match self {
            SimConfig::SingleQubit { shots_per_class, .. } => *shots_per_class,
            SimConfig::Multiplexed { shots_per_config, .. } => *shots_per_config,
        }
    }

    pub fn n_configurations(&self) -> usize {
        let mut n = 1usize;
        for _ in 0..self.n_qubits() {
            n = n.saturating_mul(self.n_classes());
        }
        n
    }

    pub fn n_shots(&self) -> usize {
        self.n_configurations().saturating_mul(self.shots_per_config())
    }

    pub fn layout(&self) -> Layout {
        match self {
            SimConfig::SingleQubit { .. } => Layout::PerQubitDemodulated,
            SimConfig::Multiplexed { layout, .. } => *layout,
        }
    }

    /// Prepared label of shot `index`.
    pub fn label_of(&self, index: usize) -> u64 {
        (index / self.shots_per_config().max(1)) as u64
    }

    /// Shot `index` of the dataset, drawn from stream `index` of `seed`.
    ///
    /// Shots are independent, so any subset can be generated in any order
    /// and still match [`generate_dataset`].
    pub fn shot(&self, seed: u64, index: usize) -> Result<TracedShot> {
        let label = self.label_of(index);
        let mut rng = stream_rng(seed, index as u64);
        match self {
            SimConfig::SingleQubit { qubit, n_samples, .. } => {
                simulate_shot_traced(qubit, label as usize, *n_samples, &mut rng)
            }
            SimConfig::Multiplexed {
                qubits,
                crosstalk,
                n_samples,
                layout,
                filter_len,
                ..
            } => {
                let n_classes = self.n_classes();
                let states: Vec<usize> = (0..qubits.len()).map(|q| qubit_state(label, q, n_classes)).collect();
                let mut traced = simulate_multiplexed_traced(qubits, crosstalk, &states, *n_samples, &mut rng)?;
                if *layout == Layout::PerQubitDemodulated {
                    let raw = &traced.shot.channels[0];
                    let channels = qubits
                        .iter()
                        .map(|q| demodulate(raw, q.if_freq, *filter_len))
                        .collect::<Result<Vec<_>>>()?;
                    traced.shot = Shot::new(channels, label)?;
                }
                Ok(traced)
            }
        }
    }

    /// Metadata recorded with a generated dataset.
    pub fn meta(&self, seed: u64) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("source", "simulator".into());
        put("seed", seed.to_string());
        put("n_samples", self.n_samples().to_string());
        put(META_SHOTS_PER_CONFIG, self.shots_per_config().to_string());
        let qubits: Vec<&QubitSimParams> = match self {
            SimConfig::SingleQubit { qubit, .. } => {
                put("kind", "single".into());
                vec![qubit]
            }
            SimConfig::Multiplexed {
                qubits,
                crosstalk,
                filter_len,
                ..
            } => {
                put("kind", "multiplexed".into());
                put("filter_len", filter_len.to_string());
                let c = crosstalk.coupling();
                let rows: Vec<String> = (0..c.rows())
                    .map(|r| c.row(r).iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","))
                    .collect();
                put("crosstalk", rows.join(";"));
                qubits.iter().collect()
            }
        };
        for (j, q) in qubits.iter().enumerate() {
            let states: Vec<String> = q.steady_states.iter().map(|s| format!("{:?}{:+?}i", s.re, s.im)).collect();
            put(&format!("q{j}.steady_states"), states.join(","));
            put(&format!("q{j}.kappa"), format!("{:?}", q.kappa));
            put(&format!("q{j}.t1_steps"), format!("{:?}", q.t1_steps));
            put(&format!("q{j}.excitation_prob"), format!("{:?}", q.excitation_prob));
            put(&format!("q{j}.noise_sigma"), format!("{:?}", q.noise_sigma));
            let noise = match q.noise {
                Noise::Gaussian => "gaussian".into(),
                Noise::StudentT { nu } => format!("student_t:{nu:?}"),
            };
            put(&format!("q{j}.noise"), noise);
            put(&format!("q{j}.if_freq"), format!("{:?}", q.if_freq));
        }
        m
    }

    /// Wraps shots produced by [`SimConfig::shot`] (in index order) into a set.
    pub fn assemble(&self, seed: u64, shots: Vec<Shot>) -> Result<ShotSet> {
        ShotSet::new(shots, self.n_qubits(), self.n_classes(), self.layout(), self.meta(seed))
    }
}

/// Every prepared configuration with the requested number of shots each.
pub fn generate_dataset(config: &SimConfig, seed: u64) -> Result<ShotSet> {
    config.validate()?;
    let shots = (0..config.n_shots())
        .map(|m| config.shot(seed, m).map(|t| t.shot))
        .collect::<Result<Vec<_>>>()?;
    config.assemble(seed, shots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level() -> QubitSimParams {
        QubitSimParams::on_circle(1.0, &[0.0, PI / 2.0], 0.2, 0.0)
    }

    #[test]
    fn noiseless_shot_is_the_mean() {
        let p = two_level();
        let shot = simulate_shot(&p, 1, 30, 7).unwrap();
        assert_eq!(shot.channels[0], p.mean_trajectory(1, 30).unwrap());
        assert_eq!(shot.label, 1);
    }

    #[test]
    fn relaxation_switches_to_ground_trajectory() {
        let mut p = two_level();
        p.t1_steps = 10.0;
        let mut rng = stream_rng(3, 0);
        let traced = simulate_shot_traced(&p, 1, 100, &mut rng).unwrap();
        let jump = traced.jumps[0].expect("t1 = 10 over 100 samples should relax");
        assert_eq!(jump.to_class, 0);
        let t = &traced.shot.channels[0];
        for n in 0..100 {
            let class = if n < jump.index { 1 } else { 0 };
            assert_eq!(t.sample(n), p.mean_at(class, n));
        }
    }

    #[test]
    fn ground_state_never_relaxes() {
        let mut p = two_level();
        p.t1_steps = 1.0;
        let mut rng = stream_rng(3, 0);
        assert_eq!(simulate_shot_traced(&p, 0, 50, &mut rng).unwrap().jumps[0], None);
    }

    #[test]
    fn duplicate_carriers_are_rejected() {
        let mut a = two_level();
        a.if_freq = 0.1;
        let b = a.clone();
        let r = simulate_multiplexed(&[a, b], &CrosstalkModel::identity(2), &[0, 1], 10, 0);
        assert!(matches!(r, Err(Error::InvalidParameter { name: "if_freq", .. })));
    }

    #[test]
    fn labels_are_configuration_major() {
        let cfg = SimConfig::SingleQubit {
            qubit: two_level(),
            n_samples: 5,
            shots_per_class: 3,
        };
        let set = generate_dataset(&cfg, 1).unwrap();
        assert_eq!(set.labels(), vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(set.meta.get("seed").map(String::as_str), Some("1"));
    }
}
