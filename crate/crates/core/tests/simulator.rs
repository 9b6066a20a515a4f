use ngrc_core::data::pack_label;
use ngrc_core::dsp::demodulate;
use ngrc_core::rng::stream_rng;
use ngrc_core::sim::{
    generate_dataset, simulate_multiplexed, simulate_multiplexed_traced, simulate_shot_traced, CrosstalkModel, Noise,
    QubitSimParams, SimConfig,
};
use ngrc_core::{Layout, Matrix};
use num_complex::Complex64;

fn qubit(if_freq: f64) -> QubitSimParams {
    let mut q = QubitSimParams::on_circle(1.0, &[0.0, 2.0], 0.1, 0.0);
    q.if_freq = if_freq;
    q
}

fn five(kappa: f64, sigma: f64) -> Vec<QubitSimParams> {
    [0.05, 0.15, 0.25, 0.35, 0.45]
        .iter()
        .map(|&f| {
            let mut q = qubit(f);
            q.kappa = kappa;
            q.noise_sigma = sigma;
            q
        })
        .collect()
}

#[test]
fn identical_seeds_give_identical_sets() {
    let cfg = SimConfig::Multiplexed {
        qubits: five(0.1, 0.3),
        crosstalk: CrosstalkModel::nearest_neighbour(5, 0.1).unwrap(),
        n_samples: 20,
        shots_per_config: 2,
        layout: Layout::RawMultiplexed,
        filter_len: 10,
    };
    let a = generate_dataset(&cfg, 17).unwrap();
    assert_eq!(a, generate_dataset(&cfg, 17).unwrap());
    assert_ne!(a.shots(), generate_dataset(&cfg, 18).unwrap().shots());
    assert_eq!(a.len(), 64);
}

#[test]
fn five_qubit_enumeration() {
    let cfg = SimConfig::Multiplexed {
        qubits: five(0.1, 0.1),
        crosstalk: CrosstalkModel::identity(5),
        n_samples: 4,
        shots_per_config: 50,
        layout: Layout::RawMultiplexed,
        filter_len: 10,
    };
    let set = generate_dataset(&cfg, 1).unwrap();
    assert_eq!(set.len(), 1600);
    let counts = set.label_counts();
    assert_eq!(counts.len(), 32);
    assert!(counts.values().all(|&c| c == 50));
}

#[test]
fn relaxation_fraction_matches_exponential_law() {
    let mut q = qubit(0.0);
    q.t1_steps = 40.0;
    let (n, shots) = (20usize, 100_000u64);
    let jumped = (0..shots)
        .filter(|&s| {
            let mut rng = stream_rng(5, s);
            simulate_shot_traced(&q, 1, n, &mut rng).unwrap().jumps[0].is_some()
        })
        .count() as f64;
    let p = 1.0 - (-(n as f64) / 40.0).exp();
    let sd = (p * (1.0 - p) / shots as f64).sqrt();
    assert!((jumped / shots as f64 - p).abs() <= 3.0 * sd, "{} vs {p}", jumped / shots as f64);
}

#[test]
fn excitation_populates_the_next_class() {
    let mut q = QubitSimParams::on_circle(1.0, &[0.0, 1.0, 2.0], 0.1, 0.0);
    q.excitation_prob = 0.01;
    let (n, shots) = (30usize, 20_000u64);
    let mut to_two = 0usize;
    for s in 0..shots {
        let mut rng = stream_rng(8, s);
        let jump = simulate_shot_traced(&q, 1, n, &mut rng).unwrap().jumps[0];
        if let Some(j) = jump {
            assert_eq!(j.to_class, 2);
            to_two += 1;
        }
    }
    let p = 1.0 - 0.99f64.powi(n as i32);
    let sd = (p * (1.0 - p) / shots as f64).sqrt();
    let got = to_two as f64 / shots as f64;
    assert!(got > 0.0);
    assert!((got - p).abs() <= 3.0 * sd, "{got} vs {p}");
}

#[test]
fn ensemble_mean_converges_to_trajectory() {
    let mut q = qubit(0.0);
    q.noise_sigma = 0.5;
    let (n, m) = (25usize, 4000u64);
    let mut sum = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..m {
        let mut rng = stream_rng(2, s);
        let shot = simulate_shot_traced(&q, 1, n, &mut rng).unwrap().shot;
        for (acc, z) in sum.iter_mut().zip(shot.channels[0].iter()) {
            *acc += z;
        }
    }
    for (k, total) in sum.iter().enumerate() {
        let err = (total / m as f64 - q.mean_at(1, k)).norm();
        assert!(err <= 5.0 * 0.5 / (m as f64).sqrt(), "sample {k}: {err}");
    }
}

#[test]
fn student_t_noise_has_heavy_tails() {
    let mut q = qubit(0.0);
    q.noise_sigma = 1.0;
    q.noise = Noise::StudentT { nu: 5.0 };
    let mut rng = stream_rng(4, 0);
    let shot = simulate_shot_traced(&q, 0, 50_000, &mut rng).unwrap().shot;
    let t = &shot.channels[0];
    let noise: Vec<f64> = (0..t.len()).map(|n| t.i()[n] - q.mean_at(0, n).re).collect();
    let m2 = noise.iter().map(|x| x * x).sum::<f64>() / noise.len() as f64;
    let m4 = noise.iter().map(|x| x.powi(4)).sum::<f64>() / noise.len() as f64;
    // Gaussian kurtosis is 3; Student-t with ν = 5 has 9.
    assert!(m4 / (m2 * m2) > 4.0);
}

#[test]
fn single_tone_demodulates_to_filtered_baseband() {
    let q = qubit(0.2);
    let raw = simulate_multiplexed(&[q.clone()], &CrosstalkModel::identity(1), &[1], 60, 3).unwrap();
    let base = q.mean_trajectory(1, 60).unwrap();
    let want = demodulate(&base, 0.0, 4).unwrap();
    let got = demodulate(&raw.channels[0], 0.2, 4).unwrap();
    for n in 0..60 {
        assert!((got.sample(n) - want.sample(n)).norm() < 1e-12);
    }
}

#[test]
fn without_coupling_channels_ignore_other_qubits() {
    // κ large enough that every trajectory is at steady state from step 1.
    let qs = five(50.0, 0.0);
    let id = CrosstalkModel::identity(5);
    let a = simulate_multiplexed(&qs, &id, &[0, 0, 0, 0, 0], 60, 1).unwrap();
    let b = simulate_multiplexed(&qs, &id, &[0, 1, 1, 0, 1], 60, 1).unwrap();
    for (j, q) in qs.iter().enumerate() {
        if j == 1 || j == 2 || j == 4 {
            continue;
        }
        let da = demodulate(&a.channels[0], q.if_freq, 10).unwrap();
        let db = demodulate(&b.channels[0], q.if_freq, 10).unwrap();
        for n in 11..60 {
            assert!((da.sample(n) - db.sample(n)).norm() < 1e-12, "channel {j} sample {n}");
        }
    }
}

#[test]
fn coupling_shifts_the_neighbour_mean() {
    let qs = five(0.2, 0.5);
    let c = CrosstalkModel::new(Matrix::from_fn(5, 5, |j, k| match (j, k) {
        _ if j == k => 1.0,
        (0, 1) => 0.1,
        _ => 0.0,
    }))
    .unwrap();
    let (n, m) = (40usize, 10_000u64);
    let probe = 35;
    let mean_at = |states: &[usize], seed: u64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..m {
            let mut rng = stream_rng(seed, s);
            let shot = simulate_multiplexed_traced(&qs, &c, states, n, &mut rng).unwrap().shot;
            acc += demodulate(&shot.channels[0], qs[0].if_freq, 10).unwrap().sample(probe);
        }
        acc / m as f64
    };
    let expected = (qs[1].mean_at(1, probe) - qs[1].mean_at(0, probe)) * 0.1;
    // neighbouring tones sit on filter nulls, so only the coupled term survives
    // five carriers of white noise, averaged over the 10-sample filter
    let sd = 0.5 * (5.0 / (10.0 * m as f64)).sqrt() * 2f64.sqrt();
    for seed in [1, 2] {
        let d = mean_at(&[0, 1, 0, 0, 0], seed) - mean_at(&[0, 0, 0, 0, 0], seed + 100);
        assert!((d - expected).norm() < 5.0 * sd, "{d} vs {expected}");
    }
    assert!(expected.norm() > 0.05);
    assert_eq!(pack_label(&[0, 1, 0, 0, 0], 2), 2);
}

#[test]
fn demodulated_layout_stores_one_channel_per_qubit() {
    let cfg = SimConfig::Multiplexed {
        qubits: five(0.1, 0.2),
        crosstalk: CrosstalkModel::identity(5),
        n_samples: 30,
        shots_per_config: 1,
        layout: Layout::PerQubitDemodulated,
        filter_len: 10,
    };
    let demod = generate_dataset(&cfg, 9).unwrap();
    let raw_cfg = match cfg {
        SimConfig::Multiplexed { layout: _, qubits, crosstalk, n_samples, shots_per_config, filter_len } => {
            SimConfig::Multiplexed { qubits, crosstalk, n_samples, shots_per_config, layout: Layout::RawMultiplexed, filter_len }
        }
        _ => unreachable!(),
    };
    let raw = generate_dataset(&raw_cfg, 9).unwrap();
    assert_eq!(demod.n_channels(), 5);
    for (d, r) in demod.shots().iter().zip(raw.shots()) {
        assert_eq!(d.label, r.label);
        assert_eq!(d.channels[3], demodulate(&r.channels[0], 0.35, 10).unwrap());
    }
}
