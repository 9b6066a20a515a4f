//! The acceptance suite behind `ngrc repro`.
//!
//! Each criterion returns a pass flag and a one-line detail. Criterion 5
//! compares discriminators on simulated data over ten seeded trials, at
//! least eight of which must show the expected ordering.

use std::time::Instant;

use ngrc_core::baseline::{boxcar_filter, matched_filter_apply, matched_filter_weights, MatchedFilterWeights};
use ngrc_core::data::split_train_test;
use ngrc_core::features::count_complexity;
use ngrc_core::metrics::{geometric_mean_fidelity, infidelity_reduction, mean};
use ngrc_core::rng::stream_rng;
use ngrc_core::select::{select_terms, truncate_terms, InfoCriterion};
use ngrc_core::sim::SimConfig;
use ngrc_core::trainer::{multi_qubit_alphas, single_qubit_alphas, threshold_grid, RidgeAccumulator, SweepOptions};
use ngrc_core::{Degree, FeatureSpec, IQTrace, Matrix, ShotSet};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{sim_preset, spec_preset, FIVE_QUBIT_FILTER_LEN, FIVE_QUBIT_IFS};
use crate::error::Result;
use crate::io::{decode_csv, decode_shotset, encode_csv, encode_shotset};
use crate::pipeline::{self, Baseband};

/// Identifier and one-line title of a criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    /// Wall-clock budget in seconds.
    pub budget: f64,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion {
        id: "C1",
        title: "complexity table",
        budget: 1.0,
    },
    Criterion {
        id: "C2",
        title: "sequential ridge equals closed form",
        budget: 30.0,
    },
    Criterion {
        id: "C3",
        title: "filter identities",
        budget: 10.0,
    },
    Criterion {
        id: "C4",
        title: "metric formulas and decoding grid",
        budget: 1.0,
    },
    Criterion {
        id: "C5a",
        title: "matched filter vs boxcar, Gaussian noise",
        budget: 180.0,
    },
    Criterion {
        id: "C5b",
        title: "NG-RC vs matched filter under relaxation",
        budget: 180.0,
    },
    Criterion {
        id: "C5c",
        title: "quadratic vs linear, three classes",
        budget: 180.0,
    },
    Criterion {
        id: "C5d",
        title: "cross-qubit features reduce crosstalk",
        budget: 180.0,
    },
    Criterion {
        id: "C6",
        title: "term selection",
        budget: 30.0,
    },
    Criterion {
        id: "C7",
        title: "round trip and determinism",
        budget: 60.0,
    },
];

/// Knobs of a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    /// Base seed; trial `t` of a criterion uses `seed + t`.
    pub seed: u64,
    pub trials: usize,
    /// Passing trials needed out of `trials`.
    pub required: usize,
    /// Threshold grid used by every sweep. Replacing it is a fault
    /// injection: the grid check then fails by name.
    pub thresholds: Vec<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 10,
            required: 8,
            thresholds: threshold_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:<4} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

pub fn find(id: &str) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id.eq_ignore_ascii_case(id))
}

/// Runs one criterion. Errors inside a criterion count as a failure.
pub fn run_one(c: &Criterion, opts: &SuiteOptions) -> Outcome {
    let start = Instant::now();
    let result = match c.id {
        "C1" => c1_complexity(),
        "C2" => c2_sequential_ridge(opts),
        "C3" => c3_filters(opts),
        "C4" => c4_metrics(opts),
        "C5a" => c5a_filters(opts),
        "C5b" => c5b_relaxation(opts),
        "C5c" => c5c_three_class(opts),
        "C5d" => c5d_crosstalk(opts),
        "C6" => c6_selection(opts),
        _ => c7_determinism(opts),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if seconds > c.budget {
        passed = false;
        detail.push_str(&format!("; over the {} s budget", c.budget));
    }
    Outcome {
        id: c.id,
        title: c.title,
        passed,
        detail,
        seconds,
    }
}

pub fn run_all(opts: &SuiteOptions) -> Vec<Outcome> {
    CRITERIA.iter().map(|c| run_one(c, opts)).collect()
}

type Check = Result<(bool, String)>;

/// Three significant digits, as printed in the complexity table.
fn three_sig(x: usize) -> String {
    format!("{:.2e}", x as f64)
}

fn c1_complexity() -> Check {
    let rows = [
        ("5q-linear-raw", 5005, 5005),
        ("5q-linear-w10", 2075, 10299),
        ("5q-quadratic-w50", 18275, 30069),
        ("5q-cubic-w200", 18270, 30121),
    ];
    let mut bad = Vec::new();
    let mut got = Vec::new();
    for (name, params, mults) in rows {
        let (spec, n_models) = spec_preset(name)?;
        let c = count_complexity(&spec, n_models.unwrap_or(1))?;
        got.push(format!("{name} {}/{}", c.parameters, c.multiplications));
        if (c.parameters, c.multiplications) != (params, mults) {
            bad.push(name);
        }
    }
    // the two 3.01e4 rows must round to the printed value
    for m in [30069, 30121] {
        if three_sig(m) != "3.01e4" {
            bad.push("rounding");
        }
    }
    Ok((bad.is_empty(), format!("{}{}", got.join(", "), fail_list(&bad))))
}

fn fail_list(bad: &[&str]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; mismatched: {}", bad.join(", "))
    }
}

/// Gauss–Jordan inverse with partial pivoting, independent of the
/// Cholesky path under test.
fn inverse(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|r| a.row(r).to_vec()).collect();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| f64::from(u8::from(r == c))).collect()).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap_or(col);
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        for c in 0..n {
            m[col][c] /= p;
            inv[col][c] /= p;
        }
        for r in 0..n {
            let f = m[r][col];
            if r != col && f != 0.0 {
                for c in 0..n {
                    m[r][c] -= f * m[col][c];
                    inv[r][c] -= f * inv[col][c];
                }
            }
        }
    }
    Matrix::from_fn(n, n, |r, c| inv[r][c])
}

fn c2_sequential_ridge(opts: &SuiteOptions) -> Check {
    let mut worst: f64 = 0.0;
    let mut rng = stream_rng(opts.seed, 2);
    for problem in 0..20 {
        let nf = rng.random_range(1..=200usize);
        let m = rng.random_range((3 * nf + 10)..=5000usize);
        let d = rng.random_range(1..=3usize);
        let alpha = if problem % 5 == 0 {
            0.0
        } else {
            10f64.powf(rng.random_range(-7.0..=3.0))
        };
        let f = Matrix::from_fn(nf, m, |_, _| StandardNormal.sample(&mut rng));
        let y = Matrix::from_fn(d, m, |_, _| StandardNormal.sample(&mut rng));
        let n_batches = if problem == 0 { 15 } else { rng.random_range(1..=30usize) };
        let mut cuts: Vec<usize> = (0..n_batches - 1).map(|_| rng.random_range(1..m)).collect();
        cuts.extend([0, m]);
        cuts.sort_unstable();
        cuts.dedup();

        let mut acc = RidgeAccumulator::new(alpha, nf, d)?;
        for w in cuts.windows(2) {
            let cols = w[0]..w[1];
            let fb = Matrix::from_fn(nf, cols.len(), |r, c| f[(r, cols.start + c)]);
            let yb = Matrix::from_fn(d, cols.len(), |r, c| y[(r, cols.start + c)]);
            acc.update(&fb, &yb)?;
        }
        let sequential = acc.solve()?;

        let ft = f.transpose();
        let mut gram = f.matmul(&ft)?;
        gram.add_diagonal(alpha);
        let closed = y.matmul(&ft)?.matmul(&inverse(&gram))?;
        let diff: f64 = sequential
            .as_slice()
            .iter()
            .zip(closed.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        worst = worst.max(diff.sqrt() / closed.frobenius_norm());
    }
    Ok((worst <= 1e-8, format!("worst relative Frobenius error {worst:.2e} over 20 problems")))
}

/// Shots `μ_n + σ(ξ + iη)`.
fn gaussian_shots(means: &[Complex64], sigma: f64, m: usize, seed: u64, stream: u64) -> Result<Vec<IQTrace>> {
    let mut rng = stream_rng(seed, stream);
    (0..m)
        .map(|_| {
            let z: Vec<Complex64> = means
                .iter()
                .map(|mu| {
                    let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                    mu + Complex64::new(sigma * a, sigma * b)
                })
                .collect();
            Ok(IQTrace::from_complex(&z)?)
        })
        .collect()
}

fn c3_filters(opts: &SuiteOptions) -> Check {
    // unit weights reproduce the boxcar sum bit for bit
    let mut exact = true;
    let mut rng = stream_rng(opts.seed, 3);
    for _ in 0..50 {
        let n = rng.random_range(1..300usize);
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let t = IQTrace::from_complex(&z)?;
        let ones = MatchedFilterWeights::new(vec![Complex64::new(1.0, 0.0); n])?;
        exact &= matched_filter_apply(&t, &ones)? == boxcar_filter(&t, 0..n)?;
    }

    // estimated weights against the plug-in closed form μ0−μ1 over 4σ²
    let (n, sigma, m) = (20, 0.8, 3000);
    let mu0: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, 0.1 * k as f64)).collect();
    let mu1: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(0.6, 1.5 + 0.05 * k as f64)).collect();
    let s2 = sigma * sigma;
    let mut worst_pooled: f64 = 0.0;
    let mut outliers = 0;
    for seed in 0..10u64 {
        let s0 = gaussian_shots(&mu0, sigma, m, opts.seed.wrapping_add(seed), 30)?;
        let s1 = gaussian_shots(&mu1, sigma, m, opts.seed.wrapping_add(seed), 31)?;
        let k = matched_filter_weights(&s0.iter().collect::<Vec<_>>(), &s1.iter().collect::<Vec<_>>())?;
        let mut z_sum = 0.0;
        for step in 0..n {
            let d = mu0[step] - mu1[step];
            let want = d / (4.0 * s2);
            // delta method: numerator variance 2σ²/M per quadrature, denominator 8σ⁴/M
            let sd = |part: f64| {
                ((2.0 * s2 / m as f64) / (16.0 * s2 * s2) + part * part * 8.0 * s2 * s2 / m as f64 / (256.0 * s2.powi(4))).sqrt()
            };
            let got = k.weights()[step];
            let (zr, zi) = ((got.re - want.re) / sd(d.re), (got.im - want.im) / sd(d.im));
            if zr.abs() > 5.0 || zi.abs() > 5.0 {
                outliers += 1;
            }
            z_sum += zr + zi;
        }
        worst_pooled = worst_pooled.max((z_sum / (2.0 * n as f64).sqrt()).abs());
    }
    let passed = exact && worst_pooled < 3.0 && outliers == 0;
    Ok((
        passed,
        format!(
            "unit weights {} boxcar; worst pooled z {worst_pooled:.2} over 10 seeds, {outliers} weights beyond 5σ",
            if exact { "equal" } else { "differ from" }
        ),
    ))
}

fn c4_metrics(opts: &SuiteOptions) -> Check {
    let gm = geometric_mean_fidelity(&[0.967, 0.739, 0.931, 0.943, 0.966])?;
    let eta = infidelity_reduction(0.9, 0.95)?;
    let overall = mean(&[0.0037, 0.0049, 0.0020, 0.0009]);
    // decision thresholds 0.00, 0.01, ..., 1.00
    let grid_ok = opts.thresholds.len() == 101
        && opts
            .thresholds
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - k as f64 / 100.0).abs() <= 1e-12);
    // 0.9 and 0.95 are inexact in binary, so the ratio is 0.5 up to rounding
    let passed = (gm - 0.905).abs() <= 0.0005 && (eta - 0.5).abs() <= 1e-15 && (overall - 0.0029).abs() <= 0.00005 && grid_ok;
    Ok((
        passed,
        format!(
            "F_GM {gm:.6}, eta {eta:.17}, overall {overall:.6}, threshold grid {}",
            if grid_ok {
                "0.00..1.00 step 0.01".to_string()
            } else {
                format!("corrupted ({} points)", opts.thresholds.len())
            }
        ),
    ))
}

/// Counts trials whose check holds and formats per-trial values.
fn tally(opts: &SuiteOptions, mut trial: impl FnMut(u64) -> Result<(bool, String)>) -> Check {
    let mut wins = 0;
    let mut notes = Vec::new();
    for t in 0..opts.trials as u64 {
        let (ok, note) = trial(opts.seed.wrapping_add(t))?;
        wins += usize::from(ok);
        notes.push(format!("{}{note}", if ok { "" } else { "!" }));
    }
    Ok((
        wins >= opts.required,
        format!("{wins}/{} trials hold (need {}) [{}]", opts.trials, opts.required, notes.join(" ")),
    ))
}

fn simulate_split(config: &SimConfig, seed: u64) -> Result<(ShotSet, ShotSet)> {
    let set = pipeline::generate(config, seed)?;
    Ok(split_train_test(&set, 0.5, seed)?)
}

fn test_fidelity(preds: &[Vec<usize>], test: &ShotSet) -> Result<f64> {
    Ok(pipeline::per_qubit_fidelity(preds, test)?[0])
}

fn ngrc_fidelity(train: &ShotSet, test: &ShotSet, spec: &FeatureSpec, alphas: Vec<f64>, opts: &SuiteOptions) -> Result<Vec<f64>> {
    let mut sweep_opts = SweepOptions::new(alphas);
    sweep_opts.thresholds = opts.thresholds.clone();
    Ok(pipeline::train(train, test, spec, &sweep_opts)?.fidelities)
}

fn single_spec(degree: Degree, window: usize, n_samples: usize) -> FeatureSpec {
    FeatureSpec::new(degree, window, 1, n_samples)
}

/// Trials where the matched filter is within 0.002 of the boxcar or better.
fn c5a_filters(opts: &SuiteOptions) -> Check {
    let config = sim_preset("1q-gauss")?;
    tally(opts, |seed| {
        let (train, test) = simulate_split(&config, seed)?;
        let bb = Baseband::Channels;
        let mf = pipeline::fit_matched_filters(&train, &bb)?;
        let bx = pipeline::fit_boxcars(&train, &bb, 0..config.n_samples())?;
        let f_mf = test_fidelity(&pipeline::classify_matched_filters(&mf, &test, &bb)?, &test)?;
        let f_bx = test_fidelity(&pipeline::classify_boxcars(&bx, &test, &bb)?, &test)?;
        Ok((f_mf >= f_bx - 0.002, format!("{f_mf:.3}/{f_bx:.3}")))
    })
}

/// Trials where linear NG-RC at both w = 1 and w = 10 matches or beats the
/// matched filter, and quadratic NG-RC at w = 5 is within 0.002 of the
/// better linear model.
fn c5b_relaxation(opts: &SuiteOptions) -> Check {
    let config = sim_preset("1q-relax")?;
    let n = config.n_samples();
    tally(opts, |seed| {
        let (train, test) = simulate_split(&config, seed)?;
        let bb = Baseband::Channels;
        let mf = pipeline::fit_matched_filters(&train, &bb)?;
        let f_mf = test_fidelity(&pipeline::classify_matched_filters(&mf, &test, &bb)?, &test)?;
        let fit = |d, w| -> Result<f64> { Ok(ngrc_fidelity(&train, &test, &single_spec(d, w, n), single_qubit_alphas(), opts)?[0]) };
        let (l1, l10) = (fit(Degree::Linear, 1)?, fit(Degree::Linear, 10)?);
        let q5 = fit(Degree::Quadratic, 5)?;
        let ok = l1.min(l10) >= f_mf && q5 >= l1.max(l10) - 0.002;
        Ok((ok, format!("{f_mf:.4}/{l1:.4}/{l10:.4}/{q5:.4}")))
    })
}

/// Trials where quadratic argmax NG-RC beats the best linear model by 0.005.
fn c5c_three_class(opts: &SuiteOptions) -> Check {
    let config = sim_preset("1q-3state")?;
    let n = config.n_samples();
    tally(opts, |seed| {
        let (train, test) = simulate_split(&config, seed)?;
        let fit = |d, w| -> Result<f64> { Ok(ngrc_fidelity(&train, &test, &single_spec(d, w, n), single_qubit_alphas(), opts)?[0]) };
        let best_linear = fit(Degree::Linear, 1)?.max(fit(Degree::Linear, 10)?);
        let quad = fit(Degree::Quadratic, 10)?;
        Ok((quad > best_linear + 0.005, format!("{quad:.3}/{best_linear:.3}")))
    })
}

/// Window of the five-qubit crosstalk comparison.
pub const CROSSTALK_WINDOW: usize = 25;

fn five_qubit_spec(n_samples: usize, cross_qubit: bool) -> FeatureSpec {
    FeatureSpec::new(Degree::Quadratic, CROSSTALK_WINDOW, 1, n_samples)
        .with_demodulation(FIVE_QUBIT_IFS.to_vec(), FIVE_QUBIT_FILTER_LEN)
        .with_cross_qubit(cross_qubit)
}

/// Trials where cross-qubit features at least halve the mean absolute
/// cross-fidelity of own-channel features.
fn c5d_crosstalk(opts: &SuiteOptions) -> Check {
    let config = sim_preset("5q-coupled-large")?;
    let n = config.n_samples();
    tally(opts, |seed| {
        let (train, test) = simulate_split(&config, seed)?;
        let overall = |cross: bool| -> Result<f64> {
            let mut sweep_opts = SweepOptions::new(multi_qubit_alphas());
            sweep_opts.thresholds = opts.thresholds.clone();
            let out = pipeline::train(&train, &test, &five_qubit_spec(n, cross), &sweep_opts)?;
            let preds = pipeline::classify_all(&out.models, &test)?;
            Ok(pipeline::crosstalk(&preds, &test)?.1.overall)
        };
        let (own, cross) = (overall(false)?, overall(true)?);
        Ok((cross <= 0.5 * own, format!("{cross:.4}/{own:.4}")))
    })
}

fn c6_selection(opts: &SuiteOptions) -> Check {
    let planted = [4usize, 17, 26];
    let mut hits = 0;
    for t in 0..10u64 {
        let mut rng = stream_rng(opts.seed.wrapping_add(t), 6);
        let m = 400;
        let f = Matrix::from_fn(30, m, |_, _| StandardNormal.sample(&mut rng));
        let y: Vec<f64> = (0..m)
            .map(|c| {
                let e: f64 = StandardNormal.sample(&mut rng);
                0.8 * f[(4, c)] - 0.5 * f[(17, c)] + 0.3 * f[(26, c)] + 0.01 * e
            })
            .collect();
        let s = select_terms(&f, &Matrix::from_vec(1, m, y)?, 5, 1e-6, InfoCriterion::Aic)?;
        hits += usize::from(planted.iter().all(|p| s.terms.contains(p)));
    }
    // the step 5.00 -> 4.99 is below 1 % of the range 7, so two terms are kept
    let info = [10.0, 5.0, 4.99, 4.0, 3.0];
    let kept = truncate_terms(&info)?;
    Ok((hits >= 9 && kept == 2, format!("planted set recovered in {hits}/10 seeds; truncation keeps {kept} of 5")))
}

fn c7_determinism(opts: &SuiteOptions) -> Check {
    let mut problems = Vec::new();
    let config = sim_preset("5q-coupled")?;
    let a = pipeline::generate(&config, opts.seed)?;
    let b = pipeline::generate(&config, opts.seed)?;
    let sequential = ngrc_core::sim::generate_dataset(&config, opts.seed)?;
    if encode_shotset(&a) != encode_shotset(&b) || a != sequential {
        problems.push("simulation");
    }
    let bytes = encode_shotset(&a);
    let back = decode_shotset(&bytes, "memory")?;
    if back != a || encode_shotset(&back) != bytes {
        problems.push("binary round trip");
    }
    let small = a.subset(&(0..64).collect::<Vec<_>>());
    if decode_csv(&encode_csv(&small)?, "memory")? != small {
        problems.push("csv round trip");
    }

    let (train, test) = split_train_test(&a, 0.5, opts.seed)?;
    let spec = five_qubit_spec(config.n_samples(), true);
    let mut sweep_opts = SweepOptions::new(multi_qubit_alphas()[10..14].to_vec());
    sweep_opts.thresholds = opts.thresholds.clone();
    let first = pipeline::train(&train, &test, &spec, &sweep_opts)?;
    let second = pipeline::train(&train, &test, &spec, &sweep_opts)?;
    let bits = |o: &ngrc_core::trainer::SweepOutcome| -> Vec<u64> {
        o.models.iter().flat_map(|m| m.w_out.as_slice().iter().map(|x| x.to_bits())).collect()
    };
    if bits(&first) != bits(&second) || first.grid != second.grid {
        problems.push("training");
    }
    let preds = pipeline::classify_all(&first.models, &test)?;
    if preds != pipeline::classify_all(&second.models, &test)? {
        problems.push("evaluation");
    }
    Ok((
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} shots and 5 models identical across two runs", a.len())
        } else {
            format!("not reproducible: {}", problems.join(", "))
        },
    ))
}
