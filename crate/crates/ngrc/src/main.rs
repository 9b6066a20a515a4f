use std::collections::hash_map::RandomState;
use std::fs;
use std::hash::{BuildHasher, Hasher};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ngrc::acceptance::{self, SuiteOptions, CRITERIA};
use ngrc::config::{parse_feature_spec, parse_sim_config, spec_to_text, ShapeDefaults};
use ngrc::error::{Error, Result};
use ngrc::io::{self, Format};
use ngrc::manifest::OutDir;
use ngrc::pipeline::{self, Baseband};
use ngrc::report::{assemble_report, sweep_table, ModelKind, Run};
use ngrc_core::data::split_train_test;
use ngrc_core::features::count_complexity;
use ngrc_core::select::InfoCriterion;
use ngrc_core::trainer::{multi_qubit_alphas, single_qubit_alphas, DecodeKind, SweepOptions, THRESHOLD_STEPS};
use ngrc_core::{Degree, Discriminator, ShotSet};

#[derive(Parser)]
#[command(name = "ngrc", version, about = "NG-RC qubit readout: simulate, train, evaluate, count, reproduce")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "NGRC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled shot set from a simulator config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Omit to draw one from entropy (it is printed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = FileFormat::Binary)]
        format: FileFormat,
    },
    /// Sweep α and thresholds and keep the best model per qubit.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `single`, `multi`, or a comma-separated list of α values.
        #[arg(long, default_value = "auto")]
        alpha_grid: String,
        #[arg(long, default_value_t = 0.5)]
        split: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long, value_enum, default_value_t = DecodeArg::Auto)]
        decode: DecodeArg,
        /// Forward term selection with at most this many terms per qubit.
        #[arg(long, num_args = 0..=1, default_missing_value = "30")]
        select_terms: Option<usize>,
        #[arg(long, value_enum, default_value_t = CriterionArg::Aic)]
        criterion: CriterionArg,
        /// Ridge penalty used while selecting terms.
        #[arg(long, default_value_t = 1e-6)]
        selection_ridge: f64,
        /// Fall back to a pseudo-solution for singular systems.
        #[arg(long)]
        allow_pseudo: bool,
    },
    /// Evaluate trained models and baselines and write a metrics report.
    Eval {
        #[arg(long)]
        data: PathBuf,
        /// DISC files, or directories holding `model_q*.disc`.
        #[arg(long = "model", num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = BaselineArg::None)]
        baseline: BaselineArg,
        #[arg(long)]
        report: PathBuf,
        /// Evaluate on the test part of this split (use the training seed).
        #[arg(long)]
        split: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "ngrc")]
        name: String,
    },
    /// Print parameter and multiplication counts of a feature spec.
    Count {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n_models: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite; exits 0 only if every criterion passes.
    Repro {
        #[arg(long, default_value = "desk")]
        suite: String,
        /// Comma-separated criterion ids to run.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Threshold grid resolution; changing it is a fault injection.
        #[arg(long, default_value_t = THRESHOLD_STEPS)]
        threshold_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Binary,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecodeArg {
    Auto,
    Threshold,
    Argmax,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Aic,
    Bic,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BaselineArg {
    None,
    Mf,
    Boxcar,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    pipeline::init_threads(cli.threads);
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = RandomState::new().build_hasher().finish();
        println!("seed: {s}");
        s
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_data(path: &Path) -> Result<ShotSet> {
    io::load_shotset(path, Format::from_path(path))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate {
            config,
            out,
            seed,
            format,
        } => {
            let sim = parse_sim_config(&read_text(&config)?)?;
            let seed = resolve_seed(seed);
            let set = pipeline::generate(&sim, seed)?;
            let mut dir = OutDir::create(&out)?;
            let (name, bytes) = match format {
                FileFormat::Binary => ("shots.ngrq", io::encode_shotset(&set)),
                FileFormat::Csv => ("shots.csv", io::encode_csv(&set)?),
            };
            let path = dir.write(name, bytes)?;
            dir.finish()?;
            println!(
                "wrote {} shots ({} qubits, {} classes, {} samples, {}) to {}",
                set.len(),
                set.n_qubits(),
                set.n_classes(),
                set.n_samples(),
                set.layout().name(),
                path.display()
            );
        }
        Command::Train {
            data,
            spec,
            out,
            alpha_grid,
            split,
            seed,
            batch_size,
            decode,
            select_terms,
            criterion,
            selection_ridge,
            allow_pseudo,
        } => {
            let set = load_data(&data)?;
            let shape = ShapeDefaults {
                n_samples: Some(set.n_samples()),
                n_channels: Some(set.n_channels()),
            };
            let (spec, _) = parse_feature_spec(&read_text(&spec)?, shape)?;
            let seed = resolve_seed(seed);
            let (train, test) = split_train_test(&set, split, seed)?;
            let mut opts = SweepOptions::new(parse_alphas(&alpha_grid, set.n_qubits())?);
            opts.batch_size = batch_size.unwrap_or(usize::MAX);
            opts.allow_pseudo = allow_pseudo;
            opts.decode = match decode {
                DecodeArg::Auto => DecodeKind::Auto,
                DecodeArg::Threshold => DecodeKind::Threshold,
                DecodeArg::Argmax => DecodeKind::Argmax,
            };
            let criterion = match criterion {
                CriterionArg::Aic => InfoCriterion::Aic,
                CriterionArg::Bic => InfoCriterion::Bic,
            };
            let mut dir = OutDir::create(&out)?;
            let (models, fidelities, table) = match select_terms {
                None => {
                    let outcome = pipeline::train(&train, &test, &spec, &opts)?;
                    report_singular(&outcome.singular);
                    let table = sweep_table("ngrc", spec.window, degree_name(spec.degree), &outcome.grid)?;
                    (outcome.models, outcome.fidelities, table)
                }
                Some(max_terms) => {
                    let mut models = Vec::new();
                    let mut fidelities = Vec::new();
                    let mut table = String::new();
                    for target in 0..set.n_qubits() {
                        let choice = pipeline::choose_terms(&train, &spec, target, max_terms.max(1), selection_ridge, criterion)?;
                        println!(
                            "qubit {target}: kept {} of {} selected terms",
                            choice.kept,
                            choice.selection.terms.len()
                        );
                        let outcome = pipeline::train(&train, &test, &choice.spec, &opts)?;
                        report_singular(&outcome.singular);
                        let grid: Vec<_> = outcome.grid.into_iter().filter(|r| r.target == target).collect();
                        let part = sweep_table("ngrc-selected", spec.window, degree_name(spec.degree), &grid)?;
                        table.push_str(if target == 0 { &part } else { part.split_once('\n').map_or("", |p| p.1) });
                        models.push(outcome.models[target].clone());
                        fidelities.push(outcome.fidelities[target]);
                    }
                    (models, fidelities, table)
                }
            };
            for (j, (m, f)) in models.iter().zip(&fidelities).enumerate() {
                dir.write(&format!("model_q{j}.disc"), io::encode_discriminator(m))?;
                println!("qubit {j}: alpha {:e}, selection fidelity {f:.4}, {} features", m.alpha, m.w_out.cols());
            }
            dir.write("sweep.csv", table)?;
            dir.write(
                "run.txt",
                format!("seed={seed}\nsplit={split}\nmax_terms={}\n{}", select_terms.unwrap_or(0), spec_to_text(&spec)),
            )?;
            dir.finish()?;
        }
        Command::Eval {
            data,
            models,
            baseline,
            report,
            split,
            seed,
            name,
        } => {
            let set = load_data(&data)?;
            let (fit_set, eval_set) = match split {
                Some(fraction) => split_train_test(&set, fraction, resolve_seed(seed))?,
                None => (set.clone(), set),
            };
            let models = load_models(&models)?;
            let mut runs = Vec::new();
            let spec = models.first().map(|m| &m.spec);
            if baseline != BaselineArg::None {
                let bb = Baseband::for_data(&eval_set, spec)?;
                if matches!(baseline, BaselineArg::Mf | BaselineArg::Both) {
                    let mf = pipeline::fit_matched_filters(&fit_set, &bb)?;
                    let preds = pipeline::classify_matched_filters(&mf, &eval_set, &bb)?;
                    runs.push(filter_run("matched_filter", ModelKind::MatchedFilter, &preds, &eval_set)?);
                }
                if matches!(baseline, BaselineArg::Boxcar | BaselineArg::Both) {
                    let bx = pipeline::fit_boxcars(&fit_set, &bb, 0..eval_set.n_samples())?;
                    let preds = pipeline::classify_boxcars(&bx, &eval_set, &bb)?;
                    runs.push(filter_run("boxcar", ModelKind::Boxcar, &preds, &eval_set)?);
                }
            }
            if !models.is_empty() {
                runs.push(model_run(&name, &models, &eval_set)?);
            }
            if runs.is_empty() {
                return Err(Error::Config("nothing to evaluate: pass --model or --baseline".into()));
            }
            let rep = assemble_report(eval_set.len(), eval_set.n_qubits(), &runs)?;
            let mut dir = OutDir::create(&report)?;
            dir.write("report.json", rep.to_json()?)?;
            dir.write("report.csv", rep.to_csv()?)?;
            if !rep.cross_fidelity.is_empty() {
                dir.write("cross_fidelity.dat", rep.to_gnuplot())?;
            }
            dir.finish()?;
            for m in &rep.models {
                println!("{}: F_GM {:.4}", m.name, m.geometric_mean);
            }
            for notice in &rep.notices {
                println!("note: {notice}");
            }
        }
        Command::Count { spec, n_models, out } => {
            let (spec, preset_models) = parse_feature_spec(&read_text(&spec)?, ShapeDefaults::default())?;
            let n = n_models.or(preset_models).unwrap_or(1);
            let c = count_complexity(&spec, n)?;
            let header = "models,parameters,multiplications,activations,demodulation,products";
            let row = format!(
                "{n},{},{},{},{},{}",
                c.parameters, c.multiplications, c.activations, c.demodulation, c.products
            );
            println!("models  parameters  multiplications  (rounded)");
            println!(
                "{n:>6}  {:>10}  {:>15}  ({:.2e} / {:.2e})",
                c.parameters, c.multiplications, c.parameters as f64, c.multiplications as f64
            );
            if let Some(out) = out {
                let mut dir = OutDir::create(&out)?;
                dir.write("complexity.csv", format!("{header}\n{row}\n"))?;
                dir.finish()?;
            }
        }
        Command::Repro {
            suite,
            only,
            seed,
            threshold_steps,
            out,
        } => {
            match suite.as_str() {
                "list" => {
                    for c in CRITERIA {
                        println!("{:<4} {}", c.id, c.title);
                    }
                    return Ok(ExitCode::SUCCESS);
                }
                "desk" => {}
                other => return Err(Error::Config(format!("unknown suite `{other}` (known: desk, list)"))),
            }
            let mut opts = SuiteOptions::default();
            if let Some(s) = seed {
                opts.seed = s;
            }
            let steps = threshold_steps.max(1);
            opts.thresholds = (0..=steps).map(|k| k as f64 / steps as f64).collect();
            let selected: Vec<_> = if only.is_empty() {
                CRITERIA.iter().collect()
            } else {
                only.iter()
                    .map(|id| acceptance::find(id).ok_or_else(|| Error::Config(format!("unknown criterion `{id}`"))))
                    .collect::<Result<_>>()?
            };
            let mut lines = Vec::new();
            let mut all = true;
            for c in selected {
                let outcome = acceptance::run_one(c, &opts);
                println!("{}", outcome.line());
                all &= outcome.passed;
                lines.push(outcome.line());
            }
            if let Some(out) = out {
                let mut dir = OutDir::create(&out)?;
                dir.write("acceptance.txt", lines.join("\n") + "\n")?;
                dir.finish()?;
            }
            if !all {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn degree_name(d: Degree) -> &'static str {
    match d {
        Degree::Linear => "linear",
        Degree::Quadratic => "quadratic",
        Degree::Cubic => "cubic",
    }
}

fn parse_alphas(grid: &str, n_qubits: usize) -> Result<Vec<f64>> {
    match grid {
        "auto" if n_qubits == 1 => Ok(single_qubit_alphas()),
        "auto" | "multi" => Ok(multi_qubit_alphas()),
        "single" => Ok(single_qubit_alphas()),
        list => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|a| *a >= 0.0)
                    .ok_or_else(|| Error::Config(format!("--alpha-grid: bad value `{s}`")))
            })
            .collect(),
    }
}

fn load_models(paths: &[PathBuf]) -> Result<Vec<Discriminator>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "disc"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    let mut models = files.iter().map(|f| io::load_discriminator(f)).collect::<Result<Vec<_>>>()?;
    models.sort_by_key(|m| m.target_qubit.unwrap_or(0));
    for (j, m) in models.iter().enumerate() {
        if m.target_qubit.unwrap_or(0) != j {
            return Err(Error::Config(format!(
                "models must target qubits 0..{} once each; found target {:?} at position {j}",
                models.len(),
                m.target_qubit
            )));
        }
    }
    Ok(models)
}

fn filter_run(name: &str, kind: ModelKind, preds: &[Vec<usize>], set: &ShotSet) -> Result<Run> {
    Ok(Run {
        name: name.into(),
        kind,
        window: None,
        degree: None,
        alphas: Vec::new(),
        fidelities: pipeline::per_qubit_fidelity(preds, set)?,
        parameters: None,
        multiplications: None,
        cross_fidelity: (set.n_qubits() >= 2).then(|| pipeline::crosstalk(preds, set)).transpose()?,
    })
}

fn model_run(name: &str, models: &[Discriminator], set: &ShotSet) -> Result<Run> {
    if models.len() != set.n_qubits() {
        return Err(Error::Config(format!(
            "{} models for {} qubits",
            models.len(),
            set.n_qubits()
        )));
    }
    let preds = pipeline::classify_all(models, set)?;
    let shared = models.iter().all(|m| m.spec == models[0].spec);
    let (parameters, multiplications) = if shared {
        let c = count_complexity(&models[0].spec, models.len())?;
        (c.parameters, c.multiplications)
    } else {
        models.iter().try_fold((0, 0), |acc, m| {
            count_complexity(&m.spec, 1).map(|c| (acc.0 + c.parameters, acc.1 + c.multiplications))
        })?
    };
    let spec = &models[0].spec;
    Ok(Run {
        name: name.into(),
        kind: ModelKind::Ngrc,
        window: Some(spec.window),
        degree: Some(degree_name(spec.degree).into()),
        alphas: models.iter().map(|m| Some(m.alpha)).collect(),
        fidelities: pipeline::per_qubit_fidelity(&preds, set)?,
        parameters: Some(parameters),
        multiplications: Some(multiplications),
        cross_fidelity: (set.n_qubits() >= 2).then(|| pipeline::crosstalk(&preds, set)).transpose()?,
    })
}

fn report_singular(skipped: &[(usize, f64)]) {
    for (target, alpha) in skipped {
        eprintln!("warning: qubit {target}: alpha {alpha:e} gives a singular system and was skipped");
    }
}
