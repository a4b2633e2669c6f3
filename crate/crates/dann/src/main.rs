//! Thin command-line front end; all logic lives in the library.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dann::data::{self, MoonsConfig};
use dann::divergence::{self, PadReport};
use dann::error::Error;
use dann::harness::{self, ExperimentConfig, MoonsPipelineConfig};
use dann::msda;
use dann::net::{self, ModelDocument, TrainConfig, TrainMode};

#[derive(Parser)]
#[command(name = "dann", about = "Shallow domain-adversarial networks, PAD, and mSDA at desk scale", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Dann,
    Nn,
    NnRegressor,
}

impl From<ModeArg> for TrainMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Dann => TrainMode::Dann,
            ModeArg::Nn => TrainMode::NnPlain,
            ModeArg::NnRegressor => TrainMode::NnWithRegressor,
        }
    }
}

#[derive(Args)]
struct TrainKnobs {
    /// Hidden layer size.
    #[arg(long, default_value_t = 15)]
    hidden: usize,
    /// Adaptation weight.
    #[arg(long, default_value_t = 6.0)]
    lambda: f64,
    /// Learning rate.
    #[arg(long, default_value_t = 1e-3)]
    alpha: f64,
    #[arg(long, default_value_t = 500)]
    max_epochs: usize,
    #[arg(long, default_value_t = 10)]
    patience: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full rotated-moons pipeline: generate data, train DANN and
    /// the regressor-instrumented NN, emit analysis views, PAD, and results.
    Moons {
        #[arg(long, default_value = "moons-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 150)]
        n_per_moon: usize,
        #[arg(long, default_value_t = 35.0)]
        rotation: f64,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[command(flatten)]
        knobs: TrainKnobs,
        /// Grid resolution for the decision-surface emissions.
        #[arg(long, default_value_t = 300)]
        grid_steps: usize,
    },
    /// Train one model on sparse data files.
    Train {
        /// Labeled source data.
        #[arg(long)]
        source: PathBuf,
        /// Unlabeled target data (required unless --mode nn).
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Dann)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        knobs: TrainKnobs,
        /// Output directory for model.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate a saved model on labeled sparse data.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Proxy A-distance between two samples, optionally through a model's
    /// hidden layer.
    Pad {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Map both samples through this model's hidden layer first.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tag recorded in the report.
        #[arg(long)]
        tag: Option<String>,
        /// Write the JSON report here instead of stdout only.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit an mSDA feature map on unlabeled data.
    MsdaFit {
        /// One or more sparse data files; labels are ignored.
        #[arg(long, required = true, num_args = 1..)]
        data: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 5)]
        layers: usize,
        #[arg(long, default_value_t = 1e-5)]
        ridge: f64,
        /// Keep only this many most-frequent features.
        #[arg(long)]
        keep: Option<usize>,
        #[arg(long, default_value = "msda.json")]
        out: PathBuf,
    },
    /// Apply a fitted mSDA map to a sparse data file.
    MsdaTransform {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid search from a JSON experiment config.
    Grid {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's worker count.
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the representation (raw or msda).
        #[arg(long)]
        repr: Option<String>,
        /// Also run the PAD sweep over representations.
        #[arg(long, default_value_t = false)]
        pad: bool,
    },
    /// Render a results.csv as a per-task table.
    Table {
        #[arg(long)]
        results: PathBuf,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidArg(_) | Error::EmptyInput { .. } | Error::DimMismatch { .. } => 1,
        Error::Io(_) | Error::Json(_) | Error::Parse { .. } | Error::Data(_) => 2,
        Error::NonFinite { .. }
        | Error::Singular(_)
        | Error::ZeroVariance
        | Error::DegenerateSplit { .. } => 3,
    }
}

fn run(cli: Cli) -> dann::Result<()> {
    match cli.command {
        Command::Moons { out, seed, n_per_moon, rotation, noise, knobs, grid_steps } => {
            let cfg = MoonsPipelineConfig {
                moons: MoonsConfig {
                    n_per_moon,
                    rotation_deg: rotation,
                    noise_sd: noise,
                    ..MoonsConfig::default()
                },
                hidden: knobs.hidden,
                lambda: knobs.lambda,
                alpha: knobs.alpha,
                max_epochs: knobs.max_epochs,
                patience: knobs.patience,
                grid_steps,
                seed,
            };
            let summary = harness::run_moons_pipeline(&cfg, &out)?;
            println!("target error  dann {:.4}  nn {:.4}", summary.dann_target_error, summary.nn_target_error);
            println!(
                "pad           raw {:.4}  nn {:.4}  dann {:.4}",
                summary.pad_raw, summary.pad_nn, summary.pad_dann
            );
            println!("outputs in {}", out.display());
            Ok(())
        }
        Command::Train { source, target, mode, seed, knobs, out } => {
            let mode: TrainMode = mode.into();
            let src = data::load_sparse(&source, 0)?.labeled()?;
            let tgt = match &target {
                Some(p) => Some(data::load_sparse(p, src.dim)?.unlabeled()?),
                None => None,
            };
            let mut cfg = TrainConfig::new(knobs.hidden, knobs.lambda, knobs.alpha, seed, mode);
            cfg.max_epochs = knobs.max_epochs;
            cfg.patience = knobs.patience;
            let (params, report) = net::train(&src, tgt.as_ref(), &cfg)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("model.json");
            ModelDocument::from_parts(&params, &cfg, &report).save(&path)?;
            println!(
                "trained {} epochs, best validation risk {:.4} at epoch {}",
                report.epochs_run, report.best_val_risk, report.best_epoch
            );
            println!("model written to {}", path.display());
            Ok(())
        }
        Command::Eval { model, data: data_path } => {
            let doc = ModelDocument::load(&model)?;
            let params = doc.to_params()?;
            let set = data::load_sparse(&data_path, params.input_dim())?.labeled()?;
            let r = net::risk(&params, &set)?;
            println!("risk {r:.6} on {} examples", set.len());
            Ok(())
        }
        Command::Pad { source, target, model, seed, tag, out } => {
            let src = data::load_sparse(&source, 0)?;
            let dim = src.dim();
            let src = src.unlabeled()?;
            let tgt = data::load_sparse(&target, dim)?.unlabeled()?;
            let c_grid = divergence::default_c_grid();
            let report: PadReport = match model {
                Some(mp) => {
                    let params = ModelDocument::load(&mp)?.to_params()?;
                    divergence::pad_on_representation(
                        &params,
                        &src.examples,
                        &tgt.examples,
                        &c_grid,
                        seed,
                        tag.as_deref().unwrap_or("hidden"),
                    )?
                }
                None => divergence::compute_pad(
                    &src.examples,
                    &tgt.examples,
                    &c_grid,
                    seed,
                    tag.as_deref().unwrap_or("raw"),
                )?,
            };
            println!(
                "pad {:.4} (best epsilon {:.4}, tag {})",
                report.pad_value, report.best_epsilon, report.representation_tag
            );
            if let Some(p) = out {
                report.save(&p)?;
                println!("report written to {}", p.display());
            }
            Ok(())
        }
        Command::MsdaFit { data: files, p, layers, ridge, keep, out } => {
            let mut pool = Vec::new();
            let mut dim = 0usize;
            for f in &files {
                let loaded = data::load_sparse(f, dim)?;
                dim = dim.max(loaded.dim());
                pool.push(loaded);
            }
            // Re-read any file whose inferred dimension fell short.
            let mut feats = Vec::new();
            for (f, loaded) in files.iter().zip(pool) {
                let set = if loaded.dim() < dim { data::load_sparse(f, dim)? } else { loaded };
                feats.extend(set.unlabeled()?.examples);
            }
            let model = match keep {
                Some(k) => msda::fit_truncated(&feats, p, layers, ridge, k)?,
                None => msda::fit(&feats, p, layers, ridge)?,
            };
            model.save(&out)?;
            println!(
                "fitted {} layers on {} examples (dim {} -> {}), model in {}",
                model.num_layers(),
                feats.len(),
                model.source_dim(),
                model.output_dim(),
                out.display()
            );
            Ok(())
        }
        Command::MsdaTransform { model, data: data_path, out } => {
            let m = msda::MsdaModel::load(&model)?;
            match data::load_sparse(&data_path, m.source_dim())? {
                data::SparseData::Labeled(set) => {
                    let examples = set
                        .examples
                        .iter()
                        .map(|(x, y)| Ok((msda::transform_to_sparse(&m, x)?, *y)))
                        .collect::<dann::Result<Vec<_>>>()?;
                    let mapped = data::LabeledSet::new(&set.name, m.output_dim(), examples)?;
                    data::save_sparse_labeled(&mapped, &out)?;
                }
                data::SparseData::Unlabeled(set) => {
                    let examples = set
                        .examples
                        .iter()
                        .map(|x| msda::transform_to_sparse(&m, x))
                        .collect::<dann::Result<Vec<_>>>()?;
                    let mapped = data::UnlabeledSet::new(&set.name, m.output_dim(), examples)?;
                    data::save_sparse_unlabeled(&mapped, &out)?;
                }
            }
            println!("transformed data written to {}", out.display());
            Ok(())
        }
        Command::Grid { config, seed, jobs, out, repr, pad } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            if let Some(o) = out {
                cfg.output_dir = Some(o);
            }
            if let Some(r) = repr {
                cfg.representation = match r.as_str() {
                    "raw" => harness::Representation::Raw,
                    "msda" => harness::Representation::Msda,
                    other => {
                        return Err(Error::InvalidArg(format!(
                            "unknown representation {other:?}, expected raw or msda"
                        )))
                    }
                };
            }
            let outcome = harness::run_grid(&cfg)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", harness::render_table(&outcome.rows));
            if let Some(dir) = &cfg.output_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("results.csv"), harness::results_to_csv(&outcome.rows))?;
                std::fs::write(dir.join("cells.csv"), harness::cells_to_csv(&outcome.cells))?;
                std::fs::write(
                    dir.join("config.resolved.json"),
                    serde_json::to_string_pretty(&cfg)?,
                )?;
                if pad {
                    let reports = harness::run_pad_sweep(&cfg)?;
                    std::fs::write(dir.join("pad.csv"), harness::pad_to_csv(&reports))?;
                }
                println!("outputs in {}", dir.display());
            } else if pad {
                let reports = harness::run_pad_sweep(&cfg)?;
                print!("{}", harness::pad_to_csv(&reports));
            }
            Ok(())
        }
        Command::Table { results } => {
            let text = std::fs::read_to_string(&results)?;
            let rows = harness::parse_results_csv(&text)?;
            print!("{}", harness::render_table(&rows));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
