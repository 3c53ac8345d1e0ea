//! Command-line definition and dispatch.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use donut_core::corpus::load_corpus;
use donut_core::model_pool::parse_pool;
use donut_core::weight_net::{Standardizer, WnSample};
use donut_core::ModelId;
use log::info;

use crate::acceptance::{self, Criterion};
use crate::artifacts::read_json;
use crate::config::{Overrides, PipelineConfig};
use crate::error::{CliError, Result};
use crate::persist;
use crate::pipeline::{self, files};
use crate::stages;

#[derive(Debug, Parser)]
#[command(name = "donut", version, about = "Feature-weighted forecast combination pipeline")]
pub struct Cli {
    /// JSON pipeline configuration (defaults to the desk preset).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; for `synth`, the corpus seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output path; comma-separated where a command writes several files.
    /// For `run-all` this is the work directory.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CorpusArg {
    /// Corpus directory with train.csv and meta.csv.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputsArgs {
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[arg(long)]
    pub forecasts: Option<PathBuf>,
    /// Statistical feature table.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Autoencoder feature table.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a train/meta pair and store it as a corpus directory.
    Ingest {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        meta: PathBuf,
    },
    /// Generate the synthetic desk corpus.
    Synth {
        #[arg(long)]
        series: Option<usize>,
    },
    /// Fit all fourteen pool models on every series.
    Forecast(CorpusArg),
    /// Extract the 42 statistical features.
    Features(CorpusArg),
    /// Train the LSTM autoencoder.
    TrainAe(CorpusArg),
    /// Encode every series with a trained autoencoder.
    Encode {
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
    },
    /// Train the weighting network (writes the net and the series split).
    TrainWeightnet(InputsArgs),
    /// Predict weights and combined forecasts.
    Predict {
        #[arg(long)]
        net: Option<PathBuf>,
        #[command(flatten)]
        inputs: InputsArgs,
    },
    /// Score forecasts with sMAPE, MASE and OWA, per series and pooled.
    Evaluate {
        /// Forecast files; may be given several times.
        #[arg(long)]
        forecasts: Vec<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
        /// Series split; adds per-subset pooled rows.
        #[arg(long)]
        split: Option<PathBuf>,
    },
    /// Solve the combination LP per series.
    Oracle {
        #[arg(long)]
        forecasts: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
        /// Model list (`all`, `base9` or comma-separated names).
        #[arg(long)]
        pool: Option<String>,
        /// Combined forecasts to decompose into weighting and ensemble loss.
        #[arg(long)]
        combined: Option<PathBuf>,
    },
    /// Greedy forward selection of the pool by optimal combination loss.
    Greedy {
        #[arg(long)]
        forecasts: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long)]
        pool: Option<String>,
    },
    /// Permutation importance of the weighting network's inputs.
    Importance {
        #[arg(long)]
        net: Option<PathBuf>,
        #[command(flatten)]
        inputs: InputsArgs,
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        repeats: Option<usize>,
        /// Feature clusters; when given, cluster importance is written too.
        #[arg(long)]
        clusters: Option<PathBuf>,
    },
    /// Ward clustering of the input features by correlation distance.
    Cluster {
        #[command(flatten)]
        inputs: InputsArgs,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Breakdown tables and SVG charts.
    Report {
        #[arg(long)]
        evaluation: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        oracle: Option<PathBuf>,
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long)]
        importance: Option<PathBuf>,
        #[arg(long)]
        cluster_importance: Option<PathBuf>,
    },
    /// Run the acceptance checks; exits with 4 when any fails.
    Verify {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long)]
        criteria: Option<String>,
    },
    /// Run every stage, skipping those already up to date.
    RunAll {
        /// Use the desk hyperparameter tables.
        #[arg(long, conflicts_with = "paper_scale")]
        desk_scale: bool,
        /// Use the full-size hyperparameter tables (needs --corpus).
        #[arg(long)]
        paper_scale: bool,
        #[command(flatten)]
        corpus: CorpusArg,
    },
}

/// Resolved global options.
pub struct Env {
    pub config: PipelineConfig,
    pub outs: Vec<PathBuf>,
    /// `--seed` as given on the command line.
    pub seed_flag: Option<u64>,
}

impl Env {
    fn work(&self, rel: &str) -> PathBuf {
        self.config.work_dir.join(rel)
    }

    /// `k`-th `--out` entry, or the standard path in the work directory.
    fn out(&self, k: usize, default: &str) -> PathBuf {
        self.outs.get(k).cloned().unwrap_or_else(|| self.work(default))
    }

    fn or_work(&self, given: &Option<PathBuf>, default: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.work(default))
    }

    fn corpus_dir(&self, arg: &CorpusArg) -> PathBuf {
        arg.corpus
            .clone()
            .or_else(|| self.config.corpus.clone())
            .unwrap_or_else(|| self.work(files::CORPUS_DIR))
    }

    fn corpus(&self, arg: &CorpusArg) -> Result<Vec<donut_core::TimeSeries>> {
        persist::read_corpus(&self.corpus_dir(arg))
    }

    fn inputs(&self, a: &InputsArgs) -> Result<Vec<stages::SeriesInputs>> {
        stages::assemble(
            &self.corpus(&a.corpus)?,
            &persist::read_forecast_matrices(&self.or_work(&a.forecasts, files::FORECASTS))?,
            &persist::read_stats(&self.or_work(&a.features, files::STAT_FEATURES))?,
            &persist::read_embeddings(&self.or_work(&a.embeddings, files::EMBEDDINGS))?,
        )
    }

    fn pool(&self, given: &Option<String>) -> Result<Vec<ModelId>> {
        match given {
            Some(p) => parse_pool(p).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(self.config.pool.clone()),
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Parses and runs a command line; `env_workdir` is the value of the
/// work-directory environment variable.
pub fn run(cli: Cli, env_workdir: Option<PathBuf>) -> Result<()> {
    init_logging(cli.verbose);
    let outs: Vec<PathBuf> = cli
        .out
        .as_deref()
        .map(|s| s.split(',').filter(|p| !p.is_empty()).map(PathBuf::from).collect())
        .unwrap_or_default();
    let run_all_dir = matches!(cli.command, Command::RunAll { .. }).then(|| outs.first().cloned()).flatten();
    let overrides = Overrides {
        config: cli.config.clone(),
        seed: cli.seed,
        threads: cli.threads,
        work_dir: run_all_dir,
        env_work_dir: env_workdir,
    };
    let config = overrides.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let env = Env {
        config,
        outs,
        seed_flag: cli.seed,
    };
    pool.install(|| dispatch(cli.command, env))
}

fn dispatch(command: Command, env: Env) -> Result<()> {
    let cfg = &env.config;
    match command {
        Command::Ingest { train, meta } => {
            let corpus = load_corpus(&train, &meta)?;
            let dir = env.out(0, files::CORPUS_DIR);
            persist::write_corpus(&dir, &corpus)?;
            println!("ingested {} series into {}", corpus.len(), dir.display());
        }
        Command::Synth { series } => {
            let n = series.unwrap_or(cfg.synthetic_series);
            let seed = env.seed_flag.unwrap_or(cfg.synthetic_seed);
            let corpus = stages::synthesize(n, seed)?;
            let dir = env.out(0, files::CORPUS_DIR);
            persist::write_corpus(&dir, &corpus)?;
            println!("wrote {} synthetic series to {}", corpus.len(), dir.display());
        }
        Command::Forecast(c) => {
            let out = env.out(0, files::FORECASTS);
            persist::write_forecast_matrices(&out, &stages::forecast(&env.corpus(&c)?))?;
        }
        Command::Features(c) => {
            let out = env.out(0, files::STAT_FEATURES);
            persist::write_stats(&out, &stages::stat_features(&env.corpus(&c)?))?;
        }
        Command::TrainAe(c) => {
            cfg.ae.validate().map_err(|e| CliError::Config(e.to_string()))?;
            let trained = stages::train_ae(&env.corpus(&c)?, &cfg.ae, cfg.seeds().autoencoder)?;
            persist::write_ae(&env.out(0, files::AE), &trained)?;
        }
        Command::Encode { model, corpus } => {
            let ae = persist::read_ae(&env.or_work(&model, files::AE))?;
            persist::write_embeddings(&env.out(0, files::EMBEDDINGS), &stages::encode(&ae, &env.corpus(&corpus)?)?)?;
        }
        Command::TrainWeightnet(a) => {
            cfg.weightnet.validate().map_err(|e| CliError::Config(e.to_string()))?;
            let inputs = env.inputs(&a)?;
            let seeds = cfg.seeds();
            let roles = stages::split_roles(&inputs, cfg.weightnet.train_fraction, seeds.partition)?;
            let map: BTreeMap<_, _> = roles.iter().cloned().collect();
            let trained = stages::train_weightnet(&inputs, &map, &cfg.weightnet, seeds.weightnet)?;
            persist::write_weightnet(&env.out(0, files::WEIGHTNET), &trained)?;
            persist::write_roles(&env.out(1, files::SPLIT), &roles)?;
            let h = &trained.history;
            println!(
                "validation OWA: untrained {:.4}, trained {:.4}",
                h.val_owa[0],
                h.val_owa.last().copied().unwrap_or(f64::NAN)
            );
        }
        Command::Predict { net, inputs } => {
            let net = persist::read_weightnet(&env.or_work(&net, files::WEIGHTNET))?;
            let preds = stages::predict(&net, &env.inputs(&inputs)?)?;
            persist::write_predictions(&env.out(0, files::WEIGHTS), &env.out(1, files::FINAL_FORECASTS), &preds)?;
        }
        Command::Evaluate { forecasts, corpus, split } => {
            let paths = if forecasts.is_empty() {
                vec![env.work(files::FORECASTS), env.work(files::FINAL_FORECASTS)]
                    .into_iter()
                    .filter(|p| p.exists())
                    .collect()
            } else {
                forecasts
            };
            let roles = split.map(|p| persist::read_roles(&p)).transpose()?;
            let eval = stages::evaluate(&env.corpus(&corpus)?, &persist::read_methods(&paths)?, roles.as_ref())?;
            persist::write_evaluation(&env.out(0, files::EVALUATION), &eval)?;
            for p in eval.pooled.iter().filter(|p| p.subset != "train") {
                println!("{:<20} {:<10} n={:<6} OWA {:.4}", p.method, p.subset, p.n, p.owa);
            }
        }
        Command::Oracle {
            forecasts,
            corpus,
            pool,
            combined,
        } => {
            let pool = env.pool(&pool)?;
            let fm = persist::read_forecast_matrices(&env.or_work(&forecasts, files::FORECASTS))?;
            let instances = stages::oracle_instances(&env.corpus(&corpus)?, &fm);
            let finals = combined.map(|p| persist::read_methods(&[p])).transpose()?;
            let comb = finals
                .as_ref()
                .and_then(|f| f.iter().find(|(m, _)| m == stages::DONUT_METHOD))
                .map(|(_, f)| f);
            let (rows, summary) = stages::oracle(&instances, &pool, comb)?;
            persist::write_oracle(&env.out(0, files::ORACLE), &env.out(1, files::ORACLE_SUMMARY), &rows, &summary)?;
            println!(
                "mean optimal MASE: combination {:.4}, selection {:.4}",
                summary.mean_combination_mase, summary.mean_selection_mase
            );
        }
        Command::Greedy { forecasts, corpus, pool } => {
            let pool = env.pool(&pool)?;
            let fm = persist::read_forecast_matrices(&env.or_work(&forecasts, files::FORECASTS))?;
            let g = stages::greedy(&stages::oracle_instances(&env.corpus(&corpus)?, &fm), &pool)?;
            persist::write_curve(&env.out(0, files::CURVE), &g)?;
        }
        Command::Importance {
            net,
            inputs,
            split,
            repeats,
            clusters,
        } => {
            let net = persist::read_weightnet(&env.or_work(&net, files::WEIGHTNET))?;
            let all = env.inputs(&inputs)?;
            let roles = persist::read_roles(&env.or_work(&split, files::SPLIT))?;
            let (_, val, _) = stages::role_samples(&all, &roles, net.standardizer.as_ref())?;
            let repeats = repeats.unwrap_or(cfg.importance_repeats);
            let seed = cfg.seeds().importance;
            let records = donut_core::analysis::feature_importance(
                &net,
                &val,
                &donut_core::weight_net::feature_names(),
                seed,
                repeats,
            )?;
            persist::write_importance(&env.out(0, files::IMPORTANCE), &records)?;
            if let Some(path) = clusters {
                let groups = persist::read_cluster_groups(&path)?;
                let c = donut_core::analysis::cluster_importance(&net, &val, &groups, seed, repeats)?;
                persist::write_importance(&env.out(1, files::CLUSTER_IMPORTANCE), &c)?;
            }
        }
        Command::Cluster { inputs, k } => {
            let all = env.inputs(&inputs)?;
            let raws: Vec<Vec<f64>> = all.iter().map(|s| s.raw.clone()).collect();
            let st = Standardizer::fit(&raws)?;
            let refs: Vec<&stages::SeriesInputs> = all.iter().collect();
            let samples: Vec<WnSample> = stages::samples(&refs, &st)?;
            let (d, labels) = stages::cluster(&samples, k.unwrap_or(cfg.clusters))?;
            persist::write_clusters(&env.out(0, files::DENDROGRAM), &env.out(1, files::CLUSTERS), &d, &labels)?;
        }
        Command::Report {
            evaluation,
            weights,
            split,
            oracle,
            curve,
            importance,
            cluster_importance,
        } => {
            let eval = persist::read_evaluation(&env.or_work(&evaluation, files::EVALUATION))?;
            let weights = persist::read_weights(&env.or_work(&weights, files::WEIGHTS))?;
            let split_path = env.or_work(&split, files::SPLIT);
            let roles = split_path.exists().then(|| persist::read_roles(&split_path)).transpose()?;
            let data = stages::report_data(&eval, &weights, roles.as_ref(), cfg.alpha)?;
            let optional = |given: &Option<PathBuf>, default: &str| {
                let p = env.or_work(given, default);
                p.exists().then_some(p)
            };
            let oracle: Option<stages::OracleSummary> =
                optional(&oracle, files::ORACLE_SUMMARY).map(|p| read_json(&p)).transpose()?;
            let curve = optional(&curve, files::CURVE).map(|p| persist::read_curve(&p)).transpose()?;
            let imp = optional(&importance, files::IMPORTANCE)
                .map(|p| persist::read_importance(&p))
                .transpose()?
                .unwrap_or_default();
            let cimp = optional(&cluster_importance, files::CLUSTER_IMPORTANCE)
                .map(|p| persist::read_importance(&p))
                .transpose()?
                .unwrap_or_default();
            let dir = env.out(0, files::REPORT_DIR);
            persist::write_report(
                &dir,
                &persist::ReportInputs {
                    eval: &eval,
                    data: &data,
                    oracle: oracle.as_ref(),
                    curve: curve.as_ref(),
                    importance: &imp,
                    cluster_importance: &cimp,
                    target_owa: cfg.target_owa.map(|t| (t, cfg.target_tolerance)),
                },
            )?;
            println!("report written to {}", dir.display());
        }
        Command::Verify { criteria } => {
            let selected = match criteria {
                Some(list) => list
                    .split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<u8>()
                            .ok()
                            .and_then(Criterion::from_number)
                            .ok_or_else(|| CliError::Config(format!("unknown criterion '{c}'")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => Criterion::ALL.to_vec(),
            };
            let results = acceptance::run_criteria(
                &selected,
                &acceptance::Options {
                    seed: cfg.seed,
                    ..Default::default()
                },
            );
            let mut failed = Vec::new();
            for r in &results {
                println!("{}", r.line());
                if !r.passed {
                    failed.push(r.criterion.number().to_string());
                }
            }
            if !failed.is_empty() {
                return Err(CliError::AcceptanceFailed(format!("criteria {}", failed.join(", "))));
            }
        }
        Command::RunAll {
            desk_scale,
            paper_scale,
            corpus,
        } => {
            let mut config = env.config.clone();
            if desk_scale {
                config = config.with_desk_scale();
            }
            if paper_scale {
                config = config.with_paper_scale();
            }
            if let Some(c) = corpus.corpus {
                config.corpus = Some(c);
            }
            if paper_scale && config.corpus.is_none() {
                return Err(CliError::Config("--paper-scale needs a corpus directory (--corpus)".into()));
            }
            let outcome = pipeline::run_all(&config)?;
            for t in &outcome.timings {
                info!("{:<16} {:>9.2} s{}", t.stage, t.seconds, if t.skipped { " (skipped)" } else { "" });
            }
            print_summary(&config.work_dir)?;
        }
    }
    Ok(())
}

fn print_summary(work: &Path) -> Result<()> {
    let eval = persist::read_evaluation(&work.join(files::EVALUATION))?;
    for method in [stages::DONUT_METHOD, stages::UNIFORM_METHOD] {
        if let Some(p) = eval.pooled(method, "validation") {
            println!("{method:<8} validation pooled OWA {:.4} (n = {})", p.owa, p.n);
        }
    }
    println!("work directory: {}", work.display());
    Ok(())
}
