//! `attentopo`: extract topological attention features, train and apply the detector.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use attentopo::config::PipelineConfig;
use attentopo::detector::FeatureMatrix;
use attentopo::graph::ThresholdSet;
use attentopo::io::{
    feature_matrix_csv, read_attention_dump, read_feature_matrix, read_model, write_feature_matrix, write_model,
};
use attentopo::persistence::{barcode_listing, H1Mode};
use attentopo::pipeline::{extract_corpus, predictions_csv, train};
use attentopo::synth::{write_synth_corpus, SynthConfig};
use attentopo::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "attentopo",
    version,
    about = "Topological features of attention maps for generated-text detection"
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the feature matrix of a corpus.
    Extract(ExtractArgs),
    /// Grid-search the detector on train, select on validation.
    Train(TrainArgs),
    /// Print accuracy of a model on one or more feature files.
    Eval(EvalArgs),
    /// Write per-sample labels and probabilities.
    Predict(PredictArgs),
    /// Dump the H0/H1 barcodes of every head of one sample.
    Barcodes(BarcodesArgs),
    /// Generate the planted synthetic corpus (train/valid/test).
    Synth(SynthArgs),
    /// Print the effective configuration.
    PrintConfig,
}

#[derive(Args)]
struct ExtractArgs {
    /// Corpus directory containing manifest.jsonl.
    #[arg(long)]
    corpus: PathBuf,
    /// Output feature matrix file.
    #[arg(long)]
    out: PathBuf,
    /// Also write an inspection CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Feature families to compute, comma separated: topo, barcode, pattern.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    /// Drop the simple-cycle count.
    #[arg(long)]
    no_cycles: bool,
    #[arg(long)]
    cycle_cap: Option<usize>,
    #[arg(long)]
    max_cycle_len: Option<usize>,
    /// H1 computation: clique (default) or graph.
    #[arg(long)]
    h1_mode: Option<H1Mode>,
    /// Keep diagonal attention as self-loops.
    #[arg(long)]
    keep_self_loops: bool,
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long)]
    birth_threshold: Option<f64>,
    #[arg(long)]
    death_threshold: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Skip samples that fail validation instead of aborting.
    #[arg(long)]
    skip_invalid: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: PathBuf,
    /// Output model file.
    #[arg(long)]
    model: PathBuf,
    /// Grid report CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    max_iter: Option<Vec<usize>>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled feature files.
    #[arg(long, required = true, num_args = 1..)]
    features: Vec<PathBuf>,
    /// Also write the printed table here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    /// Output CSV; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BarcodesArgs {
    /// Sample directory with attn.npy and meta.json.
    #[arg(long)]
    sample: PathBuf,
    #[arg(long)]
    h1_mode: Option<H1Mode>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    #[arg(long, default_value_t = 2)]
    heads: usize,
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 400)]
    train: usize,
    #[arg(long, default_value_t = 100)]
    valid: usize,
    #[arg(long, default_value_t = 100)]
    test: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Smallest tree-mass fraction of human-like heads.
    #[arg(long)]
    tree_mass_min: Option<f64>,
    #[arg(long)]
    tree_mass_max: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            PipelineConfig::from_toml(&text)
        }
        None => Ok(PipelineConfig::default()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::PrintConfig => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Extract(args) => extract(&mut cfg, args),
        Command::Train(args) => cmd_train(&mut cfg, args),
        Command::Eval(args) => eval(args),
        Command::Predict(args) => {
            let model = read_model(&args.model)?;
            let features = read_feature_matrix(&args.features)?;
            let csv = predictions_csv(&model, &features)?;
            match args.out {
                Some(p) => write_text(&p, &csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::Barcodes(args) => {
            let sample = read_attention_dump(&args.sample)?;
            let mode = args.h1_mode.unwrap_or(cfg.features.barcode.h1_mode);
            let text = barcode_listing(&sample, mode);
            match args.out {
                Some(p) => write_text(&p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Synth(args) => {
            let defaults = SynthConfig::default();
            let synth = SynthConfig {
                layers: args.layers,
                heads: args.heads,
                n: args.n,
                train: args.train,
                valid: args.valid,
                test: args.test,
                seed: args.seed,
                tree_mass: (
                    args.tree_mass_min.unwrap_or(defaults.tree_mass.0),
                    args.tree_mass_max.unwrap_or(defaults.tree_mass.1),
                ),
                noise: args.noise.unwrap_or(defaults.noise),
            };
            write_synth_corpus(&args.out, &synth)?;
            log::info!(
                "wrote {} / {} / {} samples to {}",
                synth.train,
                synth.valid,
                synth.test,
                args.out.display()
            );
            Ok(())
        }
    }
}

fn extract(cfg: &mut PipelineConfig, args: ExtractArgs) -> Result<()> {
    let f = &mut cfg.features;
    if let Some(families) = &args.features {
        f.use_topo = false;
        f.use_barcode = false;
        f.use_pattern = false;
        for fam in families {
            match fam.trim() {
                "topo" => f.use_topo = true,
                "barcode" => f.use_barcode = true,
                "pattern" => f.use_pattern = true,
                "all" => {
                    f.use_topo = true;
                    f.use_barcode = true;
                    f.use_pattern = true;
                }
                other => return Err(Error::Config(format!("unknown feature family {other:?}"))),
            }
        }
    }
    if args.no_cycles {
        f.topo.cycles = false;
    }
    if let Some(cap) = args.cycle_cap {
        f.topo.cycle_cap = cap;
    }
    if args.max_cycle_len.is_some() {
        f.topo.max_cycle_len = args.max_cycle_len;
    }
    if args.keep_self_loops {
        f.topo.keep_self_loops = true;
    }
    if let Some(mode) = args.h1_mode {
        f.barcode.h1_mode = mode;
    }
    if let Some(t) = args.thresholds {
        f.thresholds = ThresholdSet::new(t)?;
    }
    if let Some(b) = args.birth_threshold {
        f.barcode.birth_threshold = b;
    }
    if let Some(d) = args.death_threshold {
        f.barcode.death_threshold = d;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let workers = cfg.resolved_workers()?;

    let out = extract_corpus(&args.corpus, &cfg.features, workers, args.skip_invalid)?;
    for (id, msg) in &out.skipped {
        log::warn!("skipped {id}: {msg}");
    }
    write_feature_matrix(&out.matrix, &args.out)?;
    if let Some(csv) = args.csv {
        write_text(&csv, &feature_matrix_csv(&out.matrix))?;
    }
    println!(
        "{}: {} samples x {} features ({} skipped)",
        args.out.display(),
        out.matrix.rows(),
        out.matrix.width(),
        out.skipped.len()
    );
    Ok(())
}

fn cmd_train(cfg: &mut PipelineConfig, args: TrainArgs) -> Result<()> {
    if let Some(c) = args.c {
        cfg.grid.c = c;
    }
    if let Some(it) = args.max_iter {
        cfg.grid.max_iter = it;
    }
    cfg.validate()?;
    let train_m = read_feature_matrix(&args.train)?;
    let valid_m = read_feature_matrix(&args.valid)?;
    let (model, report) = train(&train_m, &valid_m, &cfg.grid.c, &cfg.grid.max_iter)?;
    write_model(&model, &args.model)?;
    if let Some(p) = args.report {
        write_text(&p, &report.to_csv())?;
    }
    let best = &report.rows[report.best];
    println!(
        "selected C={} max_iter={} valid_accuracy={:.6} ({} grid points)",
        best.c,
        best.max_iter,
        best.valid.accuracy,
        report.rows.len()
    );
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let mut table = String::from("features,samples,accuracy,precision,recall\n");
    for path in &args.features {
        let m: FeatureMatrix = read_feature_matrix(path)?;
        let r = model.evaluate(&m)?;
        table.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6}\n",
            path.display(),
            r.samples,
            r.accuracy,
            r.precision,
            r.recall
        ));
    }
    print!("{table}");
    if let Some(p) = args.report {
        write_text(&p, &table)?;
    }
    Ok(())
}
