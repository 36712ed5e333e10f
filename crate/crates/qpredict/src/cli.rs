//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use qpredict_core::circuit::Circuit;
use qpredict_core::compiler::{compile, device_for, CompilationOption};
use qpredict_core::corpus::generate_corpus;
use qpredict_core::eval::ClassifierSpec;
use qpredict_core::features::{extract_features, FeatureSchema};
use qpredict_core::ml::{default_forest_grid, ForestParams};
use qpredict_core::qasm::{emit_qasm, parse_qasm};
use qpredict_core::scoring::{evaluate_score, rank_scores};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{parse_families, timeout_from_secs, Config, CONFIG_ENV, MODEL_FILE};
use crate::dataset::{read_corpus, read_labeled, write_corpus, write_labeled, write_ranking, LABELS_CSV};
use crate::model_file::{load_model, save_model};
use crate::pipeline::{
    evaluate_model, label_dataset, timed_score, train_experiment, write_evaluation, Evaluation, TrainSettings,
    REPORT_JSON,
};

#[derive(Debug, Parser)]
#[command(name = "qpredict", version, about = "Predict good compilation options for quantum circuits")]
pub struct Cli {
    /// Config file (TOML).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Worker threads; outputs do not depend on it. 0 uses every core.
    #[arg(long, short = 'j', global = true)]
    pub jobs: Option<usize>,
    /// Log more (repeat for debug output).
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated corpus as OpenQASM files plus a manifest.
    Generate(GenerateArgs),
    /// Compile every circuit under every option and record the rankings.
    Label(LabelArgs),
    /// Split, grid-search and fit a classifier; writes the model and report.
    Train(TrainArgs),
    /// Predict the best options for one circuit.
    Predict(PredictArgs),
    /// Compile one circuit with a predicted or explicit option, or sweep all.
    Compile(CompileArgs),
    /// Re-evaluate a model on its held-out circuits and write figure data.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory [default: config output_dir].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated families: ghz, wstate, dj, qft, grover, qaoa, random.
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Qubit range as `MIN..MAX` (inclusive).
    #[arg(long, value_parser = parse_range)]
    pub qubits: Option<(usize, usize)>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub random_per_size: Option<usize>,
    #[arg(long)]
    pub qaoa_per_size: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct FleetArgs {
    /// Directory of device TOML files [default: built-in fleet].
    #[arg(long)]
    pub devices: Option<PathBuf>,
    /// Comma-separated option filters, e.g. `dev8,dev27/A`.
    #[arg(long, value_delimiter = ',')]
    pub options: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Data directory holding `manifest.csv` [default: config output_dir].
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub fleet: FleetArgs,
    /// Per-option compile timeout in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierKind {
    Forest,
    Tree,
    Knn,
    Nb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    /// 27-point forest grid.
    Default,
    /// No search: 500 trees, depth 20, min leaf 2.
    None,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Label the corpus first.
    #[arg(long)]
    pub label: bool,
    #[command(flatten)]
    pub fleet: FleetArgs,
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long, value_enum, default_value_t = ClassifierKind::Forest)]
    pub classifier: ClassifierKind,
    /// Forest grid.
    #[arg(long, value_enum, default_value_t = GridKind::Default)]
    pub grid: GridKind,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Neighbors for `--classifier knn`.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model output [default: <data>/model.json].
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// OpenQASM 2.0 file.
    pub circuit: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    /// Also print the feature vector and the model's feature importances.
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args)]
#[group(id = "mode", multiple = false)]
pub struct CompileArgs {
    /// OpenQASM 2.0 file.
    pub circuit: PathBuf,
    /// Use the option this model predicts (the default mode).
    #[arg(long, group = "mode")]
    pub model: Option<PathBuf>,
    /// Compile with this option id, e.g. `dev8/A/O3`.
    #[arg(long, group = "mode")]
    pub option: Option<String>,
    /// Sweep every option and write the ranking CSV.
    #[arg(long, group = "mode")]
    pub all: bool,
    #[command(flatten)]
    pub fleet: FleetArgs,
    /// Output file [default: `<circuit>.compiled.qasm`, or `<circuit>.ranking.csv` with --all].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected MIN..MAX")?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Parses, resolves the config and runs one command on a pool of the
/// requested size. Human-readable results go to `out`.
pub fn run(cli: Cli, out: &mut (dyn Write + Send)) -> Result<()> {
    let mut config = Config::load(cli.config.as_deref())?;
    if let Some(j) = cli.jobs {
        config.jobs = j;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .context("building the worker pool")?;
    pool.install(|| match cli.command {
        Command::Generate(a) => cmd_generate(config, a, out),
        Command::Label(a) => cmd_label(config, a, out),
        Command::Train(a) => cmd_train(config, a, out),
        Command::Predict(a) => cmd_predict(config, a, out),
        Command::Compile(a) => cmd_compile(config, a, out),
        Command::Evaluate(a) => cmd_evaluate(config, a, out),
    })
}

fn apply_fleet(config: &mut Config, fleet: &FleetArgs) {
    if let Some(d) = &fleet.devices {
        config.device_dir = Some(d.clone());
    }
    if let Some(o) = &fleet.options {
        config.option_filters = o.clone();
    }
}

fn cmd_generate(mut config: Config, a: GenerateArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(f) = &a.families {
        config.corpus.families = parse_families(f)?;
    }
    if let Some((min, max)) = a.qubits {
        config.corpus.min_qubits = min;
        config.corpus.max_qubits = max;
    }
    if let Some(s) = a.seed {
        config.corpus.seed = s;
    }
    config.corpus.random_per_size = a.random_per_size.unwrap_or(config.corpus.random_per_size);
    config.corpus.qaoa_per_size = a.qaoa_per_size.unwrap_or(config.corpus.qaoa_per_size);
    let dir = a.out.unwrap_or(config.output_dir.clone());
    config.validate()?;
    let circuits = generate_corpus(&config.corpus)?;
    let hash = write_corpus(&dir, &circuits)?;
    writeln!(out, "wrote {} circuits to {}", circuits.len(), dir.display())?;
    writeln!(out, "manifest sha256 {hash}")?;
    Ok(())
}

fn label_into(config: &Config, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let devices = config.devices()?;
    let options = config.options(&devices)?;
    let circuits = read_corpus(dir)?;
    let labeled = label_dataset(&circuits, &options, &devices, config.timeout)?;
    if labeled.samples.is_empty() {
        bail!("none of the {} circuits has a feasible option", circuits.len());
    }
    write_labeled(dir, &labeled.samples)?;
    writeln!(
        out,
        "labeled {} circuits over {} options ({} excluded)",
        labeled.samples.len(),
        options.len(),
        labeled.excluded.len()
    )?;
    Ok(())
}

fn cmd_label(mut config: Config, a: LabelArgs, out: &mut dyn Write) -> Result<()> {
    apply_fleet(&mut config, &a.fleet);
    if let Some(t) = a.timeout {
        config.timeout = timeout_from_secs(t)?;
    }
    config.validate()?;
    let dir = a.data.unwrap_or(config.output_dir.clone());
    label_into(&config, &dir, out)
}

fn classifier_grid(a: &TrainArgs) -> Vec<ClassifierSpec> {
    match a.classifier {
        ClassifierKind::Forest => match a.grid {
            GridKind::Default => default_forest_grid().into_iter().map(ClassifierSpec::Forest).collect(),
            GridKind::None => vec![ClassifierSpec::Forest(ForestParams::reference())],
        },
        ClassifierKind::Tree => vec![ClassifierSpec::Forest(ForestParams::single_tree())],
        ClassifierKind::Knn => vec![ClassifierSpec::Knn { k: a.k }],
        ClassifierKind::Nb => vec![ClassifierSpec::NaiveBayes],
    }
}

fn print_report(e: &Evaluation, out: &mut dyn Write) -> Result<()> {
    let r = &e.report;
    writeln!(out, "accuracy   {:.4}", r.accuracy)?;
    writeln!(out, "top3       {:.4}", r.top3)?;
    writeln!(out, "worst_rank {} of {}", r.worst_rank, r.n_options)?;
    writeln!(
        out,
        "baseline   {:.4} (always {})",
        r.majority_baseline.accuracy, r.majority_baseline.option
    )?;
    Ok(())
}

fn cmd_train(mut config: Config, a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    apply_fleet(&mut config, &a.fleet);
    if let Some(t) = a.timeout {
        config.timeout = timeout_from_secs(t)?;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(m) = &a.model {
        config.model_path = Some(m.clone());
    }
    let dir = a.data.clone().unwrap_or(config.output_dir.clone());
    config.validate()?;
    if a.label {
        label_into(&config, &dir, out)?;
    } else if !dir.join(LABELS_CSV).exists() {
        bail!("{} has no {LABELS_CSV}; run `label` first or pass --label", dir.display());
    }
    let samples = read_labeled(&dir)?;
    let settings = TrainSettings {
        grid: classifier_grid(&a),
        folds: a.folds,
        seed: config.seed,
        test_fraction: a.test_fraction,
    };
    let exp = train_experiment(&samples, &settings)?;
    let model_path = model_in(&config, &dir);
    save_model(&model_path, &exp.model)?;
    let e = evaluate_model(&exp.model, &samples)?;
    write_evaluation(&dir, &e)?;
    if let Some(cv) = &exp.model.training.as_ref().and_then(|t| t.cv.clone()) {
        writeln!(
            out,
            "grid search: best of {} settings, cv accuracy {:.4}",
            cv.grid.len(),
            cv.accuracy[cv.best_index]
        )?;
    }
    writeln!(out, "model  {}", model_path.display())?;
    writeln!(out, "report {}", dir.join(REPORT_JSON).display())?;
    print_report(&e, out)
}

/// The configured model path, else `model.json` inside the data directory.
fn model_in(config: &Config, dir: &Path) -> PathBuf {
    config.model_path.clone().unwrap_or_else(|| dir.join(MODEL_FILE))
}

fn cmd_evaluate(config: Config, a: EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let dir = a.data.unwrap_or(config.output_dir.clone());
    let model_path = a.model.unwrap_or_else(|| model_in(&config, &dir));
    let file = load_model(&model_path).with_context(|| format!("loading {}", model_path.display()))?;
    let samples = read_labeled(&dir)?;
    let e = evaluate_model(&file, &samples)?;
    write_evaluation(&dir, &e)?;
    print_report(&e, out)
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(parse_qasm(&text)
        .with_context(|| format!("parsing {}", path.display()))?
        .named(name))
}

fn cmd_predict(config: Config, a: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model_path = a.model.unwrap_or_else(|| config.model_path());
    let file = load_model(&model_path).with_context(|| format!("loading {}", model_path.display()))?;
    let c = read_circuit(&a.circuit)?;
    let v = extract_features(&c, &FeatureSchema::full());
    let top = file.model.predict_top_k(&v, a.top_k)?;
    writeln!(out, "predicted {}", top[0].0)?;
    writeln!(out, "top-{}:", a.top_k)?;
    for (i, (id, score)) in top.iter().enumerate() {
        writeln!(out, "  {:>2}. {id:<16} {score:.4}", i + 1)?;
    }
    if a.explain {
        let row = file.model.row(&v)?;
        let imp = file.model.feature_importance();
        writeln!(out, "features:")?;
        for (i, (name, value)) in file.model.schema.names.iter().zip(&row).enumerate() {
            match &imp {
                Some(r) => writeln!(out, "  {name:<28} {value:>10.4}  importance {:.4}", r.importance[i])?,
                None => writeln!(out, "  {name:<28} {value:>10.4}")?,
            }
        }
    }
    Ok(())
}

/// Compiled-circuit record written next to the QASM. Wall-clock time goes
/// to the log so the file stays reproducible.
#[derive(Serialize)]
struct CompileRecord {
    circuit: String,
    option: String,
    device: String,
    score: f64,
    log_score: f64,
    swaps: usize,
    native_gate_count: usize,
    placement_fallback: bool,
    initial_layout: Vec<usize>,
    final_layout: Vec<usize>,
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_compile(mut config: Config, a: CompileArgs, out: &mut dyn Write) -> Result<()> {
    apply_fleet(&mut config, &a.fleet);
    config.validate()?;
    let devices = config.devices()?;
    let c = read_circuit(&a.circuit)?;

    if a.all {
        let options = config.options(&devices)?;
        let scores = options
            .par_iter()
            .map(|o| timed_score(&c, o, &devices, config.timeout).map(|(s, _)| s))
            .collect::<Result<Vec<_>, _>>()?;
        let ranking = rank_scores(options, scores)?;
        let path = a.out.unwrap_or_else(|| with_suffix(&a.circuit, ".ranking.csv"));
        write_ranking(&path, &ranking)?;
        if !ranking.any_feasible() {
            bail!("no option is feasible for {} ({} qubits)", c.name, c.num_qubits);
        }
        writeln!(out, "best {} ({} options ranked)", ranking.best().id(), ranking.options.len())?;
        writeln!(out, "ranking {}", path.display())?;
        return Ok(());
    }

    let option: CompilationOption = match &a.option {
        Some(id) => id.parse()?,
        None => {
            let model_path = a.model.clone().unwrap_or_else(|| config.model_path());
            let file = load_model(&model_path).with_context(|| format!("loading {}", model_path.display()))?;
            let v = extract_features(&c, &FeatureSchema::full());
            file.model.predict(&v)?.parse()?
        }
    };
    let device = device_for(&option, &devices)?;
    let start = Instant::now();
    let r = compile(&c, &option, &devices).with_context(|| format!("compiling with {option}"))?;
    info!("compiled {} with {option} in {:.3}s", c.name, start.elapsed().as_secs_f64());
    let score = evaluate_score(Some(&r), device)?;
    let path = a.out.unwrap_or_else(|| with_suffix(&a.circuit, ".compiled.qasm"));
    std::fs::write(&path, emit_qasm(&r.circuit)).with_context(|| format!("writing {}", path.display()))?;
    let record = CompileRecord {
        circuit: c.name.clone(),
        option: option.id(),
        device: device.id.clone(),
        score: score.value,
        log_score: score.log_value,
        swaps: r.stats.swaps,
        native_gate_count: r.stats.native_gate_count,
        placement_fallback: r.stats.placement_fallback,
        initial_layout: r.initial_layout.clone(),
        final_layout: r.final_layout.clone(),
    };
    let stats = path.with_extension("json");
    std::fs::write(&stats, serde_json::to_string_pretty(&record)? + "\n")
        .with_context(|| format!("writing {}", stats.display()))?;
    writeln!(out, "option {option}")?;
    writeln!(out, "score  {:.6}", score.value)?;
    writeln!(out, "wrote  {} and {}", path.display(), stats.display())?;
    Ok(())
}
