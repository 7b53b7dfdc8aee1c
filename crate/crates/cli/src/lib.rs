//! Command-line driver: `train`, `predict`, `export` and `gen-data`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid input.

pub mod config;
pub mod datagen;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use evomlp::data::{self, Dataset};
use evomlp::engine::{self, Engine, GenerationStats, StopReason};
use evomlp::export::{self, Target, TrainedModel, TrainingMetadata};
use evomlp::trace::{JsonLinesSink, TraceSink, Tracer};

use crate::config::{parse_config, CliConfig};

const DEFAULTS_HELP: &str = "\
Defaults: algorithm=de, population_size=50, max_iterations=200, threshold=1.0 on the best fitness,
hidden_layers=[4], activation=tanh, init_range=[-1,1], workers=available cores.
PSO: phi_p=phi_g=2.0, linear inertia 0.9 -> 0.5 (constant inertia w=0.729).
DE: strategy rand1, f=0.8, cr=0.9.  GA: tournament selection, substitution mutation,
p_m=0.01, cr=0.5.";

#[derive(Debug, Parser)]
#[command(name = "evomlp", version, about = "Train MLP classifiers with PSO, DE or a GA", after_help = DEFAULTS_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master random seed (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for population evaluation (results do not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write a per-generation population trace (JSON lines) to this path.
    #[arg(long, global = true)]
    pub trace: Option<PathBuf>,

    /// GA roulette: replace with probability f_i / sum(f) instead of the
    /// inverse-fitness rule.
    #[arg(
        long = "paper-literal-roulette",
        alias = "literal-roulette",
        global = true
    )]
    pub literal_roulette: bool,

    /// Suppress per-generation progress on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a classifier and write model.json and history.csv.
    Train {
        /// JSON configuration file; omitted fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Training data CSV with a header row.
        #[arg(long)]
        data: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override a config value, e.g. `--set de.cr=0.5` (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the predicted class of each row of a CSV file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Column to ignore if present, e.g. the label column of a training file.
        #[arg(long)]
        label_column: Option<String>,
    },
    /// Write the classifier as standalone source code.
    Export {
        #[arg(long)]
        model: PathBuf,
        /// python, java or javascript.
        #[arg(long)]
        lang: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset.
    GenData {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        out: PathBuf,
        /// Number of rows (blobs; xor with --jitter).
        #[arg(long, default_value_t = 200)]
        size: usize,
        /// XOR only: emit `size` jittered copies of the four rows.
        #[arg(long)]
        jitter: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Xor,
    Blobs,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub messages: Vec<String>,
}

impl CliError {
    fn invalid(messages: Vec<String>) -> Self {
        CliError { code: 2, messages }
    }

    fn invalid_one(message: impl Into<String>) -> Self {
        Self::invalid(vec![message.into()])
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            messages: vec![message.into()],
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Train {
            config,
            data,
            out,
            overrides,
        } => cmd_train(config.as_deref(), &data, &out, &overrides, &cli.global),
        Command::Predict {
            model,
            data,
            label_column,
        } => cmd_predict(&model, &data, label_column.as_deref()),
        Command::Export { model, lang, out } => cmd_export(&model, &lang, &out),
        Command::GenData {
            task,
            out,
            size,
            jitter,
        } => cmd_gen_data(task, &out, cli.global.seed.unwrap_or(0), size, jitter),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            for m in &e.messages {
                eprintln!("error: {m}");
            }
            e.code
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::invalid_one(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best,worst,mean\n");
    for h in history {
        writeln!(out, "{},{},{},{}", h.generation, h.best, h.worst, h.mean).unwrap();
    }
    out
}

fn load_training_data(path: &Path, cfg: &CliConfig) -> Result<Dataset, String> {
    let table =
        data::load_csv(path, &cfg.label_column).map_err(|e| format!("{}: {e}", path.display()))?;
    data::preprocess(&table, cfg.policy()).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn cmd_train(
    config_path: Option<&Path>,
    data_path: &Path,
    out_dir: &Path,
    overrides: &[String],
    global: &GlobalArgs,
) -> CliResult {
    let text = config_path.map(read_text).transpose()?;
    let mut cfg = parse_config(text.as_deref(), overrides).map_err(CliError::invalid)?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(w) = global.workers {
        cfg.workers = Some(w);
    }
    if global.literal_roulette {
        cfg.ga.literal_roulette = true;
    }
    if let Some(t) = &global.trace {
        cfg.trace = Some(t.clone());
    }

    // Report configuration and data problems together.
    let dataset = load_training_data(data_path, &cfg);
    let (dim, classes) = dataset
        .as_ref()
        .map(|d| (d.feature_count(), d.class_count()))
        .unwrap_or((1, 2));
    let run_config = cfg.run_config(dim, classes);
    let mut problems = run_config.violations();
    let dataset = match dataset {
        Ok(d) => Some(d),
        Err(e) => {
            problems.push(e);
            None
        }
    };
    if !problems.is_empty() {
        return Err(CliError::invalid(problems));
    }
    let dataset = dataset.expect("checked above");

    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", out_dir.display())))?;
    let mut trace_sink = match &cfg.trace {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
            Some(JsonLinesSink::new(BufWriter::new(file)))
        }
        None => None,
    };

    let outcome = train_loop(
        &run_config,
        &dataset,
        trace_sink.as_mut().map(|s| s as &mut dyn TraceSink),
        global.quiet,
    )
    .map_err(|e| CliError::runtime(e.to_string()))?;
    if let Some(sink) = trace_sink {
        sink.into_inner()
            .flush()
            .map_err(|e| CliError::runtime(format!("trace: {e}")))?;
    }

    let model = TrainedModel {
        topology: run_config.topology.clone(),
        genome: outcome.best.clone(),
        transform: dataset.transform.clone(),
        class_names: dataset.class_names.clone(),
        metadata: TrainingMetadata {
            algorithm: run_config.algorithm.name().into(),
            seed: run_config.seed,
            fitness: outcome.best_fitness,
            generations: outcome.generations,
        },
    };
    let model_text = export::model_to_json(&model).map_err(|e| CliError::runtime(e.to_string()))?;
    write_file(&out_dir.join("model.json"), &model_text)?;
    write_file(&out_dir.join("history.csv"), &history_csv(&outcome.history))?;

    let stopped_by = match outcome.stopped_by {
        StopReason::Threshold => "K",
        StopReason::MaxIterations => "Tmax",
    };
    println!(
        "best_fitness={} generations={} stopped_by={stopped_by}",
        outcome.best_fitness, outcome.generations
    );
    Ok(())
}

/// [`engine::run`] with a progress line per generation on standard error.
fn train_loop(
    config: &evomlp::RunConfig,
    dataset: &Dataset,
    trace: Option<&mut dyn TraceSink>,
    quiet: bool,
) -> evomlp::Result<engine::RunOutcome> {
    let mut engine = Engine::new(config.clone(), dataset)?;
    let mut tracer = match trace {
        Some(sink) => Some(Tracer::new(sink, &engine.population().genomes())?),
        None => None,
    };
    let report = |engine: &Engine, tracer: &mut Option<Tracer>| -> evomlp::Result<()> {
        if let Some(t) = tracer.as_mut() {
            let events = engine.trace_events(t)?;
            t.record(&events)?;
        }
        if !quiet {
            let s = engine.history().last().expect("history is never empty");
            eprintln!("gen {} {} {} {}", s.generation, s.best, s.worst, s.mean);
        }
        Ok(())
    };
    report(&engine, &mut tracer)?;
    while engine.stop_reason().is_none() {
        engine.step()?;
        report(&engine, &mut tracer)?;
    }
    Ok(engine.into_outcome())
}

pub fn cmd_predict(model_path: &Path, data_path: &Path, skip: Option<&str>) -> CliResult {
    let model = export::load_model(model_path)
        .map_err(|e| CliError::invalid_one(format!("{}: {e}", model_path.display())))?;
    let file = fs::File::open(data_path)
        .map_err(|e| CliError::invalid_one(format!("{}: {e}", data_path.display())))?;
    let (names, rows) = data::read_feature_rows(file, skip)
        .map_err(|e| CliError::invalid_one(format!("{}: {e}", data_path.display())))?;
    if names.len() != model.topology.input_dim {
        return Err(CliError::invalid_one(format!(
            "{}: {} feature columns, model expects {}",
            data_path.display(),
            names.len(),
            model.topology.input_dim
        )));
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for row in &rows {
        let class = model
            .predict(row)
            .map_err(|e| CliError::invalid_one(e.to_string()))?;
        writeln!(out, "{class}").map_err(|e| CliError::runtime(e.to_string()))?;
    }
    Ok(())
}

pub fn cmd_export(model_path: &Path, lang: &str, out: &Path) -> CliResult {
    let target: Target = lang.parse().map_err(CliError::invalid_one)?;
    let model = export::load_model(model_path)
        .map_err(|e| CliError::invalid_one(format!("{}: {e}", model_path.display())))?;
    let source = export::export(&model, target).map_err(|e| CliError::runtime(e.to_string()))?;
    write_file(out, &source)?;
    println!("{}", out.display());
    Ok(())
}

pub fn cmd_gen_data(task: Task, out: &Path, seed: u64, size: usize, jitter: bool) -> CliResult {
    let rows = match task {
        Task::Xor => datagen::xor(jitter.then_some((size, seed))),
        Task::Blobs => datagen::blobs(size, seed),
    };
    write_file(out, &datagen::to_csv(&rows))
}
