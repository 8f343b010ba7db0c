use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sh2::analysis::parse_eta_grid;
use sh2::backend::{serve, BackendSpec, LanguageModel, ToyNgramModel};
use sh2::error::{Error, Result};
use sh2::harness::{emit_report, emit_token_heat, run_task, TaskConfig, TaskKind};
use sh2::highlight::{token_probabilities, Manner, Placement, SelectionMode};

#[derive(Parser)]
#[command(name = "sh2", version, about = "Key-token hesitation and contrastive scoring for language models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark task and write report.json / metrics.csv.
    Eval(EvalArgs),
    /// Normalized recall of POS tags among the hardest words.
    Recall(RecallArgs),
    /// Render a token probability heat map as HTML.
    Heat(HeatArgs),
    /// Train the toy n-gram backend on a text corpus.
    TrainToy(TrainArgs),
    /// Serve a toy model over the JSON wire protocol.
    Serve(ServeArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// JSON file with a full task config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<TaskKind>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// `toy:model.json` or `http:URL`.
    #[arg(long)]
    backend: Option<BackendSpec>,
    /// Profile for defaults: llama-7b, llama2-7b, mistral-7b or generic-7b.
    #[arg(long)]
    backbone: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// append | prepend
    #[arg(long)]
    placement: Option<Placement>,
    /// key | pauses:K | repeat
    #[arg(long)]
    manner: Option<Manner>,
    /// hardest | easiest | random
    #[arg(long)]
    mode: Option<SelectionMode>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecallArgs {
    /// Pre-tagged TSV: `word<TAB>tag` per line, blank line between documents.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    backend: BackendSpec,
    #[arg(long, default_value = "0.01:0.10:0.01")]
    eta_grid: String,
    /// Comma-separated tags; defaults to the 20 most frequent.
    #[arg(long, value_delimiter = ',')]
    tags: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output directory; prints the matrix as CSV when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HeatArgs {
    #[arg(long)]
    text: PathBuf,
    #[arg(long)]
    backend: BackendSpec,
    #[arg(long, default_value = "heat.html")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Plain text, one training sequence per non-blank line.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[arg(long)]
    max_context_tokens: Option<usize>,
}

fn eval(args: EvalArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => TaskConfig::from_json_file(path)?,
        None => TaskConfig::default(),
    };
    if args.config.is_none() && (args.task.is_none() || args.data.is_none() || args.backend.is_none()) {
        return Err(Error::Config("eval needs --task, --data and --backend (or --config)".into()));
    }
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = args.$field { cfg.$field = v; })* };
    }
    macro_rules! set_opt {
        ($($field:ident),*) => { $(if args.$field.is_some() { cfg.$field = args.$field; })* };
    }
    set!(task, data, backend, backbone, seed, manner, mode, workers);
    set_opt!(eta, lambda, alpha, placement);
    if let Some(out) = args.out {
        cfg.out_dir = Some(out);
    }
    let out_dir = cfg
        .out_dir
        .clone()
        .ok_or_else(|| Error::Config("out_dir: pass --out DIR".into()))?;

    let report = run_task(&cfg)?;
    emit_report(&report, &out_dir, &cfg.formats)?;
    for (name, value) in &report.metrics.values {
        println!("{name}\t{value:.4}");
    }
    println!("records\t{}", report.stats.processed);
    println!("skipped\t{}", report.stats.skipped);
    println!("content_hash\t{}", report.content_hash);
    Ok(())
}

fn recall(args: RecallArgs) -> Result<()> {
    let cfg = TaskConfig {
        task: TaskKind::RecallAnalysis,
        data: args.data,
        backend: args.backend,
        eta_grid: parse_eta_grid(&args.eta_grid)?,
        tags: args.tags,
        workers: args.workers,
        out_dir: args.out.clone(),
        ..TaskConfig::default()
    };
    let report = run_task(&cfg)?;
    match &args.out {
        Some(dir) => {
            emit_report(&report, dir, &cfg.formats)?;
        }
        None => {
            if let Some(m) = &report.recall {
                m.write_csv(std::io::stdout().lock())?;
            }
        }
    }
    Ok(())
}

fn heat(args: HeatArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.text).map_err(|e| Error::Config(format!("{}: {e}", args.text.display())))?;
    let backend = args.backend.open(None)?;
    let scored = token_probabilities(text.trim_end(), &*backend)?;
    emit_token_heat(&scored, &args.out)?;
    println!("{}", args.out.display());
    Ok(())
}

fn train_toy(args: TrainArgs) -> Result<()> {
    let text =
        std::fs::read_to_string(&args.corpus).map_err(|e| Error::Config(format!("{}: {e}", args.corpus.display())))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let model = ToyNgramModel::train(&lines, args.order, args.delta)?;
    model.save(&args.out)?;
    println!("{}: order {} vocab {}", args.out.display(), model.order(), model.vocab().len());
    Ok(())
}

fn serve_model(args: ServeArgs) -> Result<()> {
    let model: std::sync::Arc<dyn LanguageModel> = std::sync::Arc::new(ToyNgramModel::load(&args.model)?);
    let handle = serve(model, &args.addr, args.workers, args.max_context_tokens)?;
    println!("listening on {}", handle.url());
    handle.join();
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match Cli::parse().command {
        Command::Eval(a) => eval(a),
        Command::Recall(a) => recall(a),
        Command::Heat(a) => heat(a),
        Command::TrainToy(a) => train_toy(a),
        Command::Serve(a) => serve_model(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
