use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use featloc::pipeline::{load_stats, run_pipeline, Pipeline, PipelineConfig, Stage};
use featloc::query::{render_result, QueryIndex};
use featloc::service;

/// Feature location from execution traces and topic models.
#[derive(Parser)]
#[command(name = "featloc", version)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable. Wins over the file.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Corpus manifest or directory of `*.trace` files.
    #[arg(long, global = true)]
    traces: Option<PathBuf>,
    #[arg(long, global = true)]
    facts: Option<PathBuf>,
    /// Run directory.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(short = 'k', long, global = true)]
    topics: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse traces into corpus.json and stats.tsv.
    Ingest,
    /// Score and filter methods.
    Score,
    /// Build the trace-identifier matrix.
    Matrix,
    /// Fit the topic model.
    Lda,
    /// Topic categories, class-topic weights, heat map and clusters.
    Analyze,
    /// Build the query index.
    Index,
    /// All stages in order.
    Run,
    /// Query a finished run.
    Query {
        #[arg(required = true)]
        text: Vec<String>,
        /// Rows per list.
        #[arg(short, long, default_value_t = 5)]
        limit: usize,
        #[arg(long)]
        json: bool,
    },
    /// Serve a finished run over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Static files for the explorer UI.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
    /// Per use case trace statistics.
    Stats,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_QUERY: u8 = 20;
const EXIT_EMPTY_QUERY: u8 = 21;
const EXIT_SERVE: u8 = 30;
const EXIT_STATS: u8 = 40;

fn stage_exit(stage: Stage) -> u8 {
    10 + Stage::ALL.iter().position(|s| *s == stage).unwrap_or(0) as u8
}

fn load_config(args: &ConfigArgs) -> featloc::Result<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let mut pairs = Vec::new();
    for (key, value) in [
        ("traces", args.traces.as_ref().map(|p| p.display().to_string())),
        ("facts", args.facts.as_ref().map(|p| p.display().to_string())),
        ("out_dir", args.out.as_ref().map(|p| p.display().to_string())),
        ("topics", args.topics.map(|k| k.to_string())),
        ("seed", args.seed.map(|s| s.to_string())),
    ] {
        if let Some(v) = value {
            pairs.push((key.to_string(), v));
        }
    }
    for raw in &args.set {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| featloc::Error::Parameter(format!("--set expects KEY=VALUE, got `{raw}`")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    cfg.apply(&pairs, Path::new(""))?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match load_config(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let single = |stage: Stage| -> ExitCode {
        let mut pipeline = match Pipeline::new(cfg.clone()) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("config: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        };
        match pipeline.run_stage(stage) {
            Ok(()) => {
                println!("{stage}: wrote {}", cfg.out_dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(stage_exit(e.stage))
            }
        }
    };

    match cli.command {
        Command::Ingest => single(Stage::Ingest),
        Command::Score => single(Stage::Score),
        Command::Matrix => single(Stage::Matrix),
        Command::Lda => single(Stage::Lda),
        Command::Analyze => single(Stage::Analyze),
        Command::Index => single(Stage::Index),
        Command::Run => match run_pipeline(&cfg) {
            Ok(manifest) => {
                for record in &manifest.stages {
                    println!("{:<8} {} artifacts", record.stage, record.outputs.len());
                }
                println!("run directory: {}", cfg.out_dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                let done: Vec<&str> = e.partial.stages.iter().map(|r| r.stage.name()).collect();
                eprintln!("completed stages: {}", done.join(", "));
                ExitCode::from(stage_exit(e.stage))
            }
        },
        Command::Query { text, limit, json } => {
            let index = match QueryIndex::load(&cfg.out_dir.join("index.json")) {
                Ok(i) => i,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_QUERY);
                }
            };
            match index.query(&text.join(" "), Some(limit)) {
                Ok(result) if json => {
                    println!("{}", serde_json::to_string_pretty(&result).unwrap_or_default());
                    ExitCode::SUCCESS
                }
                Ok(result) => {
                    print!("{}", render_result(&result));
                    ExitCode::SUCCESS
                }
                Err(e @ featloc::Error::EmptyQuery) => {
                    eprintln!("{e}");
                    ExitCode::from(EXIT_EMPTY_QUERY)
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(EXIT_QUERY)
                }
            }
        }
        Command::Serve { addr, ui } => {
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_SERVE);
                }
            };
            match runtime.block_on(service::serve(&cfg.out_dir, addr, ui)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("refusing to serve {}: {e}", cfg.out_dir.display());
                    ExitCode::from(EXIT_SERVE)
                }
            }
        }
        Command::Stats => match load_stats(&cfg.out_dir) {
            Ok(stats) => {
                print!("{}", stats.to_tsv());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(EXIT_STATS)
            }
        },
    }
}
