use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edia_cli::commands::{self, ScoreArgs};
use edia_cli::config::Config;
use edia_cli::{run_audit, CliError};
use edia_core::trainer::SingularWeighting;
use edia_core::{CentroidMode, ConcordanceQuery, NgramConfig, SpaceConfig, SpaceMethod, TrainerConfig, WordList};
use edia_server::ServerConfig;

#[derive(Parser)]
#[command(name = "edia", version, about = "Audit word embeddings and language models for social bias")]
struct Cli {
    /// TOML file with defaults for data_dir, port and seed.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where the service keeps uploaded and trained artifacts.
    #[arg(long, global = true, env = "EDIA_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an audit manifest and write a report bundle.
    Audit {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the manifest's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a PPMI-SVD embedding; also writes <out>.manifest.json.
    TrainEmbedding(TrainEmbeddingArgs),
    /// Train an add-k n-gram language model.
    TrainLm {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.1)]
        k: f64,
        #[arg(long, default_value_t = 1)]
        min_count: u64,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = "EDIA_PORT")]
        port: Option<u16>,
    },
    /// Score words against one bias space; prints CSV.
    Score {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
        /// Comma-separated seed words of the positive extreme.
        #[arg(long = "a", value_delimiter = ',', required = true)]
        extreme_a: Vec<String>,
        #[arg(long = "b", value_delimiter = ',', required = true)]
        extreme_b: Vec<String>,
        #[arg(long, default_value = "a")]
        a_name: String,
        #[arg(long, default_value = "b")]
        b_name: String,
        #[arg(long, value_delimiter = ',', required = true)]
        words: Vec<String>,
        #[arg(long, value_enum, default_value_t = Method::CentroidDiff)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Centroid::Unit)]
        centroid: Centroid,
    },
    /// Print a seeded concordance sample as JSON lines.
    Concordance {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        token: String,
        #[arg(long, default_value_t = edia_core::corpus::DEFAULT_CONCORDANCE_LINES)]
        max_lines: usize,
        #[arg(long, value_delimiter = ',')]
        collections: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct TrainEmbeddingArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    id: Option<String>,
    /// JSON trainer config; flags below override its fields.
    #[arg(long)]
    trainer_config: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    context_smoothing: Option<f64>,
    #[arg(long, value_enum)]
    weighting: Option<Weighting>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    CentroidDiff,
    PcaPairs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Centroid {
    Unit,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weighting {
    None,
    Sqrt,
    Full,
}

fn trainer_config(a: &TrainEmbeddingArgs, seed: Option<u64>) -> Result<TrainerConfig, CliError> {
    let mut cfg = match &a.trainer_config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => TrainerConfig::default(),
    };
    if let Some(v) = a.window {
        cfg.window = v;
    }
    if let Some(v) = a.min_count {
        cfg.min_count = v;
    }
    if let Some(v) = a.dim {
        cfg.dim = v;
    }
    if let Some(v) = a.context_smoothing {
        cfg.context_smoothing = v;
    }
    if let Some(w) = a.weighting {
        cfg.weighting = match w {
            Weighting::None => SingularWeighting::None,
            Weighting::Sqrt => SingularWeighting::Sqrt,
            Weighting::Full => SingularWeighting::Full,
        };
    }
    if let Some(s) = a.seed.or(seed) {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Audit { manifest, out, seed } => {
            let outcome = run_audit(&manifest, &out, seed.or(config.seed))?;
            println!(
                "wrote {} files to {} (seed {})",
                outcome.files.len(),
                outcome.out_dir.display(),
                outcome.seed
            );
        }
        Command::TrainEmbedding(a) => {
            let cfg = trainer_config(&a, config.seed)?;
            let m = commands::train_embedding(&a.corpus, &a.out, a.id.clone(), &cfg)?;
            println!("{}", serde_json::to_string_pretty(&m).expect("serializable"));
        }
        Command::TrainLm {
            corpus,
            out,
            id,
            order,
            k,
            min_count,
        } => {
            let sha = commands::train_lm(&corpus, &out, id, NgramConfig { order, k, min_count })?;
            println!("wrote {} ({sha})", out.display());
        }
        Command::Serve { port } => {
            let defaults = ServerConfig::default();
            let cfg = ServerConfig {
                data_dir: cli.data_dir.or(config.data_dir).unwrap_or(defaults.data_dir),
                port: port.or(config.port).unwrap_or(defaults.port),
                ..defaults
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::io("tokio runtime", e))?;
            rt.block_on(edia_server::serve(cfg.clone()))
                .map_err(|e| CliError::io(&cfg.data_dir, e))?;
        }
        Command::Score {
            embedding,
            limit,
            extreme_a,
            extreme_b,
            a_name,
            b_name,
            words,
            method,
            centroid,
        } => {
            let config = SpaceConfig {
                method: match method {
                    Method::CentroidDiff => SpaceMethod::CentroidDiff,
                    Method::PcaPairs => SpaceMethod::PcaPairs,
                },
                centroid: match centroid {
                    Centroid::Unit => CentroidMode::Unit,
                    Centroid::Raw => CentroidMode::Raw,
                },
            };
            let (csv, missing) = commands::score(ScoreArgs {
                embedding: &embedding,
                limit,
                extreme_a: WordList::new(a_name, extreme_a)?,
                extreme_b: WordList::new(b_name, extreme_b)?,
                config,
                words: &words,
            })?;
            print!("{csv}");
            if !missing.is_empty() {
                eprintln!("not in vocabulary: {}", missing.join(", "));
            }
        }
        Command::Concordance {
            corpus,
            token,
            max_lines,
            collections,
            seed,
        } => {
            let q = ConcordanceQuery {
                max_lines: Some(max_lines),
                collections,
                seed: seed.or(config.seed).unwrap_or(0),
            };
            print!("{}", commands::concordance(&corpus, &token, &q)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edia: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
