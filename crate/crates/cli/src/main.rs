use clap::{Parser, Subcommand};
use drugshap_cli::commands::{self, TuneOptions};
use drugshap_cli::server::{serve, AppState};
use drugshap_cli::{CliError, Context};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

/// Drug-response modeling pipeline: ingest, train, tune, evaluate, explain,
/// report and serve.
#[derive(Debug, Parser)]
#[command(name = "drugshap", version)]
struct Cli {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input CSV (overrides the configured data path).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Artifact directory (overrides the configured one).
    #[arg(long, global = true)]
    artifacts: Option<PathBuf>,
    /// Model file (overrides the configured one).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter, clean and encode the dataset; write the encoded files and schema.
    Ingest,
    /// Fit the booster and both baselines; write the model and test metrics.
    Train {
        /// Hyperparameters written by `tune`.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Randomized hyperparameter search with k-fold CV on the training split.
    Tune {
        #[arg(long)]
        n_iter: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// k-fold cross-validation over all rows.
    Evaluate {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Test metrics as a function of the number of boosting rounds.
    Curve {
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// SHAP explanations for the test split plus global importance.
    Explain {
        /// Explain only the first N test rows.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Clinical report for one test-split row.
    Report {
        #[arg(long)]
        row: usize,
        /// Request an LLM summary (needs the configured API key variable).
        #[arg(long)]
        summarize: bool,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Write a seeded synthetic screen in GDSC CSV layout.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// A few hundred rows instead of the full-size screen.
        #[arg(long)]
        mini: bool,
    },
}

fn context(cli: &Cli) -> Result<Context, CliError> {
    let mut ctx = Context::load(cli.config.as_deref(), |k| std::env::var(k).ok())?;
    let c = &mut ctx.config;
    if let Some(d) = &cli.data {
        c.data_path = d.clone();
    }
    if let Some(a) = &cli.artifacts {
        c.artifacts_dir = a.clone();
        if cli.model.is_none() {
            c.model_path = a.join("model.json");
        }
    }
    if let Some(m) = &cli.model {
        c.model_path = m.clone();
    }
    Context::new(ctx.config)
}

fn run(cli: Cli) -> Result<Option<serde_json::Value>, CliError> {
    if let Command::Synth { out, seed, mini } = &cli.command {
        return commands::synth(out, *seed, *mini).map(Some);
    }
    let ctx = context(&cli)?;
    let out = match &cli.command {
        Command::Ingest => commands::ingest(&ctx)?,
        Command::Train { params } => commands::train(&ctx, params.as_deref())?,
        Command::Tune { n_iter, k, seed } => commands::tune(&ctx, &TuneOptions { n_iter: *n_iter, k: *k, seed: *seed })?,
        Command::Evaluate { k, params } => commands::evaluate(&ctx, *k, params.as_deref())?,
        Command::Curve { params } => commands::curve(&ctx, params.as_deref())?,
        Command::Explain { limit } => commands::explain(&ctx, *limit)?,
        Command::Report { row, summarize } => commands::report(&ctx, *row, *summarize)?,
        Command::Serve { bind, port, static_dir } => {
            let mut ctx = ctx;
            let s = &mut ctx.config.server;
            if let Some(b) = bind {
                s.bind = b.clone();
            }
            if let Some(p) = port {
                s.port = *p;
            }
            if let Some(d) = static_dir {
                s.static_dir = Some(d.clone());
            }
            let state = Arc::new(AppState::from_context(&ctx)?);
            let server = ctx.config.server.clone();
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(state, &server.bind, server.port, server.static_dir.as_deref()))?;
            return Ok(None);
        }
        Command::Synth { .. } => unreachable!("handled above"),
    };
    Ok(Some(out))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::new("usage", e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(Some(out)) => {
            // A closed pipe (e.g. `| head`) is not an error worth a panic.
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&out).expect("summary serializes"));
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
