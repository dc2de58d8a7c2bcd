use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use topicstab::commands;
use topicstab::config::AppConfig;
use topicstab::stability::Measure;
use topicstab::{Error, Result};

/// Topic-model stability toolkit: synthetic corpora, repeated LDA fits,
/// and similarity-based instability measurement.
#[derive(Debug, Parser)]
#[command(name = "topicstab", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; defaults apply for anything omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Master seed; overrides `master_seed` from the config file.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for the run grid (default: one per core).
    /// Results are identical for any value.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Similarity measures to compute, comma-separated (jss, jis, rbo);
    /// overrides the config file.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    measures: Option<Vec<Measure>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample synthetic corpora and write them with their ground truth.
    Generate,
    /// Run the full synthetic stability experiment (generate + repeated
    /// LDA fits across the K range + similarity + stability table).
    Sweep,
    /// Preprocess a directory of text files into a corpus and sweep it.
    IngestSweep {
        /// Directory scanned recursively; every regular file is one document.
        text_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure {n} workers: {e}")))?;
    }

    let mut config = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    if let Some(measures) = cli.measures {
        config.sweep.measures = measures;
        config.sweep.validate()?;
    }
    let master_seed = config.resolved_seed(cli.seed);

    match cli.command {
        Command::Generate => commands::cmd_generate(&config, &cli.out, master_seed),
        Command::Sweep => commands::cmd_sweep(&config, &cli.out, master_seed),
        Command::IngestSweep { text_dir } => {
            commands::cmd_ingest_sweep(&config, &text_dir, &cli.out, master_seed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
