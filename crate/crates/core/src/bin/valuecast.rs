//! Command-line front end. Every subcommand reads the same TOML config;
//! flags override its keys.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use valuecast::config::{ModelKind, Overrides, RunConfig};
use valuecast::pipeline::{self, CommandOutput};
use valuecast::{PositionCode, Result};

#[derive(Parser)]
#[command(name = "valuecast", version, about = "Market-value forecasting from match statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run config (TOML), or the corpus spec for `synth`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    position: Option<PositionCode>,
    #[arg(long, global = true)]
    model: Option<ModelKind>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    no_league_feature: bool,
    /// Reference ranking (`rank,player_id`) for `rank`.
    #[arg(long, global = true)]
    reference: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Load and join the datasets, report counts.
    Ingest,
    /// Write the per-position feature tables.
    Features,
    /// Fit models and write them as JSON.
    Train,
    /// Cross-validate, with and without the league-average feature.
    Evaluate,
    /// Lasso coefficients, forest importances and the age curve.
    Importance,
    /// Rank young players by predicted value.
    Rank,
    /// Generate a synthetic corpus from a spec file.
    Synth,
}

fn run(cli: &Cli) -> Result<CommandOutput> {
    let config = cli
        .config
        .as_deref()
        .ok_or_else(|| valuecast::Error::InvalidConfig("--config is required".into()))?;
    if let Command::Synth = cli.command {
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("synth"));
        return pipeline::cmd_synth(config, &out, cli.seed);
    }
    let mut cfg = RunConfig::load(config)?;
    cfg.apply(&Overrides {
        position: cli.position,
        model: cli.model,
        seed: cli.seed,
        out: cli.out.clone(),
        no_league_feature: cli.no_league_feature,
        reference: cli.reference.clone(),
    })?;
    match cli.command {
        Command::Ingest => pipeline::cmd_ingest(&cfg),
        Command::Features => pipeline::cmd_features(&cfg),
        Command::Train => pipeline::cmd_train(&cfg),
        Command::Evaluate => pipeline::cmd_evaluate(&cfg),
        Command::Importance => pipeline::cmd_importance(&cfg),
        Command::Rank => pipeline::cmd_rank(&cfg),
        Command::Synth => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.summary);
            if !out.summary.is_empty() && !out.summary.ends_with('\n') {
                println!();
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::FAILURE
        }
    }
}
