use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use seawake_cli::commands::Session;
use seawake_cli::config::PipelineConfig;

#[derive(Parser)]
#[command(name = "seawake", version, about = "GPS-conditioned maritime video tooling")]
struct Cli {
    /// Pipeline config (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the noise seed of synthetic scenes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Vessel centre on the reference frame as `id:cx,cy`; repeatable.
    #[arg(long = "vessel", global = true)]
    vessels: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project GPS tracks onto the clip's frames.
    Project,
    /// Write the six-entry conditioning payload.
    Condition {
        /// Also draw the payload on the reference frame.
        #[arg(long)]
        overlay: bool,
    },
    /// Fill the gap between two frames by flow extrapolation.
    Baseline {
        #[arg(long)]
        first: Option<PathBuf>,
        #[arg(long)]
        last: Option<PathBuf>,
        /// Number of missing frames.
        #[arg(short, long, default_value_t = 14)]
        n: usize,
    },
    /// Score a generated frame sequence.
    Evaluate {
        /// Directory of generated `frame_NNNN.png` files.
        #[arg(long)]
        generated: PathBuf,
        #[arg(long, default_value = "generated")]
        method: String,
        /// Ground-truth frames for PSNR.
        #[arg(long)]
        reference_frames: Option<PathBuf>,
    },
    /// Render a scripted synthetic scene with matching GPS.
    Synth {
        /// Motion script (JSON).
        #[arg(long)]
        script: PathBuf,
    },
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SEAWAKE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .with_context(|| format!("config: SEAWAKE_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("config: cannot size the thread pool")
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    config.apply_vessel_flags(&cli.vessels)?;
    let session = Session {
        config,
        out_dir: cli.out,
        seed: cli.seed,
    };
    match cli.command {
        Command::Project => session.project().map(drop),
        Command::Condition { overlay } => session.condition(overlay).map(drop),
        Command::Baseline { first, last, n } => session.baseline(first, last, n).map(drop),
        Command::Evaluate {
            generated,
            method,
            reference_frames,
        } => session.evaluate(&generated, &method, reference_frames.as_deref()).map(drop),
        Command::Synth { script } => session.synth(&script),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
