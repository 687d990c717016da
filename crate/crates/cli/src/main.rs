//! `sfr`: runs sound field reproduction experiments from JSON configs.
//!
//! Exit status: 0 on success, 1 for usage and configuration errors, 2 for
//! failures while running.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use sfr_core::harness::{preset_paper_experiment, run, threads_from_env, ExperimentConfig, RunMode};
use sfr_core::Error;

#[derive(Parser)]
#[command(name = "sfr", version, about = "Sound field reproduction with kernel-weighted pressure matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config: SDR sweep, drive signals and field maps.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the built-in 2D comparison config to <out>/config.json and run it.
    PresetPaper {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write only the SDR sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write drive signals and field/error maps at one frequency.
    Field {
        #[arg(long)]
        config: PathBuf,
        /// Frequency in Hz.
        #[arg(long)]
        freq: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn out_dir(out: Option<PathBuf>, config: &ExperimentConfig) -> Result<PathBuf, Error> {
    out.or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::config("out", "no --out given and the config has no output_dir"))
}

fn execute(config: &ExperimentConfig, out: &Path, mode: RunMode) -> Result<(), Error> {
    let threads = threads_from_env()?;
    let manifest = run(config, out, threads, mode)?;
    println!("wrote {} files to {}", manifest.files.len() + 1, out.display());
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            execute(&cfg, &out_dir(out, &cfg)?, RunMode::Full)
        }
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            execute(&cfg, &out_dir(out, &cfg)?, RunMode::SweepOnly)
        }
        Command::Field { config, freq, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            execute(&cfg, &out_dir(out, &cfg)?, RunMode::Field(freq))
        }
        Command::PresetPaper { out } => {
            let cfg = preset_paper_experiment();
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let path = out.join("config.json");
            std::fs::write(&path, cfg.to_json_pretty() + "\n").map_err(|e| Error::io(&path, e))?;
            execute(&cfg, &out, RunMode::Full)
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let exp = cfg.build()?;
            println!(
                "ok: {} loudspeakers, {} control points, {} methods, {} frequencies",
                exp.scene.loudspeakers().len(),
                exp.scene.control_points().len(),
                exp.methods.len(),
                cfg.frequency_list()?.len()
            );
            Ok(())
        }
    }
}
