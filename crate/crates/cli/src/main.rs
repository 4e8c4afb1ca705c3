//! `ppsf`: figure and table pipelines for the PPSF photon-pair source model.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use config::{Command, ExperimentConfig};
use ppsf_core::Error;

#[derive(Parser, Debug)]
#[command(name = "ppsf", version, about = "Photon-pair source model pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for every random draw; overrides `seed` in the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Fit the birefringence to the type-II SHG peak and write a calibrated fiber.
    Calibrate,
    /// Down-converted spectrum, its bandwidth and the Taylor approximation.
    Spectrum,
    /// Weighted type-0/I/II SHG curves.
    Shg,
    /// Signal/idler wavelengths versus pump wavelength.
    Tuning,
    /// Simulated HOM scan, dip fit and transform-limited bandwidth.
    Hom,
    /// Simulated (or loaded) tomography counts, reconstruction and metrics.
    Tomo,
}

impl Cmd {
    fn command(self) -> Command {
        match self {
            Cmd::Calibrate => Command::Calibrate,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Shg => Command::Shg,
            Cmd::Tuning => Command::Tuning,
            Cmd::Hom => Command::Hom,
            Cmd::Tomo => Command::Tomo,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Cmd::Calibrate => "calibrate",
            Cmd::Spectrum => "spectrum",
            Cmd::Shg => "shg",
            Cmd::Tuning => "tuning",
            Cmd::Hom => "hom",
            Cmd::Tomo => "tomo",
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("--config PATH is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    cfg.validate_for(cli.command.command())?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    }
    let seed = cli.seed.unwrap_or(cfg.seed);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let started = SystemTime::now();
    let artifacts = match cli.command {
        Cmd::Calibrate => commands::calibrate(&cfg),
        Cmd::Spectrum => commands::spectrum(&cfg),
        Cmd::Shg => commands::shg(&cfg),
        Cmd::Tuning => commands::tuning(&cfg),
        Cmd::Hom => commands::hom(&cfg, seed),
        Cmd::Tomo => commands::tomo(&cfg, seed),
    }?;
    let written = artifacts.write_to(&out)?;
    for line in &artifacts.summary {
        println!("{line}");
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    write_log(&out, cli, path, seed, started, &written)?;
    Ok(())
}

/// Appends a record of the run to `run.log`; the only file with timestamps.
fn write_log(
    out: &Path,
    cli: &Cli,
    config: &Path,
    seed: u64,
    started: SystemTime,
    written: &[PathBuf],
) -> std::io::Result<()> {
    let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(out.join("run.log"))?;
    writeln!(
        f,
        "started_unix={:.3} finished_unix={:.3} command={} config={} seed={} threads={} version={}",
        secs(started),
        secs(SystemTime::now()),
        cli.command.name(),
        config.display(),
        seed,
        cli.threads.map_or("auto".to_string(), |n| n.to_string()),
        env!("CARGO_PKG_VERSION"),
    )?;
    for p in written {
        writeln!(f, "  output {}", p.display())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
