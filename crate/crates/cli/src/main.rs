//! `maxlab`: batch runner for the reflected half-space Maxwell harness.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info, warn};

use config::Config;
use error::CliError;
use output::OutputDir;

#[derive(Parser)]
#[command(name = "maxlab", version, about = "Spectral experiments for Maxwell systems on the half space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Key = value configuration file with [section] headers.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: runs/<subcommand>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides data.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Write into a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
    /// Overrides data.preset.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Linear 2D run with energy, charge and parity checks.
    Linear2d,
    /// Linear 3D run with energy, charge and parity checks.
    Linear3d,
    /// Kerr 2D run with charge, round-trip and Gronwall audit.
    Kerr2d,
    /// Factorization residuals of the principal symbol.
    CheckSymbols,
    /// Helmholtz identity and half-space equivalence constants.
    CheckHelmholtz,
    /// Frequency envelope axioms.
    CheckEnvelopes,
    /// Boundary compatibility residuals of the initial data.
    CheckCompat,
    /// Measured Strichartz ratios over seeds, refinements and scales.
    StrichartzSweep,
    /// 2D run against its lift to a 3D cylinder.
    CylConsistency,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Linear2d => "linear2d",
            Command::Linear3d => "linear3d",
            Command::Kerr2d => "kerr2d",
            Command::CheckSymbols => "check-symbols",
            Command::CheckHelmholtz => "check-helmholtz",
            Command::CheckEnvelopes => "check-envelopes",
            Command::CheckCompat => "check-compat",
            Command::StrichartzSweep => "strichartz-sweep",
            Command::CylConsistency => "cyl-consistency",
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.set("data.seed", &s.to_string())?;
    }
    if let Some(p) = &cli.preset {
        cfg.set("data.preset", p)?;
    }
    if cli.workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if cli.print_config {
        print!("{cfg}");
        return Ok(());
    }
    let name = cli.command.name();
    if !cfg.is_explicit("data.seed") {
        info!("no seed given, using data.seed = {}", cfg.get("data.seed"));
    }
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(name));
    let mut out = OutputDir::create(&dir, cli.force)?;
    let outcome = match cli.command {
        Command::Linear2d => commands::linear(&cfg, 2, &mut out),
        Command::Linear3d => commands::linear(&cfg, 3, &mut out),
        Command::Kerr2d => commands::kerr2d(&cfg, &mut out),
        Command::CheckSymbols => commands::check_symbols(&cfg, &mut out),
        Command::CheckHelmholtz => commands::check_helmholtz(&cfg, &mut out),
        Command::CheckEnvelopes => commands::check_envelopes(&cfg, &mut out),
        Command::CheckCompat => commands::check_compat(&cfg, &mut out),
        Command::StrichartzSweep => commands::strichartz(&cfg, cli.workers, &mut out),
        Command::CylConsistency => commands::cylinder(&cfg, &mut out),
    }?;
    let passed = outcome.violations.is_empty();
    out.finish(name, &cfg, passed, outcome.summary)?;
    println!("{name}: {} ({})", if passed { "pass" } else { "FAIL" }, dir.display());
    if passed {
        Ok(())
    } else {
        for v in &outcome.violations {
            warn!("{v}");
        }
        Err(CliError::Invariant(outcome.violations.join("; ")))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MAXLAB_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("maxlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
