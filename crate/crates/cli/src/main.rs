//! `cylheat`: sweeps of particle heat radiation and heat transfer next to a
//! cylinder, written as CSV or JSON.

mod config;
mod output;
mod sweep;

use anyhow::{bail, Context, Result};
use clap::Parser;
use config::{Command, Format, SweepConfig};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "cylheat", version, about)]
struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    command: Command,

    /// TOML configuration; without it the built-in preset of the command is used.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output file (default: the config's output.path, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,

    /// Relative tolerance of both the Green's tensor and the frequency integral.
    #[arg(long)]
    tol: Option<f64>,

    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
}

fn resolve(cli: &Cli) -> Result<SweepConfig> {
    let mut cfg = match &cli.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::preset(cli.command),
    };
    match cfg.command {
        Some(c) if c != cli.command => {
            bail!("config is for `{}` but `{}` was requested", c.name(), cli.command.name())
        }
        _ => cfg.command = Some(cli.command),
    }
    if let Some(tol) = cli.tol {
        cfg.quad.rel_tol = tol;
        cfg.quad.omega_rel_tol = tol;
    }
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Returns the number of failed points.
fn run(cfg: &SweepConfig) -> Result<usize> {
    let table = sweep::run(cfg)?;
    let mut sink: Box<dyn Write> = match &cfg.output.path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    output::write(&table, cfg, cfg.output.format, &mut sink)?;
    sink.flush()?;
    Ok(table.failures())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if cli.dump_config {
        return match cfg.to_toml() {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        };
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cfg) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} point(s) failed; see the error column");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
