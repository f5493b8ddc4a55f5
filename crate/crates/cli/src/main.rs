use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sqkd_cli::{run_linkbudget, run_protocol, run_report, run_sweep, CliError, ExperimentConfig, Format, RunSummary};
use sqkd_core::device::Preset;

#[derive(Parser)]
#[command(name = "sqkd", version, about = "Squeezed-state CV-QKD simulator and security analyzer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Security report for every point of the channel grid
    Sweep(Overrides),
    /// Monte Carlo protocol run: codebook, readout, sifting, estimation
    Protocol(Overrides),
    /// Tolerable loss and reach for media and a background sweep
    Linkbudget(Overrides),
    /// Security report and raw key rate at the operating point
    Report(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Device preset (replaces any chain given in the config)
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; repeat for several
    #[arg(long, value_enum)]
    format: Vec<Format>,
    /// Drop the finite-size penalty
    #[arg(long)]
    no_delta: bool,
    /// Drop the parameter-estimation penalty
    #[arg(long)]
    no_pe: bool,
    /// Parameter-estimation failure probability
    #[arg(long)]
    e_ec: Option<f64>,
    /// Reconciliation efficiency
    #[arg(long)]
    beta: Option<f64>,
    /// Fraction of sifted symbols used for the key
    #[arg(long)]
    n_ec_fraction: Option<f64>,
    /// Raw symbols per run
    #[arg(long)]
    symbols: Option<usize>,
    /// Coupled noise photons at the operating point
    #[arg(long)]
    noise: Option<f64>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: sqkd_core::Error| e.to_string())
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = self.preset {
            c.preset = p;
            c.chain = None;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.output_dir = o.clone();
        }
        if !self.format.is_empty() {
            c.formats = self.format.clone();
        }
        if self.no_delta {
            c.security.include_delta = false;
        }
        if self.no_pe {
            c.security.include_pe = false;
        }
        if let Some(v) = self.e_ec {
            c.security.e_ec = v;
        }
        if let Some(v) = self.beta {
            c.security.beta = v;
        }
        if let Some(v) = self.n_ec_fraction {
            c.security.n_ec_fraction = v;
        }
        if let Some(v) = self.symbols {
            c.symbols = v;
        }
        if let Some(v) = self.noise {
            c.operating_noise = v;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<RunSummary, CliError> {
    Ok(match cli.command {
        Command::Sweep(o) => run_sweep(&o.resolve()?)?.1,
        Command::Protocol(o) => run_protocol(&o.resolve()?)?.1,
        Command::Linkbudget(o) => run_linkbudget(&o.resolve()?)?.1,
        Command::Report(o) => run_report(&o.resolve()?)?.1,
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
