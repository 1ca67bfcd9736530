use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

mod commands;
mod config;
mod error;
mod report;

use commands::Command;
use config::RunConfig;
use error::CliError;

/// Verification suites for the sharp HLS and Sobolev inequalities.
#[derive(Debug, Parser)]
#[command(name = "sharp-hls", version)]
struct Cli {
    command: Command,
    /// Flat key=value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long = "r-max")]
    r_max: Option<String>,
    /// Spectral truncation.
    #[arg(long = "K")]
    k: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Comma-separated list.
    #[arg(long)]
    eps: Option<String>,
    /// Run the weighted-norm theorem at this fraction of the largest admissible eta.
    #[arg(long = "eta-fraction")]
    eta_fraction: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    /// Comma-separated list.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Directory for `<command>.csv` and `<command>_summary.txt`; without it
    /// the CSV goes to stdout and the summary to stderr.
    #[arg(long)]
    out: Option<String>,
}

impl Cli {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = [
            ("n", &self.n),
            ("nodes", &self.nodes),
            ("r_max", &self.r_max),
            ("K", &self.k),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("eps", &self.eps),
            ("eta_fraction", &self.eta_fraction),
            ("dt", &self.dt),
            ("horizon", &self.horizon),
            ("beta", &self.beta),
            ("samples", &self.samples),
            ("out", &self.out),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let cfg = cli.config()?;
    let start = Instant::now();
    let report = commands::run(cli.command, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let name = cli.command.name();
    match &cfg.out {
        Some(dir) => report.write_files(dir, name, &cfg.render(), elapsed)?,
        None => {
            report.write_csv(std::io::stdout().lock())?;
            eprint!("{}", report.summary_text(name, &cfg.render(), elapsed));
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
