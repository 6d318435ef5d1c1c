use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use nagumo_cli::{exit_code, parse_config, run, Command, RawConfig};

/// Travelling waves, dispersion derivatives and travelling corners of the
/// Nagumo lattice equation.
#[derive(Debug, Parser)]
#[command(name = "nagumo", version)]
struct Cli {
    /// Experiment to run; overrides the `command` key of the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Half-width of the computational interval.
    #[arg(long = "L")]
    l: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    h: Option<f64>,
}

impl Cli {
    fn raw_config(&self) -> anyhow::Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_path(path)?,
            None => RawConfig::default(),
        };
        raw.command = self.command.or(raw.command);
        raw.jobs = self.jobs.or(raw.jobs);
        raw.out = self.out.clone().or(raw.out);
        raw.rho = self.rho.or(raw.rho);
        raw.zeta = self.zeta.or(raw.zeta);
        raw.alpha = self.alpha.or(raw.alpha);
        raw.gamma = self.gamma.or(raw.gamma);
        raw.l = self.l.or(raw.l);
        raw.h = self.h.or(raw.h);
        Ok(raw)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.raw_config().and_then(|raw| Ok(parse_config(&raw)?)).and_then(|cfg| run(&cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
