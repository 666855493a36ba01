//! `osg`: simulator and lithography planner for the cross-cavity optical
//! Stern-Gerlach setup.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use osg_cli::commands::{self, CliError, OutputOptions};
use osg_cli::config::{self, OutputFormat, RunConfig, RunMode};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
    Both,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Bin => OutputFormat::Bin,
            FormatArg::Both => OutputFormat::Both,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "osg",
    version,
    about = "Cross-cavity optical Stern-Gerlach simulator and lithography planner"
)]
struct Cli {
    /// Worker threads (default: all cores). Output is identical for any
    /// thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory (overrides [output].dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Grid file format (overrides [output].format).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Exclusion radius for peak reports (default: lambda / 2). Stored
    /// grids are never masked.
    #[arg(long, global = true)]
    exclusion_radius: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the atomic momentum distribution for a configured field/atom.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Invert the targeting map into a field plan; optionally simulate and
    /// verify the located peak.
    Target {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        verify: bool,
    },
    /// Run the analytic-vs-oracle equivalence suites.
    OracleCheck {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Plan (and optionally verify) a batch of targets.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        verify: bool,
    },
}

fn load_config(path: &PathBuf, expected: RunMode) -> Result<(RunConfig, PathBuf), CliError> {
    let cfg = config::load(path)?;
    if let Some(mode) = cfg.mode {
        if mode != expected {
            return Err(CliError::config(format!(
                "config declares mode `{}` but the `{}` subcommand was invoked",
                mode.name(),
                expected.name()
            )));
        }
    }
    let base = path
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, base))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot configure {n} threads: {e}")))?;
    }
    let opts = OutputOptions {
        dir: cli.out,
        format: cli.format.map(Into::into),
        exclusion_radius: cli.exclusion_radius,
    };
    match &cli.command {
        Command::Simulate { config } => {
            let (cfg, base) = load_config(config, RunMode::Simulate)?;
            commands::run_simulate(&cfg, &base, &opts)
        }
        Command::Target { config, verify } => {
            let (cfg, base) = load_config(config, RunMode::Target)?;
            commands::run_target(&cfg, &base, &opts, *verify)
        }
        Command::OracleCheck { config } => {
            let cfg = match config {
                Some(path) => Some(load_config(path, RunMode::OracleCheck)?.0),
                None => None,
            };
            commands::run_oracle_check(cfg.as_ref())
        }
        Command::Sweep { config, verify } => {
            let (cfg, base) = load_config(config, RunMode::Sweep)?;
            commands::run_sweep(&cfg, &base, &opts, *verify)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code.clamp(1, 255) as u8)
        }
    }
}
