use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rainskit_core::SolveConfig;

mod commands;
mod error;
mod format;

use commands::{Command, Context};
use error::{CliError, CliResult};

pub const TOL_RANGE: (f64, f64) = (1e-12, 1e-4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

/// SDP entanglement measures of states and channels, and the strong-converse
/// bounds built on them.
#[derive(Debug, Parser)]
#[command(name = "rainskit", version)]
struct Cli {
    /// Solver tolerance, in [1e-12, 1e-4].
    #[arg(long, global = true, env = "RAINSKIT_TOL", default_value_t = 1e-8)]
    tol: f64,
    /// Seed of every random construction.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn render(report: &commands::Report, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report.json).expect("JSON values serialize");
            s.push('\n');
            s.into_bytes()
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            report.table.write_csv(&mut buf).expect("writing to memory");
            buf
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let (lo, hi) = TOL_RANGE;
    if !(lo..=hi).contains(&cli.tol) {
        return Err(CliError::Input(format!("tolerance {} outside [{lo:e}, {hi:e}]", cli.tol)));
    }
    let ctx = Context { cfg: SolveConfig { tol: cli.tol, ..SolveConfig::default() }, seed: cli.seed };
    log::debug!("tol {:e}, seed {}", cli.tol, cli.seed);
    let report = commands::run(&cli.command, &ctx)?;
    let bytes = render(&report, cli.format);
    match &cli.out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)
                .and_then(|()| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    match report.violation {
        Some(msg) => Err(CliError::Violation(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rainskit: {e}");
            e.exit_code()
        }
    }
}
