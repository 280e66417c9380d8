//! `dbar-nft`: scattering transforms and verification experiments from the command line.
//!
//! Exit status: 0 success, 1 configuration or validation error, 2 solver
//! non-convergence, 3 I/O or file-format error. Failures print one line
//! `error: <category>: <detail>` on stderr.

mod config;
mod error;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::RunConfig;
use error::CliError;
use run::Command;

#[derive(Debug, Parser)]
#[command(
    name = "dbar-nft",
    version,
    about = "Two-dimensional nonlinear Fourier transform and its verification harness"
)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// `key = value` configuration file; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `threads`).
    #[arg(long)]
    threads: Option<usize>,
    /// Run seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Override one configuration key; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the effective configuration and exit without running.
    #[arg(long)]
    print_config: bool,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::parse(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    config.apply_overrides(&args.set)?;
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(threads) = args.threads {
        config.threads = Some(threads);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn execute(args: &Args) -> Result<(), CliError> {
    let config = load(args)?;
    if args.print_config {
        print!("{}", config.serialize());
        return Ok(());
    }
    if let Some(threads) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot start {threads} worker threads: {e}")))?;
    }
    for path in run::run(args.command, &config)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return ExitCode::from(1);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let detail = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {detail}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
