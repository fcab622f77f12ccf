use clap::{Parser, Subcommand};
use log::{error, warn};
use std::path::PathBuf;
use std::process::ExitCode;
use wavecouple::parallel::{init_threads, Execution};
use wavecouple_cli::config::{parse_config, ConfigError};
use wavecouple_cli::{commands, selftest};

#[derive(Parser)]
#[command(name = "wavecouple", version, about = "Transient acoustic scattering by FEM-BEM coupling with convolution quadrature")]
struct Cli {
    /// Worker threads for frequency solves and assembly (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; overrides `output` in the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the CQ and quadrature oracle checks.
    Selftest {
        /// Perturb the named check (test hook).
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Manufactured-solution convergence study.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Scattering run with traces and snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
}

const USAGE: u8 = 2;
const FAILURE: u8 = 1;

fn code_for(e: &anyhow::Error) -> ExitCode {
    error!("{e:#}");
    if e.downcast_ref::<ConfigError>().is_some() {
        ExitCode::from(USAGE)
    } else {
        ExitCode::from(FAILURE)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let exec = match cli.threads {
        Some(0) => {
            error!("--threads must be positive");
            return ExitCode::from(USAGE);
        }
        Some(1) => Execution::Sequential,
        _ => Execution::Parallel,
    };
    if let Some(n) = cli.threads {
        if let Err(e) = init_threads(n) {
            error!("cannot set up {n} threads: {e}");
            return ExitCode::from(FAILURE);
        }
    }
    match cli.command {
        Command::Selftest { inject_fault } => {
            if let Some(name) = &inject_fault {
                if !selftest::check_names().contains(&name.as_str()) {
                    error!("unknown check {name:?}; known: {}", selftest::check_names().join(", "));
                    return ExitCode::from(USAGE);
                }
            }
            let report = selftest::run(inject_fault.as_deref());
            print!("{}", report.table());
            if let Some(out) = &cli.out {
                if let Err(e) = std::fs::create_dir_all(out).and_then(|_| std::fs::write(out.join("selftest.txt"), report.table())) {
                    error!("cannot write to {}: {e}", out.display());
                    return ExitCode::from(FAILURE);
                }
            }
            match report.first_failure() {
                None => ExitCode::SUCCESS,
                Some(f) => {
                    error!("first failing check: {}", f.name);
                    ExitCode::from(FAILURE)
                }
            }
        }
        Command::Converge { config } | Command::Simulate { config } if !config.exists() => {
            error!("configuration {} does not exist", config.display());
            ExitCode::from(USAGE)
        }
        Command::Converge { config } => {
            let (cfg, warnings) = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => return code_for(&e.into()),
            };
            warnings.iter().for_each(|w| warn!("{w}"));
            let out = cli.out.clone().unwrap_or_else(|| cfg.output.clone());
            match commands::converge(&cfg, &out, exec) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => {
                    error!("last-level rates outside their targets");
                    ExitCode::from(FAILURE)
                }
                Err(e) => code_for(&e),
            }
        }
        Command::Simulate { config } => {
            let (cfg, warnings) = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => return code_for(&e.into()),
            };
            warnings.iter().for_each(|w| warn!("{w}"));
            let out = cli.out.clone().unwrap_or_else(|| cfg.output.clone());
            match commands::simulate(&cfg, &out, exec) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => code_for(&e),
            }
        }
    }
}
