use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use resalloc::experiment::{run_experiment, ExperimentConfig, Mode, RunOptions};
use resalloc::Error;

#[derive(Parser)]
#[command(name = "resalloc", version, about = "Seeded CUCB budget-allocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for replications.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare the DP oracle with enumeration and measure the greedy ratio.
    OracleCheck {
        /// Optional config; only `seed` and `[oracle_check]` are read.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Evaluate reward gaps and regret bounds for a discrete instance.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
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
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<bool, Error> {
    let (config, opts) = match command {
        Command::Run {
            config,
            out,
            seed,
            jobs,
        } => (
            ExperimentConfig::load(&config)?,
            RunOptions {
                out_dir: out,
                seed,
                jobs,
            },
        ),
        Command::OracleCheck {
            config,
            out,
            seed,
            instances,
            jobs,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::from_toml("mode = \"oracle-check\"\nseed = 0\n")?,
            };
            cfg.mode = Mode::OracleCheck;
            if let Some(n) = instances {
                cfg.oracle_check.instances = n;
            }
            (
                cfg,
                RunOptions {
                    out_dir: out,
                    seed,
                    jobs,
                },
            )
        }
        Command::Bounds { config, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.mode = Mode::Bounds;
            (
                cfg,
                RunOptions {
                    out_dir: out,
                    ..RunOptions::default()
                },
            )
        }
    };
    let outcome = run_experiment(&config, &opts)?;
    println!("{}", outcome.summary);
    Ok(outcome.ok)
}
