use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ladder_cli::{
    bound_summary, compare_controllers, load_config, render_sweep, run_experiment, save_csv,
    selftest, CliError,
};
use ladder_core::diagnostics::lemma1_sweep;
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Finite-time feedback control of ladder quantum systems.
#[derive(Parser)]
#[command(name = "ladder", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one config (file or preset name) and print its summary.
    Run {
        config: String,
        /// Trajectory CSV path; overrides `output` in the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the summary to this file.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run the scenario under the fractional, standard and bang-bang laws.
    Compare {
        config: String,
        /// Write `<controller>.csv` for each run into this directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Evaluate both finite-time bounds at the configured initial state.
    Bound { config: String },
    /// Check the power-sum inequality on random unit vectors.
    Lemma1 {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in property sweeps.
    Selftest {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            output,
            summary,
        } => {
            let cfg = load_config(&config)?;
            let outcome = run_experiment(&cfg)?;
            if let Some(path) = output.or_else(|| cfg.output.clone()) {
                save_csv(&path, &outcome.trajectory)?;
            }
            let text = outcome.summary(cfg.probe_time).render();
            if let Some(path) = summary {
                write_file(&path, &text)?;
            }
            print!("{text}");
        }
        Command::Compare { config, output_dir } => {
            let cfg = load_config(&config)?;
            let (table, outcomes) = compare_controllers(&cfg)?;
            if let Some(dir) = output_dir {
                fs::create_dir_all(&dir).map_err(|e| CliError::Io {
                    path: dir.display().to_string(),
                    source: e,
                })?;
                for o in &outcomes {
                    save_csv(&dir.join(format!("{}.csv", o.kind)), &o.trajectory)?;
                }
            }
            print!("{}", table.render());
        }
        Command::Bound { config } => {
            let cfg = load_config(&config)?;
            print!("{}", bound_summary(&cfg)?.render());
        }
        Command::Lemma1 { samples, seed } => {
            let s = lemma1_sweep(&mut StdRng::seed_from_u64(seed), samples, 2..=8);
            println!("{}", render_sweep(&s));
            if !s.passed() {
                return Err(CliError::Check(format!("{} violations", s.failures)));
            }
        }
        Command::Selftest { samples, seed } => {
            let sweeps = selftest(samples, seed);
            for s in &sweeps {
                println!("{}", render_sweep(s));
            }
            let failed = sweeps.iter().filter(|s| !s.passed()).count();
            if failed > 0 {
                return Err(CliError::Check(format!("{failed} sweep(s) failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
