use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ccsim::harness::{
    cmd_fuzz, cmd_oracle, cmd_run, cmd_sweep, Check, FuzzOptions, HarnessError, RunOptions,
};

#[derive(Parser)]
#[command(name = "ccsim", version, about = "Common-case optimized Byzantine consensus simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFormat {
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario, write its trace and print the verdicts.
    Run {
        file: PathBuf,
        /// Let faulty processes see the correct processes' current-round messages.
        #[arg(long)]
        rushing: bool,
        /// Comma-separated checks: consensus, scr, budget.
        #[arg(long)]
        checks: Option<String>,
        /// Trace output path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Measure layer bits and decision rounds over a grid of cells.
    Sweep {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: SweepFormat,
        /// Also write the comma-separated table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run seeded random adversaries against a scenario template.
    Fuzz {
        file: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: u64,
        /// Directory for counterexample scenario files.
        #[arg(long, default_value = "counterexamples")]
        out: PathBuf,
    },
    /// Enumerate a small family exhaustively and check every run.
    Oracle { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<bool, HarnessError> {
    match command {
        Command::Run {
            file,
            rushing,
            checks,
            trace,
        } => {
            let checks = checks
                .map(|c| Check::parse_list(&c))
                .transpose()
                .map_err(|message| HarnessError::Config {
                    path: file.clone(),
                    field: "--checks".to_string(),
                    message,
                })?;
            let report = cmd_run(
                &file,
                &RunOptions {
                    rushing,
                    checks,
                    trace_out: trace,
                },
            )?;
            print!("{}", report.render());
            Ok(report.success())
        }
        Command::Sweep { file, format, csv } => {
            let report = cmd_sweep(&file)?;
            match format {
                SweepFormat::Table => print!("{}", report.to_table()),
                SweepFormat::Csv => print!("{}", report.to_csv()),
            }
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv())
                    .map_err(|source| HarnessError::Io { path, source })?;
            }
            Ok(report.success())
        }
        Command::Fuzz {
            file,
            seed,
            count,
            out,
        } => {
            let report = cmd_fuzz(
                &file,
                &FuzzOptions {
                    seed,
                    count,
                    out_dir: Some(out),
                },
            )?;
            print!("{}", report.render());
            Ok(report.success())
        }
        Command::Oracle { file } => {
            let report = cmd_oracle(&file)?;
            print!("{}", report.render());
            Ok(report.success())
        }
    }
}
