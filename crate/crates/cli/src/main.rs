use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use odycon_cli::{cmd_report, cmd_run, cmd_validate, report, read_records, CliError, ReportOptions, RunOptions};
use odycon_core::engine::ModeChoice;

#[derive(Parser)]
#[command(name = "odycon", version, about = "Monte-Carlo simulation with per-iteration preference-based optimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and list errors and warnings.
    Validate { file: PathBuf },
    /// Run the simulation and write records.csv and summary.json.
    Run {
        file: PathBuf,
        /// `moo` or `soo:<objective>`.
        #[arg(long)]
        mode: Option<ModeChoice>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated levels in percent, e.g. `50,80,90`.
        #[arg(long, value_delimiter = ',')]
        percentiles: Option<Vec<f64>>,
        #[arg(long, env = odycon_cli::ENV_OUT_DIR, default_value = odycon_cli::DEFAULT_OUT_DIR)]
        out: PathBuf,
        /// Run iterations on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Derive plot-ready tables from a records file.
    Report {
        records: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [50.0, 80.0, 90.0])]
        percentiles: Vec<f64>,
        /// Scenario file; adds preference-curve samples.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output directory (default: `report/` next to the records file).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("{e}");
            if !e.to_string().ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { file } => {
            print!("{}", cmd_validate(&file)?);
        }
        Command::Run { file, mode, iterations, seed, percentiles, out, sequential } => {
            let opts = RunOptions { mode, iterations, seed, percentiles, out, sequential };
            let outcome = cmd_run(&file, &opts)?;
            let s = &outcome.summary;
            println!("{} ({}): {} iterations, seed {}", s.scenario, s.mode, s.iterations, s.seed);
            for (col, vals) in &s.percentiles.values {
                let cells: Vec<String> =
                    s.percentiles.levels.iter().zip(vals).map(|(l, v)| format!("P{l}={v:.4}")).collect();
                println!("  {col:<5} {}", cells.join("  "));
            }
            for w in &s.warnings {
                println!("warning: {w}");
            }
            println!("wrote {}", outcome.records_path.display());
            println!("wrote {}", outcome.summary_path.display());
        }
        Command::Report { records, top_k, percentiles, scenario, out } => {
            let table = read_records(&records)?;
            println!("{}", report::describe(&table));
            let opts = ReportOptions { top_k, percentiles, scenario, out };
            for p in cmd_report(&records, &opts)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
