//! Command implementations behind the `odycon` binary.
//!
//! Exit codes: 0 success, 1 validation error (bad scenario, bad flags,
//! malformed records), 2 runtime error (an iteration failed, I/O).

pub mod records;
pub mod report;
pub mod summary;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use odycon_core::engine::{run_with, Execution, ModeChoice, Scenario};
use odycon_core::scenario;

use records::RecordTable;
use summary::{summarize, RunInfo, Summary};

pub const ENV_OUT_DIR: &str = "ODYCON_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "odycon-out";
pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

/// Human-readable validation report. `Err` carries the same text when the
/// file has errors.
pub fn cmd_validate(path: &Path) -> Result<String, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let file = scenario::parse(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let (built, report) = scenario::build(&file);
    let mut out = String::new();
    for w in &report.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    for e in &report.errors {
        writeln!(out, "error: {e}").unwrap();
    }
    match built {
        Some(s) if report.is_valid() => {
            let space = s.decision_space();
            writeln!(
                out,
                "{}: ok ({:?} scenario `{}`, {} decision variables, {} warning(s))",
                path.display(),
                s.kind(),
                s.name,
                space.dim(),
                report.warnings.len()
            )
            .unwrap();
            Ok(out)
        }
        _ => {
            writeln!(out, "{}: {} error(s)", path.display(), report.errors.len()).unwrap();
            Err(CliError::Validation(out))
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub mode: Option<ModeChoice>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub percentiles: Option<Vec<f64>>,
    pub out: PathBuf,
    pub sequential: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub records_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: Summary,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    scenario::load_path(path)
        .map(|(s, _)| s)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn cmd_run(path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let mut scenario = load_scenario(path)?;
    if let Some(n) = opts.iterations {
        scenario.iterations = n;
    }
    if let Some(s) = opts.seed {
        scenario.seed = s;
    }
    if let Some(p) = &opts.percentiles {
        scenario.percentiles = p.clone();
    }
    if let Some(l) = scenario.percentiles.iter().find(|l| !(0.0..=100.0).contains(*l)) {
        return Err(CliError::Validation(format!("percentile level {l} is outside [0, 100]")));
    }
    let choice = opts.mode.unwrap_or(ModeChoice::Moo);
    let info = RunInfo::new(&scenario, choice)?;
    scenario.validate().map_err(|e| CliError::Validation(e.to_string()))?;

    let execution = if opts.sequential { Execution::Sequential } else { Execution::Parallel };
    let records = run_with(&scenario, choice, execution).map_err(|e| CliError::Runtime(e.to_string()))?;
    let table = RecordTable {
        objectives: scenario.objectives(),
        variables: scenario.decision_space().names,
        records,
    };
    let summary = summarize(&table, &scenario.percentiles, info)?;

    fs::create_dir_all(&opts.out)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", opts.out.display())))?;
    let records_path = opts.out.join(RECORDS_FILE);
    let summary_path = opts.out.join(SUMMARY_FILE);
    let file = fs::File::create(&records_path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", records_path.display())))?;
    table.write(std::io::BufWriter::new(file))?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&summary_path, json + "\n")
        .map_err(|e| CliError::Runtime(format!("{}: {e}", summary_path.display())))?;
    Ok(RunOutcome { records_path, summary_path, summary })
}

pub fn read_records(path: &Path) -> Result<RecordTable, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    RecordTable::read(std::io::BufReader::new(file))
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub top_k: usize,
    pub percentiles: Vec<f64>,
    pub scenario: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Writes the report tables and returns the paths written.
pub fn cmd_report(records: &Path, opts: &ReportOptions) -> Result<Vec<PathBuf>, CliError> {
    let table = read_records(records)?;
    let scenario = opts.scenario.as_deref().map(load_scenario).transpose()?;
    let report = report::build_report(&table, opts.top_k, &opts.percentiles, scenario.as_ref())?;
    let dir = opts.out.clone().unwrap_or_else(|| {
        records.parent().unwrap_or(Path::new(".")).join("report")
    });
    fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, contents) in report.files() {
        let p = dir.join(name);
        fs::write(&p, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
        written.push(p);
    }
    Ok(written)
}
