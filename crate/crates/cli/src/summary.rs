//! The run summary document (`summary.json`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use odycon_core::engine::{ModeChoice, Scenario, ScenarioKind};
use odycon_core::optimizer::OptimizationMode;
use odycon_core::stats::{criticality, percentiles};

use crate::records::RecordTable;
use crate::CliError;

pub const SUMMARY_VERSION: u32 = 1;
/// Combinations listed in the summary; `report --top-k` can ask for more.
pub const SUMMARY_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format_version: u32,
    pub engine_version: String,
    pub scenario: String,
    pub kind: ScenarioKind,
    pub mode: String,
    pub iterations: usize,
    pub seed: u64,
    pub percentiles: PercentileTable,
    pub criticality: CriticalitySummary,
    /// Penalty/reward per day applied in a single-objective run.
    pub penalty_terms: Option<PenaltyTerms>,
    /// Criterion weights used in a multi-objective run.
    pub criterion_weights: BTreeMap<String, f64>,
    pub optimized_iterations: usize,
    /// Control case: iterations finishing on time without measures.
    pub no_delay_iterations: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileTable {
    pub levels: Vec<f64>,
    /// Objective column -> one value per level.
    pub values: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalitySummary {
    pub variables: Vec<VariableSummary>,
    pub top_combinations: Vec<Combination>,
    pub distinct_combinations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub name: String,
    /// Chosen value -> fraction of iterations.
    pub frequencies: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub decision: String,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerms {
    pub objective: String,
    pub late_per_day: f64,
    pub early_per_day: f64,
}

/// Everything in the summary that comes from the scenario rather than the
/// records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunInfo {
    pub scenario: String,
    pub kind: Option<ScenarioKind>,
    pub mode: String,
    pub seed: u64,
    pub penalty_terms: Option<PenaltyTerms>,
    pub criterion_weights: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl RunInfo {
    pub fn new(scenario: &Scenario, choice: ModeChoice) -> Result<Self, CliError> {
        let mode = scenario.mode(choice).map_err(|e| CliError::Validation(e.to_string()))?;
        let (penalty_terms, criterion_weights) = match mode {
            OptimizationMode::Soo { objective, penalty, .. } => (
                Some(PenaltyTerms {
                    objective: objective.to_string(),
                    late_per_day: penalty.late,
                    early_per_day: penalty.early,
                }),
                BTreeMap::new(),
            ),
            OptimizationMode::Moo => (
                None,
                scenario
                    .weights
                    .criterion_weights()
                    .into_iter()
                    .map(|(o, w)| (o.to_string(), w))
                    .collect(),
            ),
        };
        Ok(Self {
            scenario: scenario.name.clone(),
            kind: Some(scenario.kind()),
            mode: choice.to_string(),
            seed: scenario.seed,
            penalty_terms,
            criterion_weights,
            warnings: scenario.warnings.clone(),
        })
    }
}

/// Build the summary from a records table; identical tables give identical
/// summaries.
pub fn summarize(table: &RecordTable, levels: &[f64], info: RunInfo) -> Result<Summary, CliError> {
    let records = &table.records;
    let pct = percentiles(records, levels).map_err(|e| CliError::Validation(e.to_string()))?;
    let crit = criticality(records);
    let kind = info.kind.unwrap_or(if records.iter().any(|r| r.unmitigated_duration.is_some()) {
        ScenarioKind::Control
    } else {
        ScenarioKind::Planning
    });
    let mut warnings = info.warnings;
    let no_delay = (kind == ScenarioKind::Control).then(|| records.iter().filter(|r| !r.optimized).count());
    if let Some(n) = no_delay.filter(|n| *n > 0) {
        warnings.push(format!(
            "{n} iteration(s) finished on time without measures; they are included in all statistics"
        ));
    }
    Ok(Summary {
        format_version: SUMMARY_VERSION,
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: info.scenario,
        kind,
        mode: info.mode,
        iterations: records.len(),
        seed: info.seed,
        percentiles: PercentileTable {
            levels: pct.levels.clone(),
            values: pct.values.iter().map(|(o, v)| (o.column().to_string(), v.clone())).collect(),
        },
        criticality: CriticalitySummary {
            variables: crit
                .variables
                .iter()
                .map(|v| VariableSummary {
                    name: table.variables.get(v.variable).cloned().unwrap_or_else(|| v.variable.to_string()),
                    frequencies: v.values.clone(),
                })
                .collect(),
            top_combinations: crit
                .top(SUMMARY_TOP_K)
                .iter()
                .map(|(d, f)| Combination { decision: d.to_string(), frequency: *f })
                .collect(),
            distinct_combinations: crit.combinations.len(),
        },
        penalty_terms: info.penalty_terms,
        criterion_weights: info.criterion_weights,
        optimized_iterations: records.iter().filter(|r| r.optimized).count(),
        no_delay_iterations: no_delay,
        warnings,
    })
}
