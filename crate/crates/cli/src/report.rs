//! Plot-ready tables derived from a records table.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use odycon_core::engine::Scenario;
use odycon_core::objectives::Objective;
use odycon_core::stats::{criticality, percentiles, quantile_sorted};

use crate::records::RecordTable;
use crate::CliError;

/// Points per empirical CDF and per preference-curve trace.
pub const SAMPLES: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub variable_frequency: String,
    pub combinations: String,
    pub percentiles: String,
    pub cdf: String,
    pub preference_curves: Option<String>,
}

impl Report {
    /// `(file name, contents)` pairs.
    pub fn files(&self) -> Vec<(&'static str, &str)> {
        let mut out = vec![
            ("variable_frequency.csv", self.variable_frequency.as_str()),
            ("combinations.csv", self.combinations.as_str()),
            ("percentiles.csv", self.percentiles.as_str()),
            ("cdf.csv", self.cdf.as_str()),
        ];
        if let Some(p) = &self.preference_curves {
            out.push(("preference_curves.csv", p.as_str()));
        }
        out
    }
}

pub fn build_report(
    table: &RecordTable,
    top_k: usize,
    levels: &[f64],
    scenario: Option<&Scenario>,
) -> Result<Report, CliError> {
    if table.records.is_empty() {
        return Err(CliError::Validation("records table has no rows".into()));
    }
    let crit = criticality(&table.records);

    // one row per variable, one column per value seen anywhere
    let values: BTreeSet<u32> = crit.variables.iter().flat_map(|v| v.values.keys().copied()).collect();
    let mut variable_frequency = String::from("variable");
    for v in &values {
        write!(variable_frequency, ",freq_{v}").unwrap();
    }
    variable_frequency.push('\n');
    for (i, name) in table.variables.iter().enumerate() {
        variable_frequency.push_str(&csv_field(name));
        for v in &values {
            write!(variable_frequency, ",{}", crit.frequency(i, *v)).unwrap();
        }
        variable_frequency.push('\n');
    }

    let mut combinations = String::from("rank,decision,frequency\n");
    for (rank, (d, f)) in crit.top(top_k).iter().enumerate() {
        writeln!(combinations, "{},{d},{f}", rank + 1).unwrap();
    }

    let pct = percentiles(&table.records, levels).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut pct_text = String::from("objective,level,value\n");
    for (o, vals) in &pct.values {
        for (l, v) in pct.levels.iter().zip(vals) {
            writeln!(pct_text, "{},{l},{v}", o.column()).unwrap();
        }
    }

    let mut cdf = String::from("objective,probability,value\n");
    for o in &table.objectives {
        let mut column: Vec<f64> = table.records.iter().filter_map(|r| r.objectives.get(*o)).collect();
        if column.is_empty() {
            continue;
        }
        column.sort_by(f64::total_cmp);
        for k in 0..SAMPLES {
            let q = k as f64 / (SAMPLES - 1) as f64;
            writeln!(cdf, "{},{q},{}", o.column(), quantile_sorted(&column, q)).unwrap();
        }
    }

    let preference_curves = scenario.map(|s| curve_table(s, &pct)).transpose()?;
    Ok(Report {
        variable_frequency,
        combinations,
        percentiles: pct_text,
        cdf,
        preference_curves,
    })
}

/// Curve samples plus one marker row per percentile. Curves whose upper end
/// follows each iteration's unmitigated duration are drawn at their floor.
fn curve_table(scenario: &Scenario, pct: &odycon_core::stats::PercentileSummary) -> Result<String, CliError> {
    let mut out = String::from("objective,value,preference,marker\n");
    for (o, spec) in &scenario.curves {
        let curve = spec.resolve(None).map_err(|e| CliError::Validation(e.to_string()))?;
        let (lo, hi) = curve.domain();
        for k in 0..SAMPLES {
            let x = lo + (hi - lo) * k as f64 / (SAMPLES - 1) as f64;
            writeln!(out, "{},{x},{},", o.column(), curve.eval(x)).unwrap();
        }
        if let Some(vals) = pct.values.get(o) {
            for (l, v) in pct.levels.iter().zip(vals) {
                writeln!(out, "{},{v},{},P{l}", o.column(), curve.eval(*v)).unwrap();
            }
        }
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Objectives with a column in the table, for messages.
pub fn describe(table: &RecordTable) -> String {
    let cols: Vec<&str> = table.objectives.iter().map(|o: &Objective| o.column()).collect();
    format!(
        "{} records, {} decision variables, objectives {}",
        table.records.len(),
        table.variables.len(),
        cols.join(", ")
    )
}
