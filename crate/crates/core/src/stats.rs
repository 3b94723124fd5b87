//! Percentile summaries and criticality indexes over simulation records.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::engine::SimulationRecord;
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::optimizer::DecisionVector;

pub const DEFAULT_PERCENTILES: [f64; 3] = [50.0, 80.0, 90.0];

/// Empirical quantile of already sorted data, linear interpolation between
/// the closest order statistics (`h = (n - 1) q`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let q = q.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentileSummary {
    /// Percentile levels in percent, e.g. `[50, 80, 90]`.
    pub levels: Vec<f64>,
    /// One value per level, per objective present in the records.
    pub values: BTreeMap<Objective, Vec<f64>>,
}

impl PercentileSummary {
    pub fn get(&self, objective: Objective, level: f64) -> Option<f64> {
        let i = self.levels.iter().position(|l| *l == level)?;
        self.values.get(&objective).map(|v| v[i])
    }
}

/// Percentiles of a list of values (levels in percent).
pub fn percentiles_of(values: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("no values to summarise"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(levels.iter().map(|l| quantile_sorted(&sorted, l / 100.0)).collect())
}

pub fn percentiles(records: &[SimulationRecord], levels: &[f64]) -> Result<PercentileSummary> {
    if records.is_empty() {
        return Err(Error::Empty("no simulation records"));
    }
    for l in levels {
        if !(0.0..=100.0).contains(l) {
            return Err(Error::InvalidConfig(format!("percentile level {l} is outside [0, 100]")));
        }
    }
    let mut values = BTreeMap::new();
    for objective in Objective::ALL {
        let column: Vec<f64> = records.iter().filter_map(|r| r.objectives.get(objective)).collect();
        if !column.is_empty() {
            values.insert(objective, percentiles_of(&column, levels)?);
        }
    }
    Ok(PercentileSummary { levels: levels.to_vec(), values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableFrequency {
    pub variable: usize,
    /// Fraction of iterations choosing each value.
    pub values: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalityIndex {
    pub iterations: usize,
    pub variables: Vec<VariableFrequency>,
    /// Exact decision vectors with their frequency, most frequent first
    /// (ties in vector order).
    pub combinations: Vec<(DecisionVector, f64)>,
}

impl CriticalityIndex {
    pub fn top(&self, k: usize) -> &[(DecisionVector, f64)] {
        &self.combinations[..k.min(self.combinations.len())]
    }

    pub fn frequency(&self, variable: usize, value: u32) -> f64 {
        self.variables
            .get(variable)
            .and_then(|v| v.values.get(&value).copied())
            .unwrap_or(0.0)
    }
}

pub fn criticality_of<'a>(decisions: impl IntoIterator<Item = &'a DecisionVector>) -> CriticalityIndex {
    let mut counts: BTreeMap<&DecisionVector, usize> = BTreeMap::new();
    let mut var_counts: Vec<BTreeMap<u32, usize>> = Vec::new();
    let mut n = 0;
    for d in decisions {
        n += 1;
        *counts.entry(d).or_default() += 1;
        if var_counts.len() < d.len() {
            var_counts.resize_with(d.len(), BTreeMap::new);
        }
        for (i, v) in d.0.iter().enumerate() {
            *var_counts[i].entry(*v).or_default() += 1;
        }
    }
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let mut combinations: Vec<(DecisionVector, f64)> =
        counts.into_iter().map(|(d, c)| (d.clone(), frac(c))).collect();
    combinations.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let variables = var_counts
        .into_iter()
        .enumerate()
        .map(|(variable, m)| VariableFrequency {
            variable,
            values: m.into_iter().map(|(v, c)| (v, frac(c))).collect(),
        })
        .collect();
    CriticalityIndex { iterations: n, variables, combinations }
}

pub fn criticality(records: &[SimulationRecord]) -> CriticalityIndex {
    criticality_of(records.iter().map(|r| &r.decision))
}
