//! Objective functions for the offshore planning case and the mitigation
//! control case.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ActivityId;
use crate::offshore::{FleetRealization, OffshoreParams, VesselSpec};
use crate::rng::RngHandle;
use crate::sampling::{sample_beta_pert, ThreePointEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// O_PD, days.
    Duration,
    /// O_C, currency.
    Cost,
    /// O_F, probability the fleet is better used elsewhere.
    FleetUtilisation,
    /// O_S, tonnes CO2.
    Emissions,
    /// O_N, nuisance points.
    Nuisance,
}

impl Objective {
    pub const ALL: [Objective; 5] = [
        Objective::Duration,
        Objective::Cost,
        Objective::FleetUtilisation,
        Objective::Emissions,
        Objective::Nuisance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Duration => "duration",
            Objective::Cost => "cost",
            Objective::FleetUtilisation => "fleet_utilisation",
            Objective::Emissions => "emissions",
            Objective::Nuisance => "nuisance",
        }
    }

    /// Column label used in record tables.
    pub fn column(self) -> &'static str {
        match self {
            Objective::Duration => "O_PD",
            Objective::Cost => "O_C",
            Objective::FleetUtilisation => "O_F",
            Objective::Emissions => "O_S",
            Objective::Nuisance => "O_N",
        }
    }

    pub fn is_currency(self) -> bool {
        self == Objective::Cost
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "duration" | "o_pd" | "pd" | "time" => Objective::Duration,
            "cost" | "o_c" | "c" => Objective::Cost,
            "fleet_utilisation" | "fleet" | "utilisation" | "o_f" | "f" => {
                Objective::FleetUtilisation
            }
            "emissions" | "sustainability" | "o_s" | "s" | "co2" => Objective::Emissions,
            "nuisance" | "o_n" | "n" => Objective::Nuisance,
            _ => return Err(Error::Parse(format!("unknown objective `{s}`"))),
        })
    }
}

/// Objective values of one alternative; absent objectives are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    values: [Option<f64>; 5],
}

impl ObjectiveVector {
    fn slot(obj: Objective) -> usize {
        Objective::ALL.iter().position(|&o| o == obj).expect("listed")
    }

    pub fn with(mut self, obj: Objective, value: f64) -> Self {
        self.set(obj, value);
        self
    }

    pub fn set(&mut self, obj: Objective, value: f64) {
        self.values[Self::slot(obj)] = Some(value);
    }

    pub fn get(&self, obj: Objective) -> Option<f64> {
        self.values[Self::slot(obj)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Objective, f64)> + '_ {
        Objective::ALL.iter().filter_map(|&o| self.get(o).map(|v| (o, v)))
    }
}

/// Overshoot past target and undershoot before it; at most one is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CompletionDeltas {
    pub late: f64,
    pub early: f64,
}

pub fn completion_deltas(completion: f64, target: f64) -> CompletionDeltas {
    CompletionDeltas {
        late: (completion - target).max(0.0),
        early: (target - completion).max(0.0),
    }
}

/// Per-day rates applied to the completion deltas.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeltaRates {
    pub late: f64,
    pub early: f64,
}

impl DeltaRates {
    pub fn adjustment(&self, deltas: CompletionDeltas) -> f64 {
        deltas.late * self.late - deltas.early * self.early
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlMeasure {
    pub id: u32,
    pub description: String,
    pub activity: ActivityId,
    /// Days recovered.
    pub capacity: ThreePointEstimate,
    pub cost: ThreePointEstimate,
    pub nuisance: ThreePointEstimate,
    /// 0 = one-off expense, 1 = cost proportional to capacity used.
    pub eta: f64,
}

/// One iteration's frozen draw for a measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureSample {
    pub capacity: f64,
    pub cost: f64,
    pub nuisance: f64,
}

pub fn sample_measures(measures: &[ControlMeasure], handle: RngHandle) -> Vec<MeasureSample> {
    let mut cap_rng = handle.substream(1).rng();
    let mut cost_rng = handle.substream(2).rng();
    let mut nui_rng = handle.substream(3).rng();
    measures
        .iter()
        .map(|m| MeasureSample {
            capacity: sample_beta_pert(&m.capacity, &mut cap_rng),
            cost: sample_beta_pert(&m.cost, &mut cost_rng),
            nuisance: sample_beta_pert(&m.nuisance, &mut nui_rng),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlObjectiveParams {
    pub target_duration: f64,
    /// P_c and R_c, currency per day.
    pub cost_rates: DeltaRates,
    /// P_n and R_n, points per day.
    pub nuisance_rates: DeltaRates,
    /// S.
    pub nuisance_scale: f64,
}

impl ControlObjectiveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_duration > 0.0) {
            return Err(Error::InvalidConfig("target duration must be > 0".into()));
        }
        if !(self.nuisance_scale > 0.0) {
            return Err(Error::InvalidConfig("nuisance scale must be > 0".into()));
        }
        let rates = [
            self.cost_rates.late,
            self.cost_rates.early,
            self.nuisance_rates.late,
            self.nuisance_rates.early,
        ];
        if rates.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidConfig("penalty and reward rates must be >= 0".into()));
        }
        Ok(())
    }
}

/// Cost actually incurred by a measure given how much of its capacity was
/// used: `cost * ((1 - eta) + eta * used / capacity)`.
pub fn realized_measure_cost(sampled_cost: f64, eta: f64, applied: f64, capacity: f64) -> f64 {
    let use_fraction = if capacity > 0.0 { (applied / capacity).clamp(0.0, 1.0) } else { 1.0 };
    sampled_cost * ((1.0 - eta) + eta * use_fraction)
}

pub fn control_cost(
    allocations: &[bool],
    measures: &[ControlMeasure],
    applied: &[f64],
    samples: &[MeasureSample],
    deltas: CompletionDeltas,
    rates: DeltaRates,
) -> f64 {
    let spent: f64 = allocations
        .iter()
        .zip(measures)
        .zip(applied.iter().zip(samples))
        .filter(|((on, _), _)| **on)
        .map(|((_, m), (used, s))| realized_measure_cost(s.cost, m.eta, *used, s.capacity))
        .sum();
    spent + rates.adjustment(deltas)
}

/// Allocated share of the iteration's total sampled nuisance, scaled to
/// `[0, scale]`, plus the delay adjustment. A zero total yields zero base
/// nuisance.
pub fn control_nuisance(
    allocations: &[bool],
    samples: &[MeasureSample],
    deltas: CompletionDeltas,
    rates: DeltaRates,
    scale: f64,
) -> f64 {
    let total: f64 = samples.iter().map(|s| s.nuisance).sum();
    let base = if total > 0.0 {
        let used: f64 = allocations
            .iter()
            .zip(samples)
            .filter(|(on, _)| **on)
            .map(|(_, s)| s.nuisance)
            .sum();
        used / total * scale
    } else {
        0.0
    };
    base + rates.adjustment(deltas)
}

/// Fixed anchor cost `(815 M_a + 40 000) n_a`.
pub fn anchor_cost(params: &OffshoreParams) -> f64 {
    (815.0 * params.anchor_mass + 40_000.0) * params.total_anchors as f64
}

/// `prod p_i^{x_i}`.
pub fn fleet_utilisation(counts: &[u32], specs: &[VesselSpec]) -> f64 {
    counts
        .iter()
        .zip(specs)
        .map(|(&x, s)| s.utilisation_probability.powi(x as i32))
        .product()
}

/// O_PD, O_C, O_F, O_S for one fleet realization. Day cost and emissions
/// sum over vessel instances with each instance's own active duration.
pub fn offshore_objectives(
    fleet: &FleetRealization,
    counts: &[u32],
    params: &OffshoreParams,
    specs: &[VesselSpec],
) -> ObjectiveVector {
    let mut day_cost = 0.0;
    let mut emissions = 0.0;
    for v in &fleet.vessels {
        let spec = &specs[v.vessel_type];
        day_cost += spec.day_rate * v.active_duration;
        emissions += spec.emissions * v.active_duration;
    }
    ObjectiveVector::default()
        .with(Objective::Duration, fleet.duration)
        .with(Objective::Cost, anchor_cost(params) + day_cost)
        .with(Objective::FleetUtilisation, fleet_utilisation(counts, specs))
        .with(Objective::Emissions, emissions)
}
