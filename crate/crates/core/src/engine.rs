//! The Monte-Carlo loop: realize the uncertain project, optimise the
//! decision variables against the frozen realization, store the result.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{
    apply_measures, completion_time, forward_pass, realize_durations, ActivityId, ProjectNetwork,
};
use crate::objectives::{
    completion_deltas, control_cost, control_nuisance, offshore_objectives, sample_measures,
    ControlMeasure, ControlObjectiveParams, DeltaRates, MeasureSample, Objective, ObjectiveVector,
};
use crate::offshore::{simulate_fleet, OffshoreParams, VesselSpec};
use crate::optimizer::{
    optimize, DecisionSpace, DecisionVector, Direction, Evaluation, GaConfig, LinearConstraint,
    OptimizationMode,
};
use crate::preference::{Criterion, PreferenceCurve, PreferenceModel, WeightScheme};
use crate::rng::RngHandle;

// Sub-stream tags within one iteration.
const STREAM_DURATIONS: u64 = 10;
const STREAM_MEASURES: u64 = 11;
const STREAM_SEARCH: u64 = 12;
const STREAM_FLEET: u64 = 13;

/// Upper end of a Beta-PERT preference curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBound {
    Fixed(f64),
    /// The iteration's unmitigated completion time (at least `mode + min_slack`).
    Unmitigated { min_slack: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum CurveSpec {
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    BetaPert { min: f64, mode: f64, max: UpperBound },
}

impl CurveSpec {
    pub fn resolve(&self, unmitigated: Option<f64>) -> Result<PreferenceCurve> {
        match self {
            CurveSpec::PiecewiseLinear { knots } => PreferenceCurve::linear(knots.clone()),
            CurveSpec::BetaPert { min, mode, max } => {
                let upper = match max {
                    UpperBound::Fixed(v) => *v,
                    UpperBound::Unmitigated { min_slack } => {
                        let floor = mode + min_slack;
                        unmitigated.map_or(floor, |u| u.max(floor))
                    }
                };
                PreferenceCurve::beta_pert(*min, *mode, upper)
            }
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, CurveSpec::BetaPert { max: UpperBound::Unmitigated { .. }, .. })
    }
}

#[derive(Debug, Clone)]
pub struct PlanningCase {
    pub params: OffshoreParams,
    pub vessels: Vec<VesselSpec>,
}

#[derive(Debug, Clone)]
pub struct ControlCase {
    pub network: ProjectNetwork,
    pub measures: Vec<ControlMeasure>,
    pub params: ControlObjectiveParams,
}

#[derive(Debug, Clone)]
pub enum Case {
    Planning(PlanningCase),
    Control(ControlCase),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Planning,
    Control,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub case: Case,
    pub curves: BTreeMap<Objective, CurveSpec>,
    pub weights: WeightScheme,
    /// Per-day penalty/reward terms used when a single objective is optimised.
    pub soo_penalties: BTreeMap<Objective, DeltaRates>,
    pub constraints: Vec<LinearConstraint>,
    pub ga: GaConfig,
    pub iterations: usize,
    pub seed: u64,
    pub percentiles: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Mode as chosen by the user, before the scenario's penalties are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeChoice {
    Moo,
    Soo(Objective),
}

impl std::str::FromStr for ModeChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("moo") {
            return Ok(ModeChoice::Moo);
        }
        match s.split_once(':') {
            Some((soo, obj)) if soo.eq_ignore_ascii_case("soo") => Ok(ModeChoice::Soo(obj.parse()?)),
            _ => Err(Error::Parse(format!("unknown mode `{s}` (expected moo or soo:<objective>)"))),
        }
    }
}

impl std::fmt::Display for ModeChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeChoice::Moo => f.write_str("moo"),
            ModeChoice::Soo(o) => write!(f, "soo:{o}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        match self.case {
            Case::Planning(_) => ScenarioKind::Planning,
            Case::Control(_) => ScenarioKind::Control,
        }
    }

    pub fn objectives(&self) -> Vec<Objective> {
        match self.case {
            Case::Planning(_) => vec![
                Objective::Duration,
                Objective::Cost,
                Objective::FleetUtilisation,
                Objective::Emissions,
            ],
            Case::Control(_) => vec![Objective::Duration, Objective::Cost, Objective::Nuisance],
        }
    }

    pub fn decision_space(&self) -> DecisionSpace {
        let mut space = match &self.case {
            Case::Planning(p) => {
                let mut s = DecisionSpace::integer(
                    p.vessels.iter().map(|v| v.name.clone()).collect(),
                    p.vessels.iter().map(|v| v.lower).collect(),
                    p.vessels.iter().map(|v| v.upper).collect(),
                );
                s.min_total = Some(1);
                s
            }
            Case::Control(c) => {
                DecisionSpace::binary(c.measures.iter().map(|m| format!("x_{}", m.id)).collect())
            }
        };
        space.constraints = self.constraints.clone();
        space
    }

    pub fn mode(&self, choice: ModeChoice) -> Result<OptimizationMode> {
        match choice {
            ModeChoice::Moo => Ok(OptimizationMode::Moo),
            ModeChoice::Soo(objective) => {
                if !self.objectives().contains(&objective) {
                    return Err(Error::InvalidConfig(format!(
                        "objective `{objective}` does not exist in this scenario"
                    )));
                }
                Ok(OptimizationMode::Soo {
                    objective,
                    direction: Direction::Minimize,
                    penalty: self.soo_penalties.get(&objective).copied().unwrap_or_default(),
                })
            }
        }
    }

    /// Preference model for one iteration; adaptive curves take the
    /// iteration's unmitigated completion time.
    pub fn preference_model(&self, unmitigated: Option<f64>) -> Result<PreferenceModel> {
        let criteria = self
            .weights
            .criterion_weights()
            .into_iter()
            .map(|(objective, weight)| {
                let spec = self.curves.get(&objective).ok_or_else(|| {
                    Error::InvalidConfig(format!("no preference curve for weighted objective `{objective}`"))
                })?;
                Ok(Criterion { objective, curve: spec.resolve(unmitigated)?, weight })
            })
            .collect::<Result<Vec<_>>>()?;
        PreferenceModel::new(criteria)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iteration count must be >= 1".into()));
        }
        self.ga.validate()?;
        self.weights.validate()?;
        for o in self.weights.criterion_weights().iter().map(|c| c.0) {
            if !self.objectives().contains(&o) {
                return Err(Error::InvalidWeights {
                    section: "weights".into(),
                    reason: format!("objective `{o}` does not exist in a {:?} scenario", self.kind()),
                });
            }
        }
        self.preference_model(None)?;
        match &self.case {
            Case::Planning(p) => {
                p.params.validate()?;
                for v in &p.vessels {
                    v.validate()?;
                }
            }
            Case::Control(c) => {
                c.params.validate()?;
                for m in &c.measures {
                    if c.network.index_of(m.activity).is_none() {
                        return Err(Error::UnknownActivity {
                            activity: m.activity,
                            referrer: format!("measure {}", m.id),
                        });
                    }
                    if !(0.0..=1.0).contains(&m.eta) {
                        return Err(Error::InvalidConfig(format!("measure {}: eta must be in [0, 1]", m.id)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Result stored after every iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub iteration: usize,
    pub decision: DecisionVector,
    pub objectives: ObjectiveVector,
    /// Aggregated preference (MOO) or penalised objective (SOO); `None` when
    /// no optimisation ran.
    pub score: Option<f64>,
    pub optimized: bool,
    /// Control case: completion time before any measure.
    pub unmitigated_duration: Option<f64>,
    /// Control case: days recovered by each measure.
    pub applied_reductions: Vec<f64>,
    /// Control case: zero-float activities of the final schedule.
    pub critical_path: Vec<ActivityId>,
}

/// Everything drawn for one control-case iteration, fixed before search.
#[derive(Debug, Clone)]
pub struct ControlRealization {
    pub durations: Vec<f64>,
    pub samples: Vec<MeasureSample>,
    pub unmitigated: f64,
}

impl ControlCase {
    pub fn realize(&self, handle: RngHandle) -> ControlRealization {
        let durations = realize_durations(&self.network, handle.substream(STREAM_DURATIONS));
        let samples = sample_measures(&self.measures, handle.substream(STREAM_MEASURES));
        let unmitigated = completion_time(&self.network, &durations);
        ControlRealization { durations, samples, unmitigated }
    }

    /// Objective values of an allocation against a frozen realization.
    /// Reported objectives use the scenario's base rates; the deltas are
    /// returned so single-objective penalties can be added on top.
    pub fn evaluate(&self, real: &ControlRealization, x: &DecisionVector) -> Result<Evaluation> {
        let alloc = x.as_bools();
        let (durations, applied) =
            apply_measures(&self.network, &real.durations, &alloc, &self.measures, &real.samples)?;
        let completion = completion_time(&self.network, &durations);
        let deltas = completion_deltas(completion, self.params.target_duration);
        let cost = control_cost(&alloc, &self.measures, &applied, &real.samples, deltas, self.params.cost_rates);
        let nuisance = control_nuisance(
            &alloc,
            &real.samples,
            deltas,
            self.params.nuisance_rates,
            self.params.nuisance_scale,
        );
        Ok(Evaluation {
            objectives: ObjectiveVector::default()
                .with(Objective::Duration, completion)
                .with(Objective::Cost, cost)
                .with(Objective::Nuisance, nuisance),
            deltas: Some(deltas),
        })
    }
}

impl PlanningCase {
    pub fn evaluate(&self, handle: RngHandle, x: &DecisionVector) -> Result<Evaluation> {
        let fleet = simulate_fleet(&x.0, &self.params, &self.vessels, handle.substream(STREAM_FLEET))?;
        Ok(Evaluation {
            objectives: offshore_objectives(&fleet, &x.0, &self.params, &self.vessels),
            deltas: None,
        })
    }
}

/// One Monte-Carlo iteration.
pub fn run_iteration(
    scenario: &Scenario,
    mode: &OptimizationMode,
    space: &DecisionSpace,
    iteration: usize,
) -> Result<SimulationRecord> {
    let handle = RngHandle::for_iteration(scenario.seed, iteration as u64);
    let search = handle.substream(STREAM_SEARCH);
    match &scenario.case {
        Case::Planning(case) => {
            let model = match mode {
                OptimizationMode::Moo => Some(scenario.preference_model(None)?),
                _ => None,
            };
            let result = optimize(
                space,
                |x| case.evaluate(handle, x),
                model.as_ref(),
                *mode,
                &scenario.ga,
                search,
            )?;
            Ok(SimulationRecord {
                iteration,
                decision: result.best,
                objectives: result.evaluation.objectives,
                score: Some(result.score),
                optimized: true,
                unmitigated_duration: None,
                applied_reductions: Vec::new(),
                critical_path: Vec::new(),
            })
        }
        Case::Control(case) => {
            let real = case.realize(handle);
            let (decision, evaluation, score, optimized) =
                if real.unmitigated > case.params.target_duration {
                    let model = match mode {
                        OptimizationMode::Moo => Some(scenario.preference_model(Some(real.unmitigated))?),
                        _ => None,
                    };
                    let r = optimize(
                        space,
                        |x| case.evaluate(&real, x),
                        model.as_ref(),
                        *mode,
                        &scenario.ga,
                        search,
                    )?;
                    (r.best, r.evaluation, Some(r.score), true)
                } else {
                    let none = DecisionVector::zeros(case.measures.len());
                    let eval = case.evaluate(&real, &none)?;
                    (none, eval, None, false)
                };
            let (durations, applied) = apply_measures(
                &case.network,
                &real.durations,
                &decision.as_bools(),
                &case.measures,
                &real.samples,
            )?;
            let schedule = forward_pass(&case.network, &durations);
            Ok(SimulationRecord {
                iteration,
                decision,
                objectives: evaluation.objectives,
                score,
                optimized,
                unmitigated_duration: Some(real.unmitigated),
                applied_reductions: applied,
                critical_path: schedule.critical_path,
            })
        }
    }
}

/// Run every iteration of `scenario` under `mode`. Iteration `i` uses
/// stream `i` of the scenario seed, so the records do not depend on the
/// execution strategy.
pub fn run(scenario: &Scenario, choice: ModeChoice) -> Result<Vec<SimulationRecord>> {
    run_with(scenario, choice, Execution::default())
}

pub fn run_with(scenario: &Scenario, choice: ModeChoice, execution: Execution) -> Result<Vec<SimulationRecord>> {
    scenario.validate()?;
    let mode = scenario.mode(choice)?;
    let space = scenario.decision_space();
    let one = |i: usize| {
        run_iteration(scenario, &mode, &space, i)
            .map_err(|e| Error::Iteration { iteration: i, source: Box::new(e) })
    };
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..scenario.iterations).into_par_iter().map(one).collect()
        }
        _ => (0..scenario.iterations).map(one).collect(),
    }
}
