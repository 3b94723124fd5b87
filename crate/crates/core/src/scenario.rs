//! Scenario files: a versioned TOML document describing either a planning
//! (vessel fleet) case or a control (project network + measures) case.
//!
//! Currency values are integers in minor units (cents) wherever they appear
//! in a file: measure costs, day rates, cost penalties, and the value axis
//! of cost preference curves. They are converted to major units on load.
//! See `docs/formats.md` for the full schema.

use std::collections::{BTreeMap, HashSet};

use serde::Deserialize;

use crate::engine::{Case, ControlCase, CurveSpec, PlanningCase, Scenario, ScenarioKind, UpperBound};
use crate::error::{Error, Result};
use crate::network::{
    validate_network, Activity, EdgeAttributes, Issue, NetworkSpec, ProjectNetwork, RiskEvent,
    SharedFactor, ValidationReport,
};
use crate::objectives::{ControlMeasure, ControlObjectiveParams, DeltaRates, Objective};
use crate::offshore::{OffshoreActivity, OffshoreParams, OffshoreRisk, VesselSpec};
use crate::optimizer::{ConstraintKind, GaConfig, LinearConstraint};
use crate::preference::{Stakeholder, WeightScheme};
use crate::sampling::{ThreePointEstimate, Unit};
use crate::stats::DEFAULT_PERCENTILES;

pub const SCHEMA_VERSION: u32 = 1;
pub const MINOR_PER_MAJOR: f64 = 100.0;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub meta: Meta,
    #[serde(default)]
    pub mcs: McsSection,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub activities: Vec<ActivityRow>,
    #[serde(default)]
    pub shared_factors: Vec<FactorRow>,
    #[serde(default)]
    pub risks: Vec<RiskRow>,
    #[serde(default)]
    pub edges: Vec<EdgeRow>,
    #[serde(default)]
    pub measures: Vec<MeasureRow>,
    pub offshore: Option<OffshoreRow>,
    #[serde(default)]
    pub vessels: Vec<VesselRow>,
    pub objectives: Option<ControlObjectivesRow>,
    #[serde(default)]
    pub preference_curves: Vec<CurveRow>,
    #[serde(default)]
    pub stakeholders: Vec<StakeholderRow>,
    #[serde(default)]
    pub soo_penalties: Vec<PenaltyRow>,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub schema_version: u32,
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McsSection {
    pub iterations: usize,
    pub seed: u64,
    pub percentiles: Vec<f64>,
}

impl Default for McsSection {
    fn default() -> Self {
        Self { iterations: 2000, seed: 0, percentiles: DEFAULT_PERCENTILES.to_vec() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityRow {
    pub id: u32,
    pub description: String,
    pub duration: [f64; 3],
    #[serde(default)]
    pub predecessors: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorRow {
    pub id: u32,
    pub description: String,
    pub deviation: [f64; 3],
    pub activities: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskRow {
    #[serde(default)]
    pub id: u32,
    pub description: String,
    pub impact: [f64; 3],
    /// Control case: affected network activities.
    #[serde(default)]
    pub activities: Vec<u32>,
    /// Planning case: affected operation.
    pub applies_to: Option<OffshoreActivity>,
    pub probability: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRow {
    pub from: u32,
    pub to: u32,
    #[serde(default)]
    pub weight: f64,
    #[serde(default)]
    pub capacity: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureRow {
    pub id: u32,
    pub description: String,
    pub activity: u32,
    pub capacity: [f64; 3],
    pub cost_minor: [i64; 3],
    pub nuisance: [f64; 3],
    pub eta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffshoreRow {
    pub total_anchors: u32,
    pub anchors_per_turbine: u32,
    pub anchor_mass: f64,
    pub installation: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselRow {
    pub name: String,
    pub lower: u32,
    pub upper: u32,
    pub deck_space: u32,
    pub day_rate_minor: i64,
    pub utilisation_probability: f64,
    pub emissions: f64,
    pub bunkering: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlObjectivesRow {
    pub target_duration: f64,
    #[serde(default = "default_scale")]
    pub nuisance_scale: f64,
    #[serde(default)]
    pub cost_penalty_minor_per_day: i64,
    #[serde(default)]
    pub cost_reward_minor_per_day: i64,
    #[serde(default)]
    pub nuisance_penalty_per_day: f64,
    #[serde(default)]
    pub nuisance_reward_per_day: f64,
}

fn default_scale() -> f64 {
    10.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum UpperRow {
    Fixed(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRow {
    pub objective: Objective,
    pub shape: CurveShape,
    #[serde(default)]
    pub knots: Vec<[f64; 2]>,
    pub min: Option<f64>,
    pub mode: Option<f64>,
    pub max: Option<UpperRow>,
    #[serde(default)]
    pub min_slack: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CurveShape {
    Linear,
    BetaPert,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StakeholderRow {
    pub name: String,
    pub weight: f64,
    pub local: BTreeMap<Objective, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyRow {
    pub objective: Objective,
    /// Per day late; minor units for the cost objective.
    #[serde(default)]
    pub late_per_day: f64,
    #[serde(default)]
    pub early_per_day: f64,
}

/// Parse the TOML text. Errors carry the line and column of the problem.
pub fn parse(text: &str) -> Result<ScenarioFile> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.meta.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema_version {} (this build reads version {SCHEMA_VERSION})",
            file.meta.schema_version
        )));
    }
    Ok(file)
}

fn minor(v: i64) -> f64 {
    v as f64 / MINOR_PER_MAJOR
}

struct Builder {
    report: ValidationReport,
}

impl Builder {
    fn error(&mut self, section: &str, message: impl std::fmt::Display) {
        self.report.errors.push(Issue::Other { message: format!("{section}: {message}") });
    }

    fn estimate(&mut self, what: &str, v: [f64; 3], unit: Unit) -> ThreePointEstimate {
        match ThreePointEstimate::sorted(v[0], v[1], v[2], unit) {
            Ok((est, warning)) => {
                if let Some(w) = warning {
                    self.report.warnings.push(format!("{what}: {w}"));
                }
                est
            }
            Err(e) => {
                self.error(what, e);
                ThreePointEstimate::point(0.0, unit).expect("finite")
            }
        }
    }
}

/// Build a scenario from a parsed file. The report lists every problem
/// found; the scenario is `Some` only if there are no errors.
pub fn build(file: &ScenarioFile) -> (Option<Scenario>, ValidationReport) {
    let mut b = Builder { report: ValidationReport::default() };
    let case = match file.meta.kind {
        ScenarioKind::Control => build_control(file, &mut b).map(Case::Control),
        ScenarioKind::Planning => build_planning(file, &mut b).map(Case::Planning),
    };

    let mut curves = BTreeMap::new();
    for row in &file.preference_curves {
        let section = format!("preference_curves[{}]", row.objective);
        let scale = if row.objective.is_currency() { 1.0 / MINOR_PER_MAJOR } else { 1.0 };
        let spec = match row.shape {
            CurveShape::Linear => Some(CurveSpec::PiecewiseLinear {
                knots: row.knots.iter().map(|k| (k[0] * scale, k[1])).collect(),
            }),
            CurveShape::BetaPert => match (row.min, row.mode, &row.max) {
                (Some(min), Some(mode), Some(max)) => {
                    let max = match max {
                        UpperRow::Fixed(v) => Some(UpperBound::Fixed(v * scale)),
                        UpperRow::Keyword(k) if k == "unmitigated" => {
                            Some(UpperBound::Unmitigated { min_slack: row.min_slack * scale })
                        }
                        UpperRow::Keyword(k) => {
                            b.error(&section, format!("unknown max `{k}` (number or \"unmitigated\")"));
                            None
                        }
                    };
                    max.map(|max| CurveSpec::BetaPert { min: min * scale, mode: mode * scale, max })
                }
                _ => {
                    b.error(&section, "beta_pert curves need min, mode and max");
                    None
                }
            },
        };
        if let Some(spec) = spec {
            if let Err(e) = spec.resolve(None) {
                b.error(&section, e);
            } else if curves.insert(row.objective, spec).is_some() {
                b.error(&section, "duplicate curve for objective");
            }
        }
    }

    let weights = WeightScheme {
        stakeholders: file
            .stakeholders
            .iter()
            .map(|s| Stakeholder {
                name: s.name.clone(),
                weight: s.weight,
                local: s.local.iter().map(|(o, w)| (*o, *w)).collect(),
            })
            .collect(),
    };
    if let Err(e) = weights.validate() {
        b.error("weights", e);
    }

    let mut soo_penalties = BTreeMap::new();
    for p in &file.soo_penalties {
        let scale = if p.objective.is_currency() { 1.0 / MINOR_PER_MAJOR } else { 1.0 };
        if p.late_per_day < 0.0 || p.early_per_day < 0.0 {
            b.error("soo_penalties", format!("negative rate for `{}`", p.objective));
        }
        soo_penalties.insert(
            p.objective,
            DeltaRates { late: p.late_per_day * scale, early: p.early_per_day * scale },
        );
    }
    if let Err(e) = file.ga.validate() {
        b.error("ga", e);
    }
    if file.mcs.iterations == 0 {
        b.error("mcs", "iterations must be >= 1");
    }

    let Some(case) = case else {
        return (None, b.report);
    };
    let scenario = Scenario {
        name: file.meta.name.clone(),
        case,
        curves,
        weights,
        soo_penalties,
        constraints: file.constraints.clone(),
        ga: file.ga,
        iterations: file.mcs.iterations,
        seed: file.mcs.seed,
        percentiles: file.mcs.percentiles.clone(),
        warnings: b.report.warnings.clone(),
    };
    if b.report.is_valid() {
        // cross-checks that need the assembled scenario
        if let Err(e) = scenario.validate() {
            b.error("scenario", e);
        }
        let dim = scenario.decision_space().dim();
        for c in &scenario.constraints {
            if c.coefficients.len() != dim {
                b.error("constraints", format!("`{}` has {} coefficients for {dim} variables", c.name, c.coefficients.len()));
            }
            if c.kind == ConstraintKind::Equality && !c.rhs.is_finite() {
                b.error("constraints", format!("`{}` has a non-finite right-hand side", c.name));
            }
        }
    }
    if b.report.is_valid() {
        (Some(scenario), b.report)
    } else {
        (None, b.report)
    }
}

fn build_control(file: &ScenarioFile, b: &mut Builder) -> Option<ControlCase> {
    let activities: Vec<Activity> = file
        .activities
        .iter()
        .map(|r| Activity {
            id: r.id,
            description: r.description.clone(),
            duration: b.estimate(&format!("activity {}", r.id), r.duration, Unit::Days),
            // 0 in a predecessor list means "none"
            predecessors: r.predecessors.iter().copied().filter(|&p| p != 0).collect(),
        })
        .collect();
    let shared_factors = file
        .shared_factors
        .iter()
        .map(|r| SharedFactor {
            id: r.id,
            description: r.description.clone(),
            deviation: b.estimate(&format!("shared factor {}", r.id), r.deviation, Unit::Days),
            activities: r.activities.clone(),
        })
        .collect();
    let risks = file
        .risks
        .iter()
        .map(|r| RiskEvent {
            id: r.id,
            description: r.description.clone(),
            impact: b.estimate(&format!("risk {}", r.id), r.impact, Unit::Days),
            activities: r.activities.clone(),
            probability: r.probability,
        })
        .collect();
    let edge_attributes = file
        .edges
        .iter()
        .map(|e| ((e.from, e.to), EdgeAttributes { weight: e.weight, capacity: e.capacity }))
        .collect();
    if activities.is_empty() {
        b.error("activities", "a control scenario needs at least one activity");
    }
    let spec = NetworkSpec { activities, risks, shared_factors, edge_attributes };
    b.report.merge(validate_network(&spec));

    let ids: HashSet<u32> = spec.activities.iter().map(|a| a.id).collect();
    let mut seen = HashSet::new();
    let measures: Vec<ControlMeasure> = file
        .measures
        .iter()
        .map(|r| {
            let what = format!("measure {}", r.id);
            if !seen.insert(r.id) {
                b.report.errors.push(Issue::DuplicateId { what: "measure", id: r.id });
            }
            if !ids.contains(&r.activity) {
                b.report.errors.push(Issue::DanglingReference { from: what.clone(), to: r.activity });
            }
            if !(0.0..=1.0).contains(&r.eta) {
                b.error(&what, format!("eta {} outside [0, 1]", r.eta));
            }
            let cost = [minor(r.cost_minor[0]), minor(r.cost_minor[1]), minor(r.cost_minor[2])];
            ControlMeasure {
                id: r.id,
                description: r.description.clone(),
                activity: r.activity,
                capacity: b.estimate(&format!("{what} capacity"), r.capacity, Unit::Days),
                cost: b.estimate(&format!("{what} cost"), cost, Unit::Currency),
                nuisance: b.estimate(&format!("{what} nuisance"), r.nuisance, Unit::NuisancePoints),
                eta: r.eta,
            }
        })
        .collect();
    if measures.is_empty() {
        b.error("measures", "a control scenario needs at least one measure");
    }
    let Some(obj) = &file.objectives else {
        b.error("objectives", "missing section");
        return None;
    };
    let params = ControlObjectiveParams {
        target_duration: obj.target_duration,
        cost_rates: DeltaRates {
            late: minor(obj.cost_penalty_minor_per_day),
            early: minor(obj.cost_reward_minor_per_day),
        },
        nuisance_rates: DeltaRates { late: obj.nuisance_penalty_per_day, early: obj.nuisance_reward_per_day },
        nuisance_scale: obj.nuisance_scale,
    };
    if let Err(e) = params.validate() {
        b.error("objectives", e);
    }
    if !b.report.is_valid() {
        return None;
    }
    match ProjectNetwork::new(spec) {
        Ok(network) => Some(ControlCase { network, measures, params }),
        Err(e) => {
            b.error("activities", e);
            None
        }
    }
}

fn build_planning(file: &ScenarioFile, b: &mut Builder) -> Option<PlanningCase> {
    let Some(row) = &file.offshore else {
        b.error("offshore", "missing section");
        return None;
    };
    let mut risks = Vec::new();
    for r in &file.risks {
        let what = format!("risk `{}`", r.description);
        let Some(activity) = r.applies_to else {
            b.error(&what, "planning risks need applies_to = \"installation\" | \"bunkering\"");
            continue;
        };
        if !(0.0..=1.0).contains(&r.probability) {
            b.error(&what, format!("probability {} outside [0, 1]", r.probability));
        }
        risks.push(OffshoreRisk {
            description: r.description.clone(),
            impact: b.estimate(&what, r.impact, Unit::Days),
            activity,
            probability: r.probability,
        });
    }
    let params = OffshoreParams {
        total_anchors: row.total_anchors,
        anchors_per_turbine: row.anchors_per_turbine,
        anchor_mass: row.anchor_mass,
        installation: b.estimate("installation", row.installation, Unit::Days),
        risks,
    };
    if let Err(e) = params.validate() {
        b.error("offshore", e);
    }
    let vessels: Vec<VesselSpec> = file
        .vessels
        .iter()
        .map(|v| VesselSpec {
            name: v.name.clone(),
            lower: v.lower,
            upper: v.upper,
            deck_space: v.deck_space,
            day_rate: minor(v.day_rate_minor),
            utilisation_probability: v.utilisation_probability,
            emissions: v.emissions,
            bunkering: b.estimate(&format!("bunkering {}", v.name), v.bunkering, Unit::Days),
        })
        .collect();
    if vessels.is_empty() {
        b.error("vessels", "a planning scenario needs at least one vessel type");
    }
    for v in &vessels {
        if let Err(e) = v.validate() {
            b.error("vessels", e);
        }
    }
    Some(PlanningCase { params, vessels })
}

/// Parse and build in one step; fails on any parse or validation error.
pub fn load(text: &str) -> Result<(Scenario, ValidationReport)> {
    let file = parse(text)?;
    match build(&file) {
        (Some(s), report) => Ok((s, report)),
        (None, report) => Err(Error::InvalidConfig(
            report.errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "),
        )),
    }
}

pub fn load_path(path: impl AsRef<std::path::Path>) -> Result<(Scenario, ValidationReport)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    load(&text)
}

/// Every three-point estimate in a scenario, labelled.
pub fn all_estimates(scenario: &Scenario) -> Vec<(String, ThreePointEstimate)> {
    let mut out = Vec::new();
    match &scenario.case {
        Case::Control(c) => {
            let spec = c.network.spec();
            for a in &spec.activities {
                out.push((format!("activity {}", a.id), a.duration));
            }
            for f in &spec.shared_factors {
                out.push((format!("shared factor {}", f.id), f.deviation));
            }
            for r in &spec.risks {
                out.push((format!("risk {}", r.id), r.impact));
            }
            for m in &c.measures {
                out.push((format!("measure {} capacity", m.id), m.capacity));
                out.push((format!("measure {} cost", m.id), m.cost));
                out.push((format!("measure {} nuisance", m.id), m.nuisance));
            }
        }
        Case::Planning(p) => {
            out.push(("installation".into(), p.params.installation));
            for r in &p.params.risks {
                out.push((format!("risk `{}`", r.description), r.impact));
            }
            for v in &p.vessels {
                out.push((format!("bunkering {}", v.name), v.bunkering));
            }
        }
    }
    out
}
