//! Activity-on-node project networks: validation, per-iteration duration
//! realization, control-measure application and CPM forward/backward pass.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objectives::{ControlMeasure, MeasureSample};
use crate::rng::RngHandle;
use crate::sampling::{sample_beta_pert, sample_risk_occurrence, ThreePointEstimate};

pub type ActivityId = u32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Activity {
    pub id: ActivityId,
    pub description: String,
    pub duration: ThreePointEstimate,
    pub predecessors: Vec<ActivityId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskEvent {
    pub id: u32,
    pub description: String,
    pub impact: ThreePointEstimate,
    pub activities: Vec<ActivityId>,
    pub probability: f64,
}

/// Common-cause deviation: sampled once per iteration and added in full to
/// every related activity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharedFactor {
    pub id: u32,
    pub description: String,
    pub deviation: ThreePointEstimate,
    pub activities: Vec<ActivityId>,
}

/// Edge weight and capacity. Carried through ingestion, not used by any
/// computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeAttributes {
    pub weight: f64,
    pub capacity: f64,
}

/// Unvalidated network description, as read from a scenario file.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NetworkSpec {
    pub activities: Vec<Activity>,
    pub risks: Vec<RiskEvent>,
    pub shared_factors: Vec<SharedFactor>,
    pub edge_attributes: BTreeMap<(ActivityId, ActivityId), EdgeAttributes>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    DuplicateId { what: &'static str, id: u32 },
    DanglingReference { from: String, to: ActivityId },
    Cycle { activities: Vec<ActivityId> },
    ProbabilityRange { risk: u32, value: String },
    NegativeDuration { activity: ActivityId },
    Other { message: String },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::DuplicateId { what, id } => write!(f, "duplicate {what} id {id}"),
            Issue::DanglingReference { from, to } => {
                write!(f, "{from} references unknown activity {to}")
            }
            Issue::Cycle { activities } => {
                let ids: Vec<String> = activities.iter().map(|a| a.to_string()).collect();
                write!(f, "cycle through activities {}", ids.join(" -> "))
            }
            Issue::ProbabilityRange { risk, value } => {
                write!(f, "risk {risk} probability {value} is outside [0, 1]")
            }
            Issue::NegativeDuration { activity } => {
                write!(f, "activity {activity} has a negative optimistic duration")
            }
            Issue::Other { message } => f.write_str(message),
        }
    }
}

/// Errors block a run; warnings (such as auto-sorted triples) do not.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }
}

pub fn validate_network(spec: &NetworkSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut index: HashMap<ActivityId, usize> = HashMap::new();
    for (i, act) in spec.activities.iter().enumerate() {
        if index.insert(act.id, i).is_some() {
            report.errors.push(Issue::DuplicateId { what: "activity", id: act.id });
        }
        if act.duration.a() < 0.0 {
            report.errors.push(Issue::NegativeDuration { activity: act.id });
        }
    }
    for act in &spec.activities {
        for p in &act.predecessors {
            if !index.contains_key(p) {
                report.errors.push(Issue::DanglingReference {
                    from: format!("activity {}", act.id),
                    to: *p,
                });
            }
        }
    }
    let mut seen = HashMap::new();
    for risk in &spec.risks {
        if seen.insert(risk.id, ()).is_some() {
            report.errors.push(Issue::DuplicateId { what: "risk", id: risk.id });
        }
        if !(0.0..=1.0).contains(&risk.probability) {
            report.errors.push(Issue::ProbabilityRange {
                risk: risk.id,
                value: risk.probability.to_string(),
            });
        }
        for a in &risk.activities {
            if !index.contains_key(a) {
                report.errors.push(Issue::DanglingReference {
                    from: format!("risk {}", risk.id),
                    to: *a,
                });
            }
        }
    }
    seen.clear();
    for factor in &spec.shared_factors {
        if seen.insert(factor.id, ()).is_some() {
            report.errors.push(Issue::DuplicateId { what: "shared factor", id: factor.id });
        }
        for a in &factor.activities {
            if !index.contains_key(a) {
                report.errors.push(Issue::DanglingReference {
                    from: format!("shared factor {}", factor.id),
                    to: *a,
                });
            }
        }
    }
    for &(from, to) in spec.edge_attributes.keys() {
        for id in [from, to] {
            if !index.contains_key(&id) {
                report.errors.push(Issue::DanglingReference {
                    from: format!("edge attribute ({from}, {to})"),
                    to: id,
                });
            }
        }
    }
    if let Some(cycle) = find_cycle(spec, &index) {
        report.errors.push(Issue::Cycle { activities: cycle });
    }
    report
}

/// Depth-first search for a back edge along predecessor links. Returns the
/// activities on the first cycle found, in dependency order.
fn find_cycle(spec: &NetworkSpec, index: &HashMap<ActivityId, usize>) -> Option<Vec<ActivityId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = spec.activities.len();
    let mut mark = vec![Mark::New; n];
    let mut path: Vec<usize> = Vec::new();

    fn visit(
        v: usize,
        spec: &NetworkSpec,
        index: &HashMap<ActivityId, usize>,
        mark: &mut [Mark],
        path: &mut Vec<usize>,
    ) -> Option<Vec<ActivityId>> {
        mark[v] = Mark::Active;
        path.push(v);
        for p in &spec.activities[v].predecessors {
            let Some(&u) = index.get(p) else { continue };
            match mark[u] {
                Mark::Active => {
                    let start = path.iter().position(|&x| x == u).unwrap_or(0);
                    let mut cyc: Vec<ActivityId> =
                        path[start..].iter().map(|&i| spec.activities[i].id).collect();
                    cyc.reverse();
                    cyc.push(spec.activities[u].id);
                    return Some(cyc);
                }
                Mark::New => {
                    if let Some(c) = visit(u, spec, index, mark, path) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        path.pop();
        mark[v] = Mark::Done;
        None
    }

    for v in 0..n {
        if mark[v] == Mark::New {
            if let Some(c) = visit(v, spec, index, &mut mark, &mut path) {
                return Some(c);
            }
        }
    }
    None
}

/// Validated, indexed, immutable network. Activity indices follow the order
/// of `activities`; a topological order is fixed at construction.
#[derive(Debug, Clone)]
pub struct ProjectNetwork {
    spec: NetworkSpec,
    index: HashMap<ActivityId, usize>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    topo: Vec<usize>,
    risk_targets: Vec<Vec<usize>>,
    factor_targets: Vec<Vec<usize>>,
}

impl ProjectNetwork {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        let report = validate_network(&spec);
        if let Some(first) = report.errors.first() {
            return Err(Error::InvalidNetwork(first.to_string()));
        }
        let index: HashMap<ActivityId, usize> =
            spec.activities.iter().enumerate().map(|(i, a)| (a.id, i)).collect();
        let n = spec.activities.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for (i, act) in spec.activities.iter().enumerate() {
            for p in &act.predecessors {
                let j = index[p];
                if !preds[i].contains(&j) {
                    preds[i].push(j);
                    succs[j].push(i);
                }
            }
        }
        // Kahn's algorithm; ties resolved by activity index for a stable order.
        let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            topo.push(v);
            for &s in &succs[v] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        debug_assert_eq!(topo.len(), n);
        let map_ids = |ids: &[ActivityId]| ids.iter().map(|a| index[a]).collect::<Vec<_>>();
        let risk_targets = spec.risks.iter().map(|r| map_ids(&r.activities)).collect();
        let factor_targets = spec.shared_factors.iter().map(|f| map_ids(&f.activities)).collect();
        Ok(Self {
            spec,
            index,
            preds,
            succs,
            topo,
            risk_targets,
            factor_targets,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }
    pub fn activities(&self) -> &[Activity] {
        &self.spec.activities
    }
    pub fn len(&self) -> usize {
        self.spec.activities.len()
    }
    pub fn is_empty(&self) -> bool {
        self.spec.activities.is_empty()
    }
    pub fn index_of(&self, id: ActivityId) -> Option<usize> {
        self.index.get(&id).copied()
    }
    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Activities without successors; the virtual sink joins these.
    pub fn terminals(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.succs[i].is_empty()).collect()
    }

    /// Most-likely duration of every activity, with no risks or factors.
    pub fn modal_durations(&self) -> Vec<f64> {
        self.spec.activities.iter().map(|a| a.duration.m()).collect()
    }
}

/// Sample one realization of all activity durations: own uncertainty plus
/// every shared factor relating to the activity plus every occurring risk
/// affecting it, clamped at zero. Each factor and risk is drawn once and
/// applied to all of its activities.
pub fn realize_durations(net: &ProjectNetwork, handle: RngHandle) -> Vec<f64> {
    let mut durations: Vec<f64> = {
        let mut rng = handle.substream(1).rng();
        net.activities().iter().map(|a| sample_beta_pert(&a.duration, &mut rng)).collect()
    };
    {
        let mut rng = handle.substream(2).rng();
        for (factor, targets) in net.spec.shared_factors.iter().zip(&net.factor_targets) {
            let dev = sample_beta_pert(&factor.deviation, &mut rng);
            for &t in targets {
                durations[t] += dev;
            }
        }
    }
    {
        let mut rng = handle.substream(3).rng();
        for (risk, targets) in net.spec.risks.iter().zip(&net.risk_targets) {
            // probability already validated at construction
            let occurs = sample_risk_occurrence(risk.probability, &mut rng).unwrap_or(false);
            let impact = sample_beta_pert(&risk.impact, &mut rng);
            if occurs {
                for &t in targets {
                    durations[t] += impact;
                }
            }
        }
    }
    for d in &mut durations {
        *d = d.max(0.0);
    }
    durations
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkRealization {
    pub durations: Vec<f64>,
    pub early_start: Vec<f64>,
    pub early_finish: Vec<f64>,
    pub total_float: Vec<f64>,
    pub completion: f64,
    pub critical_path: Vec<ActivityId>,
}

/// Float below this (relative to the completion time) counts as zero.
const FLOAT_EPS: f64 = 1e-9;

/// Early start/finish by forward pass, total float by backward pass against
/// a zero-duration sink joining all terminal activities.
pub fn forward_pass(net: &ProjectNetwork, durations: &[f64]) -> NetworkRealization {
    assert_eq!(durations.len(), net.len(), "one duration per activity");
    let n = net.len();
    let mut es = vec![0.0; n];
    let mut ef = vec![0.0; n];
    for &v in net.topological_order() {
        let start = net.preds[v].iter().map(|&p| ef[p]).fold(0.0, f64::max);
        es[v] = start;
        ef[v] = start + durations[v];
    }
    let completion = ef.iter().copied().fold(0.0, f64::max);
    let mut lf = vec![completion; n];
    for &v in net.topological_order().iter().rev() {
        if let Some(min_ls) = net.succs[v]
            .iter()
            .map(|&s| lf[s] - durations[s])
            .min_by(f64::total_cmp)
        {
            lf[v] = min_ls;
        }
    }
    let total_float: Vec<f64> = (0..n).map(|i| lf[i] - ef[i]).collect();
    let tol = FLOAT_EPS * completion.max(1.0);
    let critical_path = (0..n)
        .filter(|&i| total_float[i].abs() <= tol)
        .map(|i| net.spec.activities[i].id)
        .collect();
    NetworkRealization {
        durations: durations.to_vec(),
        early_start: es,
        early_finish: ef,
        total_float,
        completion,
        critical_path,
    }
}

/// Completion time only; the hot path inside the optimiser.
pub fn completion_time(net: &ProjectNetwork, durations: &[f64]) -> f64 {
    let mut ef = vec![0.0; net.len()];
    let mut completion: f64 = 0.0;
    for &v in net.topological_order() {
        let start = net.preds[v].iter().map(|&p| ef[p]).fold(0.0, f64::max);
        ef[v] = start + durations[v];
        completion = completion.max(ef[v]);
    }
    completion
}

/// Apply every allocated measure, in measure order, to its related activity.
/// Each reduction is `min(sampled capacity, current duration)`, so durations
/// never go negative. Returns the new durations and the reduction each
/// measure actually achieved (zero when not allocated).
pub fn apply_measures(
    net: &ProjectNetwork,
    durations: &[f64],
    allocations: &[bool],
    measures: &[ControlMeasure],
    samples: &[MeasureSample],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if allocations.len() != measures.len() || samples.len() != measures.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} allocations, {} measures, {} samples",
            allocations.len(),
            measures.len(),
            samples.len()
        )));
    }
    let mut out = durations.to_vec();
    let mut applied = vec![0.0; measures.len()];
    for (n, measure) in measures.iter().enumerate() {
        if !allocations[n] {
            continue;
        }
        let idx = net.index_of(measure.activity).ok_or_else(|| Error::UnknownActivity {
            activity: measure.activity,
            referrer: format!("measure {}", measure.id),
        })?;
        let reduction = samples[n].capacity.max(0.0).min(out[idx]);
        out[idx] -= reduction;
        applied[n] = reduction;
    }
    Ok((out, applied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Unit;

    fn est(a: f64, m: f64, b: f64) -> ThreePointEstimate {
        ThreePointEstimate::new(a, m, b, Unit::Days).unwrap()
    }

    fn act(id: ActivityId, d: f64, preds: &[ActivityId]) -> Activity {
        Activity {
            id,
            description: format!("activity {id}"),
            duration: est(d, d, d),
            predecessors: preds.to_vec(),
        }
    }

    fn net(acts: Vec<Activity>) -> ProjectNetwork {
        ProjectNetwork::new(NetworkSpec { activities: acts, ..Default::default() }).unwrap()
    }

    #[test]
    fn chain_is_valid() {
        let spec = NetworkSpec {
            activities: vec![act(1, 3.0, &[]), act(2, 4.0, &[1])],
            ..Default::default()
        };
        let report = validate_network(&spec);
        assert!(report.is_valid());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn self_loop_is_reported() {
        let spec = NetworkSpec { activities: vec![act(7, 1.0, &[7])], ..Default::default() };
        let report = validate_network(&spec);
        assert_eq!(report.errors, vec![Issue::Cycle { activities: vec![7, 7] }]);
        assert!(report.errors[0].to_string().contains('7'));
    }

    #[test]
    fn longer_cycle_and_dangling_reference() {
        let spec = NetworkSpec {
            activities: vec![act(1, 1.0, &[3]), act(2, 1.0, &[1]), act(3, 1.0, &[2, 9])],
            ..Default::default()
        };
        let report = validate_network(&spec);
        assert!(report.errors.iter().any(|e| matches!(e, Issue::Cycle { .. })));
        assert!(report
            .errors
            .iter()
            .any(|e| matches!(e, Issue::DanglingReference { to: 9, .. })));
        assert!(ProjectNetwork::new(spec).is_err());
    }

    #[test]
    fn risk_probability_and_reference_checks() {
        let spec = NetworkSpec {
            activities: vec![act(1, 1.0, &[])],
            risks: vec![RiskEvent {
                id: 1,
                description: "r".into(),
                impact: est(1.0, 1.0, 1.0),
                activities: vec![1, 4],
                probability: 1.2,
            }],
            ..Default::default()
        };
        let report = validate_network(&spec);
        assert_eq!(report.errors.len(), 2);
    }

    #[test]
    fn chain_forward_pass() {
        let n = net(vec![act(1, 3.0, &[]), act(2, 4.0, &[1])]);
        let r = forward_pass(&n, &n.modal_durations());
        assert_eq!(r.completion, 7.0);
        assert_eq!(r.critical_path, vec![1, 2]);
    }

    #[test]
    fn diamond_forward_pass() {
        let n = net(vec![
            act(1, 1.0, &[]),
            act(2, 5.0, &[1]),
            act(3, 2.0, &[1]),
            act(4, 1.0, &[2, 3]),
        ]);
        let r = forward_pass(&n, &n.modal_durations());
        assert_eq!(r.completion, 7.0);
        assert_eq!(r.critical_path, vec![1, 2, 4]);
        assert_eq!(r.total_float[2], 3.0);
        assert_eq!(completion_time(&n, &n.modal_durations()), 7.0);
    }

    #[test]
    fn parallel_terminals_share_virtual_sink() {
        let n = net(vec![act(1, 2.0, &[]), act(2, 5.0, &[]), act(3, 5.0, &[1])]);
        let r = forward_pass(&n, &n.modal_durations());
        assert_eq!(r.completion, 7.0);
        assert_eq!(r.critical_path, vec![1, 3]);
        assert_eq!(n.terminals(), vec![1, 2]);
    }

    #[test]
    fn milestone_realizes_to_zero() {
        let n = net(vec![act(1, 0.0, &[])]);
        assert_eq!(realize_durations(&n, RngHandle::new(1, 1)), vec![0.0]);
    }

    #[test]
    fn certain_risk_adds_impact() {
        let spec = NetworkSpec {
            activities: vec![act(1, 10.0, &[])],
            risks: vec![RiskEvent {
                id: 1,
                description: "certain".into(),
                impact: est(5.0, 5.0, 5.0),
                activities: vec![1],
                probability: 1.0,
            }],
            ..Default::default()
        };
        let n = ProjectNetwork::new(spec).unwrap();
        assert_eq!(realize_durations(&n, RngHandle::new(9, 0)), vec![15.0]);
    }

    #[test]
    fn negative_factor_clamps_at_zero() {
        let spec = NetworkSpec {
            activities: vec![act(1, 2.0, &[])],
            shared_factors: vec![SharedFactor {
                id: 1,
                description: "f".into(),
                deviation: est(-10.0, -10.0, -10.0),
                activities: vec![1],
            }],
            ..Default::default()
        };
        let n = ProjectNetwork::new(spec).unwrap();
        assert_eq!(realize_durations(&n, RngHandle::new(0, 0)), vec![0.0]);
    }

    fn measure(id: u32, activity: ActivityId, capacity: f64) -> (ControlMeasure, MeasureSample) {
        (
            ControlMeasure {
                id,
                description: String::new(),
                activity,
                capacity: est(capacity, capacity, capacity),
                cost: ThreePointEstimate::point(0.0, Unit::Currency).unwrap(),
                nuisance: ThreePointEstimate::point(0.0, Unit::NuisancePoints).unwrap(),
                eta: 0.5,
            },
            MeasureSample { capacity, cost: 0.0, nuisance: 0.0 },
        )
    }

    #[test]
    fn measures_unallocated_change_nothing() {
        let n = net(vec![act(1, 100.0, &[])]);
        let (m, s) = measure(1, 1, 51.0);
        let (d, r) = apply_measures(&n, &[100.0], &[false], &[m], &[s]).unwrap();
        assert_eq!(d, vec![100.0]);
        assert_eq!(r, vec![0.0]);
    }

    #[test]
    fn measure_reduction_clamps_to_duration() {
        let n = net(vec![act(1, 100.0, &[]), act(2, 30.0, &[])]);
        let (m, s) = measure(1, 1, 127.0);
        let (d, r) = apply_measures(&n, &[100.0, 30.0], &[true], &[m], &[s]).unwrap();
        assert_eq!(d, vec![0.0, 30.0]);
        assert_eq!(r, vec![100.0]);
    }

    #[test]
    fn permitting_administrators_at_mode() {
        let n = net(vec![act(8, 100.0, &[])]);
        let (m, s) = measure(4, 8, 51.0);
        let (d, r) = apply_measures(&n, &[100.0], &[true], &[m], &[s]).unwrap();
        assert_eq!(d, vec![49.0]);
        assert_eq!(r, vec![51.0]);
    }

    #[test]
    fn measure_on_unknown_activity() {
        let n = net(vec![act(1, 10.0, &[])]);
        let (m, s) = measure(1, 99, 5.0);
        let err = apply_measures(&n, &[10.0], &[true], &[m], &[s]).unwrap_err();
        assert!(matches!(err, Error::UnknownActivity { activity: 99, .. }));
    }
}
