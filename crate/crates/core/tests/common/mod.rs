//! Helpers shared by the integration tests: bundled scenario loading and
//! brute-force oracles.
#![allow(dead_code)]

use std::path::PathBuf;

use odycon_core::engine::{Case, ControlCase, PlanningCase, Scenario};
use odycon_core::network::ProjectNetwork;
use odycon_core::objectives::Objective;
use odycon_core::optimizer::{check_constraints, DecisionSpace, DecisionVector, Evaluation};
use odycon_core::preference::{Normalization, PreferenceModel};
use odycon_core::scenario;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

pub fn saa() -> Scenario {
    scenario::load_path(scenario_path("saa_control.toml")).expect("bundled SAA scenario").0
}

pub fn offshore() -> Scenario {
    scenario::load_path(scenario_path("offshore_planning.toml")).expect("bundled offshore scenario").0
}

pub fn control(s: &Scenario) -> &ControlCase {
    match &s.case {
        Case::Control(c) => c,
        Case::Planning(_) => panic!("expected a control scenario"),
    }
}

pub fn planning(s: &Scenario) -> &PlanningCase {
    match &s.case {
        Case::Planning(p) => p,
        Case::Control(_) => panic!("expected a planning scenario"),
    }
}

/// The control case with only the listed measures (by id).
pub fn restricted(case: &ControlCase, ids: &[u32]) -> ControlCase {
    ControlCase {
        network: case.network.clone(),
        measures: case.measures.iter().filter(|m| ids.contains(&m.id)).cloned().collect(),
        params: case.params,
    }
}

pub fn binary_space(case: &ControlCase) -> DecisionSpace {
    DecisionSpace::binary(case.measures.iter().map(|m| format!("x_{}", m.id)).collect())
}

/// Longest source-to-sink path by explicit enumeration of every path.
pub fn longest_path(net: &ProjectNetwork, durations: &[f64]) -> f64 {
    fn walk(net: &ProjectNetwork, d: &[f64], v: usize, acc: f64, best: &mut f64) {
        let here = acc + d[v];
        let succ = net.successors(v);
        if succ.is_empty() {
            *best = best.max(here);
        }
        for &s in succ {
            walk(net, d, s, here, best);
        }
    }
    let mut best = 0.0;
    for v in 0..net.len() {
        if net.predecessors(v).is_empty() {
            walk(net, durations, v, 0.0, &mut best);
        }
    }
    best
}

/// Highest aggregated score over every feasible vector, each scored against
/// the same reference population.
pub fn moo_oracle<F>(
    space: &DecisionSpace,
    evaluate: F,
    model: &PreferenceModel,
    reference: &Normalization,
) -> f64
where
    F: Fn(&DecisionVector) -> Evaluation,
{
    let w = model.weights();
    space
        .enumerate()
        .iter()
        .filter(|x| check_constraints(x, space).feasible)
        .map(|x| reference.score(&model.points(&evaluate(x).objectives).unwrap(), &w))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Lowest value of `objective` over every feasible vector.
pub fn soo_min_oracle<F>(space: &DecisionSpace, objective: Objective, evaluate: F) -> f64
where
    F: Fn(&DecisionVector) -> Option<Evaluation>,
{
    space
        .enumerate()
        .iter()
        .filter(|x| check_constraints(x, space).feasible)
        .filter_map(evaluate)
        .map(|e| e.objectives.get(objective).unwrap())
        .fold(f64::INFINITY, f64::min)
}
