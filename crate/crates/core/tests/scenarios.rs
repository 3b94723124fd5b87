mod common;

use common::*;
use odycon_core::engine::{run, ModeChoice};
use odycon_core::network::{realize_durations, NetworkSpec, ProjectNetwork};
use odycon_core::objectives::{anchor_cost, Objective};
use odycon_core::optimizer::check_constraints;
use odycon_core::preference::WeightScheme;
use odycon_core::scenario::{self, all_estimates};
use odycon_core::RngHandle;

#[test]
fn saa_tables_are_complete() {
    let s = saa();
    let c = control(&s);
    assert_eq!(c.network.len(), 37);
    assert_eq!(c.network.spec().shared_factors.len(), 14);
    assert_eq!(c.network.spec().risks.len(), 19);
    assert_eq!(c.measures.len(), 27);
    assert!(s.warnings.is_empty(), "{:?}", s.warnings);
    assert_eq!(c.params.target_duration, 1466.0);
    // read from cents
    assert_eq!(c.measures[21].cost.a(), 166_000.0);
    assert_eq!(c.measures[14].cost.m(), 1_500_000.0);
    let total: f64 = c.measures.iter().map(|m| m.cost.m()).sum();
    assert_eq!(total, 7_233_000.0);
}

#[test]
fn saa_weights_match_table() {
    let s = saa();
    let w = s.weights.criterion_weights();
    let get = |o| w.iter().find(|(x, _)| *x == o).map(|(_, v)| *v).unwrap();
    assert!((get(Objective::Duration) - 0.70).abs() < 1e-12);
    assert!((get(Objective::Cost) - 0.15).abs() < 1e-12);
    assert!((get(Objective::Nuisance) - 0.15).abs() < 1e-12);
}

#[test]
fn offshore_weights_match_table() {
    let s = offshore();
    let eff = WeightScheme::effective(&s.weights);
    let find = |k: &str, o| eff.iter().find(|(n, x, _)| n == k && *x == o).map(|e| e.2).unwrap();
    assert!((find("Energy provider", Objective::Duration) - 0.30).abs() < 1e-12);
    assert!((find("Energy provider", Objective::Emissions) - 0.20).abs() < 1e-12);
    assert!((find("Marine contractor", Objective::Cost) - 0.35).abs() < 1e-12);
    assert!((find("Marine contractor", Objective::FleetUtilisation) - 0.15).abs() < 1e-12);
    s.weights.validate().unwrap();
}

#[test]
fn offshore_tables_are_complete() {
    let s = offshore();
    let p = planning(&s);
    assert_eq!(p.vessels.len(), 3);
    assert_eq!(p.params.risks.len(), 8);
    assert_eq!(p.params.total_anchors, 108);
    assert_eq!(p.vessels[0].day_rate, 47_000.0);
    // the large OCV triple is published out of order
    assert_eq!(s.warnings.len(), 1);
    assert!(s.warnings[0].contains("large OCV"));
    let b = &p.vessels[1].bunkering;
    assert_eq!((b.a(), b.m(), b.b()), (1.4, 1.6, 2.0));
    let space = s.decision_space();
    assert_eq!(space.size(), 36);
    assert_eq!(space.enumerate().iter().filter(|x| check_constraints(x, &space).feasible).count(), 35);
}

#[test]
fn empty_fleet_violates_fleet_size() {
    let s = offshore();
    let f = check_constraints(&odycon_core::optimizer::DecisionVector(vec![0, 0, 0]), &s.decision_space());
    assert!(!f.feasible);
    assert!(f.violations.iter().any(|v| v.contains("fleet size")), "{:?}", f.violations);
}

#[test]
fn anchor_cost_with_configured_mass() {
    let s = offshore();
    let mut params = planning(&s).params.clone();
    params.anchor_mass = 10.0;
    assert_eq!(anchor_cost(&params), 5_200_200.0);
}

#[test]
fn design_activity_realized_mean() {
    // activity 3 and shared factor 11 alone
    let s = saa();
    let full = control(&s).network.spec();
    let design = full.activities.iter().find(|a| a.id == 3).unwrap().clone();
    let mut factor = full.shared_factors.iter().find(|f| f.id == 11).unwrap().clone();
    factor.activities = vec![3];
    let mut own = design.clone();
    own.predecessors.clear();
    let net = ProjectNetwork::new(NetworkSpec {
        activities: vec![own],
        shared_factors: vec![factor.clone()],
        ..Default::default()
    })
    .unwrap();
    let n = 100_000;
    let draws: Vec<f64> = (0..n).map(|i| realize_durations(&net, RngHandle::for_iteration(8, i))[0]).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let expected = design.duration.mean() + factor.deviation.mean();
    assert_eq!(expected, 994.0);
    let sd = (design.duration.std_dev().powi(2) + factor.deviation.std_dev().powi(2)).sqrt();
    assert!((mean - expected).abs() < 4.0 * sd / (n as f64).sqrt(), "mean {mean}");

    // with risk 1 as well (probability 0.2 on the same activity)
    let risk = full.risks.iter().find(|r| r.id == 1).unwrap();
    let with_risk = expected + risk.probability * risk.impact.mean();
    let c = control(&s);
    let i3 = c.network.index_of(3).unwrap();
    let draws: Vec<f64> = (0..n).map(|i| realize_durations(&c.network, RngHandle::for_iteration(8, i))[i3]).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    assert!((mean - with_risk).abs() < 1.0, "mean {mean} vs {with_risk}");
}

#[test]
fn every_estimate_is_ordered() {
    for s in [saa(), offshore()] {
        for (label, e) in all_estimates(&s) {
            assert!(e.a() <= e.m() && e.m() <= e.b(), "{label}");
        }
    }
}

#[test]
fn offshore_moo_full_run_is_feasible() {
    let s = offshore();
    let records = run(&s, ModeChoice::Moo).unwrap();
    assert_eq!(records.len(), 2000);
    let space = s.decision_space();
    for r in &records {
        assert!(check_constraints(&r.decision, &space).feasible, "{}", r.decision);
        assert!(r.optimized);
    }
}

#[test]
fn no_delay_iterations_keep_empty_allocation() {
    let mut s = saa();
    s.iterations = 60;
    let records = run(&s, ModeChoice::Moo).unwrap();
    let on_time: Vec<_> = records.iter().filter(|r| r.unmitigated_duration.unwrap() <= 1466.0).collect();
    for r in &on_time {
        assert!(!r.optimized && r.score.is_none());
        assert!(r.decision.0.iter().all(|&v| v == 0));
        assert_eq!(r.objectives.get(Objective::Cost), Some(0.0));
    }
    for r in records.iter().filter(|r| r.optimized) {
        assert!(r.unmitigated_duration.unwrap() > 1466.0);
    }
}

#[test]
fn invalid_files_report_every_problem() {
    let text = std::fs::read_to_string(scenario_path("saa_control.toml")).unwrap();
    let broken = text
        .replacen("predecessors = [2, 4]", "predecessors = [2, 4, 99]", 1)
        .replacen("probability = 0.2\n", "probability = 1.2\n", 1)
        .replacen("activity = 3\n", "activity = 300\n", 1);
    let file = scenario::parse(&broken).unwrap();
    let (built, report) = scenario::build(&file);
    assert!(built.is_none());
    let all: Vec<String> = report.errors.iter().map(|e| e.to_string()).collect();
    assert!(all.iter().any(|e| e.contains("99")), "{all:?}");
    assert!(all.iter().any(|e| e.contains("1.2")), "{all:?}");
    assert!(all.iter().any(|e| e.contains("300")), "{all:?}");
}
