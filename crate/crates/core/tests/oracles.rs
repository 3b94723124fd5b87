mod common;

use common::*;
use odycon_core::network::{completion_time, forward_pass, Activity, NetworkSpec, ProjectNetwork};
use odycon_core::objectives::Objective;
use odycon_core::offshore::{simulate_fleet, OffshoreActivity, OffshoreParams, VesselSpec};
use odycon_core::optimizer::{optimize, DecisionVector, GaConfig, OptimizationMode};
use odycon_core::sampling::{sample_beta_pert, sample_risk_occurrence, ThreePointEstimate, Unit};
use odycon_core::RngHandle;

#[test]
fn saa_modal_schedule_matches_path_enumeration() {
    let s = saa();
    let net = &control(&s).network;
    let modal = net.modal_durations();
    let cpm = completion_time(net, &modal);
    assert_eq!(cpm, longest_path(net, &modal));
    assert_eq!(cpm, 1466.0);

    let schedule = forward_pass(net, &modal);
    let expected = [1, 4, 5, 6, 14, 16, 17, 18, 19, 28, 29, 30, 31, 33, 35, 36, 37];
    assert_eq!(schedule.critical_path, expected);
}

#[test]
fn saa_sampled_schedules_match_path_enumeration() {
    let s = saa();
    let case = control(&s);
    for i in 0..200 {
        let real = case.realize(RngHandle::for_iteration(11, i));
        assert_eq!(real.unmitigated, longest_path(&case.network, &real.durations), "iteration {i}");
    }
}

/// Event loop written without a priority queue: repeatedly pick the loaded
/// vessel that frees up first (lowest index on ties).
fn trace_oracle(counts: &[u32], params: &OffshoreParams, specs: &[VesselSpec], handle: RngHandle) -> (f64, Vec<(u32, f64)>) {
    struct V {
        kind: usize,
        rng: rand_chacha::ChaCha8Rng,
        clock: f64,
        installed: u32,
        active: bool,
    }
    fn risks<R: rand::Rng>(base: f64, params: &OffshoreParams, what: OffshoreActivity, rng: &mut R) -> f64 {
        let mut t = base;
        for r in params.risks.iter().filter(|r| r.activity == what) {
            let hit = sample_risk_occurrence(r.probability, rng).unwrap();
            let d = sample_beta_pert(&r.impact, rng);
            if hit {
                t += d;
            }
        }
        t
    }
    fn install(v: &mut V, n: u32, params: &OffshoreParams) {
        for _ in 0..n {
            let base = sample_beta_pert(&params.installation, &mut v.rng);
            v.clock += risks(base, params, OffshoreActivity::Installation, &mut v.rng);
        }
        v.installed += n;
    }

    let mut fleet: Vec<V> = Vec::new();
    for (t, &x) in counts.iter().enumerate() {
        for j in 0..x {
            fleet.push(V { kind: t, rng: handle.substream2(t as u64, j as u64).rng(), clock: 0.0, installed: 0, active: false });
        }
    }
    let mut left = params.total_anchors;
    for v in fleet.iter_mut() {
        let n = specs[v.kind].deck_space.min(left);
        left -= n;
        if n > 0 {
            v.active = true;
            install(v, n, params);
        }
    }
    while left > 0 {
        let next = (0..fleet.len())
            .filter(|&i| fleet[i].active)
            .min_by(|&a, &b| fleet[a].clock.total_cmp(&fleet[b].clock).then(a.cmp(&b)))
            .unwrap();
        let v = &mut fleet[next];
        let n = specs[v.kind].deck_space.min(left);
        left -= n;
        let bunker = sample_beta_pert(&specs[v.kind].bunkering, &mut v.rng);
        v.clock += risks(bunker, params, OffshoreActivity::Bunkering, &mut v.rng);
        install(v, n, params);
    }
    let span = fleet.iter().map(|v| v.clock).fold(0.0, f64::max);
    (span, fleet.iter().map(|v| (v.installed, v.clock)).collect())
}

#[test]
fn fleet_simulation_matches_event_trace() {
    let s = offshore();
    let p = planning(&s);
    for x in s.decision_space().enumerate() {
        if x.0.iter().all(|&v| v == 0) {
            continue;
        }
        for seed in 0..5 {
            let h = RngHandle::new(seed, 3);
            let fleet = simulate_fleet(&x.0, &p.params, &p.vessels, h).unwrap();
            let (span, runs) = trace_oracle(&x.0, &p.params, &p.vessels, h);
            assert_eq!(fleet.duration, span, "{x}");
            let got: Vec<(u32, f64)> = fleet.vessels.iter().map(|v| (v.anchors_installed, v.active_duration)).collect();
            assert_eq!(got, runs, "{x}");
            assert_eq!(fleet.anchors_installed(), 108);
        }
    }
}

#[test]
fn two_vessels_halve_installation_span() {
    let spec = VesselSpec {
        name: "barge".into(),
        lower: 0,
        upper: 2,
        deck_space: 16,
        day_rate: 35_000.0,
        utilisation_probability: 0.5,
        emissions: 35.0,
        bunkering: ThreePointEstimate::point(2.5, Unit::Days).unwrap(),
    };
    // two full decks each: one bunkering per vessel in both fleets
    let params = OffshoreParams::for_tests(64, 10.0);
    let h = RngHandle::new(0, 0);
    let one = trace_oracle(&[1], &params, std::slice::from_ref(&spec), h).0;
    let two = simulate_fleet(&[2], &params, std::slice::from_ref(&spec), h).unwrap().duration;
    // 1 vessel: 4 decks, 3 bunkerings; 2 vessels: 2 decks, 1 bunkering each
    assert_eq!(one, 64.0 + 3.0 * 2.5);
    assert_eq!(two, 32.0 + 2.5);
    assert_eq!(one - 3.0 * 2.5, 2.0 * (two - 2.5));
}

#[test]
fn ga_matches_enumeration_on_four_measures() {
    let s = saa();
    let case = restricted(control(&s), &[1, 3, 9, 16]);
    let space = binary_space(&case);
    assert_eq!(space.size(), 16);
    let mut hits = 0;
    for trial in 0..100u64 {
        let h = RngHandle::for_iteration(99, trial);
        let real = case.realize(h.substream(10));
        let model = s.preference_model(Some(real.unmitigated)).unwrap();
        let eval = |x: &DecisionVector| case.evaluate(&real, x);
        let r = optimize(&space, eval, Some(&model), OptimizationMode::Moo, &s.ga, h.substream(12)).unwrap();
        let reference = r.reference.as_ref().expect("population reference");
        let best = moo_oracle(&space, |x| case.evaluate(&real, x).unwrap(), &model, reference);
        if r.score >= best - 1e-12 {
            hits += 1;
        }
    }
    assert!(hits >= 95, "GA matched enumeration in {hits}/100 trials");
}

#[test]
fn ga_soo_cost_matches_offshore_grid() {
    let s = offshore();
    let p = planning(&s);
    let space = s.decision_space();
    let mode = s.mode(odycon_core::ModeChoice::Soo(Objective::Cost)).unwrap();
    for trial in 0..20u64 {
        let h = RngHandle::for_iteration(5, trial);
        let r = optimize(&space, |x| p.evaluate(h, x), None, mode, &s.ga, h.substream(12)).unwrap();
        let best = soo_min_oracle(&space, Objective::Cost, |x| p.evaluate(h, x).ok());
        assert_eq!(r.evaluation.objectives.get(Objective::Cost).unwrap(), best, "trial {trial}");
    }
}

#[test]
fn ga_honours_declared_constraint() {
    let s = offshore();
    let p = planning(&s);
    let mut space = s.decision_space();
    // at most two vessels in total
    space.constraints.push(odycon_core::optimizer::LinearConstraint {
        name: "fleet cap".into(),
        kind: odycon_core::optimizer::ConstraintKind::Inequality,
        coefficients: vec![1.0, 1.0, 1.0],
        rhs: 2.0,
    });
    let h = RngHandle::new(1, 1);
    let mode = OptimizationMode::soo_min(Objective::Duration);
    let r = optimize(&space, |x| p.evaluate(h, x), None, mode, &GaConfig::default(), h.substream(12)).unwrap();
    assert!(r.best.0.iter().sum::<u32>() <= 2);
    let best = soo_min_oracle(&space, Objective::Duration, |x| p.evaluate(h, x).ok());
    assert_eq!(r.evaluation.objectives.get(Objective::Duration).unwrap(), best);
}

#[test]
fn random_dags_match_path_enumeration() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let n = rng.gen_range(1..=12u32);
        let activities = (1..=n)
            .map(|id| Activity {
                id,
                description: String::new(),
                duration: ThreePointEstimate::point(0.0, Unit::Days).unwrap(),
                predecessors: (1..id).filter(|_| rng.gen_bool(0.3)).collect(),
            })
            .collect();
        let net = ProjectNetwork::new(NetworkSpec { activities, ..Default::default() }).unwrap();
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        assert_eq!(completion_time(&net, &d), longest_path(&net, &d));
    }
}
