//! Discrete-event simulation of a vessel fleet installing anchors from a
//! shared pool.
//!
//! Each vessel starts with a full deck, installs its load one anchor at a
//! time, and goes bunkering whenever its deck is empty and anchors remain in
//! the pool. The vessel whose deck empties first draws from the pool first
//! (ties go to the lower instance index).

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::sampling::{sample_beta_pert, sample_risk_occurrence, ThreePointEstimate, Unit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VesselSpec {
    pub name: String,
    pub lower: u32,
    pub upper: u32,
    /// Anchors per deck load.
    pub deck_space: u32,
    /// R_i, currency per day.
    pub day_rate: f64,
    /// p_i.
    pub utilisation_probability: f64,
    /// E_i, tonnes CO2 per day.
    pub emissions: f64,
    pub bunkering: ThreePointEstimate,
}

impl VesselSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lower > self.upper {
            return Err(Error::InvalidConfig(format!(
                "vessel `{}`: lower bound {} exceeds upper bound {}",
                self.name, self.lower, self.upper
            )));
        }
        if self.deck_space == 0 {
            return Err(Error::InvalidConfig(format!("vessel `{}`: deck space must be >= 1", self.name)));
        }
        if !(0.0..=1.0).contains(&self.utilisation_probability) {
            return Err(Error::InvalidProbability(self.utilisation_probability));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffshoreActivity {
    Installation,
    Bunkering,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffshoreRisk {
    pub description: String,
    pub impact: ThreePointEstimate,
    pub activity: OffshoreActivity,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffshoreParams {
    /// n_a.
    pub total_anchors: u32,
    pub anchors_per_turbine: u32,
    /// M_a, tonnes.
    pub anchor_mass: f64,
    /// Duration of installing one anchor.
    pub installation: ThreePointEstimate,
    pub risks: Vec<OffshoreRisk>,
}

impl OffshoreParams {
    pub fn validate(&self) -> Result<()> {
        if self.total_anchors == 0 {
            return Err(Error::InvalidConfig("total anchors must be > 0".into()));
        }
        if !(self.anchor_mass > 0.0) {
            return Err(Error::InvalidConfig("anchor mass must be > 0".into()));
        }
        for r in &self.risks {
            if !(0.0..=1.0).contains(&r.probability) {
                return Err(Error::InvalidProbability(r.probability));
            }
        }
        Ok(())
    }

    #[doc(hidden)]
    pub fn for_tests(total_anchors: u32, anchor_mass: f64) -> Self {
        Self {
            total_anchors,
            anchors_per_turbine: 3,
            anchor_mass,
            installation: ThreePointEstimate::point(1.0, Unit::Days).expect("finite"),
            risks: Vec::new(),
        }
    }
}

/// One vessel instance's share of the work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VesselRun {
    /// Index into the vessel spec list.
    pub vessel_type: usize,
    pub anchors_installed: u32,
    /// t_i: finish time of this vessel's last installation (0 if it never
    /// received anchors).
    pub active_duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetRealization {
    /// Finish time of the last anchor.
    pub duration: f64,
    pub vessels: Vec<VesselRun>,
}

impl FleetRealization {
    pub fn anchors_installed(&self) -> u32 {
        self.vessels.iter().map(|v| v.anchors_installed).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    vessel: usize,
}

impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.vessel.cmp(&other.vessel))
    }
}

struct Vessel<R> {
    vessel_type: usize,
    rng: R,
    installed: u32,
    clock: f64,
}

fn with_risks<R: Rng>(
    base: f64,
    risks: &[OffshoreRisk],
    activity: OffshoreActivity,
    rng: &mut R,
) -> f64 {
    let mut total = base;
    for risk in risks.iter().filter(|r| r.activity == activity) {
        let occurs = sample_risk_occurrence(risk.probability, rng).unwrap_or(false);
        let impact = sample_beta_pert(&risk.impact, rng);
        if occurs {
            total += impact;
        }
    }
    total
}

pub fn check_fleet(counts: &[u32], specs: &[VesselSpec]) -> Result<()> {
    if counts.len() != specs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vessel counts for {} vessel types",
            counts.len(),
            specs.len()
        )));
    }
    for (x, s) in counts.iter().zip(specs) {
        if *x < s.lower || *x > s.upper {
            return Err(Error::Infeasible(format!(
                "{} count {} outside [{}, {}]",
                s.name, x, s.lower, s.upper
            )));
        }
    }
    if counts.iter().all(|&x| x == 0) {
        return Err(Error::Infeasible("fleet size: at least one vessel is required".into()));
    }
    Ok(())
}

/// Run the installation sequence for a fleet of `counts[i]` vessels of
/// type `i`. Instance `j` of type `i` draws from its own sub-stream of
/// `handle`, so a vessel's samples do not depend on which other vessels are
/// in the fleet.
pub fn simulate_fleet(
    counts: &[u32],
    params: &OffshoreParams,
    specs: &[VesselSpec],
    handle: RngHandle,
) -> Result<FleetRealization> {
    check_fleet(counts, specs)?;
    let mut vessels = Vec::new();
    for (t, &x) in counts.iter().enumerate() {
        for j in 0..x {
            vessels.push(Vessel {
                vessel_type: t,
                rng: handle.substream2(t as u64, j as u64).rng(),
                installed: 0,
                clock: 0.0,
            });
        }
    }

    let install = |v: &mut Vessel<_>, load: u32| {
        for _ in 0..load {
            let base = sample_beta_pert(&params.installation, &mut v.rng);
            v.clock += with_risks(base, &params.risks, OffshoreActivity::Installation, &mut v.rng);
        }
        v.installed += load;
    };

    let mut pool = params.total_anchors;
    let mut queue = BinaryHeap::new();
    for (i, v) in vessels.iter_mut().enumerate() {
        let load = specs[v.vessel_type].deck_space.min(pool);
        pool -= load;
        if load > 0 {
            install(v, load);
            queue.push(Reverse(Event { time: v.clock, vessel: i }));
        }
    }
    while pool > 0 {
        let Some(Reverse(ev)) = queue.pop() else { break };
        let v = &mut vessels[ev.vessel];
        let spec = &specs[v.vessel_type];
        let load = spec.deck_space.min(pool);
        pool -= load;
        let bunker = sample_beta_pert(&spec.bunkering, &mut v.rng);
        v.clock += with_risks(bunker, &params.risks, OffshoreActivity::Bunkering, &mut v.rng);
        install(v, load);
        queue.push(Reverse(Event { time: v.clock, vessel: ev.vessel }));
    }

    let runs: Vec<VesselRun> = vessels
        .iter()
        .map(|v| VesselRun {
            vessel_type: v.vessel_type,
            anchors_installed: v.installed,
            active_duration: v.clock,
        })
        .collect();
    let duration = runs.iter().map(|r| r.active_duration).fold(0.0, f64::max);
    Ok(FleetRealization { duration, vessels: runs })
}
