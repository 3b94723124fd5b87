//! Genetic-algorithm search over integer or binary decision vectors.
//!
//! The landscape is deterministic for the duration of one search: callers
//! freeze all random samples before calling [`optimize`]. In preference
//! mode the fitness of a member is its aggregated preference score relative
//! to the feasible members of the current generation.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{CompletionDeltas, DeltaRates, Objective, ObjectiveVector};
use crate::preference::{Normalization, PreferenceModel};
use crate::rng::RngHandle;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DecisionVector(pub Vec<u32>);

impl DecisionVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn as_bools(&self) -> Vec<bool> {
        self.0.iter().map(|&v| v != 0).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DecisionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for DecisionVector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Self(Vec::new()));
        }
        s.split(';')
            .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("decision `{t}`: {e}"))))
            .collect::<Result<_>>()
            .map(Self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// `g(x) <= 0`
    Inequality,
    /// `h(x) = 0`
    Equality,
}

/// `g(x) = coefficients . x - rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub name: String,
    pub kind: ConstraintKind,
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

pub const EQUALITY_TOLERANCE: f64 = 1e-9;

impl LinearConstraint {
    pub fn value(&self, x: &DecisionVector) -> f64 {
        self.coefficients.iter().zip(&x.0).map(|(c, v)| c * *v as f64).sum::<f64>() - self.rhs
    }

    pub fn satisfied(&self, x: &DecisionVector) -> bool {
        let g = self.value(x);
        match self.kind {
            ConstraintKind::Inequality => g <= 0.0,
            ConstraintKind::Equality => g.abs() <= EQUALITY_TOLERANCE,
        }
    }
}

/// Bounds, domain and declared constraints of the decision variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionSpace {
    pub names: Vec<String>,
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
    pub binary: bool,
    /// Minimum of `sum x_i` (the fleet-size rule of the planning case).
    pub min_total: Option<u32>,
    pub constraints: Vec<LinearConstraint>,
}

impl DecisionSpace {
    pub fn binary(names: Vec<String>) -> Self {
        let n = names.len();
        Self {
            names,
            lower: vec![0; n],
            upper: vec![1; n],
            binary: true,
            min_total: None,
            constraints: Vec::new(),
        }
    }

    pub fn integer(names: Vec<String>, lower: Vec<u32>, upper: Vec<u32>) -> Self {
        Self { names, lower, upper, binary: false, min_total: None, constraints: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Number of points in the bounded grid.
    pub fn size(&self) -> u128 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u.saturating_sub(*l) as u128) + 1)
            .product()
    }

    /// Every point of the bounded grid in lexicographic order.
    pub fn enumerate(&self) -> Vec<DecisionVector> {
        let mut out = Vec::new();
        let mut cur = self.lower.clone();
        if cur.is_empty() {
            return vec![DecisionVector(cur)];
        }
        loop {
            out.push(DecisionVector(cur.clone()));
            let mut k = cur.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if cur[k] < self.upper[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = self.lower[k];
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub violations: Vec<String>,
}

pub fn check_constraints(x: &DecisionVector, space: &DecisionSpace) -> Feasibility {
    let mut violations = Vec::new();
    if x.len() != space.dim() {
        violations.push(format!("dimension: {} values for {} variables", x.len(), space.dim()));
        return Feasibility { feasible: false, violations };
    }
    for (i, &v) in x.0.iter().enumerate() {
        if space.binary && v > 1 {
            violations.push(format!("binary domain: {} = {v}", space.names[i]));
        } else if v < space.lower[i] || v > space.upper[i] {
            violations.push(format!(
                "bounds: {} = {v} outside [{}, {}]",
                space.names[i], space.lower[i], space.upper[i]
            ));
        }
    }
    if let Some(min) = space.min_total {
        let total: u64 = x.0.iter().map(|&v| v as u64).sum();
        if total < min as u64 {
            violations.push(format!("fleet size: {total} vessels, at least {min} required"));
        }
    }
    for c in &space.constraints {
        if c.coefficients.len() != x.len() {
            violations.push(format!("{}: {} coefficients for {} variables", c.name, c.coefficients.len(), x.len()));
        } else if !c.satisfied(x) {
            violations.push(format!("{}: g(x) = {}", c.name, c.value(x)));
        }
    }
    Feasibility { feasible: violations.is_empty(), violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OptimizationMode {
    /// Maximise the aggregated preference score.
    Moo,
    /// Optimise one objective, adjusted by per-day penalty/reward terms on
    /// the completion deltas.
    Soo {
        objective: Objective,
        direction: Direction,
        penalty: DeltaRates,
    },
}

impl OptimizationMode {
    pub fn soo_min(objective: Objective) -> Self {
        Self::Soo { objective, direction: Direction::Minimize, penalty: DeltaRates::default() }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Moo => "moo".into(),
            Self::Soo { objective, .. } => format!("soo:{objective}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    /// Per-gene; `None` means `1 / dimension`.
    pub mutation_probability: Option<f64>,
    pub tournament_size: usize,
    pub elitism: usize,
    pub stall_generations: usize,
    /// Re-draws of the initial population allowed when none of it is feasible.
    pub init_retries: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 60,
            crossover_probability: 0.9,
            mutation_probability: None,
            tournament_size: 3,
            elitism: 2,
            stall_generations: 15,
            init_retries: 20,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("ga: {m}")));
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return bad("population must be even and >= 4");
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return bad("crossover probability must be in [0, 1]");
        }
        if let Some(p) = self.mutation_probability {
            if !(0.0..=1.0).contains(&p) {
                return bad("mutation probability must be in [0, 1]");
            }
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be >= 1");
        }
        if self.elitism == 0 || self.elitism >= self.population {
            return bad("elitism must be in [1, population)");
        }
        if self.generations == 0 {
            return bad("generations must be >= 1");
        }
        Ok(())
    }
}

/// What the evaluation function reports for one alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub objectives: ObjectiveVector,
    pub deltas: Option<CompletionDeltas>,
}

impl Evaluation {
    /// Single-objective scalar including declared penalty terms.
    pub fn soo_value(&self, objective: Objective, penalty: DeltaRates) -> Result<f64> {
        let base = self.objectives.get(objective).ok_or_else(|| {
            Error::InvalidConfig(format!("objective `{objective}` is not produced by this scenario"))
        })?;
        Ok(base + self.deltas.map(|d| penalty.adjustment(d)).unwrap_or(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best: DecisionVector,
    pub evaluation: Evaluation,
    /// Aggregated preference (MOO) or penalised objective value (SOO).
    pub score: f64,
    /// MOO only: the population statistics `best` was scored against.
    pub reference: Option<Normalization>,
    /// Best fitness (higher is better) after each generation.
    pub history: Vec<f64>,
    pub generations: usize,
    pub evaluations: usize,
}

struct Member {
    x: DecisionVector,
    fitness: f64,
}

struct Cache<'a, F> {
    space: &'a DecisionSpace,
    evaluate: F,
    model: Option<&'a PreferenceModel>,
    entries: HashMap<DecisionVector, Option<(Evaluation, Vec<f64>)>>,
}

impl<'a, F> Cache<'a, F>
where
    F: Fn(&DecisionVector) -> Result<Evaluation>,
{
    /// `None` for infeasible vectors.
    fn get(&mut self, x: &DecisionVector) -> Result<Option<&(Evaluation, Vec<f64>)>> {
        if !self.entries.contains_key(x) {
            let entry = if check_constraints(x, self.space).feasible {
                match (self.evaluate)(x) {
                    Ok(eval) => {
                        let points = match self.model {
                            Some(m) => m.points(&eval.objectives)?,
                            None => Vec::new(),
                        };
                        Some((eval, points))
                    }
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            self.entries.insert(x.clone(), entry);
        }
        Ok(self.entries[x].as_ref())
    }
}

fn random_vector<R: Rng>(space: &DecisionSpace, rng: &mut R) -> DecisionVector {
    DecisionVector(
        space.lower.iter().zip(&space.upper).map(|(&l, &u)| rng.gen_range(l..=u)).collect(),
    )
}

fn mutate<R: Rng>(x: &mut DecisionVector, space: &DecisionSpace, p: f64, rng: &mut R) {
    for (i, v) in x.0.iter_mut().enumerate() {
        let (lo, hi) = (space.lower[i], space.upper[i]);
        if hi > lo && rng.gen::<f64>() < p {
            // uniform over the other values in range
            let draw = rng.gen_range(lo..hi);
            *v = if draw >= *v { draw + 1 } else { draw };
        }
    }
}

fn tournament<'m, R: Rng>(pop: &'m [Member], k: usize, rng: &mut R) -> &'m Member {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..k {
        let c = &pop[rng.gen_range(0..pop.len())];
        if c.fitness > best.fitness {
            best = c;
        }
    }
    best
}

/// Fitness of every member: aggregated preference over the feasible members
/// (MOO) or the sign-adjusted scalar (SOO). Infeasible members get `-inf`.
fn score_population<F>(
    xs: &[DecisionVector],
    cache: &mut Cache<'_, F>,
    mode: &OptimizationMode,
) -> Result<(Vec<f64>, Option<Normalization>)>
where
    F: Fn(&DecisionVector) -> Result<Evaluation>,
{
    let mut fitness = vec![f64::NEG_INFINITY; xs.len()];
    match mode {
        OptimizationMode::Soo { objective, direction, penalty } => {
            for (i, x) in xs.iter().enumerate() {
                if let Some((eval, _)) = cache.get(x)? {
                    let v = eval.soo_value(*objective, *penalty)?;
                    fitness[i] = match direction {
                        Direction::Minimize => -v,
                        Direction::Maximize => v,
                    };
                }
            }
            Ok((fitness, None))
        }
        OptimizationMode::Moo => {
            let model = cache.model.ok_or_else(|| {
                Error::InvalidConfig("preference mode needs a preference model".into())
            })?;
            let weights = model.weights();
            let mut feasible = Vec::new();
            let mut points = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                if let Some((_, p)) = cache.get(x)? {
                    feasible.push(i);
                    points.push(p.clone());
                }
            }
            match points.len() {
                0 => Ok((fitness, None)),
                1 => {
                    fitness[feasible[0]] = 0.0;
                    Ok((fitness, None))
                }
                _ => {
                    let norm = Normalization::fit(&points)?;
                    for (i, p) in feasible.iter().zip(&points) {
                        fitness[*i] = norm.score(p, &weights);
                    }
                    Ok((fitness, Some(norm)))
                }
            }
        }
    }
}

fn argmax(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, f) in fitness.iter().enumerate() {
        if *f > fitness[best] {
            best = i;
        }
    }
    best
}

/// Run the GA. `evaluate` must be deterministic; it is called at most once
/// per distinct feasible vector. Returning [`Error::Infeasible`] from it
/// marks the vector infeasible.
pub fn optimize<F>(
    space: &DecisionSpace,
    evaluate: F,
    model: Option<&PreferenceModel>,
    mode: OptimizationMode,
    cfg: &GaConfig,
    handle: RngHandle,
) -> Result<OptimizationResult>
where
    F: Fn(&DecisionVector) -> Result<Evaluation>,
{
    cfg.validate()?;
    if space.dim() == 0 {
        return Err(Error::InvalidConfig("decision space has no variables".into()));
    }
    if space.lower.iter().zip(&space.upper).any(|(l, u)| l > u) {
        return Err(Error::InvalidConfig("decision space has a lower bound above its upper bound".into()));
    }
    let mut rng = handle.rng();
    let mut cache = Cache { space, evaluate, model, entries: HashMap::new() };
    let mutation_p = cfg.mutation_probability.unwrap_or(1.0 / space.dim() as f64);

    // initial population, re-drawn until something is feasible
    let mut xs: Vec<DecisionVector> = Vec::new();
    for attempt in 0..=cfg.init_retries {
        xs = (0..cfg.population).map(|_| random_vector(space, &mut rng)).collect();
        let mut any = false;
        for x in &xs {
            if cache.get(x)?.is_some() {
                any = true;
                break;
            }
        }
        if any {
            break;
        }
        if attempt == cfg.init_retries {
            return Err(Error::Infeasible(format!(
                "no feasible decision vector found after {} initial populations",
                cfg.init_retries + 1
            )));
        }
    }

    let mut history = Vec::new();
    let mut archive: Vec<DecisionVector> = Vec::new();
    let mut best_soo: Option<(f64, DecisionVector)> = None;
    let mut stall = 0;
    let mut generation = 0;
    let mut last_reference;
    loop {
        let (fitness, reference) = score_population(&xs, &mut cache, &mode)?;
        last_reference = reference;
        let lead = argmax(&fitness);
        let improved = match &mode {
            OptimizationMode::Soo { .. } => {
                let better = best_soo.as_ref().is_none_or(|(f, _)| fitness[lead] > *f);
                if better && fitness[lead].is_finite() {
                    best_soo = Some((fitness[lead], xs[lead].clone()));
                }
                better
            }
            OptimizationMode::Moo => {
                let new_lead = archive.last() != Some(&xs[lead]);
                if fitness[lead].is_finite() && !archive.contains(&xs[lead]) {
                    archive.push(xs[lead].clone());
                }
                new_lead
            }
        };
        history.push(match &best_soo {
            Some((f, _)) => *f,
            None => fitness[lead],
        });
        stall = if improved { 0 } else { stall + 1 };
        generation += 1;
        if generation >= cfg.generations || stall >= cfg.stall_generations {
            break;
        }

        let mut members: Vec<Member> = xs
            .drain(..)
            .zip(fitness)
            .map(|(x, fitness)| Member { x, fitness })
            .collect();
        // stable sort keeps earlier members first among equals
        members.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
        let mut next: Vec<DecisionVector> = Vec::with_capacity(cfg.population);
        let mut seen = HashSet::new();
        for m in &members {
            if next.len() >= cfg.elitism {
                break;
            }
            if m.fitness.is_finite() && seen.insert(&m.x) {
                next.push(m.x.clone());
            }
        }
        while next.len() < cfg.population {
            let a = tournament(&members, cfg.tournament_size, &mut rng).x.clone();
            let b = tournament(&members, cfg.tournament_size, &mut rng).x.clone();
            let (mut c1, mut c2) = (a, b);
            if rng.gen::<f64>() < cfg.crossover_probability {
                for g in 0..space.dim() {
                    if rng.gen::<bool>() {
                        std::mem::swap(&mut c1.0[g], &mut c2.0[g]);
                    }
                }
            }
            mutate(&mut c1, space, mutation_p, &mut rng);
            mutate(&mut c2, space, mutation_p, &mut rng);
            next.push(c1);
            if next.len() < cfg.population {
                next.push(c2);
            }
        }
        // keep selection pressure independent of population order
        let keep = cfg.elitism.min(next.len());
        next[keep..].shuffle(&mut rng);
        xs = next;
    }

    let evaluations = cache.entries.len();
    let (best, score, reference) = match &mode {
        OptimizationMode::Soo { .. } => {
            let (f, x) = best_soo.ok_or_else(|| Error::Infeasible("no feasible member evaluated".into()))?;
            let score = match mode {
                OptimizationMode::Soo { direction: Direction::Minimize, .. } => -f,
                _ => f,
            };
            (x, score, None)
        }
        OptimizationMode::Moo => {
            let weights = model.map(|m| m.weights()).unwrap_or_default();
            let mut candidates: Vec<DecisionVector> = Vec::new();
            for x in archive.iter().rev().chain(xs.iter()) {
                if cache.get(x)?.is_some() && !candidates.contains(x) {
                    candidates.push(x.clone());
                }
            }
            match &last_reference {
                Some(norm) => {
                    let mut best = 0;
                    let mut best_score = f64::NEG_INFINITY;
                    for (i, x) in candidates.iter().enumerate() {
                        let p = &cache.get(x)?.expect("feasible").1;
                        let s = norm.score(p, &weights);
                        if s > best_score {
                            best = i;
                            best_score = s;
                        }
                    }
                    (candidates.swap_remove(best), best_score, last_reference.clone())
                }
                None => {
                    let x = candidates
                        .into_iter()
                        .next()
                        .ok_or_else(|| Error::Infeasible("no feasible member evaluated".into()))?;
                    (x, 0.0, None)
                }
            }
        }
    };
    let evaluation = cache.get(&best)?.expect("best is feasible").0;
    Ok(OptimizationResult {
        best,
        evaluation,
        score,
        reference,
        history,
        generations: generation,
        evaluations,
    })
}
