//! Preference curves, stakeholder weights, and the z-score / weighted
//! least-squares aggregation of preference points into one score per
//! alternative.
//!
//! Scores are relative to the set of alternatives they are computed over:
//! each criterion column is standardised against its own population mean and
//! standard deviation, and the aggregated score of alternative `i` is the
//! value minimising `sum_j w_j (z_ij - P)^2`, which is `sum_j w_j z_ij`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objectives::{Objective, ObjectiveVector};

pub const MAX_PREFERENCE: f64 = 100.0;

/// Knots used to tabulate a Beta-PERT shaped curve.
pub const PERT_CURVE_KNOTS: usize = 256;

pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PreferenceCurve {
    /// Linear interpolation between knots `(objective value, preference)`
    /// sorted by value. Holds the end values outside the knot range.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// Normalised PERT density scaled so the mode scores 100; zero outside
    /// `[min, max]`.
    BetaPert {
        min: f64,
        mode: f64,
        max: f64,
        #[serde(skip)]
        table: Vec<(f64, f64)>,
    },
}

impl PreferenceCurve {
    pub fn linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidConfig("a linear preference curve needs >= 2 knots".into()));
        }
        for w in knots.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidConfig(format!(
                    "preference knots must be strictly increasing in value ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(x, y) in &knots {
            if !x.is_finite() || !(0.0..=MAX_PREFERENCE).contains(&y) {
                return Err(Error::InvalidConfig(format!(
                    "preference knot ({x}, {y}) must have a finite value and points in [0, 100]"
                )));
            }
        }
        Ok(Self::PiecewiseLinear { knots })
    }

    pub fn beta_pert(min: f64, mode: f64, max: f64) -> Result<Self> {
        Self::beta_pert_with_knots(min, mode, max, PERT_CURVE_KNOTS)
    }

    pub fn beta_pert_with_knots(min: f64, mode: f64, max: f64, knots: usize) -> Result<Self> {
        if !(min.is_finite() && mode.is_finite() && max.is_finite()) || !(min <= mode && mode <= max)
        {
            return Err(Error::InvalidConfig(format!(
                "Beta-PERT preference curve needs min <= mode <= max, got ({min}, {mode}, {max})"
            )));
        }
        let knots = knots.max(2);
        let mut table = Vec::with_capacity(knots + 1);
        if max > min {
            for k in 0..knots {
                let x = min + (max - min) * k as f64 / (knots - 1) as f64;
                table.push((x, pert_relative_density(min, mode, max, x)));
            }
            match table.binary_search_by(|(x, _)| x.total_cmp(&mode)) {
                Ok(i) => table[i].1 = MAX_PREFERENCE,
                Err(i) => table.insert(i, (mode, MAX_PREFERENCE)),
            }
        } else {
            table.push((mode, MAX_PREFERENCE));
        }
        Ok(Self::BetaPert { min, mode, max, table })
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Self::PiecewiseLinear { knots } => interpolate(knots, v),
            Self::BetaPert { min, max, table, .. } => {
                if v < *min || v > *max || v.is_nan() {
                    0.0
                } else {
                    interpolate(table, v)
                }
            }
        }
    }

    /// Objective range over which the curve changes.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::PiecewiseLinear { knots } => (knots[0].0, knots[knots.len() - 1].0),
            Self::BetaPert { min, max, .. } => (*min, *max),
        }
    }
}

/// `100 * pdf(x) / pdf(mode)` for the PERT Beta with shape 4, in closed form.
pub fn pert_relative_density(min: f64, mode: f64, max: f64, x: f64) -> f64 {
    if x < min || x > max {
        return 0.0;
    }
    if max == min {
        return if x == mode { MAX_PREFERENCE } else { 0.0 };
    }
    let range = max - min;
    let alpha = 1.0 + 4.0 * (mode - min) / range;
    let beta = 1.0 + 4.0 * (max - mode) / range;
    let left = if mode > min { ((x - min) / (mode - min)).powf(alpha - 1.0) } else { 1.0 };
    let right = if max > mode { ((max - x) / (max - mode)).powf(beta - 1.0) } else { 1.0 };
    (MAX_PREFERENCE * left * right).clamp(0.0, MAX_PREFERENCE)
}

fn interpolate(knots: &[(f64, f64)], v: f64) -> f64 {
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    if v <= first.0 {
        return first.1;
    }
    if v >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|(x, _)| *x <= v);
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (v - x0) / (x1 - x0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stakeholder {
    pub name: String,
    /// w_k.
    pub weight: f64,
    /// w_{k,i}.
    pub local: Vec<(Objective, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightScheme {
    pub stakeholders: Vec<Stakeholder>,
}

impl WeightScheme {
    /// Every `w'_{k,i} = w_k * w_{k,i}`.
    pub fn effective(&self) -> Vec<(String, Objective, f64)> {
        self.stakeholders
            .iter()
            .flat_map(|s| s.local.iter().map(move |&(o, w)| (s.name.clone(), o, s.weight * w)))
            .collect()
    }

    /// Effective weights summed per objective, for objectives that carry any
    /// weight, in a stable objective order.
    pub fn criterion_weights(&self) -> Vec<(Objective, f64)> {
        let mut out: Vec<(Objective, f64)> = Vec::new();
        for o in Objective::ALL {
            let w: f64 = self.effective().iter().filter(|e| e.1 == o).map(|e| e.2).sum();
            if w > 0.0 {
                out.push((o, w));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidWeights { section: "weights".into(), reason };
        if self.stakeholders.is_empty() {
            return Err(bad("no stakeholders".into()));
        }
        for s in &self.stakeholders {
            if s.weight < 0.0 || s.local.iter().any(|(_, w)| *w < 0.0) {
                return Err(bad(format!("stakeholder `{}` has a negative weight", s.name)));
            }
            let local: f64 = s.local.iter().map(|(_, w)| w).sum();
            if (local - 1.0).abs() > WEIGHT_TOLERANCE {
                return Err(bad(format!("local weights of `{}` sum to {local}, expected 1", s.name)));
            }
        }
        let global: f64 = self.stakeholders.iter().map(|s| s.weight).sum();
        if (global - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(bad(format!("global weights sum to {global}, expected 1")));
        }
        let total: f64 = self.effective().iter().map(|e| e.2).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(bad(format!("effective weights sum to {total}, expected 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub objective: Objective,
    pub curve: PreferenceCurve,
    pub weight: f64,
}

/// One curve and one weight per criterion; weights sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceModel {
    pub criteria: Vec<Criterion>,
}

impl PreferenceModel {
    pub fn new(criteria: Vec<Criterion>) -> Result<Self> {
        let model = Self { criteria };
        check_weights(&model.weights())?;
        Ok(model)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.criteria.iter().map(|c| c.weight).collect()
    }

    /// Preference points of one alternative, one entry per criterion.
    pub fn points(&self, objectives: &ObjectiveVector) -> Result<Vec<f64>> {
        self.criteria
            .iter()
            .map(|c| {
                objectives.get(c.objective).map(|v| c.curve.eval(v)).ok_or_else(|| {
                    Error::DimensionMismatch(format!("alternative lacks objective `{}`", c.objective))
                })
            })
            .collect()
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::InvalidWeights {
            section: "weights".into(),
            reason: format!("criterion weights sum to {sum}, expected 1"),
        });
    }
    Ok(())
}

/// Per-criterion population mean and standard deviation of a score matrix.
/// A column whose spread is zero (to rounding) normalises to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn fit(scores: &[Vec<f64>]) -> Result<Self> {
        if scores.len() < 2 {
            return Err(Error::TooFewAlternatives(scores.len()));
        }
        let cols = scores[0].len();
        if let Some(bad) = scores.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row of {} criteria in a matrix of {cols}",
                bad.len()
            )));
        }
        let n = scores.len() as f64;
        let mut mean = vec![0.0; cols];
        let mut std = vec![0.0; cols];
        for j in 0..cols {
            let mu = scores.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = scores.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / n;
            let magnitude = scores.iter().map(|r| r[j].abs()).fold(0.0, f64::max);
            let sigma = var.sqrt();
            mean[j] = mu;
            std[j] = if sigma <= 1e-12 * magnitude { 0.0 } else { sigma };
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(p, (mu, sigma))| if *sigma == 0.0 { 0.0 } else { (p - mu) / sigma })
            .collect()
    }

    /// Aggregated score of `row` against this reference population.
    pub fn score(&self, row: &[f64], weights: &[f64]) -> f64 {
        self.apply(row).iter().zip(weights).map(|(z, w)| w * z).sum()
    }
}

/// z-score every column against the population of alternatives.
pub fn normalize_scores(scores: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let norm = Normalization::fit(scores)?;
    Ok(scores.iter().map(|r| norm.apply(r)).collect())
}

/// `P*_i = sum_j w_j z_ij`.
pub fn aggregate(z: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    check_weights(weights)?;
    z.iter()
        .map(|row| {
            if row.len() != weights.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} scores for {} weights",
                    row.len(),
                    weights.len()
                )));
            }
            Ok(row.iter().zip(weights).map(|(z, w)| w * z).sum())
        })
        .collect()
}

/// Evaluate every curve, normalise, aggregate. Output is aligned with
/// `alternatives`.
pub fn imap_fitness(alternatives: &[ObjectiveVector], model: &PreferenceModel) -> Result<Vec<f64>> {
    let points: Vec<Vec<f64>> =
        alternatives.iter().map(|a| model.points(a)).collect::<Result<_>>()?;
    aggregate(&normalize_scores(&points)?, &model.weights())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pert_curve_peaks_at_target() {
        let c = PreferenceCurve::beta_pert(50.0, 90.0, 150.0).unwrap();
        assert_eq!(c.eval(90.0), 100.0);
        assert!(c.eval(80.0) < 100.0 && c.eval(100.0) < 100.0);
        assert_eq!(c.eval(40.0), 0.0);
        assert_eq!(c.eval(151.0), 0.0);
    }

    #[test]
    fn pert_table_tracks_closed_form() {
        let c = PreferenceCurve::beta_pert(966.0, 1466.0, 1566.0).unwrap();
        for k in 0..=200 {
            let x = 966.0 + 600.0 * k as f64 / 200.0;
            let exact = pert_relative_density(966.0, 1466.0, 1566.0, x);
            assert!(close(c.eval(x), exact, 0.5), "x={x}: {} vs {exact}", c.eval(x));
        }
    }

    #[test]
    fn linear_midpoint_and_ends() {
        let c = PreferenceCurve::linear(vec![(0.0, 100.0), (7_233_000.0, 0.0)]).unwrap();
        assert_eq!(c.eval(3_616_500.0), 50.0);
        assert_eq!(c.eval(-5.0), 100.0);
        assert_eq!(c.eval(8_000_000.0), 0.0);
    }

    #[test]
    fn linear_rejects_bad_knots() {
        assert!(PreferenceCurve::linear(vec![(1.0, 100.0)]).is_err());
        assert!(PreferenceCurve::linear(vec![(1.0, 100.0), (1.0, 0.0)]).is_err());
        assert!(PreferenceCurve::linear(vec![(0.0, 120.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn degenerate_pert_curve() {
        let c = PreferenceCurve::beta_pert(5.0, 5.0, 5.0).unwrap();
        assert_eq!(c.eval(5.0), 100.0);
        assert_eq!(c.eval(5.1), 0.0);
        assert!(PreferenceCurve::beta_pert(5.0, 4.0, 6.0).is_err());
    }

    #[test]
    fn normalize_examples() {
        let z = normalize_scores(&[vec![0.0], vec![100.0]]).unwrap();
        assert_eq!(z, vec![vec![-1.0], vec![1.0]]);
        let z = normalize_scores(&[vec![70.0], vec![70.0], vec![70.0]]).unwrap();
        assert_eq!(z, vec![vec![0.0]; 3]);
        let z = normalize_scores(&[vec![10.0], vec![20.0], vec![60.0]]).unwrap();
        let expected = [-0.9258, -0.4629, 1.3887];
        for (row, e) in z.iter().zip(expected) {
            assert!(close(row[0], e, 1e-3), "{} vs {e}", row[0]);
        }
    }

    #[test]
    fn normalize_needs_two_alternatives() {
        assert_eq!(normalize_scores(&[vec![1.0]]), Err(Error::TooFewAlternatives(1)));
    }

    #[test]
    fn aggregate_examples() {
        let z = vec![vec![0.3], vec![-0.3]];
        assert_eq!(aggregate(&z, &[1.0]).unwrap(), vec![0.3, -0.3]);
        assert_eq!(aggregate(&[vec![1.0, -1.0]], &[0.5, 0.5]).unwrap(), vec![0.0]);
        let p = aggregate(&[vec![1.0, -1.0], vec![-1.0, 1.0]], &[0.7, 0.3]).unwrap();
        assert!(close(p[0], 0.4, 1e-12) && close(p[1], -0.4, 1e-12));
    }

    #[test]
    fn aggregate_rejects_bad_weights() {
        assert!(matches!(
            aggregate(&[vec![1.0, 1.0]], &[0.5, 0.6]),
            Err(Error::InvalidWeights { .. })
        ));
        assert!(aggregate(&[vec![1.0]], &[0.5, 0.5]).is_err());
    }

    fn two_criterion_model() -> PreferenceModel {
        PreferenceModel::new(vec![
            Criterion {
                objective: Objective::Duration,
                curve: PreferenceCurve::linear(vec![(0.0, 100.0), (100.0, 0.0)]).unwrap(),
                weight: 0.6,
            },
            Criterion {
                objective: Objective::Cost,
                curve: PreferenceCurve::linear(vec![(0.0, 100.0), (1000.0, 0.0)]).unwrap(),
                weight: 0.4,
            },
        ])
        .unwrap()
    }

    fn alt(d: f64, c: f64) -> ObjectiveVector {
        ObjectiveVector::default().with(Objective::Duration, d).with(Objective::Cost, c)
    }

    #[test]
    fn identical_alternatives_score_zero() {
        let p = imap_fitness(&[alt(10.0, 100.0); 4], &two_criterion_model()).unwrap();
        assert_eq!(p, vec![0.0; 4]);
    }

    #[test]
    fn dominating_alternative_wins() {
        let p = imap_fitness(&[alt(10.0, 100.0), alt(10.0, 200.0), alt(50.0, 50.0)], &two_criterion_model())
            .unwrap();
        assert!(p[0] > p[1]);
    }

    #[test]
    fn missing_objective_is_an_error() {
        let only_duration = ObjectiveVector::default().with(Objective::Duration, 1.0);
        assert!(imap_fitness(&[only_duration, only_duration], &two_criterion_model()).is_err());
    }

    #[test]
    fn offshore_weight_table() {
        let scheme = WeightScheme {
            stakeholders: vec![
                Stakeholder {
                    name: "energy provider".into(),
                    weight: 0.5,
                    local: vec![(Objective::Duration, 0.6), (Objective::Emissions, 0.4)],
                },
                Stakeholder {
                    name: "marine contractor".into(),
                    weight: 0.5,
                    local: vec![(Objective::Cost, 0.7), (Objective::FleetUtilisation, 0.3)],
                },
            ],
        };
        scheme.validate().unwrap();
        let w = scheme.criterion_weights();
        let expected = [
            (Objective::Duration, 0.30),
            (Objective::Cost, 0.35),
            (Objective::FleetUtilisation, 0.15),
            (Objective::Emissions, 0.20),
        ];
        for ((o, w), (eo, ew)) in w.iter().zip(expected) {
            assert_eq!(*o, eo);
            assert!(close(*w, ew, 1e-12));
        }
        assert!(close(w.iter().map(|x| x.1).sum::<f64>(), 1.0, 1e-12));
    }

    #[test]
    fn weight_scheme_rejects_bad_sums() {
        let scheme = WeightScheme {
            stakeholders: vec![Stakeholder {
                name: "solo".into(),
                weight: 0.9,
                local: vec![(Objective::Duration, 1.0)],
            }],
        };
        let err = scheme.validate().unwrap_err();
        assert!(err.to_string().contains("weights"));
    }
}
