//! Beta-PERT and Bernoulli sampling.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    #[default]
    Days,
    Currency,
    NuisancePoints,
}

/// Optimistic / most-likely / pessimistic triple. Construct through
/// [`ThreePointEstimate::new`] (strict) or [`ThreePointEstimate::sorted`]
/// (reorders and reports).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreePointEstimate {
    a: f64,
    m: f64,
    b: f64,
    unit: Unit,
}

impl ThreePointEstimate {
    pub fn new(a: f64, m: f64, b: f64, unit: Unit) -> Result<Self> {
        for (field, v) in [("a", a), ("m", m), ("b", b)] {
            if !v.is_finite() {
                return Err(Error::InvalidEstimate {
                    field,
                    reason: format!("value {v} is not finite"),
                });
            }
        }
        if m < a {
            return Err(Error::InvalidEstimate {
                field: "m",
                reason: format!("most-likely {m} is below optimistic {a}"),
            });
        }
        if b < m {
            return Err(Error::InvalidEstimate {
                field: "b",
                reason: format!("pessimistic {b} is below most-likely {m}"),
            });
        }
        Ok(Self { a, m, b, unit })
    }

    /// Accepts any finite triple; if it is out of order it is sorted
    /// ascending and a warning describing the fix is returned alongside.
    pub fn sorted(a: f64, m: f64, b: f64, unit: Unit) -> Result<(Self, Option<String>)> {
        if a <= m && m <= b {
            return Self::new(a, m, b, unit).map(|e| (e, None));
        }
        let mut v = [a, m, b];
        v.sort_by(f64::total_cmp);
        let est = Self::new(v[0], v[1], v[2], unit)?;
        let warning = format!(
            "triple ({a}, {m}, {b}) is not ordered a <= m <= b; sorted to ({}, {}, {})",
            v[0], v[1], v[2]
        );
        Ok((est, Some(warning)))
    }

    pub fn point(v: f64, unit: Unit) -> Result<Self> {
        Self::new(v, v, v, unit)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    /// PERT mean (a + 4m + b) / 6.
    pub fn mean(&self) -> f64 {
        (self.a + 4.0 * self.m + self.b) / 6.0
    }

    /// Standard deviation of the Beta-PERT distribution with shape 4.
    pub fn std_dev(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let (alpha, beta) = self.shape();
        let range = self.b - self.a;
        let var = alpha * beta / ((alpha + beta).powi(2) * (alpha + beta + 1.0));
        range * var.sqrt()
    }

    /// Beta shape parameters (alpha, beta) for the standard PERT form.
    pub fn shape(&self) -> (f64, f64) {
        let range = self.b - self.a;
        if range == 0.0 {
            return (1.0, 1.0);
        }
        (
            1.0 + 4.0 * (self.m - self.a) / range,
            1.0 + 4.0 * (self.b - self.m) / range,
        )
    }

    /// Same estimate with every value multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a: self.a * factor,
            m: self.m * factor,
            b: self.b * factor,
            unit: self.unit,
        }
    }
}

/// Draw one value in `[a, b]`. Degenerate triples return `m` exactly.
pub fn sample_beta_pert<R: Rng + ?Sized>(est: &ThreePointEstimate, rng: &mut R) -> f64 {
    if est.is_degenerate() {
        return est.m;
    }
    let (alpha, beta) = est.shape();
    // alpha, beta >= 1 for any ordered non-degenerate triple
    let dist = Beta::new(alpha, beta).expect("PERT shape parameters are >= 1");
    let x: f64 = dist.sample(rng);
    (est.a + (est.b - est.a) * x).clamp(est.a, est.b)
}

pub fn validate_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Bernoulli draw. Always consumes exactly one uniform, so stream alignment
/// does not depend on `p`.
pub fn sample_risk_occurrence<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<bool> {
    validate_probability(p)?;
    let u: f64 = rng.gen();
    Ok(u < p)
}
