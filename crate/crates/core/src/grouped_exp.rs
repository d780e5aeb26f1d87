//! Exponential intensity from interval-grouped, right-censored data.
//!
//! Thresholds `0 = t_0 < t_1 < ... < t_m` split the half-line into groups;
//! `c_i` is the mass observed in `(t_i, t_{i+1}]` for `i < m` and `c_m` is
//! the right-censored mass beyond `t_m`. Counts may be fractional.
//!
//! Two updates are provided: the quadratic-lower-bound MM step, which
//! bounds the curvature of `ln(e^{λd} - 1)` from below on `(λ/2, ∞)`, and the
//! classical EM step based on conditional means of the complete data.

use crate::driver::{MmProblem, Sense};
use crate::error::{MmError, Result};

/// Below this value of `λ d` the MM weights use series expansions.
const SERIES_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedExpData {
    thresholds: Vec<f64>,
    counts: Vec<f64>,
    gaps: Vec<f64>,
}

impl GroupedExpData {
    /// `thresholds` are `t_1..t_m`; `counts` are `c_0..c_m` (one more than
    /// the thresholds).
    pub fn new(thresholds: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(MmError::InvalidInput("need at least one threshold".into()));
        }
        if counts.len() != thresholds.len() + 1 {
            return Err(MmError::InvalidInput(format!(
                "{} thresholds need {} counts, got {}",
                thresholds.len(),
                thresholds.len() + 1,
                counts.len()
            )));
        }
        let mut prev = 0.0;
        for &t in &thresholds {
            if !(t > prev) || !t.is_finite() {
                return Err(MmError::InvalidInput(
                    "thresholds must be positive, finite and strictly increasing".into(),
                ));
            }
            prev = t;
        }
        if counts.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(MmError::InvalidInput(
                "counts must be finite and nonnegative".into(),
            ));
        }
        if !(counts.iter().sum::<f64>() > 0.0) {
            return Err(MmError::InvalidInput("total count must be positive".into()));
        }
        let mut gaps = Vec::with_capacity(thresholds.len());
        let mut lower = 0.0;
        for &t in &thresholds {
            gaps.push(t - lower);
            lower = t;
        }
        Ok(GroupedExpData {
            thresholds,
            counts,
            gaps,
        })
    }

    /// Number of thresholds `m`.
    pub fn groups(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    fn censored(&self) -> f64 {
        self.counts[self.groups()]
    }

    fn last_threshold(&self) -> f64 {
        self.thresholds[self.groups() - 1]
    }

    /// Lower end `t_i` of interior interval `i`.
    fn lower(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.thresholds[i - 1]
        }
    }

    fn interior_mass(&self) -> f64 {
        self.counts[..self.groups()].iter().sum()
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(MmError::Domain(format!("intensity must be positive, got {lambda}")))
    }
}

/// `ln(e^x - 1)` for `x > 0` without overflow or cancellation.
fn ln_expm1(x: f64) -> f64 {
    if x > 1.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// Log-likelihood
/// `L(λ) = -λ Σ_{i<m} c_i t_{i+1} - c_m λ t_m + Σ_{i<m} c_i ln(e^{λ d_i} - 1)`.
pub fn grouped_loglik(lambda: f64, data: &GroupedExpData) -> Result<f64> {
    check_rate(lambda)?;
    let mut total = -data.censored() * lambda * data.last_threshold();
    for i in 0..data.groups() {
        let c = data.counts[i];
        if c == 0.0 {
            continue;
        }
        total += c * (ln_expm1(lambda * data.gaps[i]) - lambda * data.thresholds[i]);
    }
    Ok(total)
}

/// `v = e^{λd} d / (e^{λd} - 1)`, the derivative of `ln(e^{λd} - 1)`.
fn slope(lambda: f64, d: f64) -> f64 {
    let x = lambda * d;
    if x < SERIES_CUTOFF {
        1.0 / lambda + d / 2.0 + x * d / 12.0
    } else {
        d / -(-x).exp_m1()
    }
}

/// `w = e^{λd/2} (d²/4) / (e^{λd/2} - 1)²`, minus the curvature of
/// `ln(e^{μd} - 1)` evaluated at `μ = λ/2`.
fn curvature_bound(lambda: f64, d: f64) -> f64 {
    let x = lambda * d / 2.0;
    if x < SERIES_CUTOFF {
        d * d / 4.0 * (1.0 / (x * x) - 1.0 / 12.0)
    } else {
        // e^x / (e^x - 1)^2 = 1 / (4 sinh²(x/2))
        let s = (x / 2.0).sinh();
        d * d / 4.0 / (4.0 * s * s)
    }
}

/// Score `L'(λ)`.
pub fn grouped_score(lambda: f64, data: &GroupedExpData) -> Result<f64> {
    check_rate(lambda)?;
    let mut total = -data.censored() * data.last_threshold();
    for i in 0..data.groups() {
        let c = data.counts[i];
        if c == 0.0 {
            continue;
        }
        total += c * (slope(lambda, data.gaps[i]) - data.thresholds[i]);
    }
    Ok(total)
}

/// Quadratic-lower-bound MM step with the `λ/2` safeguard:
/// `λ' = max{λ/2, λ + [Σ c_i (v_i - t_{i+1}) - c_m t_m] / Σ c_i w_i}`.
pub fn grouped_mm_update(lambda: f64, data: &GroupedExpData) -> Result<f64> {
    check_rate(lambda)?;
    if !(data.interior_mass() > 0.0) {
        return Err(MmError::NoInteriorMass);
    }
    let mut numer = -data.censored() * data.last_threshold();
    let mut denom = 0.0;
    for i in 0..data.groups() {
        let c = data.counts[i];
        if c == 0.0 {
            continue;
        }
        let d = data.gaps[i];
        numer += c * (slope(lambda, d) - data.thresholds[i]);
        denom += c * curvature_bound(lambda, d);
    }
    Ok((lambda + numer / denom).max(lambda / 2.0))
}

/// EM step: `λ' = Σ c_i / (Σ_{i<m} c_i E[X | t_i < X ≤ t_{i+1}] + c_m (t_m + 1/λ))`.
pub fn grouped_em_update(lambda: f64, data: &GroupedExpData) -> Result<f64> {
    check_rate(lambda)?;
    if !(data.interior_mass() > 0.0) {
        return Err(MmError::NoInteriorMass);
    }
    let total: f64 = data.counts.iter().sum();
    let mut expected = data.censored() * (data.last_threshold() + 1.0 / lambda);
    for i in 0..data.groups() {
        let c = data.counts[i];
        if c == 0.0 {
            continue;
        }
        let d = data.gaps[i];
        // conditional mean of an exponential(λ) variate on (t_i, t_i + d]
        let mean = data.lower(i) + 1.0 / lambda - d / (lambda * d).exp_m1();
        expected += c * mean;
    }
    Ok(total / expected)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupedAlgorithm {
    Mm,
    Em,
}

/// Either update wrapped as a one-parameter maximization problem.
#[derive(Debug, Clone)]
pub struct GroupedExpProblem<'a> {
    pub data: &'a GroupedExpData,
    pub algorithm: GroupedAlgorithm,
}

impl<'a> GroupedExpProblem<'a> {
    pub fn new(data: &'a GroupedExpData, algorithm: GroupedAlgorithm) -> Self {
        GroupedExpProblem { data, algorithm }
    }
}

impl MmProblem for GroupedExpProblem<'_> {
    fn dimension(&self) -> usize {
        1
    }
    fn sense(&self) -> Sense {
        Sense::Maximize
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        grouped_loglik(theta[0], self.data)
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let next = match self.algorithm {
            GroupedAlgorithm::Mm => grouped_mm_update(theta[0], self.data)?,
            GroupedAlgorithm::Em => grouped_em_update(theta[0], self.data)?,
        };
        Ok(vec![next])
    }
    fn is_feasible(&self, theta: &[f64]) -> bool {
        theta[0] > 0.0
    }
    fn stationarity_residual(&self, theta: &[f64]) -> Option<f64> {
        grouped_score(theta[0], self.data).ok().map(f64::abs)
    }
}

/// The Meilijson toy data: thresholds 1, 3, 10 with group proportions
/// 0.185, 0.266, 0.410 and 0.139 censored.
pub fn meilijson_example() -> GroupedExpData {
    GroupedExpData::new(vec![1.0, 3.0, 10.0], vec![0.185, 0.266, 0.410, 0.139])
        .expect("static data is valid")
}
