//! Maximum likelihood for power-series families `p_k(θ) = c_k θ^k / q(θ)`
//! via the functional iteration `θ <- x̄ q(θ) / q'(θ)`.
//!
//! The iteration is a genuine minorize-maximize step when `q` is
//! log-concave (truncated Poisson). For log-convex `q` it is only a
//! fixed-point scheme: the logarithmic family still converges (with
//! oscillation), the geometric family diverges once `x̄ > 1`.

use std::fmt;

use crate::driver::{MmProblem, Sense};
use crate::error::{MmError, Result};

/// Normalizing function of a power-series family together with its first two
/// derivatives.
pub trait PowerSeriesFamily: Send + Sync {
    fn name(&self) -> &str;

    /// Open interval `(lo, hi)` of admissible θ.
    fn domain(&self) -> (f64, f64);

    fn q(&self, theta: f64) -> f64;

    fn dq(&self, theta: f64) -> f64;

    fn d2q(&self, theta: f64) -> f64;

    /// Leading `n` series coefficients `(a_first, a_first+1, ...)` and the
    /// power of the first one, when the family has a known expansion.
    fn coefficients(&self, _n: usize) -> Option<(Vec<f64>, usize)> {
        None
    }

    /// Whether `q` is known to be log-concave on the domain, making the
    /// iteration an MM algorithm.
    fn log_concave(&self) -> bool;

    fn contains(&self, theta: f64) -> bool {
        let (lo, hi) = self.domain();
        theta > lo && theta < hi
    }
}

/// Zero-truncated Poisson, `q(θ) = e^θ - 1` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TruncatedPoisson;

impl PowerSeriesFamily for TruncatedPoisson {
    fn name(&self) -> &str {
        "trunc-poisson"
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn q(&self, theta: f64) -> f64 {
        theta.exp_m1()
    }
    fn dq(&self, theta: f64) -> f64 {
        theta.exp()
    }
    fn d2q(&self, theta: f64) -> f64 {
        theta.exp()
    }
    fn coefficients(&self, n: usize) -> Option<(Vec<f64>, usize)> {
        let mut out = Vec::with_capacity(n);
        let mut a = 1.0;
        for k in 1..=n {
            a /= k as f64;
            out.push(a);
        }
        Some((out, 1))
    }
    fn log_concave(&self) -> bool {
        true
    }
}

/// Geometric (failures before a success), `q(θ) = 1 / (1 - θ)` on `(0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Geometric;

impl PowerSeriesFamily for Geometric {
    fn name(&self) -> &str {
        "geometric"
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn q(&self, theta: f64) -> f64 {
        1.0 / (1.0 - theta)
    }
    fn dq(&self, theta: f64) -> f64 {
        (1.0 - theta).powi(-2)
    }
    fn d2q(&self, theta: f64) -> f64 {
        2.0 * (1.0 - theta).powi(-3)
    }
    fn coefficients(&self, n: usize) -> Option<(Vec<f64>, usize)> {
        Some((vec![1.0; n], 0))
    }
    fn log_concave(&self) -> bool {
        false
    }
}

/// Logarithmic, `q(θ) = -ln(1 - θ)` on `(0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Logarithmic;

impl PowerSeriesFamily for Logarithmic {
    fn name(&self) -> &str {
        "logarithmic"
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn q(&self, theta: f64) -> f64 {
        -(-theta).ln_1p()
    }
    fn dq(&self, theta: f64) -> f64 {
        1.0 / (1.0 - theta)
    }
    fn d2q(&self, theta: f64) -> f64 {
        (1.0 - theta).powi(-2)
    }
    fn coefficients(&self, n: usize) -> Option<(Vec<f64>, usize)> {
        Some(((1..=n).map(|k| 1.0 / k as f64).collect(), 1))
    }
    fn log_concave(&self) -> bool {
        false
    }
}

/// Finite power series `q(θ) = Σ_k a_k θ^k`, `k = 0..=M`, on `(0, ∞)`.
#[derive(Debug, Clone)]
pub struct FiniteSeries {
    name: String,
    coefficients: Vec<f64>,
    log_concave: bool,
}

impl FiniteSeries {
    /// Requires nonnegative coefficients with at least one positive `a_k`,
    /// `k ≥ 1`, so that `q > 0` and `q' > 0` on the domain.
    pub fn new(name: impl Into<String>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(MmError::InvalidInput(
                "series coefficients must be finite and nonnegative".into(),
            ));
        }
        if !coefficients.iter().skip(1).any(|&a| a > 0.0) {
            return Err(MmError::InvalidInput(
                "series needs a positive coefficient beyond the constant term".into(),
            ));
        }
        let log_concave = log_concavity_check(&coefficients, 0)? == LogConcavity::LogConcave;
        Ok(FiniteSeries {
            name: name.into(),
            coefficients,
            log_concave,
        })
    }

    /// Binomial normalizer `(1 + θ)^n`.
    pub fn binomial(n: usize) -> Self {
        let mut c = vec![1.0; n + 1];
        for k in 1..=n {
            c[k] = c[k - 1] * (n - k + 1) as f64 / k as f64;
        }
        FiniteSeries::new(format!("binomial-{n}"), c).expect("binomial coefficients are positive")
    }
}

impl PowerSeriesFamily for FiniteSeries {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn q(&self, theta: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * theta + a)
    }
    fn dq(&self, theta: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &a)| acc * theta + k as f64 * a)
    }
    fn d2q(&self, theta: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (k, &a)| acc * theta + (k * (k - 1)) as f64 * a)
    }
    fn coefficients(&self, n: usize) -> Option<(Vec<f64>, usize)> {
        Some((self.coefficients.iter().take(n).copied().collect(), 0))
    }
    fn log_concave(&self) -> bool {
        self.log_concave
    }
}

/// Built-in family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinFamily {
    TruncatedPoisson,
    Geometric,
    Logarithmic,
}

impl BuiltinFamily {
    pub fn family(self) -> Box<dyn PowerSeriesFamily> {
        match self {
            BuiltinFamily::TruncatedPoisson => Box::new(TruncatedPoisson),
            BuiltinFamily::Geometric => Box::new(Geometric),
            BuiltinFamily::Logarithmic => Box::new(Logarithmic),
        }
    }
}

impl std::str::FromStr for BuiltinFamily {
    type Err = MmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trunc-poisson" => Ok(BuiltinFamily::TruncatedPoisson),
            "geometric" => Ok(BuiltinFamily::Geometric),
            "logarithmic" => Ok(BuiltinFamily::Logarithmic),
            other => Err(MmError::InvalidInput(format!("unknown family {other:?}"))),
        }
    }
}

impl fmt::Display for BuiltinFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family().name())
    }
}

/// Sufficient statistics of a power-series sample: the mean and the size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSeriesSample {
    pub xbar: f64,
    pub m: usize,
}

impl PowerSeriesSample {
    pub fn new(xbar: f64, m: usize) -> Result<Self> {
        if !(xbar >= 0.0) || !xbar.is_finite() {
            return Err(MmError::InvalidInput(
                "sample mean must be finite and nonnegative".into(),
            ));
        }
        if m == 0 {
            return Err(MmError::InvalidInput("sample size must be positive".into()));
        }
        Ok(PowerSeriesSample { xbar, m })
    }

    pub fn from_counts(values: &[u64]) -> Result<Self> {
        let m = values.len();
        let total: u64 = values.iter().sum();
        if m == 0 {
            return Err(MmError::InvalidInput("empty sample".into()));
        }
        Self::new(total as f64 / m as f64, m)
    }
}

fn check_domain(theta: f64, family: &dyn PowerSeriesFamily) -> Result<()> {
    if family.contains(theta) {
        Ok(())
    } else {
        let (lo, hi) = family.domain();
        Err(MmError::Domain(format!(
            "theta = {theta} outside ({lo}, {hi}) for {}",
            family.name()
        )))
    }
}

/// One step of the iteration, `M(θ) = x̄ q(θ) / q'(θ)`.
pub fn ps_iterate(
    theta: f64,
    family: &dyn PowerSeriesFamily,
    sample: &PowerSeriesSample,
) -> Result<f64> {
    check_domain(theta, family)?;
    let next = sample.xbar * family.q(theta) / family.dq(theta);
    if family.contains(next) {
        Ok(next)
    } else {
        Err(MmError::EscapedDomain(format!(
            "{} iterate theta = {next} left {:?} (from theta = {theta})",
            family.name(),
            family.domain()
        )))
    }
}

/// `L(θ) = m x̄ ln θ - m ln q(θ)`.
pub fn ps_loglik(theta: f64, family: &dyn PowerSeriesFamily, sample: &PowerSeriesSample) -> Result<f64> {
    check_domain(theta, family)?;
    let m = sample.m as f64;
    Ok(m * sample.xbar * theta.ln() - m * family.q(theta).ln())
}

/// Score `s(θ) = m x̄ / θ - m q'(θ) / q(θ)`.
pub fn ps_score(theta: f64, family: &dyn PowerSeriesFamily, sample: &PowerSeriesSample) -> Result<f64> {
    check_domain(theta, family)?;
    let m = sample.m as f64;
    Ok(m * sample.xbar / theta - m * family.dq(theta) / family.q(theta))
}

/// Mean `μ(θ) = θ q'/q` of a single draw.
pub fn ps_mean(theta: f64, family: &dyn PowerSeriesFamily) -> f64 {
    theta * family.dq(theta) / family.q(theta)
}

/// Variance of a single draw, `μ + E[X(X-1)] - μ²` with
/// `E[X(X-1)] = θ² q''/q`.
pub fn ps_variance(theta: f64, family: &dyn PowerSeriesFamily) -> f64 {
    let mu = ps_mean(theta, family);
    let factorial2 = theta * theta * family.d2q(theta) / family.q(theta);
    mu + factorial2 - mu * mu
}

/// Local rate `M'(θ̂) = 1 - σ²(θ̂)/μ(θ̂)` at a fixed point of the iteration.
pub fn ps_local_rate(theta_hat: f64, family: &dyn PowerSeriesFamily) -> Result<f64> {
    check_domain(theta_hat, family)?;
    let mu = ps_mean(theta_hat, family);
    if mu == 0.0 || !mu.is_finite() {
        return Err(MmError::Degenerate(format!(
            "mean {mu} at theta = {theta_hat}"
        )));
    }
    Ok(1.0 - ps_variance(theta_hat, family) / mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogConcavity {
    LogConcave,
    /// The ratio test does not apply; the function may or may not be
    /// log-concave.
    Inconclusive,
}

/// Ratio test for log-concavity of `Σ a_k x^k`: with positive coefficients,
/// a non-increasing `(k+1) a_{k+1} / a_k` is sufficient.
///
/// `coefficients[j]` is `a_{first_power + j}`; the ratio uses the true power
/// `k = first_power + j`. Any zero coefficient makes the test inconclusive.
pub fn log_concavity_check(coefficients: &[f64], first_power: usize) -> Result<LogConcavity> {
    if coefficients.is_empty() {
        return Err(MmError::InvalidInput("empty coefficient sequence".into()));
    }
    if coefficients.iter().any(|&a| !(a > 0.0)) {
        return Ok(LogConcavity::Inconclusive);
    }
    let ratios: Vec<f64> = coefficients
        .windows(2)
        .enumerate()
        .map(|(j, w)| (first_power + j + 1) as f64 * w[1] / w[0])
        .collect();
    // allow for rounding in ratios that are constant in exact arithmetic
    let non_increasing = ratios
        .windows(2)
        .all(|r| r[1] <= r[0] * (1.0 + 1e-12));
    Ok(if non_increasing {
        LogConcavity::LogConcave
    } else {
        LogConcavity::Inconclusive
    })
}

/// The iteration wrapped as a one-parameter [`MmProblem`] (maximize).
pub struct PowerSeriesProblem<'a> {
    pub family: &'a dyn PowerSeriesFamily,
    pub sample: PowerSeriesSample,
}

impl<'a> PowerSeriesProblem<'a> {
    pub fn new(family: &'a dyn PowerSeriesFamily, sample: PowerSeriesSample) -> Self {
        PowerSeriesProblem { family, sample }
    }
}

impl MmProblem for PowerSeriesProblem<'_> {
    fn dimension(&self) -> usize {
        1
    }
    fn sense(&self) -> Sense {
        Sense::Maximize
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        ps_loglik(theta[0], self.family, &self.sample)
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        ps_iterate(theta[0], self.family, &self.sample).map(|t| vec![t])
    }
    fn is_feasible(&self, theta: &[f64]) -> bool {
        self.family.contains(theta[0])
    }
    fn is_monotone(&self) -> bool {
        self.family.log_concave()
    }
    fn stationarity_residual(&self, theta: &[f64]) -> Option<f64> {
        ps_score(theta[0], self.family, &self.sample).ok().map(f64::abs)
    }
}
