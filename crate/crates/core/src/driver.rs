//! Generic MM iteration driver.
//!
//! A problem supplies an objective and its MM map; the driver iterates the
//! map, records every iterate together with its objective value, checks the
//! ascent/descent property at each step and stops on the first stopping
//! criterion that fires. Rate diagnostics (empirical ratio of successive
//! steps, finite-difference spectral radius of the map) live here too.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{MmError, Result};
use crate::format::sig;

/// Absolute/relative slack used when deciding whether a step moved the
/// objective in the declared direction.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Number of trailing step ratios used by [`estimate_rate`].
pub const RATE_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// True when `new` is no worse than `old` in this sense, up to a
    /// tolerance scaled by `max(1, |old|)`.
    pub fn no_worse(self, old: f64, new: f64, tol: f64) -> bool {
        let slack = tol * old.abs().max(1.0);
        match self {
            Sense::Maximize => new >= old - slack,
            Sense::Minimize => new <= old + slack,
        }
    }

    /// True when `a` is at least as good as `b`.
    pub fn at_least_as_good(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a >= b,
            Sense::Minimize => a <= b,
        }
    }
}

/// An optimization problem that comes with an MM map.
///
/// `mm_map` must return a vector of the same dimension as its argument.
/// Problems whose map is a genuine majorize-minimize (or minorize-maximize)
/// step report `is_monotone() == true`; functional iterations that merely
/// share the fixed point (for instance the power-series iteration for
/// log-convex families) return `false`, and the driver then logs objective
/// reversals instead of warning about them.
///
/// Objective evaluations take `&self` and may run concurrently, hence the
/// `Sync` bound.
pub trait MmProblem: Sync {
    fn dimension(&self) -> usize;

    fn sense(&self) -> Sense;

    fn objective(&self, theta: &[f64]) -> Result<f64>;

    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>>;

    /// Whether `theta` lies in the parameter domain.
    fn is_feasible(&self, _theta: &[f64]) -> bool {
        true
    }

    fn is_monotone(&self) -> bool {
        true
    }

    /// Solver-specific measure of how far `theta` is from stationarity.
    fn stationarity_residual(&self, _theta: &[f64]) -> Option<f64> {
        None
    }
}

impl<P: MmProblem + ?Sized> MmProblem for &P {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn sense(&self) -> Sense {
        (**self).sense()
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        (**self).objective(theta)
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        (**self).mm_map(theta)
    }
    fn is_feasible(&self, theta: &[f64]) -> bool {
        (**self).is_feasible(theta)
    }
    fn is_monotone(&self) -> bool {
        (**self).is_monotone()
    }
    fn stationarity_residual(&self, theta: &[f64]) -> Option<f64> {
        (**self).stationarity_residual(theta)
    }
}

/// When to stop iterating. A tolerance of zero disables that criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub max_iterations: usize,
    /// Sup-norm bound on `theta[n+1] - theta[n]`.
    pub param_tol: f64,
    /// Bound on `|f[n+1] - f[n]|`.
    pub objective_tol: f64,
}

impl StoppingRule {
    pub fn new(max_iterations: usize) -> Self {
        StoppingRule {
            max_iterations,
            param_tol: 0.0,
            objective_tol: 0.0,
        }
    }

    pub fn param_tol(mut self, tol: f64) -> Self {
        self.param_tol = tol;
        self
    }

    pub fn objective_tol(mut self, tol: f64) -> Self {
        self.objective_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(MmError::InvalidInput(
                "max_iterations must be positive".into(),
            ));
        }
        for (name, v) in [
            ("param_tol", self.param_tol),
            ("objective_tol", self.objective_tol),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(MmError::InvalidInput(format!(
                    "{name} must be a nonnegative finite number"
                )));
            }
        }
        Ok(())
    }
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule::new(1000).param_tol(1e-10)
    }
}

/// How an iterate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Initial,
    Plain,
    /// Step doubling accepted the extrapolated point.
    Doubled,
    /// Step doubling rejected the extrapolated point and kept the plain step.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub n: usize,
    pub theta: Vec<f64>,
    pub objective: f64,
    /// Whether the objective moved in the declared sense on the step that
    /// produced this entry (always true for the starting point).
    pub monotone: bool,
    pub step: StepKind,
}

/// Record of every iterate visited by a driver run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    entries: Vec<TraceEntry>,
}

impl IterationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry. Iteration indices must continue the sequence
    /// `0, 1, 2, ...`.
    pub fn push(&mut self, entry: TraceEntry) {
        assert_eq!(
            entry.n,
            self.entries.len(),
            "trace indices must increase by one"
        );
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.objective).collect()
    }

    pub fn monotone_throughout(&self) -> bool {
        self.entries.iter().all(|e| e.monotone)
    }

    /// Writes `n,f,monotone,theta_0,...` with 10 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let dim = self.entries.first().map_or(0, |e| e.theta.len());
        let mut header = String::from("n,f,monotone");
        for j in 0..dim {
            header.push_str(&format!(",theta_{j}"));
        }
        writeln!(out, "{header}")?;
        for e in &self.entries {
            let mut line = format!("{},{},{}", e.n, sig(e.objective, 10), e.monotone);
            for &t in &e.theta {
                line.push(',');
                line.push_str(&sig(t, 10));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ParamTol,
    ObjectiveTol,
    MaxIterations,
    /// The solver signalled a divergent outcome (iterate left the domain,
    /// MLE does not exist, ...). The trace up to that point is kept.
    Diverged(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub theta_final: Vec<f64>,
    pub objective_final: f64,
    pub iterations: usize,
    /// Empirical linear rate, `None` when not estimable.
    pub rate_estimate: Option<f64>,
    pub monotone_throughout: bool,
    pub termination: Termination,
    pub stationarity_residual: Option<f64>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        matches!(
            self.termination,
            Termination::ParamTol | Termination::ObjectiveTol
        )
    }

    pub fn diverged(&self) -> bool {
        matches!(self.termination, Termination::Diverged(_))
    }
}

#[derive(Debug, Clone)]
pub struct MmRun {
    pub trace: IterationTrace,
    pub report: ConvergenceReport,
}

/// Iteration driver with optional step doubling.
#[derive(Debug, Clone, Copy)]
pub struct Driver {
    rule: StoppingRule,
    step_doubling: bool,
}

impl Driver {
    pub fn new(rule: StoppingRule) -> Self {
        Driver {
            rule,
            step_doubling: false,
        }
    }

    pub fn step_doubling(mut self, on: bool) -> Self {
        self.step_doubling = on;
        self
    }

    pub fn run<P: MmProblem + ?Sized>(&self, problem: &P, theta0: &[f64]) -> Result<MmRun> {
        self.rule.validate()?;
        let dim = problem.dimension();
        if theta0.len() != dim {
            return Err(MmError::DimensionMismatch {
                expected: dim,
                found: theta0.len(),
            });
        }
        ensure_finite(theta0, "parameter", 0)?;
        let sense = problem.sense();
        let f0 = problem.objective(theta0)?;
        if !f0.is_finite() {
            return Err(MmError::NonFinite {
                what: "objective",
                iteration: 0,
            });
        }

        let mut trace = IterationTrace::new();
        trace.push(TraceEntry {
            n: 0,
            theta: theta0.to_vec(),
            objective: f0,
            monotone: true,
            step: StepKind::Initial,
        });

        let mut theta = theta0.to_vec();
        let mut f = f0;
        let mut termination = Termination::MaxIterations;

        for n in 1..=self.rule.max_iterations {
            let step = if self.step_doubling {
                step_double_kind(problem, &theta)
            } else {
                problem.mm_map(&theta).map(|t| (t, StepKind::Plain))
            };
            let (next, kind) = match step {
                Ok(s) => s,
                Err(e) if e.is_divergence() => {
                    log::info!("iteration {n}: {e}");
                    termination = Termination::Diverged(e.to_string());
                    break;
                }
                Err(e) => return Err(e),
            };
            if next.len() != dim {
                return Err(MmError::DimensionMismatch {
                    expected: dim,
                    found: next.len(),
                });
            }
            ensure_finite(&next, "parameter", n)?;
            let f_next = match problem.objective(&next) {
                Ok(v) => v,
                Err(e) if e.is_divergence() => {
                    termination = Termination::Diverged(e.to_string());
                    break;
                }
                Err(e) => return Err(e),
            };
            if !f_next.is_finite() {
                return Err(MmError::NonFinite {
                    what: "objective",
                    iteration: n,
                });
            }
            let monotone = sense.no_worse(f, f_next, MONOTONE_TOL);
            if !monotone {
                if problem.is_monotone() {
                    log::warn!(
                        "iteration {n}: objective moved the wrong way ({f:e} -> {f_next:e})"
                    );
                } else {
                    log::debug!("iteration {n}: objective reversal ({f:e} -> {f_next:e})");
                }
            }
            let change = sup_distance(&theta, &next);
            let f_change = (f_next - f).abs();
            trace.push(TraceEntry {
                n,
                theta: next.clone(),
                objective: f_next,
                monotone,
                step: kind,
            });
            theta = next;
            f = f_next;
            if self.rule.param_tol > 0.0 && change <= self.rule.param_tol {
                termination = Termination::ParamTol;
                break;
            }
            if self.rule.objective_tol > 0.0 && f_change <= self.rule.objective_tol {
                termination = Termination::ObjectiveTol;
                break;
            }
        }

        let report = ConvergenceReport {
            stationarity_residual: problem.stationarity_residual(&theta),
            theta_final: theta,
            objective_final: f,
            iterations: trace.len() - 1,
            rate_estimate: estimate_rate(&trace),
            monotone_throughout: trace.monotone_throughout(),
            termination,
        };
        Ok(MmRun { trace, report })
    }
}

/// Runs the plain MM iteration `theta <- M(theta)` from `theta0`.
pub fn run_mm<P: MmProblem + ?Sized>(
    problem: &P,
    theta0: &[f64],
    rule: &StoppingRule,
) -> Result<MmRun> {
    Driver::new(*rule).run(problem, theta0)
}

/// Guarded step doubling: proposes `theta + 2 (M(theta) - theta)` and keeps
/// it only if it is feasible and its objective is at least as good as that of
/// the plain step `M(theta)`. Otherwise returns `M(theta)`.
pub fn step_double<P: MmProblem + ?Sized>(problem: &P, theta: &[f64]) -> Result<Vec<f64>> {
    step_double_kind(problem, theta).map(|(t, _)| t)
}

fn step_double_kind<P: MmProblem + ?Sized>(
    problem: &P,
    theta: &[f64],
) -> Result<(Vec<f64>, StepKind)> {
    let plain = problem.mm_map(theta)?;
    let doubled: Vec<f64> = theta
        .iter()
        .zip(&plain)
        .map(|(&t, &m)| t + 2.0 * (m - t))
        .collect();
    if doubled == plain {
        return Ok((plain, StepKind::Plain));
    }
    if !doubled.iter().all(|v| v.is_finite()) || !problem.is_feasible(&doubled) {
        return Ok((plain, StepKind::Fallback));
    }
    let f_plain = problem.objective(&plain)?;
    let f_doubled = match problem.objective(&doubled) {
        Ok(v) if v.is_finite() => v,
        _ => return Ok((plain, StepKind::Fallback)),
    };
    if problem.sense().at_least_as_good(f_doubled, f_plain) {
        Ok((doubled, StepKind::Doubled))
    } else {
        Ok((plain, StepKind::Fallback))
    }
}

/// Median of the last [`RATE_WINDOW`] ratios
/// `|theta[n+1] - theta[n]| / |theta[n] - theta[n-1]|` (sup norm).
///
/// Returns `None` when the trace has fewer than four iterates or when any
/// denominator in the window is below `1e-14`.
pub fn estimate_rate(trace: &IterationTrace) -> Option<f64> {
    let entries = trace.entries();
    if entries.len() < 4 {
        return None;
    }
    let steps: Vec<f64> = entries
        .windows(2)
        .map(|w| sup_distance(&w[0].theta, &w[1].theta))
        .collect();
    let ratio_count = steps.len() - 1;
    let start = ratio_count.saturating_sub(RATE_WINDOW);
    let mut ratios = Vec::with_capacity(RATE_WINDOW);
    for k in start..ratio_count {
        let denom = steps[k];
        if denom < 1e-14 {
            return None;
        }
        ratios.push(steps[k + 1] / denom);
    }
    Some(median(&mut ratios))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRadius {
    pub value: f64,
    /// False when power iteration did not settle within its budget; `value`
    /// is then the last estimate.
    pub converged: bool,
}

/// Dominant eigenvalue magnitude of the MM map's Jacobian at a fixed point.
///
/// The Jacobian is built column by column with central differences, step
/// `1e-5 * max(1, |theta_j|)`, and the dominant magnitude is found by power
/// iteration (at most 200 iterations, relative change below `1e-10`). When
/// power iteration does not settle, `converged` is false and `value` comes
/// from the eigenvalues of the Jacobian's Schur form.
pub fn spectral_radius_numeric<P: MmProblem + ?Sized>(
    problem: &P,
    fixed_point: &[f64],
) -> Result<SpectralRadius> {
    let dim = problem.dimension();
    if fixed_point.len() != dim {
        return Err(MmError::DimensionMismatch {
            expected: dim,
            found: fixed_point.len(),
        });
    }
    let image = problem.mm_map(fixed_point)?;
    let residual = sup_distance(&image, fixed_point);
    if !(residual < 1e-8) {
        return Err(MmError::NotFixedPoint { residual });
    }
    let jac = jacobian(problem, fixed_point)?;
    let mut sr = power_iteration(&jac, 200, 1e-10);
    if !sr.converged {
        // Power iteration stalls when two eigenvalues have nearly equal
        // magnitude; the Schur form still gives the dominant magnitude.
        let schur = jac.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if schur.is_finite() {
            sr.value = schur;
        }
    }
    Ok(sr)
}

/// Central-difference Jacobian of the MM map.
pub fn jacobian<P: MmProblem + ?Sized>(problem: &P, theta: &[f64]) -> Result<DMatrix<f64>> {
    let dim = theta.len();
    let mut jac = DMatrix::zeros(dim, dim);
    let mut probe = theta.to_vec();
    for j in 0..dim {
        let h = 1e-5 * theta[j].abs().max(1.0);
        probe[j] = theta[j] + h;
        let plus = problem.mm_map(&probe)?;
        probe[j] = theta[j] - h;
        let minus = problem.mm_map(&probe)?;
        probe[j] = theta[j];
        for i in 0..dim {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Power iteration for the dominant eigenvalue magnitude of `a`.
pub fn power_iteration(a: &DMatrix<f64>, max_iter: usize, rel_tol: f64) -> SpectralRadius {
    let n = a.nrows();
    if n == 0 {
        return SpectralRadius {
            value: 0.0,
            converged: true,
        };
    }
    // Deterministic start with no special alignment to coordinate axes.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 1.618_033_988_75).sin());
    v /= v.norm();
    let mut estimate = f64::NAN;
    for _ in 0..max_iter {
        let w = a * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return SpectralRadius {
                value: 0.0,
                converged: true,
            };
        }
        let prev = estimate;
        estimate = norm;
        v = w / norm;
        if prev.is_finite() && (estimate - prev).abs() <= rel_tol * estimate {
            return SpectralRadius {
                value: estimate,
                converged: true,
            };
        }
    }
    SpectralRadius {
        value: estimate,
        converged: false,
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn ensure_finite(v: &[f64], what: &'static str, iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(MmError::NonFinite { what, iteration })
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// theta <- A theta + c, minimizing a quadratic with that fixed point.
    struct Affine {
        a: DMatrix<f64>,
        c: DVector<f64>,
    }

    impl MmProblem for Affine {
        fn dimension(&self) -> usize {
            self.c.len()
        }
        fn sense(&self) -> Sense {
            Sense::Minimize
        }
        fn objective(&self, theta: &[f64]) -> Result<f64> {
            // distance to the fixed point of a contraction
            let n = self.c.len();
            let eye = DMatrix::<f64>::identity(n, n);
            let star = (eye - &self.a)
                .lu()
                .solve(&self.c)
                .expect("contraction has a fixed point");
            Ok(theta
                .iter()
                .zip(star.iter())
                .map(|(t, s)| (t - s).powi(2))
                .sum())
        }
        fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
            let t = DVector::from_column_slice(theta);
            Ok((&self.a * t + &self.c).as_slice().to_vec())
        }
    }

    fn scalar(rate: f64, c: f64) -> Affine {
        Affine {
            a: DMatrix::from_element(1, 1, rate),
            c: DVector::from_element(1, c),
        }
    }

    #[test]
    fn fixed_point_start_stops_immediately() {
        let p = scalar(0.5, 1.0); // fixed point 2
        let run = run_mm(&p, &[2.0], &StoppingRule::new(100).param_tol(1e-12)).unwrap();
        assert_eq!(run.trace.len(), 2);
        assert_eq!(run.report.theta_final, vec![2.0]);
        assert_eq!(run.report.termination, Termination::ParamTol);
        assert_eq!(estimate_rate(&run.trace), None);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = scalar(0.5, 1.0);
        let err = run_mm(&p, &[1.0, 2.0], &StoppingRule::default()).unwrap_err();
        assert_eq!(
            err,
            MmError::DimensionMismatch {
                expected: 1,
                found: 2
            }
        );
    }

    struct Blowup;
    impl MmProblem for Blowup {
        fn dimension(&self) -> usize {
            1
        }
        fn sense(&self) -> Sense {
            Sense::Minimize
        }
        fn objective(&self, _: &[f64]) -> Result<f64> {
            Ok(0.0)
        }
        fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![if theta[0] > 2.0 { f64::NAN } else { theta[0] + 1.0 }])
        }
    }

    #[test]
    fn non_finite_parameter_names_iteration() {
        let err = run_mm(&Blowup, &[0.0], &StoppingRule::new(10)).unwrap_err();
        assert_eq!(
            err,
            MmError::NonFinite {
                what: "parameter",
                iteration: 4
            }
        );
    }

    #[test]
    fn rate_of_scalar_contraction() {
        let p = scalar(0.7, 1.0);
        let run = run_mm(&p, &[0.0], &StoppingRule::new(30)).unwrap();
        let r = run.report.rate_estimate.unwrap();
        assert!((r - 0.7).abs() < 1e-9, "{r}");
        let sr = spectral_radius_numeric(&p, &run.report.theta_final);
        // not yet a fixed point to 1e-8 after 30 steps of rate 0.7
        assert!(matches!(sr, Err(MmError::NotFixedPoint { .. })));
    }

    #[test]
    fn spectral_radius_of_linear_map() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.2, 0.3, 0.1, 0.0, 0.1, -0.6]);
        let p = Affine {
            a: a.clone(),
            c: DVector::zeros(3),
        };
        let sr = spectral_radius_numeric(&p, &[0.0, 0.0, 0.0]).unwrap();
        let eig = a.complex_eigenvalues();
        let truth = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        // eigenvalues 0.575 and -0.611 are too close for 200 power steps
        assert!(!sr.converged);
        assert!((sr.value - truth).abs() < 1e-6, "{} vs {truth}", sr.value);
    }

    #[test]
    fn power_iteration_settles_on_separated_spectrum() {
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.0, 0.1]);
        let p = Affine {
            a,
            c: DVector::zeros(2),
        };
        let sr = spectral_radius_numeric(&p, &[0.0, 0.0]).unwrap();
        assert!(sr.converged);
        assert!((sr.value - 0.9).abs() < 1e-6, "{}", sr.value);
    }

    #[test]
    fn step_double_keeps_fixed_point() {
        let p = scalar(0.5, 1.0);
        assert_eq!(step_double(&p, &[2.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn step_double_accepts_on_slow_map() {
        let p = scalar(0.9, 0.1); // fixed point 1
        let next = step_double(&p, &[0.0]).unwrap();
        assert!((next[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let p = scalar(0.5, 1.0);
        let run = run_mm(&p, &[0.0], &StoppingRule::new(2)).unwrap();
        let csv = run.trace.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,f,monotone,theta_0");
        assert_eq!(lines[1], "0,4.000000000,true,0.000000000");
        assert_eq!(lines[2], "1,1.000000000,true,1.000000000");
    }

    #[test]
    fn sense_tolerance_is_relative() {
        assert!(Sense::Maximize.no_worse(-4e7, -4e7 - 1e-5, 1e-12));
        assert!(!Sense::Maximize.no_worse(-4e7, -4e7 - 1e-3, 1e-12));
        assert!(Sense::Minimize.no_worse(1.0, 1.0 + 5e-13, 1e-12));
    }
}
