// Convergence-rate diagnostics: the empirical rate from a trace, the
// spectral radius of the MM map's Jacobian, and step doubling.

use mmkit::power_series::{ps_local_rate, PowerSeriesProblem, PowerSeriesSample, TruncatedPoisson};
use mmkit::{estimate_rate, run_mm, spectral_radius_numeric, Driver, MmProblem, Result, Sense, StoppingRule};

/// `θ ← 0.95 θ + 0.05`, a slowly contracting map toward 1.
struct SlowContraction;

impl MmProblem for SlowContraction {
    fn dimension(&self) -> usize {
        1
    }
    fn sense(&self) -> Sense {
        Sense::Minimize
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        Ok((theta[0] - 1.0).powi(2))
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.95 * theta[0] + 0.05])
    }
}

pub fn run_example() -> anyhow::Result<()> {
    let problem = PowerSeriesProblem::new(&TruncatedPoisson, PowerSeriesSample::new(2.0, 10)?);
    let run = run_mm(&problem, &[1.0], &StoppingRule::new(200).param_tol(1e-12))?;
    let theta_hat = run.report.theta_final[0];
    println!(
        "truncated Poisson: analytic {:.4}, trace {:.4}, Jacobian {:.4}",
        ps_local_rate(theta_hat, &TruncatedPoisson)?,
        estimate_rate(&run.trace).unwrap_or(f64::NAN),
        spectral_radius_numeric(&problem, &[theta_hat])?.value
    );

    let rule = StoppingRule::new(10_000).param_tol(1e-6);
    let plain = Driver::new(rule).run(&SlowContraction, &[0.0])?;
    let doubled = Driver::new(rule).step_doubling(true).run(&SlowContraction, &[0.0])?;
    println!(
        "slow contraction: {} plain iterations, {} with step doubling",
        plain.report.iterations, doubled.report.iterations
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
