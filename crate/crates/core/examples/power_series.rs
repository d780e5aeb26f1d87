// Power series MLE by the MM iteration `θ ← x̄ q(θ) / q'(θ)`.
//
// Runs the truncated Poisson and logarithmic examples and shows the
// geometric family escaping its domain when the sample mean exceeds one.
//
// ```text
// cargo run --example power_series
// ```

use mmkit::power_series::{
    ps_local_rate, BuiltinFamily, PowerSeriesProblem, PowerSeriesSample,
};
use mmkit::{run_mm, StoppingRule, Termination};

pub fn run_example() -> anyhow::Result<()> {
    let sample = PowerSeriesSample::new(2.0, 10)?;
    let rule = StoppingRule::new(200).param_tol(1e-12);

    for (family, theta0) in [
        (BuiltinFamily::TruncatedPoisson, 1.0),
        (BuiltinFamily::Logarithmic, 0.99),
    ] {
        let fam = family.family();
        let run = run_mm(&PowerSeriesProblem::new(fam.as_ref(), sample), &[theta0], &rule)?;
        let theta_hat = run.report.theta_final[0];
        println!(
            "{family}: θ̂ = {theta_hat:.6} after {} iterations, L = {:.5}",
            run.report.iterations, run.report.objective_final
        );
        println!(
            "  local rate M'(θ̂) = {:.4}, empirical = {:.4}",
            ps_local_rate(theta_hat, fam.as_ref())?,
            run.report.rate_estimate.unwrap_or(f64::NAN)
        );
        for e in run.trace.entries().iter().take(4) {
            println!("  n={:<2} θ={:.5} L={:.5}", e.n, e.theta[0], e.objective);
        }
    }

    let geometric = BuiltinFamily::Geometric.family();
    let run = run_mm(
        &PowerSeriesProblem::new(geometric.as_ref(), sample),
        &[0.6],
        &rule,
    )?;
    match &run.report.termination {
        Termination::Diverged(why) => println!("geometric: {why}"),
        other => anyhow::bail!("geometric run should diverge, ended with {other:?}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
