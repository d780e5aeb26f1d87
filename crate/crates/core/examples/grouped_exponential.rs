// Exponential rate from grouped data: the quadratic-lower-bound MM update
// against EM on the Meilijson example.

use mmkit::format::fixed5;
use mmkit::grouped_exp::{grouped_loglik, meilijson_example, GroupedAlgorithm, GroupedExpProblem};
use mmkit::{run_mm, spectral_radius_numeric, StoppingRule};

pub fn run_example() -> anyhow::Result<()> {
    let data = meilijson_example();
    let rule = StoppingRule::new(100).param_tol(1e-12);
    let mm = run_mm(&GroupedExpProblem::new(&data, GroupedAlgorithm::Mm), &[1.0], &rule)?;
    let em = run_mm(&GroupedExpProblem::new(&data, GroupedAlgorithm::Em), &[1.0], &rule)?;

    println!(" n   λ (MM)    L (MM)     λ (EM)    L (EM)");
    for (a, b) in mm.trace.entries().iter().zip(em.trace.entries()).take(8) {
        println!(
            "{:>2}  {}  {}  {}  {}",
            a.n,
            fixed5(a.theta[0]),
            fixed5(a.objective),
            fixed5(b.theta[0]),
            fixed5(b.objective)
        );
    }

    for (name, alg, run) in [("MM", GroupedAlgorithm::Mm, &mm), ("EM", GroupedAlgorithm::Em, &em)] {
        let lambda_hat = run.report.theta_final[0];
        let rho = spectral_radius_numeric(&GroupedExpProblem::new(&data, alg), &[lambda_hat])?;
        println!(
            "{name}: λ̂ = {lambda_hat:.8}, L = {:.6}, iterations = {}, rate = {:.4}",
            grouped_loglik(lambda_hat, &data)?,
            run.report.iterations,
            rho.value
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
