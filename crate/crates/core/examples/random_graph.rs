// Propensities of a random graph with edge probability
// `p_i p_j / (1 + p_i p_j)`, simulated and then re-estimated.

use mmkit::random_graph::{fit_graph, graph_simulate, linear_propensities};
use mmkit::StoppingRule;

pub fn run_example() -> anyhow::Result<()> {
    let m = 1000;
    let truth = linear_propensities(m);
    let graph = graph_simulate(&truth, 2024)?;
    println!("{} nodes, {} edges, density {:.4}", m, graph.edge_count(), graph.density());

    let run = fit_graph(&graph, &StoppingRule::new(500).param_tol(1e-9))?;
    println!(" n   p_first   p_middle  p_last    L");
    for e in run.trace.entries().iter().take(6) {
        println!(
            "{:>2}  {:.5}   {:.5}   {:.5}   {:.4}",
            e.n,
            e.theta[0],
            e.theta[m / 2],
            e.theta[m - 1],
            e.objective
        );
    }
    let fitted = &run.report.theta_final;
    let errors: Vec<f64> = fitted.iter().zip(&truth).map(|(a, b)| (a - b).abs()).collect();
    println!(
        "{} iterations, mean |error| {:.4}, max |error| {:.4}, stationarity {:.2e}",
        run.report.iterations,
        errors.iter().sum::<f64>() / m as f64,
        errors.iter().cloned().fold(0.0, f64::max),
        run.report.stationarity_residual.unwrap_or(f64::NAN)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
