//! Regeneration of the reference iteration tables and the random-graph
//! experiment.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::driver::{run_mm, MmRun, StoppingRule};
use crate::error::{MmError, Result};
use crate::format::{fixed5, sig};
use crate::grouped_exp::{meilijson_example, GroupedAlgorithm, GroupedExpProblem};
use crate::power_series::{
    Logarithmic, PowerSeriesFamily, PowerSeriesProblem, PowerSeriesSample, TruncatedPoisson,
};
use crate::random_graph::{fit_graph, graph_simulate, linear_propensities, Graph};

/// One row of a one-parameter iteration table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRow {
    pub n: usize,
    pub theta: f64,
    pub loglik: f64,
}

fn rows_of(run: &MmRun) -> Vec<IterateRow> {
    run.trace
        .entries()
        .iter()
        .map(|e| IterateRow {
            n: e.n,
            theta: e.theta[0],
            loglik: e.objective,
        })
        .collect()
}

/// Runs exactly `iterations` steps of the power-series iteration.
pub fn power_series_rows(
    family: &dyn PowerSeriesFamily,
    sample: PowerSeriesSample,
    theta0: f64,
    iterations: usize,
) -> Result<Vec<IterateRow>> {
    let problem = PowerSeriesProblem::new(family, sample);
    Ok(rows_of(&run_mm(&problem, &[theta0], &StoppingRule::new(iterations))?))
}

/// Truncated Poisson, sample mean 2 over 10 observations, from 1.
pub fn table1() -> Result<Vec<IterateRow>> {
    power_series_rows(&TruncatedPoisson, PowerSeriesSample::new(2.0, 10)?, 1.0, 13)
}

/// Logarithmic, sample mean 2 over 10 observations, from 0.99.
pub fn table2() -> Result<Vec<IterateRow>> {
    power_series_rows(&Logarithmic, PowerSeriesSample::new(2.0, 10)?, 0.99, 17)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupedRow {
    pub n: usize,
    pub lambda_mm: f64,
    pub loglik_mm: f64,
    pub lambda_em: f64,
    pub loglik_em: f64,
}

/// MM and EM side by side on grouped exponential data, `iterations` steps
/// each.
pub fn grouped_rows(
    data: &crate::grouped_exp::GroupedExpData,
    lambda0: f64,
    iterations: usize,
) -> Result<Vec<GroupedRow>> {
    let rule = StoppingRule::new(iterations);
    let mm = run_mm(&GroupedExpProblem::new(data, GroupedAlgorithm::Mm), &[lambda0], &rule)?;
    let em = run_mm(&GroupedExpProblem::new(data, GroupedAlgorithm::Em), &[lambda0], &rule)?;
    Ok(mm
        .trace
        .entries()
        .iter()
        .zip(em.trace.entries())
        .map(|(a, b)| GroupedRow {
            n: a.n,
            lambda_mm: a.theta[0],
            loglik_mm: a.objective,
            lambda_em: b.theta[0],
            loglik_em: b.objective,
        })
        .collect())
}

/// The Meilijson data from `λ = 1`, seven steps.
pub fn table3() -> Result<Vec<GroupedRow>> {
    grouped_rows(&meilijson_example(), 1.0, 7)
}

fn csv_err(e: csv::Error) -> MmError {
    MmError::Io(e.to_string())
}

/// `n,theta,loglik` with five decimals.
pub fn write_iterate_rows<W: Write>(rows: &[IterateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "theta", "loglik"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.n.to_string(), fixed5(r.theta), fixed5(r.loglik)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `n,lambda_mm,loglik_mm,lambda_em,loglik_em` with five decimals.
pub fn write_grouped_rows<W: Write>(rows: &[GroupedRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "lambda_mm", "loglik_mm", "lambda_em", "loglik_em"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fixed5(r.lambda_mm),
            fixed5(r.loglik_mm),
            fixed5(r.lambda_em),
            fixed5(r.loglik_em),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of simulating a graph from propensities `(i - 1/2) / m` and
/// refitting them.
#[derive(Debug, Clone)]
pub struct GraphExperiment {
    pub nodes: usize,
    pub seed: u64,
    pub graph: Graph,
    pub truth: Vec<f64>,
    pub run: MmRun,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
    /// Largest relative drop of the log-likelihood between iterations.
    pub worst_relative_decrease: f64,
    pub elapsed: Duration,
}

pub fn graph_experiment(nodes: usize, seed: u64, rule: &StoppingRule) -> Result<GraphExperiment> {
    let started = Instant::now();
    let truth = linear_propensities(nodes);
    let graph = graph_simulate(&truth, seed)?;
    let run = fit_graph(&graph, rule)?;
    let fitted = &run.report.theta_final;
    let errors: Vec<f64> = fitted.iter().zip(&truth).map(|(a, b)| (a - b).abs()).collect();
    let mean_abs_error = errors.iter().sum::<f64>() / nodes as f64;
    let max_abs_error = errors.iter().fold(0.0, |a: f64, &b| a.max(b));
    let worst_relative_decrease = run
        .trace
        .objectives()
        .windows(2)
        .map(|w| (w[0] - w[1]) / w[0].abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(GraphExperiment {
        nodes,
        seed,
        graph,
        truth,
        run,
        mean_abs_error,
        max_abs_error,
        worst_relative_decrease,
        elapsed: started.elapsed(),
    })
}

/// Per-iteration rows `n,p_first,p_middle,p_last,loglik`.
pub fn write_graph_experiment<W: Write>(exp: &GraphExperiment, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "p_first", "p_middle", "p_last", "loglik"])
        .map_err(csv_err)?;
    let last = exp.nodes - 1;
    let middle = exp.nodes / 2;
    for e in exp.run.trace.entries() {
        w.write_record([
            e.n.to_string(),
            fixed5(e.theta[0]),
            fixed5(e.theta[middle]),
            fixed5(e.theta[last]),
            sig(e.objective, 15),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_first_and_last() {
        let rows = table1().unwrap();
        assert_eq!(rows.len(), 14);
        assert_eq!(fixed5(rows[0].loglik), "-5.41325");
        assert_eq!(fixed5(rows[13].theta), "1.59362");
    }

    #[test]
    fn table3_layout() {
        let mut buf = Vec::new();
        write_grouped_rows(&table3().unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "n,lambda_mm,loglik_mm,lambda_em,loglik_em");
        assert_eq!(lines[2], "1,0.50000,-1.75014,0.27082,-1.34637");
    }

    #[test]
    fn small_graph_experiment() {
        let exp = graph_experiment(200, 5, &StoppingRule::new(500).param_tol(1e-9)).unwrap();
        assert!(exp.run.report.converged());
        assert!(exp.worst_relative_decrease <= 1e-9);
        let mut buf = Vec::new();
        write_graph_experiment(&exp, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,p_first,p_middle,p_last,loglik\n0,"));
    }
}
