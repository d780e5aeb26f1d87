//! Random graphs where an edge joins nodes `i` and `j` with probability
//! `p_i p_j / (1 + p_i p_j)`, and MM estimation of the node propensities
//! from an observed graph.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::driver::{run_mm, MmProblem, MmRun, Sense, StoppingRule};
use crate::error::{MmError, Result};
use crate::format::sig;

/// Propensity above which the fit is abandoned as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    /// Edges as `(i, j)` with `i < j`, sorted.
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
}

impl Graph {
    /// Builds a graph from unordered pairs; self-loops, repeated pairs and
    /// out-of-range nodes are rejected.
    pub fn new(node_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(MmError::InvalidInput("graph needs at least one node".into()));
        }
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(MmError::InvalidInput(format!("self-loop at node {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(MmError::InvalidInput(format!(
                    "edge ({a}, {b}) outside {node_count} nodes"
                )));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(MmError::InvalidInput(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut degrees = vec![0; node_count];
        for &(a, b) in &edges {
            degrees[a] += 1;
            degrees[b] += 1;
        }
        Ok(Graph {
            node_count,
            edges,
            degrees,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Edge density `|E| / (m(m-1)/2)`; zero for a single node.
    pub fn density(&self) -> f64 {
        let m = self.node_count as f64;
        let pairs = m * (m - 1.0) / 2.0;
        if pairs == 0.0 {
            0.0
        } else {
            self.edges.len() as f64 / pairs
        }
    }

    /// Reads whitespace-separated `i j` pairs with 0-based indices, one per
    /// line. Blank lines and lines starting with `#` are skipped. Without
    /// `node_count` the graph spans the largest index seen.
    pub fn read_edge_list<R: BufRead>(reader: R, node_count: Option<usize>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(MmError::Parse(format!(
                    "line {}: expected two node indices, got {:?}",
                    lineno + 1,
                    trimmed
                )));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| MmError::Parse(format!("line {}: {s:?}: {e}", lineno + 1)))
            };
            pairs.push((parse(fields[0])?, parse(fields[1])?));
        }
        let seen = pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        let count = match node_count {
            Some(n) if n < seen => {
                return Err(MmError::InvalidInput(format!(
                    "edge list mentions node {} but node count is {n}",
                    seen - 1
                )))
            }
            Some(n) => n,
            None => seen,
        };
        Self::new(count, pairs)
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for &(a, b) in &self.edges {
            writeln!(out, "{a} {b}")?;
        }
        Ok(())
    }
}

fn check_len(graph: &Graph, p: &[f64]) -> Result<()> {
    if p.len() != graph.node_count {
        return Err(MmError::DimensionMismatch {
            expected: graph.node_count,
            found: p.len(),
        });
    }
    Ok(())
}

/// Log-likelihood of the observed graph. Returns `-inf` when an edge touches
/// a node of propensity zero.
pub fn graph_loglik(graph: &Graph, p: &[f64]) -> Result<f64> {
    check_len(graph, p)?;
    let mut edge_part = 0.0;
    for &(a, b) in &graph.edges {
        if p[a] <= 0.0 || p[b] <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        edge_part += p[a].ln() + p[b].ln();
    }
    let mut pair_part = 0.0;
    for i in 0..p.len() {
        let pi = p[i];
        let row: f64 = p[i + 1..].iter().map(|&pj| (pi * pj).ln_1p()).sum();
        pair_part += row;
    }
    Ok(edge_part - pair_part)
}

/// `Σ_{j≠i} p_j / (1 + p_i p_j)`.
fn pair_sum(p: &[f64], i: usize) -> f64 {
    let pi = p[i];
    p.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &pj)| pj / (1.0 + pi * pj))
        .sum()
}

/// One simultaneous MM sweep over all nodes.
pub fn graph_mm_update(graph: &Graph, p: &[f64]) -> Result<Vec<f64>> {
    check_len(graph, p)?;
    (0..p.len())
        .map(|i| {
            let d = graph.degrees[i];
            if d == 0 {
                return Ok(0.0);
            }
            let denom = pair_sum(p, i);
            if denom <= 0.0 {
                return Err(MmError::Degenerate(format!(
                    "node {i} has edges but every other propensity is zero"
                )));
            }
            Ok((p[i] * d as f64 / denom).sqrt())
        })
        .collect()
}

/// Score components `d_i / p_i - Σ_{j≠i} p_j / (1 + p_i p_j)` for nodes with
/// edges; zero for isolated nodes.
pub fn graph_score(graph: &Graph, p: &[f64]) -> Result<Vec<f64>> {
    check_len(graph, p)?;
    Ok((0..p.len())
        .map(|i| match graph.degrees[i] {
            0 => 0.0,
            d => d as f64 / p[i] - pair_sum(p, i),
        })
        .collect())
}

/// Starting propensities from a common background propensity `q` matching
/// the edge density, then `p_i q / (1 + p_i q) = d_i / m` per node.
pub fn graph_init(graph: &Graph) -> Result<Vec<f64>> {
    let m = graph.node_count;
    if graph.edges.is_empty() {
        return Ok(vec![0.0; m]);
    }
    let density = graph.density();
    if density >= 1.0 {
        return Err(MmError::SaturatedGraph { density });
    }
    let q = (density / (1.0 - density)).sqrt();
    graph
        .degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d >= m {
                return Err(MmError::Degenerate(format!("node {i} has degree {d} >= {m}")));
            }
            Ok(d as f64 / (q * (m - d) as f64))
        })
        .collect()
}

/// Draws a graph: each pair joins independently with probability
/// `p_i p_j / (1 + p_i p_j)`. Identical seeds give identical graphs.
pub fn graph_simulate(propensities: &[f64], seed: u64) -> Result<Graph> {
    if propensities.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(MmError::InvalidInput(
            "propensities must be finite and nonnegative".into(),
        ));
    }
    let m = propensities.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let w = propensities[i] * propensities[j];
            let prob = w / (1.0 + w);
            // draw for every pair so the stream does not depend on the values
            if rng.gen::<f64>() < prob {
                pairs.push((i, j));
            }
        }
    }
    Graph::new(m.max(1), pairs)
}

/// Propensities `(i - 1/2) / m` for `i = 1..=m`.
pub fn linear_propensities(m: usize) -> Vec<f64> {
    (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect()
}

/// Writes `node,degree,p_hat` rows.
pub fn write_propensities<W: Write>(graph: &Graph, p: &[f64], out: W) -> Result<()> {
    check_len(graph, p)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "degree", "p_hat"])
        .map_err(|e| MmError::Io(e.to_string()))?;
    for (i, (&d, &pi)) in graph.degrees.iter().zip(p).enumerate() {
        w.write_record([i.to_string(), d.to_string(), sig(pi, 10)])
            .map_err(|e| MmError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Propensity estimation as an [`MmProblem`]. The MM map reports
/// [`MmError::MleMayNotExist`] once any propensity exceeds
/// [`DIVERGENCE_BOUND`].
pub struct GraphProblem<'a> {
    pub graph: &'a Graph,
}

impl MmProblem for GraphProblem<'_> {
    fn dimension(&self) -> usize {
        self.graph.node_count
    }
    fn sense(&self) -> Sense {
        Sense::Maximize
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        graph_loglik(self.graph, theta)
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let next = graph_mm_update(self.graph, theta)?;
        if let Some((i, &v)) = next
            .iter()
            .enumerate()
            .find(|&(_, &v)| v > DIVERGENCE_BOUND)
        {
            return Err(MmError::MleMayNotExist(format!(
                "propensity of node {i} reached {v:.3e}"
            )));
        }
        Ok(next)
    }
    fn is_feasible(&self, theta: &[f64]) -> bool {
        theta.len() == self.graph.node_count
            && theta
                .iter()
                .zip(&self.graph.degrees)
                .all(|(&v, &d)| v.is_finite() && v >= 0.0 && (d == 0 || v > 0.0))
    }
    fn stationarity_residual(&self, theta: &[f64]) -> Option<f64> {
        let score = graph_score(self.graph, theta).ok()?;
        Some(score.iter().fold(0.0, |acc, s| acc.max(s.abs())))
    }
}

/// Fits the propensities from [`graph_init`].
pub fn fit_graph(graph: &Graph, rule: &StoppingRule) -> Result<MmRun> {
    let start = graph_init(graph)?;
    run_mm(&GraphProblem { graph }, &start, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::Termination;
    use approx::assert_abs_diff_eq;

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn graph_invariants() {
        let g = Graph::new(4, [(1, 0), (2, 3), (0, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (2, 3)]);
        assert_eq!(g.degrees(), &[2, 1, 2, 1]);
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        assert!(g.has_edge(3, 2));
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn loglik_examples() {
        let empty = Graph::new(5, []).unwrap();
        assert_eq!(graph_loglik(&empty, &[0.0; 5]).unwrap(), 0.0);
        let pair = Graph::new(2, [(0, 1)]).unwrap();
        assert_abs_diff_eq!(
            graph_loglik(&pair, &[1.0, 1.0]).unwrap(),
            -std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        assert_eq!(
            graph_loglik(&pair, &[0.0, 1.0]).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn loglik_matches_brute_force() {
        let p: Vec<f64> = (0..10).map(|i| 0.2 + 0.15 * i as f64).collect();
        let g = graph_simulate(&p, 42).unwrap();
        let mut brute = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                if i < j {
                    let w = p[i] * p[j];
                    let prob = w / (1.0 + w);
                    brute += if g.has_edge(i, j) {
                        prob.ln()
                    } else {
                        (1.0 - prob).ln()
                    };
                }
            }
        }
        assert_abs_diff_eq!(graph_loglik(&g, &p).unwrap(), brute, epsilon = 1e-12);
    }

    #[test]
    fn update_examples() {
        let pair = Graph::new(2, [(0, 1)]).unwrap();
        let next = graph_mm_update(&pair, &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(next[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(next[1], 2f64.sqrt(), epsilon = 1e-15);

        let lonely = Graph::new(3, [(0, 1)]).unwrap();
        let next = graph_mm_update(&lonely, &[1.0, 1.0, 5.0]).unwrap();
        assert_eq!(next[2], 0.0);

        let stuck = Graph::new(3, [(0, 1)]).unwrap();
        assert!(matches!(
            graph_mm_update(&stuck, &[1.0, 0.0, 0.0]),
            Err(MmError::Degenerate(_))
        ));
    }

    #[test]
    fn single_edge_grows_without_bound() {
        let pair = Graph::new(2, [(0, 1)]).unwrap();
        let mut p = vec![1.0, 1.0];
        for _ in 0..50 {
            let next = graph_mm_update(&pair, &p).unwrap();
            assert!(next[0] > p[0]);
            p = next;
        }
        // growth is only like sqrt(n), so the bound is checked from a large start
        let problem = GraphProblem { graph: &pair };
        let run = run_mm(&problem, &[1.5e8, 1.5e8], &StoppingRule::new(10_000)).unwrap();
        assert!(matches!(run.report.termination, Termination::Diverged(_)));
        assert!(run.trace.monotone_throughout());
    }

    #[test]
    fn path_has_no_mle() {
        // the middle node touches every other node, so its propensity runs off
        let g = path3();
        let run = run_mm(&GraphProblem { graph: &g }, &[0.5, 1.0, 0.5], &StoppingRule::new(2000))
            .unwrap();
        assert_eq!(run.report.termination, Termination::MaxIterations);
        assert!(run.trace.monotone_throughout());
        let middle: Vec<f64> = run.trace.entries().iter().map(|e| e.theta[1]).collect();
        assert!(middle.windows(2).all(|w| w[1] > w[0]));
        assert!(middle[middle.len() - 1] > 10.0);
    }

    #[test]
    fn init_examples() {
        let empty = Graph::new(4, []).unwrap();
        assert_eq!(graph_init(&empty).unwrap(), vec![0.0; 4]);
        let pair = Graph::new(2, [(0, 1)]).unwrap();
        assert!(matches!(
            graph_init(&pair),
            Err(MmError::SaturatedGraph { .. })
        ));
        let g = graph_simulate(&linear_propensities(200), 7).unwrap();
        let init = graph_init(&g).unwrap();
        for (i, &d) in g.degrees().iter().enumerate() {
            if d > 0 {
                assert!(init[i].is_finite() && init[i] > 0.0);
            } else {
                assert_eq!(init[i], 0.0);
            }
        }
    }

    #[test]
    fn init_recovers_density() {
        let g = Graph::new(4, [(0, 1), (2, 3), (0, 2)]).unwrap();
        let q = (0.5f64 / 0.5).sqrt();
        let init = graph_init(&g).unwrap();
        assert_abs_diff_eq!(init[0], 2.0 / (q * 2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(init[1], 1.0 / (q * 3.0), epsilon = 1e-15);
    }

    #[test]
    fn simulate_zero_and_seeded() {
        for seed in 0..5 {
            assert_eq!(graph_simulate(&[0.0; 6], seed).unwrap().edge_count(), 0);
        }
        let p = linear_propensities(50);
        assert_eq!(graph_simulate(&p, 3).unwrap(), graph_simulate(&p, 3).unwrap());
        assert_ne!(graph_simulate(&p, 3).unwrap(), graph_simulate(&p, 4).unwrap());
    }

    #[test]
    fn coin_flip_frequency() {
        let hits = (0..10_000u64)
            .filter(|&seed| graph_simulate(&[1.0, 1.0], seed).unwrap().edge_count() == 1)
            .count();
        let freq = hits as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.015, "{freq}");
    }

    #[test]
    fn complete_bipartite_fit_is_stationary() {
        let g = Graph::new(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
        let run = run_mm(
            &GraphProblem { graph: &g },
            &[1.0; 5],
            &StoppingRule::new(10_000).param_tol(1e-13),
        )
        .unwrap();
        assert!(run.report.converged());
        assert!(run.trace.monotone_throughout());
        let residual = run.report.stationarity_residual.unwrap();
        assert!(residual < 1e-8, "{residual}");
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::new(6, [(0, 1), (4, 2), (3, 5)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = Graph::read_edge_list(&buf[..], Some(6)).unwrap();
        assert_eq!(g, back);
        let text = "# comment\n0 1\n\n1 2\n";
        let h = Graph::read_edge_list(text.as_bytes(), None).unwrap();
        assert_eq!(h.node_count(), 3);
        assert!(Graph::read_edge_list("0 1 2\n".as_bytes(), None).is_err());
        assert!(Graph::read_edge_list("0 x\n".as_bytes(), None).is_err());
        assert!(Graph::read_edge_list("0 5\n".as_bytes(), Some(3)).is_err());
    }

    #[test]
    fn propensity_csv() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let mut buf = Vec::new();
        write_propensities(&g, &[1.5, 0.25], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "node,degree,p_hat\n0,1,1.500000000\n1,1,0.2500000000\n");
    }
}
