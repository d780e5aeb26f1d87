//! Command-line front end. Every subcommand reads its inputs from flags and
//! files, runs one solver through the shared driver and writes CSV, PGM or
//! edge-list artifacts.
//!
//! Exit codes: 0 success, 1 solver failure, 2 bad input, 3 divergence (the
//! partial trace is still written).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::discriminant::{hinge_mm_fit, vda_fit, Fit, HingeMode, LinearClassifier};
use crate::driver::{Driver, MmRun, StoppingRule, Termination};
use crate::error::{MmError, Result};
use crate::format::{fixed5, sig};
use crate::grouped_exp::{GroupedAlgorithm, GroupedExpData, GroupedExpProblem};
use crate::imaging::{restore, ImageGrid, PixelMask, TVConfig};
use crate::io::{read_labeled, read_numeric_rows};
use crate::mvt::{MvtAlgorithm, MvtParams, MvtProblem, MvtSample};
use crate::power_series::{BuiltinFamily, PowerSeriesProblem, PowerSeriesSample};
use crate::random_graph::{graph_init, graph_simulate, linear_propensities, write_propensities, Graph, GraphProblem};
use crate::tables;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mmkit", version, about = "MM algorithms for estimation, classification and image restoration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Maximum number of MM iterations.
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Stop when no parameter moves by more than this (0 disables).
    #[arg(long, default_value_t = 1e-10)]
    pub param_tol: f64,
    /// Stop when the objective changes by at most this (0 disables).
    #[arg(long, default_value_t = 0.0)]
    pub obj_tol: f64,
    /// Seed for stochastic steps; required where randomness is used.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Try the doubled step `2M(θ) - θ` and keep it when feasible and no worse.
    #[arg(long)]
    pub step_double: bool,
}

impl Common {
    fn rule(&self) -> Result<StoppingRule> {
        let rule = StoppingRule {
            max_iterations: self.max_iter,
            param_tol: self.param_tol,
            objective_tol: self.obj_tol,
        };
        rule.validate()?;
        Ok(rule)
    }

    fn driver(&self) -> Result<Driver> {
        Ok(Driver::new(self.rule()?).step_doubling(self.step_double))
    }

    fn require_seed(&self, why: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| MmError::InvalidInput(format!("--seed is required {why}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MvtAlgorithmArg {
    Em,
    Ktv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupedAlgorithmArg {
    Mm,
    Em,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HingeModeArg {
    FullWls,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableChoice {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    Graph,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Location and scale of a multivariate t sample.
    Mvt {
        /// CSV with one observation per row (header optional).
        #[arg(long)]
        input: PathBuf,
        /// Degrees of freedom.
        #[arg(long)]
        nu: f64,
        #[arg(long, value_enum, default_value_t = MvtAlgorithmArg::Em)]
        algorithm: MvtAlgorithmArg,
        /// Fitted parameters as `name,value` CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Exponential rate from grouped (interval-censored) data.
    GroupedExp {
        /// Comma-separated increasing thresholds.
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
        /// Comma-separated group weights, one more than the thresholds.
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda0: f64,
        /// With `both`, the trace file holds the MM run.
        #[arg(long, value_enum, default_value_t = GroupedAlgorithmArg::Both)]
        algorithm: GroupedAlgorithmArg,
        /// Iteration table CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Parameter of a power series family from its sample mean.
    PowerSeries {
        #[arg(long)]
        family: BuiltinFamily,
        #[arg(long)]
        xbar: f64,
        /// Sample size.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        theta0: f64,
        /// Iteration table CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Node propensities of a random graph.
    Graph {
        /// Edge list, one `i j` pair per line with 0-based indices.
        #[arg(long, conflicts_with = "simulate", required_unless_present = "simulate")]
        edges: Option<PathBuf>,
        /// Node count when the edge list leaves trailing nodes isolated.
        #[arg(long)]
        nodes: Option<usize>,
        /// Simulate a graph on this many nodes with propensities (i - 1/2)/m.
        #[arg(long)]
        simulate: Option<usize>,
        /// Save the simulated graph as an edge list.
        #[arg(long, requires = "simulate")]
        save_edges: Option<PathBuf>,
        /// `node,degree,p_hat` CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Two-class ridge-penalized hinge-loss classifier.
    Hinge {
        /// CSV of features with the label (two distinct integers) last.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = HingeModeArg::FullWls)]
        mode: HingeModeArg,
        /// Z-score the feature columns.
        #[arg(long)]
        standardize: bool,
        /// Fitted coefficients as `name,value` CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Multicategory vertex discriminant analysis.
    Vda {
        /// CSV of features with the integer class label last.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        lambda: f64,
        /// Insensitivity of the Euclidean loss.
        #[arg(long, default_value_t = 0.9999)]
        eps: f64,
        #[arg(long)]
        standardize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Total-variation denoising and inpainting of a PGM image.
    Restore {
        /// Binary PGM (P5, maxval 255).
        #[arg(long)]
        input: PathBuf,
        /// PGM mask: 0 marks pixels to fill in, anything else keeps them.
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, default_value_t = 15.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Maximum number of checkerboard sweeps.
        #[arg(long, default_value_t = 200)]
        sweeps: usize,
        /// Restored PGM.
        #[arg(long)]
        out: PathBuf,
        /// Where to write the objective trace.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Regenerate the reference iteration tables and the graph experiment.
    Tables {
        #[arg(long, value_enum, default_value_t = TableChoice::All)]
        which: TableChoice,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Node count of the graph experiment.
        #[arg(long, default_value_t = 10_000)]
        graph_nodes: usize,
        /// Seed of the graph experiment.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| MmError::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| MmError::Io(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn write_trace(path: Option<&Path>, run: &MmRun) -> Result<()> {
    if let Some(p) = path {
        let mut w = create(p)?;
        run.trace.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn write_named<W: Write + ?Sized>(out: &mut W, values: &[(String, f64)]) -> Result<()> {
    writeln!(out, "name,value")?;
    for (name, v) in values {
        writeln!(out, "{name},{}", sig(*v, 10))?;
    }
    Ok(())
}

/// Outcome of a subcommand that completed without an input error.
enum Outcome {
    Done,
    Diverged(String),
}

fn outcome_of(run: &MmRun) -> Outcome {
    match &run.report.termination {
        Termination::Diverged(why) => Outcome::Diverged(why.clone()),
        _ => Outcome::Done,
    }
}

fn report(run: &MmRun) {
    let r = &run.report;
    eprintln!(
        "iterations={} objective={} termination={:?} monotone={}",
        r.iterations,
        sig(r.objective_final, 10),
        r.termination,
        r.monotone_throughout
    );
}

fn fit_report(fit: &Fit, error_rate: f64, started: Instant) {
    println!(
        "iterations={} objective={} training_error={} wall_time_s={:.3}",
        fit.run.report.iterations,
        sig(fit.run.report.objective_final, 10),
        sig(error_rate, 6),
        started.elapsed().as_secs_f64()
    );
}

fn classifier_values(model: &LinearClassifier) -> Vec<(String, f64)> {
    match model {
        LinearClassifier::Binary {
            alpha,
            beta,
            classes,
        } => {
            let mut v = vec![
                ("class_negative".to_string(), classes[0] as f64),
                ("class_positive".to_string(), classes[1] as f64),
                ("alpha".to_string(), *alpha),
            ];
            v.extend(beta.iter().enumerate().map(|(j, b)| (format!("beta_{j}"), *b)));
            v
        }
        LinearClassifier::Multi { a, b, classes, .. } => {
            let mut v: Vec<(String, f64)> = classes
                .iter()
                .enumerate()
                .map(|(c, l)| (format!("class_{c}"), *l as f64))
                .collect();
            for j in 0..a.nrows() {
                v.push((format!("b_{j}"), b[j]));
                for l in 0..a.ncols() {
                    v.push((format!("a_{j}_{l}"), a[(j, l)]));
                }
            }
            v
        }
    }
}

fn run_command(command: Command) -> Result<Outcome> {
    match command {
        Command::Mvt {
            input,
            nu,
            algorithm,
            out,
            common,
        } => {
            let driver = common.driver()?;
            let sample = MvtSample::from_rows(&read_numeric_rows(open(&input)?)?)?;
            let algorithm = match algorithm {
                MvtAlgorithmArg::Em => MvtAlgorithm::Em,
                MvtAlgorithmArg::Ktv => MvtAlgorithm::Ktv,
            };
            let start = MvtParams::initial(&sample, nu)?;
            let run = driver.run(&MvtProblem::new(&sample, nu, algorithm), &start.pack())?;
            write_trace(common.trace_out.as_deref(), &run)?;
            report(&run);
            let params = MvtParams::unpack(&run.report.theta_final, sample.dim(), nu)?;
            let p = params.dim();
            let mut values: Vec<(String, f64)> =
                (0..p).map(|i| (format!("mu_{i}"), params.mu[i])).collect();
            for i in 0..p {
                for j in 0..p {
                    values.push((format!("omega_{i}_{j}"), params.omega[(i, j)]));
                }
            }
            emit(out.as_deref(), |w| write_named(w, &values))?;
            Ok(outcome_of(&run))
        }
        Command::GroupedExp {
            thresholds,
            counts,
            lambda0,
            algorithm,
            out,
            common,
        } => {
            let driver = common.driver()?;
            let data = GroupedExpData::new(thresholds, counts)?;
            if !(lambda0 > 0.0) {
                return Err(MmError::InvalidInput(format!("--lambda0 must be positive, got {lambda0}")));
            }
            let run_one = |alg| driver.run(&GroupedExpProblem::new(&data, alg), &[lambda0]);
            let (mm, em) = match algorithm {
                GroupedAlgorithmArg::Mm => (Some(run_one(GroupedAlgorithm::Mm)?), None),
                GroupedAlgorithmArg::Em => (None, Some(run_one(GroupedAlgorithm::Em)?)),
                GroupedAlgorithmArg::Both => (
                    Some(run_one(GroupedAlgorithm::Mm)?),
                    Some(run_one(GroupedAlgorithm::Em)?),
                ),
            };
            let primary = mm.as_ref().or(em.as_ref()).expect("at least one run");
            write_trace(common.trace_out.as_deref(), primary)?;
            let rows = mm.as_ref().map_or(0, |r| r.trace.len()).max(em.as_ref().map_or(0, |r| r.trace.len()));
            let cell = |run: &Option<MmRun>, n: usize| -> (String, String) {
                run.as_ref()
                    .and_then(|r| r.trace.entries().get(n))
                    .map_or((String::new(), String::new()), |e| (fixed5(e.theta[0]), fixed5(e.objective)))
            };
            emit(out.as_deref(), |w| {
                writeln!(w, "n,lambda_mm,loglik_mm,lambda_em,loglik_em")?;
                for n in 0..rows {
                    let (lm, fm) = cell(&mm, n);
                    let (le, fe) = cell(&em, n);
                    writeln!(w, "{n},{lm},{fm},{le},{fe}")?;
                }
                Ok(())
            })?;
            for run in mm.iter().chain(em.iter()) {
                report(run);
                if let Outcome::Diverged(why) = outcome_of(run) {
                    return Ok(Outcome::Diverged(why));
                }
            }
            Ok(Outcome::Done)
        }
        Command::PowerSeries {
            family,
            xbar,
            m,
            theta0,
            out,
            common,
        } => {
            let driver = common.driver()?;
            let fam = family.family();
            if !fam.contains(theta0) {
                return Err(MmError::InvalidInput(format!(
                    "--theta0 {theta0} is outside the {family} parameter domain"
                )));
            }
            let sample = PowerSeriesSample::new(xbar, m)?;
            let run = driver.run(&PowerSeriesProblem::new(fam.as_ref(), sample), &[theta0])?;
            write_trace(common.trace_out.as_deref(), &run)?;
            report(&run);
            emit(out.as_deref(), |w| {
                writeln!(w, "n,theta,loglik")?;
                for e in run.trace.entries() {
                    writeln!(w, "{},{},{}", e.n, fixed5(e.theta[0]), fixed5(e.objective))?;
                }
                if run.report.diverged() {
                    // the escaping iterate has no log-likelihood
                    let last = run.report.theta_final[0];
                    let escaped = xbar * fam.q(last) / fam.dq(last);
                    writeln!(w, "{},{},", run.report.iterations + 1, fixed5(escaped))?;
                }
                Ok(())
            })?;
            Ok(outcome_of(&run))
        }
        Command::Graph {
            edges,
            nodes,
            simulate,
            save_edges,
            out,
            common,
        } => {
            let driver = common.driver()?;
            let graph = match (edges, simulate) {
                (Some(path), None) => Graph::read_edge_list(open(&path)?, nodes)?,
                (None, Some(m)) => {
                    let seed = common.require_seed("to simulate a graph")?;
                    let g = graph_simulate(&linear_propensities(m), seed)?;
                    if let Some(path) = &save_edges {
                        let mut w = create(path)?;
                        g.write_edge_list(&mut w)?;
                        w.flush()?;
                    }
                    g
                }
                _ => return Err(MmError::InvalidInput("give exactly one of --edges and --simulate".into())),
            };
            let start = graph_init(&graph)?;
            let run = driver.run(&GraphProblem { graph: &graph }, &start)?;
            write_trace(common.trace_out.as_deref(), &run)?;
            report(&run);
            emit(out.as_deref(), |w| write_propensities(&graph, &run.report.theta_final, w))?;
            Ok(outcome_of(&run))
        }
        Command::Hinge {
            input,
            lambda,
            mode,
            standardize,
            out,
            common,
        } => {
            let rule = common.rule()?;
            let data = read_labeled(open(&input)?, standardize)?;
            let mode = match mode {
                HingeModeArg::FullWls => HingeMode::FullWls,
                HingeModeArg::Coordinate => HingeMode::Coordinate,
            };
            let started = Instant::now();
            let fit = hinge_mm_fit(&data, lambda, mode, &rule)?;
            write_trace(common.trace_out.as_deref(), &fit.run)?;
            fit_report(&fit, fit.model.error_rate(&data)?, started);
            if let Some(path) = out.as_deref() {
                let mut w = create(path)?;
                write_named(&mut w, &classifier_values(&fit.model))?;
                w.flush()?;
            }
            Ok(outcome_of(&fit.run))
        }
        Command::Vda {
            input,
            lambda,
            eps,
            standardize,
            out,
            common,
        } => {
            let rule = common.rule()?;
            let data = read_labeled(open(&input)?, standardize)?;
            let started = Instant::now();
            let fit = vda_fit(&data, lambda, eps, &rule)?;
            write_trace(common.trace_out.as_deref(), &fit.run)?;
            fit_report(&fit, fit.model.error_rate(&data)?, started);
            if let Some(path) = out.as_deref() {
                let mut w = create(path)?;
                write_named(&mut w, &classifier_values(&fit.model))?;
                w.flush()?;
            }
            Ok(outcome_of(&fit.run))
        }
        Command::Restore {
            input,
            mask,
            lambda,
            eps,
            sweeps,
            out,
            trace_out,
        } => {
            let config = TVConfig::new(lambda, eps, sweeps)?;
            let y = ImageGrid::read_pgm(open(&input)?)?;
            let mask = match mask {
                Some(p) => PixelMask::read_pgm(open(&p)?)?,
                None => PixelMask::full(y.width(), y.height()),
            };
            let (restored, run) = restore(&y, &mask, &config)?;
            if let Some(p) = trace_out.as_deref() {
                let mut w = create(p)?;
                writeln!(w, "n,objective")?;
                for e in run.trace.entries() {
                    writeln!(w, "{},{}", e.n, sig(e.objective, 10))?;
                }
                w.flush()?;
            }
            report(&run);
            let mut w = create(&out)?;
            restored.write_pgm(&mut w)?;
            w.flush()?;
            Ok(Outcome::Done)
        }
        Command::Tables {
            which,
            out_dir,
            graph_nodes,
            seed,
        } => {
            let wants = |t: TableChoice| which == t || which == TableChoice::All;
            let seed = if wants(TableChoice::Graph) {
                Some(seed.ok_or_else(|| {
                    MmError::InvalidInput("--seed is required for the graph experiment".into())
                })?)
            } else {
                None
            };
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| MmError::Io(format!("{}: {e}", out_dir.display())))?;
            if wants(TableChoice::One) {
                tables::write_iterate_rows(&tables::table1()?, create(&out_dir.join("table1.csv"))?)?;
            }
            if wants(TableChoice::Two) {
                tables::write_iterate_rows(&tables::table2()?, create(&out_dir.join("table2.csv"))?)?;
            }
            if wants(TableChoice::Three) {
                tables::write_grouped_rows(&tables::table3()?, create(&out_dir.join("table3.csv"))?)?;
            }
            if let Some(seed) = seed {
                let rule = StoppingRule::new(1000).param_tol(1e-9);
                let exp = tables::graph_experiment(graph_nodes, seed, &rule)?;
                tables::write_graph_experiment(&exp, create(&out_dir.join("graph_experiment.csv"))?)?;
                println!(
                    "graph experiment: nodes={} iterations={} mean_abs_error={} max_abs_error={} stationarity={}",
                    exp.nodes,
                    exp.run.report.iterations,
                    sig(exp.mean_abs_error, 6),
                    sig(exp.max_abs_error, 6),
                    exp.run.report.stationarity_residual.map_or("n/a".into(), |r| sig(r, 3)),
                );
                return Ok(outcome_of(&exp.run));
            }
            Ok(Outcome::Done)
        }
    }
}

fn exit_code_for(err: &MmError) -> i32 {
    match err {
        MmError::InvalidInput(_)
        | MmError::Parse(_)
        | MmError::Io(_)
        | MmError::DimensionMismatch { .. }
        | MmError::Domain(_)
        | MmError::SaturatedGraph { .. } => EXIT_INPUT,
        e if e.is_divergence() => EXIT_DIVERGED,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (program name first) and runs the chosen subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_command(cli.command) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::Diverged(why)) => {
            eprintln!("diverged: {why}");
            EXIT_DIVERGED
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
