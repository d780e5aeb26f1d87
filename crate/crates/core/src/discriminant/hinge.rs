use nalgebra::{DMatrix, DVector};

use super::{solve_normal, Fit, LabeledDataset, LinearClassifier};
use crate::driver::{run_mm, MmProblem, Sense, StoppingRule};
use crate::error::{MmError, Result};

/// Curvature guard for the hinge majorizer.
pub const HINGE_EPS_REG: f64 = 1e-6;

/// Quadratic `a u² + b u + c` majorizing `max(u, 0)` around `anchor`.
///
/// This is `(u + s)² / (4 s)` with `s = max(|anchor|, eps_reg / 4)`. For
/// `|anchor| >= eps_reg / 4` it is the tightest quadratic majorizer and
/// touches the hinge at `anchor`; closer to the kink the curvature is capped
/// and the gap at `anchor` is at most `eps_reg / 4`. It lies above the hinge
/// everywhere.
pub fn hinge_majorizer(anchor: f64, eps_reg: f64) -> (f64, f64, f64) {
    let s = anchor.abs().max(eps_reg / 4.0);
    (1.0 / (4.0 * s), 0.5, s / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HingeMode {
    /// Solve the weighted ridge least-squares surrogate exactly.
    FullWls,
    /// One cyclic pass of exact coordinate minimization of the surrogate,
    /// intercept first.
    Coordinate,
}

/// `Σ_i max(1 - y_i(α + z_iᵗβ), 0) + λ ‖β‖²` with `theta = (α, β)`.
pub fn hinge_objective(data: &LabeledDataset, lambda: f64, theta: &[f64]) -> Result<f64> {
    HingeProblem::new(data, lambda, HingeMode::FullWls)?.objective(theta)
}

pub struct HingeProblem<'a> {
    data: &'a LabeledDataset,
    signs: Vec<f64>,
    design: DMatrix<f64>,
    lambda: f64,
    mode: HingeMode,
}

impl<'a> HingeProblem<'a> {
    pub fn new(data: &'a LabeledDataset, lambda: f64, mode: HingeMode) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(MmError::InvalidInput(format!(
                "ridge penalty must be positive, got {lambda}"
            )));
        }
        Ok(HingeProblem {
            signs: data.signs()?,
            design: data.design(),
            data,
            lambda,
            mode,
        })
    }

    fn margins(&self, theta: &DVector<f64>) -> DVector<f64> {
        let fitted = &self.design * theta;
        DVector::from_fn(self.signs.len(), |i, _| 1.0 - self.signs[i] * fitted[i])
    }

    /// Weights and targets of the least-squares surrogate
    /// `Σ_i w_i (t_i - x_iᵗθ)²` at `theta`.
    fn surrogate(&self, theta: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let u = self.margins(theta);
        let mut w = DVector::zeros(u.len());
        let mut t = DVector::zeros(u.len());
        for i in 0..u.len() {
            let (a, _, c) = hinge_majorizer(u[i], HINGE_EPS_REG);
            let s = 4.0 * c;
            w[i] = a;
            t[i] = self.signs[i] * (1.0 + s);
        }
        (w, t)
    }

    fn penalty(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.lambda
        }
    }

    fn full_solve(&self, w: &DVector<f64>, t: &DVector<f64>) -> Result<DVector<f64>> {
        let x = &self.design;
        let q = x.ncols();
        let mut normal = DMatrix::zeros(q, q);
        let mut rhs = DMatrix::zeros(q, 1);
        for i in 0..x.nrows() {
            let row = x.row(i);
            normal += w[i] * row.transpose() * row;
            rhs += (w[i] * t[i]) * row.transpose();
        }
        for j in 1..q {
            normal[(j, j)] += self.lambda;
        }
        Ok(solve_normal(normal, &rhs)?.column(0).into_owned())
    }

    fn coordinate_pass(&self, theta: &DVector<f64>, w: &DVector<f64>, t: &DVector<f64>) -> DVector<f64> {
        let x = &self.design;
        let mut theta = theta.clone();
        let mut resid = t - x * &theta;
        for j in 0..x.ncols() {
            let col = x.column(j);
            let mut num = 0.0;
            let mut den = self.penalty(j);
            for i in 0..x.nrows() {
                num += w[i] * col[i] * (resid[i] + col[i] * theta[j]);
                den += w[i] * col[i] * col[i];
            }
            if den <= 0.0 {
                continue;
            }
            let next = num / den;
            let delta = next - theta[j];
            for i in 0..x.nrows() {
                resid[i] -= col[i] * delta;
            }
            theta[j] = next;
        }
        theta
    }

    pub fn classifier(&self, theta: &[f64]) -> LinearClassifier {
        LinearClassifier::Binary {
            alpha: theta[0],
            beta: DVector::from_column_slice(&theta[1..]),
            classes: [self.data.classes()[0], self.data.classes()[1]],
        }
    }

    fn check(&self, theta: &[f64]) -> Result<DVector<f64>> {
        if theta.len() != self.design.ncols() {
            return Err(MmError::DimensionMismatch {
                expected: self.design.ncols(),
                found: theta.len(),
            });
        }
        Ok(DVector::from_column_slice(theta))
    }
}

impl MmProblem for HingeProblem<'_> {
    fn dimension(&self) -> usize {
        self.design.ncols()
    }
    fn sense(&self) -> Sense {
        Sense::Minimize
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        let theta = self.check(theta)?;
        let loss: f64 = self.margins(&theta).iter().map(|u| u.max(0.0)).sum();
        let ridge: f64 = theta.rows(1, theta.len() - 1).norm_squared();
        Ok(loss + self.lambda * ridge)
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let theta = self.check(theta)?;
        let (w, t) = self.surrogate(&theta);
        let next = match self.mode {
            HingeMode::FullWls => self.full_solve(&w, &t)?,
            HingeMode::Coordinate => self.coordinate_pass(&theta, &w, &t),
        };
        Ok(next.as_slice().to_vec())
    }
}

/// Fits a ridge-penalized hinge-loss classifier starting from zero.
pub fn hinge_mm_fit(
    data: &LabeledDataset,
    lambda: f64,
    mode: HingeMode,
    rule: &StoppingRule,
) -> Result<Fit> {
    let problem = HingeProblem::new(data, lambda, mode)?;
    let start = vec![0.0; problem.dimension()];
    let run = run_mm(&problem, &start, rule)?;
    Ok(Fit {
        model: problem.classifier(&run.report.theta_final),
        run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn eval(anchor: f64, u: f64) -> f64 {
        let (a, b, c) = hinge_majorizer(anchor, HINGE_EPS_REG);
        a * u * u + b * u + c
    }

    #[test]
    fn majorizer_examples() {
        assert_abs_diff_eq!(eval(1.0, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval(-1.0, -1.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval(2.0, 0.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn majorizer_near_kink() {
        for anchor in [0.0, 1e-7, -1e-7, 2.4e-6] {
            assert!(eval(anchor, anchor) - anchor.max(0.0) <= HINGE_EPS_REG / 4.0);
            for u in [-1.0, -1e-6, 0.0, 1e-6, 1.0] {
                assert!(eval(anchor, u) >= u.max(0.0));
            }
        }
    }

    #[test]
    fn two_point_fit() {
        let data = LabeledDataset::from_rows(&[vec![-1.0], vec![1.0]], vec![-1, 1]).unwrap();
        let fit = hinge_mm_fit(&data, 0.01, HingeMode::FullWls, &StoppingRule::new(5000).param_tol(1e-12))
            .unwrap();
        let theta = &fit.run.report.theta_final;
        assert!(theta[0].abs() < 1e-3, "{theta:?}");
        assert!((theta[1] - 1.0).abs() < 1e-3, "{theta:?}");
        assert!(fit.run.trace.monotone_throughout());
        assert_eq!(fit.model.error_rate(&data).unwrap(), 0.0);
    }

    #[test]
    fn coordinate_mode_never_beats_full_solve() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let labels: Vec<i64> = rows
            .iter()
            .map(|r| {
                let noise: f64 = rng.gen_range(-0.5..0.5);
                if r[0] + 0.5 * r[1] + noise > 0.0 { 1 } else { -1 }
            })
            .collect();
        let data = LabeledDataset::from_rows(&rows, labels).unwrap();
        let rule = StoppingRule::new(5000).objective_tol(1e-13);
        let full = hinge_mm_fit(&data, 0.1, HingeMode::FullWls, &rule).unwrap();
        let coord = hinge_mm_fit(&data, 0.1, HingeMode::Coordinate, &rule).unwrap();
        assert!(full.run.trace.monotone_throughout());
        assert!(coord.run.trace.monotone_throughout());
        // single-coordinate moves stall once several cases sit on the kink
        assert!(coord.run.report.objective_final >= full.run.report.objective_final - 1e-9);
    }

    #[test]
    fn modes_agree_on_two_points() {
        let data = LabeledDataset::from_rows(&[vec![-1.0], vec![1.0]], vec![-1, 1]).unwrap();
        let rule = StoppingRule::new(5000).objective_tol(1e-14);
        let full = hinge_mm_fit(&data, 0.01, HingeMode::FullWls, &rule).unwrap();
        let coord = hinge_mm_fit(&data, 0.01, HingeMode::Coordinate, &rule).unwrap();
        let gap = (full.run.report.objective_final - coord.run.report.objective_final).abs();
        assert!(gap < 1e-6, "{gap}");
    }

    #[test]
    fn needs_positive_penalty() {
        let data = LabeledDataset::from_rows(&[vec![-1.0], vec![1.0]], vec![-1, 1]).unwrap();
        assert!(HingeProblem::new(&data, 0.0, HingeMode::FullWls).is_err());
    }
}
