use log::warn;
use nalgebra::{DMatrix, DVector};

use super::hinge::{hinge_majorizer, HINGE_EPS_REG};
use super::simplex::{simplex_vertices, SimplexVertices};
use super::{solve_normal, Fit, LabeledDataset, LinearClassifier};
use crate::driver::{run_mm, MmProblem, Sense, StoppingRule};
use crate::error::{MmError, Result};

/// Residual norms below this have no usable direction; the linear term of
/// their surrogate is bounded at this radius instead.
const DEAD_RESIDUAL: f64 = 1e-12;

/// `max(‖v‖ - eps, 0)`.
pub fn eps_distance(v: &[f64], eps: f64) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm - eps).max(0.0)
}

/// Per-case quadratic surrogate `ω_i ‖r_i - m_i‖² + const_i` of the loss
/// term `max(‖r_i‖ - ε, 0)` around the current residual.
#[derive(Debug, Clone, PartialEq)]
pub struct VdaSurrogate {
    pub weights: DVector<f64>,
    /// Centres `m_i` as columns (`k × n`).
    pub centres: DMatrix<f64>,
    pub constants: DVector<f64>,
}

impl VdaSurrogate {
    /// Surrogate of `Σ_i max(‖r_i‖ - ε, 0)` at residuals `r` (columns).
    pub fn value(&self, residuals: &DMatrix<f64>) -> f64 {
        (0..residuals.ncols())
            .map(|i| {
                let d = residuals.column(i) - self.centres.column(i);
                self.weights[i] * d.norm_squared() + self.constants[i]
            })
            .sum()
    }
}

/// Builds the surrogate at residuals `r` (one column per case).
///
/// With `w = ‖r‖` the scalar majorizer of `max(w - ε, 0)` at `wⁿ` is
/// `a w² + b w + c`. The `w²` term is `a ‖r‖²`; the linear term is bounded
/// through `w >= rᵗrⁿ / wⁿ` when `b < 0` and `w <= (‖r‖² + wⁿ²) / (2 wⁿ)`
/// when `b >= 0`. Both bounds are tight at `rⁿ`. Residuals shorter than
/// `1e-12` drop a nonpositive linear term and bound a positive one at radius
/// `1e-12`.
pub fn vda_surrogate(residuals: &DMatrix<f64>, eps: f64) -> VdaSurrogate {
    let (k, n) = residuals.shape();
    let mut weights = DVector::zeros(n);
    let mut centres = DMatrix::zeros(k, n);
    let mut constants = DVector::zeros(n);
    for i in 0..n {
        let r = residuals.column(i);
        let w = r.norm();
        // majorizer of max(u, 0) in u = w - eps, expanded in w
        let (a_u, b_u, c_u) = hinge_majorizer(w - eps, HINGE_EPS_REG);
        let a = a_u;
        let b = b_u - 2.0 * a_u * eps;
        let c = a_u * eps * eps - b_u * eps + c_u;
        if w < DEAD_RESIDUAL && b < 0.0 {
            // no direction to project on; b w <= 0 can simply be dropped
            weights[i] = a;
            constants[i] = c;
        } else if b < 0.0 {
            // a‖x‖² + (b/w) xᵗr + c = a‖x - m‖² + c - a‖m‖²,  m = -b r / (2 a w)
            let m = r * (-b / (2.0 * a * w));
            weights[i] = a;
            constants[i] = c - a * m.norm_squared();
            centres.set_column(i, &m);
        } else {
            let w = w.max(DEAD_RESIDUAL);
            weights[i] = a + b / (2.0 * w);
            constants[i] = c + b * w / 2.0;
        }
    }
    VdaSurrogate {
        weights,
        centres,
        constants,
    }
}

/// `(1/n) Σ_i max(‖y_i - A z_i - b‖ - ε, 0) + λ Σ_j ‖a_j‖²`.
pub fn vda_objective(data: &LabeledDataset, lambda: f64, eps: f64, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<f64> {
    let problem = VdaProblem::new(data, lambda, eps)?;
    problem.objective(&problem.pack(a, b))
}

/// Vertex discriminant analysis as an [`MmProblem`]. Parameters are the
/// rows of `[b | A]` (`k × (p+1)`) in row-major order.
pub struct VdaProblem<'a> {
    data: &'a LabeledDataset,
    vertices: SimplexVertices,
    /// Assigned vertex per case (`k × n`).
    targets: DMatrix<f64>,
    design: DMatrix<f64>,
    lambda: f64,
    eps: f64,
}

impl<'a> VdaProblem<'a> {
    pub fn new(data: &'a LabeledDataset, lambda: f64, eps: f64) -> Result<Self> {
        let categories = data.classes().len();
        if categories < 2 {
            return Err(MmError::InvalidInput("need at least two categories".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(MmError::InvalidInput(format!(
                "penalty must be positive, got {lambda}"
            )));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(MmError::InvalidInput(format!(
                "insensitivity must be nonnegative, got {eps}"
            )));
        }
        let vertices = simplex_vertices(categories - 1)?;
        let cutoff = vertices.edge_length() / 2.0;
        if eps >= cutoff {
            warn!("insensitivity {eps} is at or above the overlap cutoff {cutoff:.6}");
        }
        let targets = DMatrix::from_fn(vertices.dim(), data.cases(), |row, i| {
            vertices.vertex(data.class_index()[i])[row]
        });
        Ok(VdaProblem {
            design: data.design(),
            data,
            vertices,
            targets,
            lambda,
            eps,
        })
    }

    pub fn vertices(&self) -> &SimplexVertices {
        &self.vertices
    }

    fn k(&self) -> usize {
        self.vertices.dim()
    }

    fn coefficients(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let q = self.design.ncols();
        if theta.len() != self.k() * q {
            return Err(MmError::DimensionMismatch {
                expected: self.k() * q,
                found: theta.len(),
            });
        }
        Ok(DMatrix::from_row_slice(self.k(), q, theta))
    }

    pub fn pack(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k() * (a.ncols() + 1));
        for j in 0..self.k() {
            out.push(b[j]);
            out.extend(a.row(j).iter());
        }
        out
    }

    /// `(A, b)` from packed parameters.
    pub fn unpack(&self, theta: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let coef = self.coefficients(theta)?;
        let q = coef.ncols();
        Ok((
            coef.columns(1, q - 1).into_owned(),
            coef.column(0).into_owned(),
        ))
    }

    /// Residuals `y_i - A z_i - b` as columns.
    pub fn residuals(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let coef = self.coefficients(theta)?;
        Ok(&self.targets - coef * self.design.transpose())
    }

    fn penalty(&self, coef: &DMatrix<f64>) -> f64 {
        let q = coef.ncols();
        self.lambda * coef.columns(1, q - 1).norm_squared()
    }

    /// Surrogate objective at `theta` built around `anchor`.
    pub fn surrogate_value(&self, theta: &[f64], anchor: &[f64]) -> Result<f64> {
        let sur = vda_surrogate(&self.residuals(anchor)?, self.eps);
        let coef = self.coefficients(theta)?;
        let n = self.data.cases() as f64;
        Ok(sur.value(&self.residuals(theta)?) / n + self.penalty(&coef))
    }

    pub fn classifier(&self, theta: &[f64]) -> Result<LinearClassifier> {
        let (a, b) = self.unpack(theta)?;
        Ok(LinearClassifier::Multi {
            a,
            b,
            vertices: self.vertices.clone(),
            classes: self.data.classes().to_vec(),
        })
    }
}

impl MmProblem for VdaProblem<'_> {
    fn dimension(&self) -> usize {
        self.k() * self.design.ncols()
    }
    fn sense(&self) -> Sense {
        Sense::Minimize
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        let resid = self.residuals(theta)?;
        let n = self.data.cases() as f64;
        let loss: f64 = resid
            .column_iter()
            .map(|r| (r.norm() - self.eps).max(0.0))
            .sum();
        Ok(loss / n + self.penalty(&self.coefficients(theta)?))
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let sur = vda_surrogate(&self.residuals(theta)?, self.eps);
        let n = self.data.cases() as f64;
        let x = &self.design;
        let q = x.ncols();
        // shared normal matrix, one right-hand side per simplex coordinate
        let mut normal = DMatrix::zeros(q, q);
        let shifted = &self.targets - &sur.centres;
        let mut rhs = DMatrix::zeros(q, self.k());
        for i in 0..x.nrows() {
            let w = sur.weights[i] / n;
            if w == 0.0 {
                continue;
            }
            let row = x.row(i);
            normal += w * row.transpose() * row;
            rhs += w * row.transpose() * shifted.column(i).transpose();
        }
        for j in 1..q {
            normal[(j, j)] += self.lambda;
        }
        // q × k solution; its column-major storage is the row-major k × q
        let solution = solve_normal(normal, &rhs)?;
        Ok(solution.as_slice().to_vec())
    }
}

/// Fits a VDA classifier starting from `A = 0`, `b = 0`.
pub fn vda_fit(data: &LabeledDataset, lambda: f64, eps: f64, rule: &StoppingRule) -> Result<Fit> {
    let problem = VdaProblem::new(data, lambda, eps)?;
    let start = vec![0.0; problem.dimension()];
    let run = run_mm(&problem, &start, rule)?;
    Ok(Fit {
        model: problem.classifier(&run.report.theta_final)?,
        run,
    })
}
