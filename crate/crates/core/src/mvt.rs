//! Location and scale of the multivariate t distribution for fixed degrees
//! of freedom.
//!
//! Both updates reweight the cases by `w_i = (ν + p) / (ν + d_i)` where `d_i`
//! is the Mahalanobis distance of case `i` under the current parameters. The
//! mean is the weighted mean in either variant; the EM scale update divides
//! the weighted scatter by the case count `m`, the Kent–Tyler–Vardi update
//! divides it by the weight total `s`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use statrs::function::gamma::ln_gamma;

use crate::driver::{run_mm, MmProblem, MmRun, Sense, StoppingRule};
use crate::error::{MmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MvtSample {
    data: DMatrix<f64>,
}

impl MvtSample {
    /// `data` holds one observation per row.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let (m, p) = data.shape();
        if p == 0 {
            return Err(MmError::InvalidInput("observations have no coordinates".into()));
        }
        if m < p + 1 {
            return Err(MmError::InvalidInput(format!(
                "need at least p + 1 = {} observations, got {m}",
                p + 1
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(MmError::InvalidInput("non-finite observation".into()));
        }
        Ok(MvtSample { data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(MmError::InvalidInput("ragged observation rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), p, &flat))
    }

    pub fn cases(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    fn row(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    pub fn mean(&self) -> DVector<f64> {
        self.data.row_mean().transpose()
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let p = self.dim();
        let mut cov = DMatrix::zeros(p, p);
        for i in 0..self.cases() {
            let r = self.row(i) - &mean;
            cov += &r * r.transpose();
        }
        cov / (self.cases() as f64 - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvtParams {
    pub mu: DVector<f64>,
    pub omega: DMatrix<f64>,
    pub nu: f64,
}

impl MvtParams {
    pub fn new(mu: DVector<f64>, omega: DMatrix<f64>, nu: f64) -> Result<Self> {
        let p = mu.len();
        if omega.shape() != (p, p) {
            return Err(MmError::DimensionMismatch {
                expected: p,
                found: omega.nrows(),
            });
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(MmError::InvalidInput(format!(
                "degrees of freedom must be positive, got {nu}"
            )));
        }
        let scale = omega.amax().max(1.0);
        if (&omega - omega.transpose()).amax() > 1e-12 * scale {
            return Err(MmError::InvalidInput("omega is not symmetric".into()));
        }
        let params = MvtParams { mu, omega, nu };
        params.factor()?;
        Ok(params)
    }

    /// Sample mean and covariance.
    pub fn initial(sample: &MvtSample, nu: f64) -> Result<Self> {
        Self::new(sample.mean(), sample.covariance(), nu)
    }

    fn factor(&self) -> Result<Cholesky<f64, Dyn>> {
        well_conditioned_factor(&self.omega).ok_or(MmError::NotPositiveDefinite)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `mu` followed by `omega` in row-major order.
    pub fn pack(&self) -> Vec<f64> {
        let p = self.dim();
        let mut out = Vec::with_capacity(p + p * p);
        out.extend(self.mu.iter());
        for i in 0..p {
            for j in 0..p {
                out.push(self.omega[(i, j)]);
            }
        }
        out
    }

    pub fn unpack(theta: &[f64], p: usize, nu: f64) -> Result<Self> {
        if theta.len() != p + p * p {
            return Err(MmError::DimensionMismatch {
                expected: p + p * p,
                found: theta.len(),
            });
        }
        let mu = DVector::from_column_slice(&theta[..p]);
        let omega = DMatrix::from_row_slice(p, p, &theta[p..]);
        Self::new(mu, omega, nu)
    }
}

/// Cholesky factor of `omega`, refusing pivots that are rounding noise
/// relative to the largest diagonal entry.
fn well_conditioned_factor(omega: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(omega.clone())?;
    let largest = omega.diagonal().amax();
    let smallest_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b * b));
    (smallest_pivot > 1e-12 * largest).then_some(chol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseWeights {
    pub w: DVector<f64>,
    /// Mahalanobis distances `(x_i - μ)ᵗ Ω⁻¹ (x_i - μ)`.
    pub d: DVector<f64>,
    /// `Σ w_i`.
    pub s: f64,
}

fn check_dims(sample: &MvtSample, params: &MvtParams) -> Result<()> {
    if sample.dim() != params.dim() {
        return Err(MmError::DimensionMismatch {
            expected: params.dim(),
            found: sample.dim(),
        });
    }
    Ok(())
}

fn distances(sample: &MvtSample, params: &MvtParams, chol: &Cholesky<f64, Dyn>) -> DVector<f64> {
    let l = chol.l();
    DVector::from_iterator(
        sample.cases(),
        (0..sample.cases()).map(|i| {
            let r = sample.row(i) - &params.mu;
            let z = l
                .solve_lower_triangular(&r)
                .expect("Cholesky factor has a positive diagonal");
            z.norm_squared()
        }),
    )
}

pub fn compute_weights(sample: &MvtSample, params: &MvtParams) -> Result<CaseWeights> {
    check_dims(sample, params)?;
    let chol = params.factor()?;
    let d = distances(sample, params, &chol);
    let p = params.dim() as f64;
    let w = d.map(|di| (params.nu + p) / (params.nu + di));
    let s = w.sum();
    Ok(CaseWeights { w, d, s })
}

fn weighted_update(sample: &MvtSample, params: &MvtParams, ktv: bool) -> Result<MvtParams> {
    let weights = compute_weights(sample, params)?;
    let p = params.dim();
    let mut mu = DVector::zeros(p);
    for i in 0..sample.cases() {
        mu += weights.w[i] * sample.row(i);
    }
    mu /= weights.s;
    let mut omega = DMatrix::zeros(p, p);
    for i in 0..sample.cases() {
        let r = sample.row(i) - &mu;
        omega += weights.w[i] * &r * r.transpose();
    }
    let divisor = if ktv {
        weights.s
    } else {
        sample.cases() as f64
    };
    omega /= divisor;
    omega = 0.5 * (&omega + omega.transpose());
    if well_conditioned_factor(&omega).is_none() {
        return Err(MmError::ScaleCollapsed);
    }
    Ok(MvtParams {
        mu,
        omega,
        nu: params.nu,
    })
}

/// Classic EM/MM update: weighted mean, weighted scatter divided by `m`.
pub fn em_update(sample: &MvtSample, params: &MvtParams) -> Result<MvtParams> {
    weighted_update(sample, params, false)
}

/// Kent–Tyler–Vardi update: weighted mean, weighted scatter divided by the
/// weight total.
pub fn ktv_update(sample: &MvtSample, params: &MvtParams) -> Result<MvtParams> {
    weighted_update(sample, params, true)
}

/// `Σ_i ln f(x_i)` for the multivariate t density.
pub fn mvt_loglik(sample: &MvtSample, params: &MvtParams) -> Result<f64> {
    check_dims(sample, params)?;
    let chol = params.factor()?;
    let d = distances(sample, params, &chol);
    let p = params.dim() as f64;
    let nu = params.nu;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let constant = ln_gamma((nu + p) / 2.0)
        - ln_gamma(nu / 2.0)
        - 0.5 * p * (nu * std::f64::consts::PI).ln()
        - 0.5 * log_det;
    Ok(d
        .iter()
        .map(|&di| constant - 0.5 * (nu + p) * (di / nu).ln_1p())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvtAlgorithm {
    Em,
    Ktv,
}

/// Multivariate-t estimation as an [`MmProblem`] over `(μ, Ω)` packed with
/// [`MvtParams::pack`].
pub struct MvtProblem<'a> {
    pub sample: &'a MvtSample,
    pub nu: f64,
    pub algorithm: MvtAlgorithm,
}

impl<'a> MvtProblem<'a> {
    pub fn new(sample: &'a MvtSample, nu: f64, algorithm: MvtAlgorithm) -> Self {
        MvtProblem {
            sample,
            nu,
            algorithm,
        }
    }

    fn params(&self, theta: &[f64]) -> Result<MvtParams> {
        MvtParams::unpack(theta, self.sample.dim(), self.nu)
    }
}

impl MmProblem for MvtProblem<'_> {
    fn dimension(&self) -> usize {
        let p = self.sample.dim();
        p + p * p
    }
    fn sense(&self) -> Sense {
        Sense::Maximize
    }
    fn objective(&self, theta: &[f64]) -> Result<f64> {
        mvt_loglik(self.sample, &self.params(theta)?)
    }
    fn mm_map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let params = self.params(theta)?;
        let next = match self.algorithm {
            MvtAlgorithm::Em => em_update(self.sample, &params)?,
            MvtAlgorithm::Ktv => ktv_update(self.sample, &params)?,
        };
        Ok(next.pack())
    }
    fn is_feasible(&self, theta: &[f64]) -> bool {
        self.params(theta).is_ok()
    }
}

/// Runs either update from the sample mean and covariance.
pub fn fit_mvt(
    sample: &MvtSample,
    nu: f64,
    algorithm: MvtAlgorithm,
    rule: &StoppingRule,
) -> Result<(MvtParams, MmRun)> {
    let start = MvtParams::initial(sample, nu)?;
    let problem = MvtProblem::new(sample, nu, algorithm);
    let run = run_mm(&problem, &start.pack(), rule)?;
    let params = MvtParams::unpack(&run.report.theta_final, sample.dim(), nu)?;
    Ok((params, run))
}
