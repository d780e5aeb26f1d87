//! Linear classification by MM: ridge-penalized hinge loss for two classes
//! and vertex discriminant analysis (VDA) for several.
//!
//! Class labels are arbitrary integers. A dataset sorts its distinct labels
//! ascending; for hinge fits the smaller label plays `-1` and the larger `+1`,
//! for VDA the `c`-th smallest label is assigned simplex vertex `c`.

mod hinge;
mod simplex;
mod vda;

pub use hinge::{hinge_majorizer, hinge_mm_fit, hinge_objective, HingeMode, HingeProblem, HINGE_EPS_REG};
pub use simplex::{simplex_vertices, SimplexVertices};
pub use vda::{eps_distance, vda_fit, vda_objective, vda_surrogate, VdaProblem, VdaSurrogate};

use log::warn;
use nalgebra::{Cholesky, DMatrix, DVector};

use crate::driver::MmRun;
use crate::error::{MmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: DMatrix<f64>,
    labels: Vec<i64>,
    classes: Vec<i64>,
    /// Position of each case's label in `classes`.
    class_index: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<i64>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(MmError::DimensionMismatch {
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        if labels.is_empty() {
            return Err(MmError::InvalidInput("dataset has no cases".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(MmError::InvalidInput("non-finite feature".into()));
        }
        let mut classes = labels.clone();
        classes.sort_unstable();
        classes.dedup();
        let class_index = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label drawn from classes"))
            .collect();
        Ok(LabeledDataset {
            features,
            labels,
            classes,
            class_index,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<i64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(MmError::InvalidInput("ragged feature rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), p, &flat), labels)
    }

    pub fn cases(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    pub fn class_index(&self) -> &[usize] {
        &self.class_index
    }

    /// `±1` per case; requires exactly two classes.
    pub fn signs(&self) -> Result<Vec<f64>> {
        if self.classes.len() != 2 {
            return Err(MmError::InvalidInput(format!(
                "binary fit needs exactly two classes, found {}",
                self.classes.len()
            )));
        }
        Ok(self
            .class_index
            .iter()
            .map(|&c| if c == 0 { -1.0 } else { 1.0 })
            .collect())
    }

    /// Design matrix with a leading column of ones.
    pub(crate) fn design(&self) -> DMatrix<f64> {
        let (n, p) = self.features.shape();
        DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { self.features[(i, j - 1)] })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearClassifier {
    /// Sign of `alpha + zᵗ beta`; `classes[0]` is the negative class.
    Binary {
        alpha: f64,
        beta: DVector<f64>,
        classes: [i64; 2],
    },
    /// Nearest simplex vertex to `A z + b`; vertex `c` stands for
    /// `classes[c]`.
    Multi {
        a: DMatrix<f64>,
        b: DVector<f64>,
        vertices: SimplexVertices,
        classes: Vec<i64>,
    },
}

impl LinearClassifier {
    pub fn dim(&self) -> usize {
        match self {
            LinearClassifier::Binary { beta, .. } => beta.len(),
            LinearClassifier::Multi { a, .. } => a.ncols(),
        }
    }

    /// Index of the predicted class. Binary ties go to the positive class,
    /// multicategory ties to the lowest vertex index.
    pub fn predict_index(&self, z: &[f64]) -> Result<usize> {
        if z.len() != self.dim() {
            return Err(MmError::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        let z = DVector::from_column_slice(z);
        match self {
            LinearClassifier::Binary { alpha, beta, .. } => {
                Ok(if alpha + beta.dot(&z) >= 0.0 { 1 } else { 0 })
            }
            LinearClassifier::Multi { a, b, vertices, .. } => {
                Ok(vertices.nearest(&(a * z + b)))
            }
        }
    }

    pub fn classify(&self, z: &[f64]) -> Result<i64> {
        let idx = self.predict_index(z)?;
        Ok(match self {
            LinearClassifier::Binary { classes, .. } => classes[idx],
            LinearClassifier::Multi { classes, .. } => classes[idx],
        })
    }

    /// Fraction of misclassified cases.
    pub fn error_rate(&self, data: &LabeledDataset) -> Result<f64> {
        let mut wrong = 0usize;
        for i in 0..data.cases() {
            let z: Vec<f64> = data.features.row(i).iter().copied().collect();
            if self.classify(&z)? != data.labels[i] {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / data.cases() as f64)
    }
}

/// A fitted classifier with the iteration history that produced it.
#[derive(Debug, Clone)]
pub struct Fit {
    pub model: LinearClassifier,
    pub run: MmRun,
}

/// Solves `m x = rhs` for symmetric positive semidefinite `m`, retrying
/// with a `1e-10` diagonal jitter when the factorization fails.
pub(crate) fn solve_normal(m: DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Ok(chol.solve(rhs));
    }
    warn!("singular weighted normal equations; adding 1e-10 ridge jitter");
    let n = m.nrows();
    let jittered = m + DMatrix::identity(n, n) * 1e-10;
    Cholesky::new(jittered)
        .map(|c| c.solve(rhs))
        .ok_or(MmError::NotPositiveDefinite)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_classes_sorted() {
        let d = LabeledDataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], vec![7, -3, 7]).unwrap();
        assert_eq!(d.classes(), &[-3, 7]);
        assert_eq!(d.class_index(), &[1, 0, 1]);
        assert_eq!(d.signs().unwrap(), vec![1.0, -1.0, 1.0]);
        let three = LabeledDataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], vec![1, 2, 3]).unwrap();
        assert!(three.signs().is_err());
    }

    #[test]
    fn dataset_rejects_bad_input() {
        assert!(LabeledDataset::from_rows(&[vec![f64::NAN]], vec![1]).is_err());
        assert!(LabeledDataset::from_rows(&[vec![0.0]], vec![1, 2]).is_err());
        assert!(LabeledDataset::from_rows(&[vec![0.0], vec![1.0, 2.0]], vec![1, 2]).is_err());
    }

    #[test]
    fn binary_tie_goes_positive() {
        let m = LinearClassifier::Binary {
            alpha: 0.0,
            beta: DVector::zeros(2),
            classes: [-1, 1],
        };
        assert_eq!(m.classify(&[3.0, -4.0]).unwrap(), 1);
        assert!(m.classify(&[1.0]).is_err());
    }

    #[test]
    fn multi_nearest_vertex() {
        let vertices = simplex_vertices(1).unwrap();
        let m = LinearClassifier::Multi {
            a: DMatrix::from_element(1, 1, 1.0),
            b: DVector::zeros(1),
            vertices,
            classes: vec![10, 20],
        };
        assert_eq!(m.classify(&[0.3]).unwrap(), 10);
        assert_eq!(m.classify(&[-0.3]).unwrap(), 20);
        // prediction at the midpoint ties, lowest index wins
        assert_eq!(m.classify(&[0.0]).unwrap(), 10);
    }

    #[test]
    fn prediction_at_vertex() {
        let vertices = simplex_vertices(3).unwrap();
        for c in 0..4 {
            let m = LinearClassifier::Multi {
                a: DMatrix::zeros(3, 2),
                b: vertices.vertex(c).clone_owned(),
                vertices: vertices.clone(),
                classes: vec![1, 2, 3, 4],
            };
            assert_eq!(m.predict_index(&[0.5, 0.5]).unwrap(), c);
        }
    }

    #[test]
    fn jitter_rescues_singular_system() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let rhs = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let x = solve_normal(m, &rhs).unwrap();
        assert!((x[0] + x[1] - 1.0).abs() < 1e-6);
    }
}
