use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{MmError, Result};

/// The `k + 1` vertices of a regular simplex inscribed in the unit sphere of
/// `R^k`, stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVertices {
    points: DMatrix<f64>,
}

impl SimplexVertices {
    /// Dimension `k` of the ambient space.
    pub fn dim(&self) -> usize {
        self.points.nrows()
    }

    pub fn count(&self) -> usize {
        self.points.ncols()
    }

    pub fn vertex(&self, c: usize) -> DVectorView<'_, f64> {
        self.points.column(c)
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    /// Common distance between distinct vertices, `sqrt((2k + 2) / k)`.
    pub fn edge_length(&self) -> f64 {
        let k = self.dim() as f64;
        ((2.0 * k + 2.0) / k).sqrt()
    }

    /// Index of the vertex closest to `x`; ties go to the lowest index.
    pub fn nearest(&self, x: &DVector<f64>) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for c in 0..self.count() {
            let d = (self.points.column(c) - x).norm_squared();
            if d < best_dist {
                best = c;
                best_dist = d;
            }
        }
        best
    }
}

/// Regular simplex with pairwise inner products `-1/k`.
///
/// The first vertex is `k^{-1/2} (1, ..., 1)`; vertex `j >= 2` is
/// `c (1, ..., 1) + d e_{j-1}` with `c = -(1 + sqrt(k+1)) / k^{3/2}` and
/// `d = sqrt((k+1)/k)`. For `k = 1` this gives `{+1, -1}`.
pub fn simplex_vertices(k: usize) -> Result<SimplexVertices> {
    if k == 0 {
        return Err(MmError::InvalidInput("simplex dimension must be positive".into()));
    }
    if k == 1 {
        // the formula gives -1 only up to rounding
        return Ok(SimplexVertices {
            points: DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
        });
    }
    let kf = k as f64;
    let c = -(1.0 + (kf + 1.0).sqrt()) / kf.powf(1.5);
    let d = ((kf + 1.0) / kf).sqrt();
    let points = DMatrix::from_fn(k, k + 1, |row, col| {
        if col == 0 {
            1.0 / kf.sqrt()
        } else if row == col - 1 {
            c + d
        } else {
            c
        }
    });
    Ok(SimplexVertices { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_dimensional() {
        let v = simplex_vertices(1).unwrap();
        assert_eq!(v.points().as_slice(), &[1.0, -1.0]);
        assert_abs_diff_eq!(v.edge_length(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn geometry_up_to_twelve() {
        for k in 1..=12 {
            let v = simplex_vertices(k).unwrap();
            let gram = v.points().transpose() * v.points();
            let centroid = v.points().column_sum() / (k + 1) as f64;
            assert!(centroid.norm() < 1e-10, "k={k}");
            for a in 0..=k {
                assert_abs_diff_eq!(gram[(a, a)], 1.0, epsilon = 1e-10);
                for b in 0..a {
                    assert_abs_diff_eq!(gram[(a, b)], -1.0 / k as f64, epsilon = 1e-10);
                    let dist = (v.vertex(a) - v.vertex(b)).norm();
                    assert_abs_diff_eq!(dist, v.edge_length(), epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn triangle_angles() {
        let v = simplex_vertices(2).unwrap();
        let cos = v.vertex(0).dot(&v.vertex(1));
        assert_abs_diff_eq!(cos.acos().to_degrees(), 120.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v.edge_length(), 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn zero_rejected() {
        assert!(simplex_vertices(0).is_err());
    }
}
