//! Dense LU solves with a recorded 1-norm condition estimate.

use nalgebra::{DMatrix, DVector};

/// A factored square system `A x = b`.
pub struct Factored {
    matrix: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl Factored {
    /// LU with partial pivoting. The condition estimate is `‖A‖₁‖A⁻¹‖₁`
    /// (exact, systems here are small), `+inf` when `A` is singular.
    pub fn new(matrix: DMatrix<f64>) -> Self {
        let lu = matrix.clone().lu();
        let condition = match lu.try_inverse() {
            Some(inv) => norm1(&matrix) * norm1(&inv),
            None => f64::INFINITY,
        };
        Self {
            matrix,
            lu,
            condition,
        }
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Solves and returns `(x, r)` where `r` is the back-substitution
    /// residual `‖A x − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
    pub fn solve(&self, rhs: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
        let x = self.lu.solve(rhs)?;
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let residual = relative_residual(&self.matrix, &x, rhs);
        Some((x, residual))
    }
}

pub fn relative_residual(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = a * x - b;
    let norm_inf_a = a
        .row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let scale = norm_inf_a * x.amax() + b.amax();
    if scale == 0.0 {
        0.0
    } else {
        r.amax() / scale
    }
}
