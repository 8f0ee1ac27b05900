//! Ridge regression with one exponential penalty weight per feature.

use crate::error::Result;
use crate::linalg::{Matrix, Vector};
use crate::problem::InnerOracle;
use crate::solvers::{solve_vec, Lu};

/// `F(x, y) = s·Aᵀ(A x − b) + e^y ⊙ x`, with the Gram matrix precomputed.
pub(crate) struct RidgeInner {
    gram: Matrix,
    rhs: Vector,
}

impl RidgeInner {
    pub(crate) fn new(a: &Matrix, b: &Vector, loss_scale: f64) -> Self {
        RidgeInner {
            gram: a.tr_matmul(a).scale(loss_scale),
            rhs: a.tr_matvec(b).scale(loss_scale),
        }
    }

    fn system(&self, y: &Vector) -> Matrix {
        self.gram.add_diag(&y.map(f64::exp))
    }
}

impl InnerOracle for RidgeInner {
    fn residual(&self, x: &Vector, y: &Vector) -> Vector {
        &self.system(y).matvec(x) - &self.rhs
    }

    fn jac_x(&self, _x: &Vector, y: &Vector) -> Matrix {
        self.system(y)
    }

    fn jac_y(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::from_diag(&y.map(f64::exp).hadamard(x))
    }

    fn djac_x_dir_x(&self, x: &Vector, _y: &Vector, _u: &Vector) -> Matrix {
        Matrix::zeros(x.len(), x.len())
    }

    fn djac_x_dir_y(&self, _x: &Vector, y: &Vector, e: &Vector) -> Matrix {
        Matrix::from_diag(&y.map(f64::exp).hadamard(e))
    }

    fn exact_root(&self, y: &Vector) -> Option<Result<Vector>> {
        let sys = self.system(y);
        Some((|| {
            let lu = Lu::factor(&sys).map_err(|e| e.blame("F_1"))?;
            let mut x = lu.solve_vec(&self.rhs);
            // One step of refinement squeezes the residual to roundoff.
            let r = &self.rhs - &sys.matvec(&x);
            x = &x + &lu.solve_vec(&r);
            Ok(x)
        })())
    }
}

/// Unregularized least squares `AᵀA x = Aᵀb`, for limit checks.
pub fn least_squares(a: &Matrix, b: &Vector) -> Result<Vector> {
    solve_vec(&a.tr_matmul(a), &a.tr_matvec(b))
}
