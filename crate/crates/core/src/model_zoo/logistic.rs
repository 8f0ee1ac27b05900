//! L2-regularized logistic regression with per-feature exponential weights.

use crate::error::Result;
use crate::linalg::{Matrix, Vector};
use crate::problem::InnerOracle;
use crate::solvers::{damped_newton, NewtonOptions};

/// `1/(1 + e^{−t})` without overflow for any finite `t`.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `σ'(t) = σ(t)σ(−t)`
pub fn sigmoid_prime(t: f64) -> f64 {
    sigmoid(t) * sigmoid(-t)
}

/// `σ''(t) = σ'(t)(1 − 2σ(t))`, written with `σ(−t) − σ(t)` to avoid cancellation.
pub fn sigmoid_second(t: f64) -> f64 {
    sigmoid_prime(t) * (sigmoid(-t) - sigmoid(t))
}

/// `log(1 + e^t)`
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `F(x, y) = −Aᵀ(b ⊙ σ(−b ⊙ A x)) + e^y ⊙ x`
pub(crate) struct LogisticInner {
    a: Matrix,
    b: Vector,
}

impl LogisticInner {
    pub(crate) fn new(a: Matrix, b: Vector) -> Self {
        LogisticInner { a, b }
    }

    fn margins(&self, x: &Vector) -> Vector {
        self.a.matvec(x).hadamard(&self.b)
    }

    fn weighted_gram(&self, w: &Vector) -> Matrix {
        self.a.tr_matmul(&self.a.scale_rows(w))
    }
}

impl InnerOracle for LogisticInner {
    fn residual(&self, x: &Vector, y: &Vector) -> Vector {
        let w = self.margins(x).map(|m| -sigmoid(-m)).hadamard(&self.b);
        &self.a.tr_matvec(&w) + &y.map(f64::exp).hadamard(x)
    }

    fn jac_x(&self, x: &Vector, y: &Vector) -> Matrix {
        self.weighted_gram(&self.margins(x).map(sigmoid_prime))
            .add_diag(&y.map(f64::exp))
    }

    fn jac_y(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::from_diag(&y.map(f64::exp).hadamard(x))
    }

    fn djac_x_dir_x(&self, x: &Vector, _y: &Vector, u: &Vector) -> Matrix {
        let du = self.a.matvec(u).hadamard(&self.b);
        let w = self.margins(x).map(sigmoid_second).hadamard(&du);
        self.weighted_gram(&w)
    }

    fn djac_x_dir_y(&self, _x: &Vector, y: &Vector, e: &Vector) -> Matrix {
        Matrix::from_diag(&y.map(f64::exp).hadamard(e))
    }

    fn exact_root(&self, y: &Vector) -> Option<Result<Vector>> {
        Some(damped_newton(
            Vector::zeros(self.a.cols()),
            |x| self.residual(x, y),
            |x| self.jac_x(x, y),
            NewtonOptions::default(),
        ))
    }
}
