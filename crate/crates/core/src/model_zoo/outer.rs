//! Outer objectives shared by the regression problems.

use crate::linalg::{Matrix, Vector};
use crate::problem::OuterOracle;

use super::logistic::{sigmoid, sigmoid_prime, softplus};

/// `(s/2)·‖A x − b‖²`
pub(crate) struct SquaredLossOuter {
    a: Matrix,
    b: Vector,
    scale: f64,
    gram: Matrix,
}

impl SquaredLossOuter {
    pub(crate) fn new(a: Matrix, b: Vector, scale: f64) -> Self {
        let gram = a.tr_matmul(&a).scale(scale);
        SquaredLossOuter { a, b, scale, gram }
    }
}

impl OuterOracle for SquaredLossOuter {
    fn value(&self, x: &Vector, _y: &Vector) -> f64 {
        let r = &self.a.matvec(x) - &self.b;
        0.5 * self.scale * r.dot(&r)
    }

    fn grad_x(&self, x: &Vector, _y: &Vector) -> Vector {
        let r = &self.a.matvec(x) - &self.b;
        self.a.tr_matvec(&r).scale(self.scale)
    }

    fn grad_y(&self, _x: &Vector, y: &Vector) -> Vector {
        Vector::zeros(y.len())
    }

    fn hess_xx(&self, _x: &Vector, _y: &Vector) -> Matrix {
        self.gram.clone()
    }

    fn jac_grad_y_x(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(y.len(), x.len())
    }

    fn jac_grad_x_y(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(x.len(), y.len())
    }
}

/// `Σ softplus(−b ⊙ A x)`
pub(crate) struct LogisticLossOuter {
    a: Matrix,
    b: Vector,
}

impl LogisticLossOuter {
    pub(crate) fn new(a: Matrix, b: Vector) -> Self {
        LogisticLossOuter { a, b }
    }

    fn margins(&self, x: &Vector) -> Vector {
        self.a.matvec(x).hadamard(&self.b)
    }
}

impl OuterOracle for LogisticLossOuter {
    fn value(&self, x: &Vector, _y: &Vector) -> f64 {
        self.margins(x).iter().map(|&m| softplus(-m)).sum()
    }

    fn grad_x(&self, x: &Vector, _y: &Vector) -> Vector {
        let w = self.margins(x).map(|m| -sigmoid(-m)).hadamard(&self.b);
        self.a.tr_matvec(&w)
    }

    fn grad_y(&self, _x: &Vector, y: &Vector) -> Vector {
        Vector::zeros(y.len())
    }

    fn hess_xx(&self, x: &Vector, _y: &Vector) -> Matrix {
        let s = self.margins(x).map(sigmoid_prime);
        self.a.tr_matmul(&self.a.scale_rows(&s))
    }

    fn jac_grad_y_x(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(y.len(), x.len())
    }

    fn jac_grad_x_y(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(x.len(), y.len())
    }
}

/// `aᵀx`
pub(crate) struct AffineOuter {
    a: Vector,
}

impl AffineOuter {
    pub(crate) fn new(a: Vector) -> Self {
        AffineOuter { a }
    }
}

impl OuterOracle for AffineOuter {
    fn value(&self, x: &Vector, _y: &Vector) -> f64 {
        self.a.dot(x)
    }

    fn grad_x(&self, _x: &Vector, _y: &Vector) -> Vector {
        self.a.clone()
    }

    fn grad_y(&self, _x: &Vector, y: &Vector) -> Vector {
        Vector::zeros(y.len())
    }

    fn hess_xx(&self, x: &Vector, _y: &Vector) -> Matrix {
        Matrix::zeros(x.len(), x.len())
    }

    fn jac_grad_y_x(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(y.len(), x.len())
    }

    fn jac_grad_x_y(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(x.len(), y.len())
    }
}
