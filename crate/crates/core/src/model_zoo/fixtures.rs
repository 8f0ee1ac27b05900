//! One-dimensional problems with closed-form roots.

use crate::error::Result;
use crate::linalg::{Matrix, Vector};
use crate::problem::{BilevelProblem, InnerOracle, OuterOracle};

fn s(v: f64) -> Vector {
    Vector::from_fn(1, |_| v)
}

fn m(v: f64) -> Matrix {
    Matrix::from_diag(&s(v))
}

/// `F(x, y) = (x − 1) + e^y x`
struct ScalarRidgeInner;

impl InnerOracle for ScalarRidgeInner {
    fn residual(&self, x: &Vector, y: &Vector) -> Vector {
        s(x[0] - 1.0 + y[0].exp() * x[0])
    }
    fn jac_x(&self, _x: &Vector, y: &Vector) -> Matrix {
        m(1.0 + y[0].exp())
    }
    fn jac_y(&self, x: &Vector, y: &Vector) -> Matrix {
        m(y[0].exp() * x[0])
    }
    fn djac_x_dir_x(&self, _x: &Vector, _y: &Vector, _u: &Vector) -> Matrix {
        m(0.0)
    }
    fn djac_x_dir_y(&self, _x: &Vector, y: &Vector, e: &Vector) -> Matrix {
        m(y[0].exp() * e[0])
    }
    fn exact_root(&self, y: &Vector) -> Option<Result<Vector>> {
        Some(Ok(s(1.0 / (1.0 + y[0].exp()))))
    }
}

/// `g = ½x²`
struct HalfSquare;

impl OuterOracle for HalfSquare {
    fn value(&self, x: &Vector, _y: &Vector) -> f64 {
        0.5 * x[0] * x[0]
    }
    fn grad_x(&self, x: &Vector, _y: &Vector) -> Vector {
        s(x[0])
    }
    fn grad_y(&self, _x: &Vector, _y: &Vector) -> Vector {
        s(0.0)
    }
    fn hess_xx(&self, _x: &Vector, _y: &Vector) -> Matrix {
        m(1.0)
    }
    fn jac_grad_y_x(&self, _x: &Vector, _y: &Vector) -> Matrix {
        m(0.0)
    }
    fn jac_grad_x_y(&self, _x: &Vector, _y: &Vector) -> Matrix {
        m(0.0)
    }
}

/// `F(x, y) = e^y x − 1`
struct LinearInner;

impl InnerOracle for LinearInner {
    fn residual(&self, x: &Vector, y: &Vector) -> Vector {
        s(y[0].exp() * x[0] - 1.0)
    }
    fn jac_x(&self, _x: &Vector, y: &Vector) -> Matrix {
        m(y[0].exp())
    }
    fn jac_y(&self, x: &Vector, y: &Vector) -> Matrix {
        m(y[0].exp() * x[0])
    }
    fn djac_x_dir_x(&self, _x: &Vector, _y: &Vector, _u: &Vector) -> Matrix {
        m(0.0)
    }
    fn djac_x_dir_y(&self, _x: &Vector, y: &Vector, e: &Vector) -> Matrix {
        m(y[0].exp() * e[0])
    }
    fn exact_root(&self, y: &Vector) -> Option<Result<Vector>> {
        Some(Ok(s((-y[0]).exp())))
    }
}

/// `g = x`
struct Identity1d;

impl OuterOracle for Identity1d {
    fn value(&self, x: &Vector, _y: &Vector) -> f64 {
        x[0]
    }
    fn grad_x(&self, _x: &Vector, _y: &Vector) -> Vector {
        s(1.0)
    }
    fn grad_y(&self, _x: &Vector, _y: &Vector) -> Vector {
        s(0.0)
    }
    fn hess_xx(&self, _x: &Vector, _y: &Vector) -> Matrix {
        m(0.0)
    }
    fn jac_grad_y_x(&self, _x: &Vector, _y: &Vector) -> Matrix {
        m(0.0)
    }
    fn jac_grad_x_y(&self, _x: &Vector, _y: &Vector) -> Matrix {
        m(0.0)
    }
}

/// `F = (x − 1) + e^y x`, `g = ½x²`; `x*(y) = 1/(1 + e^y)`.
pub fn scalar_ridge() -> BilevelProblem {
    BilevelProblem::new(
        "scalar",
        Box::new(ScalarRidgeInner),
        Box::new(HalfSquare),
        1,
        1,
    )
    .expect("fixed dimensions are positive")
}

/// `F = e^y x − 1`, `g = x`; `x*(y) = e^{−y}`.
pub fn linear_1d() -> BilevelProblem {
    BilevelProblem::new(
        "linear1d",
        Box::new(LinearInner),
        Box::new(Identity1d),
        1,
        1,
    )
    .expect("fixed dimensions are positive")
}
