//! The bilevel problem contract.
//!
//! A problem pairs an inner residual `F(x, y)` whose root defines `x*(y)` with
//! an outer objective `g(x, y)`. Estimators never touch the oracles directly;
//! they go through [`BilevelProblem`], which checks every output shape and
//! rejects non-finite values.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Derivative oracles of the inner residual `F: R^dx × R^dy → R^dx`.
pub trait InnerOracle: Send + Sync {
    /// `F(x, y)`
    fn residual(&self, x: &Vector, y: &Vector) -> Vector;

    /// `F_1 = ∂F/∂x`, `dx × dx`
    fn jac_x(&self, x: &Vector, y: &Vector) -> Matrix;

    /// `F_2 = ∂F/∂y`, `dx × dy`
    fn jac_y(&self, x: &Vector, y: &Vector) -> Matrix;

    /// Directional derivative of `F_1` along `u` in `x`.
    fn djac_x_dir_x(&self, x: &Vector, y: &Vector, u: &Vector) -> Matrix;

    /// Directional derivative of `F_1` along `e` in `y`.
    fn djac_x_dir_y(&self, x: &Vector, y: &Vector, e: &Vector) -> Matrix;

    /// Direct solve of `F(·, y) = 0`, when the problem has one.
    fn exact_root(&self, _y: &Vector) -> Option<Result<Vector>> {
        None
    }
}

/// Derivative oracles of the outer objective `g: R^dx × R^dy → R`.
pub trait OuterOracle: Send + Sync {
    fn value(&self, x: &Vector, y: &Vector) -> f64;

    /// `g_1`
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector;

    /// `g_2`
    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector;

    /// `g_11`, `dx × dx`
    fn hess_xx(&self, x: &Vector, y: &Vector) -> Matrix;

    /// `g_21 = ∂g_2/∂x`, `dy × dx`
    fn jac_grad_y_x(&self, x: &Vector, y: &Vector) -> Matrix;

    /// `g_12 = ∂g_1/∂y`, `dx × dy`
    fn jac_grad_x_y(&self, x: &Vector, y: &Vector) -> Matrix;
}

/// An inner residual and an outer objective over declared dimensions.
pub struct BilevelProblem {
    name: String,
    inner: Box<dyn InnerOracle>,
    outer: Box<dyn OuterOracle>,
    dx: usize,
    dy: usize,
}

impl std::fmt::Debug for BilevelProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BilevelProblem")
            .field("name", &self.name)
            .field("dx", &self.dx)
            .field("dy", &self.dy)
            .finish_non_exhaustive()
    }
}

fn check_vec(what: &str, v: Vector, len: usize) -> Result<Vector> {
    if v.len() != len {
        return Err(Error::contract(format!(
            "{what} returned length {}, expected {len}",
            v.len()
        )));
    }
    if !v.is_finite() {
        return Err(Error::numerical(format!(
            "{what} returned non-finite values"
        )));
    }
    Ok(v)
}

fn check_mat(what: &str, m: Matrix, rows: usize, cols: usize) -> Result<Matrix> {
    if m.shape() != (rows, cols) {
        return Err(Error::contract(format!(
            "{what} returned {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::numerical(format!(
            "{what} returned non-finite values"
        )));
    }
    Ok(m)
}

impl BilevelProblem {
    pub fn new(
        name: impl Into<String>,
        inner: Box<dyn InnerOracle>,
        outer: Box<dyn OuterOracle>,
        dx: usize,
        dy: usize,
    ) -> Result<Self> {
        if dx == 0 || dy == 0 {
            return Err(Error::contract("problem dimensions must be positive"));
        }
        Ok(BilevelProblem {
            name: name.into(),
            inner,
            outer,
            dx,
            dy,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dx(&self) -> usize {
        self.dx
    }

    pub fn dy(&self) -> usize {
        self.dy
    }

    /// Checks that `(x, y)` has the declared dimensions.
    pub fn check_point(&self, x: &Vector, y: &Vector) -> Result<()> {
        if x.len() != self.dx || y.len() != self.dy {
            return Err(Error::contract(format!(
                "point has dims ({}, {}), problem expects ({}, {})",
                x.len(),
                y.len(),
                self.dx,
                self.dy
            )));
        }
        Ok(())
    }

    fn check_y(&self, y: &Vector) -> Result<()> {
        if y.len() != self.dy {
            return Err(Error::contract(format!(
                "y has length {}, problem expects {}",
                y.len(),
                self.dy
            )));
        }
        Ok(())
    }

    pub fn residual(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_point(x, y)?;
        check_vec("residual", self.inner.residual(x, y), self.dx)
    }

    pub fn jac_x(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        check_mat("jac_x", self.inner.jac_x(x, y), self.dx, self.dx)
    }

    pub fn jac_y(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        check_mat("jac_y", self.inner.jac_y(x, y), self.dx, self.dy)
    }

    pub fn djac_x_dir_x(&self, x: &Vector, y: &Vector, u: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        if u.len() != self.dx {
            return Err(Error::contract("x-direction has wrong length"));
        }
        check_mat(
            "djac_x_dir_x",
            self.inner.djac_x_dir_x(x, y, u),
            self.dx,
            self.dx,
        )
    }

    pub fn djac_x_dir_y(&self, x: &Vector, y: &Vector, e: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        if e.len() != self.dy {
            return Err(Error::contract("y-direction has wrong length"));
        }
        check_mat(
            "djac_x_dir_y",
            self.inner.djac_x_dir_y(x, y, e),
            self.dx,
            self.dx,
        )
    }

    /// The inner root `x*(y)`; a capability error when the problem has no
    /// direct solver.
    pub fn exact_root(&self, y: &Vector) -> Result<Vector> {
        self.check_y(y)?;
        match self.inner.exact_root(y) {
            Some(root) => check_vec("exact_root", root?, self.dx),
            None => Err(Error::Capability(format!(
                "problem '{}' has no exact root solver",
                self.name
            ))),
        }
    }

    pub fn outer_value(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_point(x, y)?;
        let v = self.outer.value(x, y);
        if !v.is_finite() {
            return Err(Error::numerical("outer value is not finite"));
        }
        Ok(v)
    }

    pub fn grad_x(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_point(x, y)?;
        check_vec("grad_x", self.outer.grad_x(x, y), self.dx)
    }

    pub fn grad_y(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_point(x, y)?;
        check_vec("grad_y", self.outer.grad_y(x, y), self.dy)
    }

    pub fn hess_xx(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        check_mat("hess_xx", self.outer.hess_xx(x, y), self.dx, self.dx)
    }

    pub fn jac_grad_y_x(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        check_mat(
            "jac_grad_y_x",
            self.outer.jac_grad_y_x(x, y),
            self.dy,
            self.dx,
        )
    }

    pub fn jac_grad_x_y(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        check_mat(
            "jac_grad_x_y",
            self.outer.jac_grad_x_y(x, y),
            self.dx,
            self.dy,
        )
    }

    /// `h(y) = g(x*(y), y)`
    pub fn outer_at_root(&self, y: &Vector) -> Result<f64> {
        let x = self.exact_root(y)?;
        self.outer_value(&x, y)
    }
}
