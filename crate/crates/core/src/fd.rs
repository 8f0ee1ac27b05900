//! Finite-difference derivatives: an inner oracle built from a bare residual,
//! and a checker comparing analytic oracles against central differences.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::{BilevelProblem, InnerOracle};

/// Central-difference Jacobian of `f` at `x`; column `j` is `∂f/∂x_j`.
pub fn central_jacobian(
    x: &Vector,
    h: f64,
    rows: usize,
    mut f: impl FnMut(&Vector) -> Result<Vector>,
) -> Result<Matrix> {
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let mut xp = x.clone();
        xp[j] += h;
        let mut xm = x.clone();
        xm[j] -= h;
        let fp = f(&xp)?;
        let fm = f(&xm)?;
        if fp.len() != rows || fm.len() != rows {
            return Err(Error::contract("differenced map changed output length"));
        }
        cols.push((&fp - &fm).scale(0.5 / h));
    }
    Ok(Matrix::from_columns(rows, &cols))
}

/// Central difference of a matrix-valued map along one direction.
pub fn central_directional(h: f64, mut at: impl FnMut(f64) -> Result<Matrix>) -> Result<Matrix> {
    let p = at(h)?;
    let m = at(-h)?;
    if p.shape() != m.shape() {
        return Err(Error::contract("differenced map changed output shape"));
    }
    Ok((&p - &m).scale(0.5 / h))
}

/// An [`InnerOracle`] for a residual supplied as a plain function; every
/// derivative comes from central differences with step `1e-6·(1 + ‖·‖)`.
pub struct FdInner<F> {
    residual: F,
    dx: usize,
    rel_step: f64,
}

impl<F> FdInner<F>
where
    F: Fn(&Vector, &Vector) -> Vector + Send + Sync,
{
    pub fn new(dx: usize, residual: F) -> Self {
        FdInner {
            residual,
            dx,
            rel_step: 1e-6,
        }
    }

    pub fn with_rel_step(mut self, rel_step: f64) -> Self {
        self.rel_step = rel_step;
        self
    }

    fn step(&self, v: &Vector) -> f64 {
        self.rel_step * (1.0 + v.norm())
    }
}

fn bump(v: &Vector, d: &Vector, t: f64) -> Vector {
    v.axpy(t, d)
}

impl<F> InnerOracle for FdInner<F>
where
    F: Fn(&Vector, &Vector) -> Vector + Send + Sync,
{
    fn residual(&self, x: &Vector, y: &Vector) -> Vector {
        (self.residual)(x, y)
    }

    fn jac_x(&self, x: &Vector, y: &Vector) -> Matrix {
        let h = self.step(x);
        central_jacobian(x, h, self.dx, |xx| Ok((self.residual)(xx, y)))
            .unwrap_or_else(|_| Matrix::zeros(0, 0))
    }

    fn jac_y(&self, x: &Vector, y: &Vector) -> Matrix {
        let h = self.step(y);
        central_jacobian(y, h, self.dx, |yy| Ok((self.residual)(x, yy)))
            .unwrap_or_else(|_| Matrix::zeros(0, 0))
    }

    fn djac_x_dir_x(&self, x: &Vector, y: &Vector, u: &Vector) -> Matrix {
        // Nested differences need a larger outer step to stay above roundoff.
        let h = 1e3 * self.step(x);
        central_directional(h, |t| Ok(self.jac_x(&bump(x, u, t), y)))
            .unwrap_or_else(|_| Matrix::zeros(0, 0))
    }

    fn djac_x_dir_y(&self, x: &Vector, y: &Vector, e: &Vector) -> Matrix {
        let h = 1e3 * self.step(y);
        central_directional(h, |t| Ok(self.jac_x(x, &bump(y, e, t))))
            .unwrap_or_else(|_| Matrix::zeros(0, 0))
    }
}

/// Largest deviation of each analytic oracle from central differences of
/// its parent quantity, scaled as `max|analytic − fd| / (1 + max|fd|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub jac_x: f64,
    pub jac_y: f64,
    pub djac_x_dir_x: f64,
    pub djac_x_dir_y: f64,
    pub grad_x: f64,
    pub grad_y: f64,
    pub hess_xx: f64,
    pub jac_grad_y_x: f64,
    pub jac_grad_x_y: f64,
}

impl OracleReport {
    pub fn max(&self) -> f64 {
        [
            self.jac_x,
            self.jac_y,
            self.djac_x_dir_x,
            self.djac_x_dir_y,
            self.grad_x,
            self.grad_y,
            self.hess_xx,
            self.jac_grad_y_x,
            self.jac_grad_x_y,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn mismatch(analytic: &Matrix, fd: &Matrix) -> Result<f64> {
    if analytic.shape() != fd.shape() {
        return Err(Error::contract(format!(
            "oracle shape {:?} differs from finite-difference shape {:?}",
            analytic.shape(),
            fd.shape()
        )));
    }
    Ok((analytic - fd).norm_max() / (1.0 + fd.norm_max()))
}

/// Checks every analytic derivative oracle of `problem` at `(x, y)`.
pub fn validate_oracles(
    problem: &BilevelProblem,
    x: &Vector,
    y: &Vector,
    step: f64,
) -> Result<OracleReport> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Usage(format!("step must be positive, got {step}")));
    }
    problem.check_point(x, y)?;
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Usage("validation point must be finite".into()));
    }
    let (dx, dy) = (problem.dx(), problem.dy());

    let jac_x = mismatch(
        &problem.jac_x(x, y)?,
        &central_jacobian(x, step, dx, |xx| problem.residual(xx, y))?,
    )?;
    let jac_y = mismatch(
        &problem.jac_y(x, y)?,
        &central_jacobian(y, step, dx, |yy| problem.residual(x, yy))?,
    )?;

    let mut djac_x_dir_x: f64 = 0.0;
    for i in 0..dx {
        let u = Vector::basis(dx, i);
        let fd = central_directional(step, |t| problem.jac_x(&x.axpy(t, &u), y))?;
        djac_x_dir_x = djac_x_dir_x.max(mismatch(&problem.djac_x_dir_x(x, y, &u)?, &fd)?);
    }
    let mut djac_x_dir_y: f64 = 0.0;
    for e_idx in 0..dy {
        let e = Vector::basis(dy, e_idx);
        let fd = central_directional(step, |t| problem.jac_x(x, &y.axpy(t, &e)))?;
        djac_x_dir_y = djac_x_dir_y.max(mismatch(&problem.djac_x_dir_y(x, y, &e)?, &fd)?);
    }

    let scalar = |v: f64| Vector::from_fn(1, |_| v);
    let grad_x_fd = central_jacobian(x, step, 1, |xx| problem.outer_value(xx, y).map(scalar))?;
    let grad_y_fd = central_jacobian(y, step, 1, |yy| problem.outer_value(x, yy).map(scalar))?;
    let grad_x = mismatch(&problem.grad_x(x, y)?.to_column().transpose(), &grad_x_fd)?;
    let grad_y = mismatch(&problem.grad_y(x, y)?.to_column().transpose(), &grad_y_fd)?;

    let hess_xx = mismatch(
        &problem.hess_xx(x, y)?,
        &central_jacobian(x, step, dx, |xx| problem.grad_x(xx, y))?,
    )?;
    let jac_grad_y_x = mismatch(
        &problem.jac_grad_y_x(x, y)?,
        &central_jacobian(x, step, dy, |xx| problem.grad_y(xx, y))?,
    )?;
    let jac_grad_x_y = mismatch(
        &problem.jac_grad_x_y(x, y)?,
        &central_jacobian(y, step, dx, |yy| problem.grad_x(x, yy))?,
    )?;

    Ok(OracleReport {
        jac_x,
        jac_y,
        djac_x_dir_x,
        djac_x_dir_y,
        grad_x,
        grad_y,
        hess_xx,
        jac_grad_y_x,
        jac_grad_x_y,
    })
}
