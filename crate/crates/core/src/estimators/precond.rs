//! Preconditioners applied as one corrective step before the IFT formula.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::BilevelProblem;
use crate::solvers::solve_vec;

/// `P(x, y)` and the action of its inverse.
pub trait PreconditionerOracle: Send + Sync {
    fn matrix(&self, x: &Vector, y: &Vector) -> Result<Matrix>;

    /// `P(x, y)^{-1} v`
    fn solve(&self, x: &Vector, y: &Vector, v: &Vector) -> Result<Vector> {
        solve_vec(&self.matrix(x, y)?, v)
    }
}

/// `P = F_1`
#[derive(Debug, Clone, Copy)]
pub struct NewtonPreconditioner<'a> {
    problem: &'a BilevelProblem,
}

pub fn newton_preconditioner(problem: &BilevelProblem) -> NewtonPreconditioner<'_> {
    NewtonPreconditioner { problem }
}

impl PreconditionerOracle for NewtonPreconditioner<'_> {
    fn matrix(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.problem.jac_x(x, y)
    }
}

/// `P = diag(F_1)`
#[derive(Debug, Clone, Copy)]
pub struct DiagPreconditioner<'a> {
    problem: &'a BilevelProblem,
}

pub fn diag_preconditioner(problem: &BilevelProblem) -> DiagPreconditioner<'_> {
    DiagPreconditioner { problem }
}

impl PreconditionerOracle for DiagPreconditioner<'_> {
    fn matrix(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(Matrix::from_diag(&self.problem.jac_x(x, y)?.diagonal()))
    }

    fn solve(&self, x: &Vector, y: &Vector, v: &Vector) -> Result<Vector> {
        let d = self.problem.jac_x(x, y)?.diagonal();
        let scale = d.norm_inf();
        if let Some(&p) = d
            .iter()
            .find(|p| p.abs() <= crate::solvers::SINGULAR_PIVOT_RATIO * scale)
        {
            return Err(Error::Singular {
                which: "diag(F_1)".into(),
                pivot: p.abs(),
                threshold: crate::solvers::SINGULAR_PIVOT_RATIO * scale,
            });
        }
        Ok(v.zip_map(&d, |a, b| a / b))
    }
}

/// `P = c·F_1`; a deliberately imperfect preconditioner when `c ≠ 1`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledNewtonPreconditioner<'a> {
    problem: &'a BilevelProblem,
    c: f64,
}

pub fn scaled_newton_preconditioner(
    problem: &BilevelProblem,
    c: f64,
) -> Result<ScaledNewtonPreconditioner<'_>> {
    if !(c.is_finite() && c != 0.0) {
        return Err(Error::Usage(format!(
            "preconditioner scale must be nonzero, got {c}"
        )));
    }
    Ok(ScaledNewtonPreconditioner { problem, c })
}

impl PreconditionerOracle for ScaledNewtonPreconditioner<'_> {
    fn matrix(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(self.problem.jac_x(x, y)?.scale(self.c))
    }
}

/// `P = F_1 + ε·diag(F_1)`, used to sweep `‖P − F_1‖` towards zero.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedNewtonPreconditioner<'a> {
    problem: &'a BilevelProblem,
    eps: f64,
}

pub fn shifted_newton_preconditioner(
    problem: &BilevelProblem,
    eps: f64,
) -> ShiftedNewtonPreconditioner<'_> {
    ShiftedNewtonPreconditioner { problem, eps }
}

impl PreconditionerOracle for ShiftedNewtonPreconditioner<'_> {
    fn matrix(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        let f1 = self.problem.jac_x(x, y)?;
        let d = f1.diagonal().scale(self.eps);
        Ok(f1.add_diag(&d))
    }
}

/// `E^P = I − P^{-1}F_1` at `(x, y)`.
pub fn precond_error_matrix(
    problem: &BilevelProblem,
    p: &dyn PreconditionerOracle,
    x: &Vector,
    y: &Vector,
) -> Result<Matrix> {
    let f1 = problem.jac_x(x, y)?;
    let n = problem.dx();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let c = p.solve(x, y, &f1.column(j)).map_err(|e| e.blame("P"))?;
        cols.push(&Vector::basis(n, j) - &c);
    }
    Ok(Matrix::from_columns(n, &cols))
}

/// `x̃ = x − P^{-1}F(x, y)` followed by the IFT formula at `(x̃, y)`.
pub fn precond_estimate(
    problem: &BilevelProblem,
    p: &dyn PreconditionerOracle,
    x: &Vector,
    y: &Vector,
) -> Result<Vector> {
    let xt = precond_step(problem, p, x, y)?;
    super::vanilla_ift(problem, &xt, y).map_err(|e| e.blame("F_1"))
}

pub(crate) fn precond_step(
    problem: &BilevelProblem,
    p: &dyn PreconditionerOracle,
    x: &Vector,
    y: &Vector,
) -> Result<Vector> {
    let f = problem.residual(x, y)?;
    let step = p.solve(x, y, &f).map_err(|e| e.blame("P"))?;
    Ok(x - &step)
}

impl<T: PreconditionerOracle + ?Sized> PreconditionerOracle for &T {
    fn matrix(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        (**self).matrix(x, y)
    }
    fn solve(&self, x: &Vector, y: &Vector, v: &Vector) -> Result<Vector> {
        (**self).solve(x, y, v)
    }
}
