//! Efficiency constants, estimator Jacobians at the inner root, and the
//! numeric checks comparing preconditioning against reparameterization.

mod bounds;
mod terms;

pub use bounds::{
    compare_bounds, delta_gap, ift_bound, sigma_gap, ComparisonBounds, GapReport, IftBoundReport,
};
pub use terms::{newton_reparam_error_terms, ode1d_residual, ErrorTerms, PROBE_SEED};

use crate::error::{Error, Result};
use crate::estimators::{precond_error_matrix, psi, Estimator, PreconditionerOracle};
use crate::fd::central_jacobian;
use crate::linalg::{Matrix, Vector};
use crate::problem::BilevelProblem;
use crate::solvers::{spectral_norm, top_singular, Lu, TopSingular, DEFAULT_TOL};

/// Iteration cap for the power iterations behind efficiency constants.
/// Jacobians at the root can have nearly tied top singular values, where
/// power iteration needs far more than the solver default to meet
/// [`DEFAULT_TOL`].
pub const NORM_MAX_ITER: usize = 1_000_000;

pub(crate) fn norm(m: &Matrix) -> Result<f64> {
    spectral_norm(m, DEFAULT_TOL, NORM_MAX_ITER)
}

pub(crate) fn top(m: &Matrix) -> Result<TopSingular> {
    top_singular(m, DEFAULT_TOL, NORM_MAX_ITER)
}

/// How an estimator Jacobian was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fd,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub strategy: String,
    pub y: Vector,
    pub c_y: f64,
    pub jacobian: Matrix,
    pub method: Method,
}

/// Default step for estimator Jacobians, `1e-5·(1 + ‖x‖)`.
pub fn default_jacobian_eps(x: &Vector) -> f64 {
    1e-5 * (1.0 + x.norm())
}

fn fd_at_root<F>(
    problem: &BilevelProblem,
    y: &Vector,
    eps: Option<f64>,
    rows: usize,
    label: &str,
    mut f: F,
) -> Result<Matrix>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    let xs = problem.exact_root(y)?;
    let h = eps.unwrap_or_else(|| default_jacobian_eps(&xs));
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Usage(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    central_jacobian(&xs, h, rows, |x| {
        f(x).map_err(|e| Error::Numerical {
            message: format!("{label} failed at probe point {:?}: {e}", x.as_slice()),
            step: None,
            last_estimate: None,
        })
    })
}

/// Central differences of `x ↦ E(x, y)` around `x*(y)`, `d_y × d_x`.
pub fn estimator_jacobian_fd(
    estimator: &dyn Estimator,
    problem: &BilevelProblem,
    y: &Vector,
    eps: Option<f64>,
) -> Result<Matrix> {
    fd_at_root(problem, y, eps, problem.dy(), estimator.id(), |x| {
        estimator.evaluate(x, y)
    })
}

/// `C_y = ‖E_1(x*(y), y)‖` from the finite-difference Jacobian.
pub fn efficiency_constant(
    estimator: &dyn Estimator,
    problem: &BilevelProblem,
    y: &Vector,
) -> Result<EfficiencyReport> {
    let jacobian = estimator_jacobian_fd(estimator, problem, y, None)?;
    Ok(EfficiencyReport {
        strategy: estimator.id().to_string(),
        y: y.clone(),
        c_y: norm(&jacobian)?,
        jacobian,
        method: Method::Fd,
    })
}

/// `Ω_1 = g_21 + Ψ_1 g_1 + Ψ g_11` at `x*(y)`.
pub fn vanilla_jacobian_analytic(problem: &BilevelProblem, y: &Vector) -> Result<Matrix> {
    let x = problem.exact_root(y)?;
    vanilla_jacobian_at(problem, &x, y)
}

pub(crate) fn vanilla_jacobian_at(
    problem: &BilevelProblem,
    x: &Vector,
    y: &Vector,
) -> Result<Matrix> {
    let (dx, dy) = (problem.dx(), problem.dy());
    let lu = Lu::factor(&problem.jac_x(x, y)?).map_err(|e| e.blame("F_1"))?;
    let p = psi(problem, x, y)?;
    let s = lu.solve_transposed_vec(&problem.grad_x(x, y)?);

    // −(∂_x F_2)ᵀ s, one row per y-direction.
    let mut mixed = Matrix::zeros(dy, dx);
    for e in 0..dy {
        let g = problem.djac_x_dir_y(x, y, &Vector::basis(dy, e))?;
        let r = g.tr_matvec(&s);
        for j in 0..dx {
            mixed[(e, j)] = -r[j];
        }
    }
    // −Ψ K with column j of K equal to (∂_{x_j} F_1)ᵀ s.
    let cols = (0..dx)
        .map(|j| {
            Ok(problem
                .djac_x_dir_x(x, y, &Vector::basis(dx, j))?
                .tr_matvec(&s))
        })
        .collect::<Result<Vec<_>>>()?;
    let curvature = -&p.matmul(&Matrix::from_columns(dx, &cols));

    let base = &problem.jac_grad_y_x(x, y)? + &p.matmul(&problem.hess_xx(x, y)?);
    Ok(&(&base + &mixed) + &curvature)
}

/// `Ω_1 · (I − P^{-1}F_1)` at `x*(y)`.
pub fn precond_jacobian_at_root(
    problem: &BilevelProblem,
    p: &dyn PreconditionerOracle,
    y: &Vector,
) -> Result<Matrix> {
    let x = problem.exact_root(y)?;
    let omega1 = vanilla_jacobian_at(problem, &x, y)?;
    Ok(omega1.matmul(&precond_error_matrix(problem, p, &x, y)?))
}

/// `D(y) = g_21 + (∂x*)ᵀ g_11` at `x*(y)`.
pub fn d_matrix(problem: &BilevelProblem, y: &Vector) -> Result<Matrix> {
    let x = problem.exact_root(y)?;
    d_matrix_at(problem, &x, y)
}

pub(crate) fn d_matrix_at(problem: &BilevelProblem, x: &Vector, y: &Vector) -> Result<Matrix> {
    let p = psi(problem, x, y)?;
    Ok(&problem.jac_grad_y_x(x, y)? + &p.matmul(&problem.hess_xx(x, y)?))
}

/// Jacobian at `x*` of `x ↦ Ψ^E(x, y) g_1(x*, y)`, with `g_1` frozen.
pub fn psi1_g1_contract_fd(
    problem: &BilevelProblem,
    estimator: &dyn Estimator,
    y: &Vector,
) -> Result<Matrix> {
    let xs = problem.exact_root(y)?;
    let g1 = problem.grad_x(&xs, y)?;
    fd_at_root(problem, y, None, problem.dy(), estimator.id(), |x| {
        Ok(estimator.psi(x, y)?.matvec(&g1))
    })
}

/// `C_y(Ψ^E)`: spectral norm of the Jacobian of `x ↦ vec(Ψ^E(x, y))` at `x*`.
pub fn psi_efficiency_constant(
    problem: &BilevelProblem,
    estimator: &dyn Estimator,
    y: &Vector,
) -> Result<f64> {
    let rows = problem.dx() * problem.dy();
    let j = fd_at_root(problem, y, None, rows, estimator.id(), |x| {
        Ok(estimator.psi(x, y)?.flatten())
    })?;
    norm(&j)
}
