//! Central-difference oracles for `∇h(y)` and `∂x*(y)`.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::BilevelProblem;

/// Relative residual the direct inner solvers are held to.
pub const ROOT_TOL: f64 = 1e-13;

pub fn default_hypergrad_eps(y: &Vector) -> f64 {
    1e-6 * (1.0 + y.norm())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "finite-difference step must be positive, got {eps}"
        )))
    }
}

fn shifted(y: &Vector, j: usize, h: f64) -> Vector {
    let mut v = y.clone();
    v[j] += h;
    v
}

/// `(h(y + εe_j) − h(y − εe_j)) / 2ε` for each `j`.
pub fn fd_hypergradient(problem: &BilevelProblem, y: &Vector, eps: f64) -> Result<Vector> {
    check_eps(eps)?;
    let mut out = Vec::with_capacity(y.len());
    for j in 0..problem.dy() {
        let hp = problem.outer_at_root(&shifted(y, j, eps))?;
        let hm = problem.outer_at_root(&shifted(y, j, -eps))?;
        out.push((hp - hm) / (2.0 * eps));
    }
    // The shape check of `outer_at_root` covers y.
    Vector::new(out)
}

/// Central differences of `x*(y)`, `d_x × d_y`.
pub fn fd_jac_xstar(problem: &BilevelProblem, y: &Vector, eps: f64) -> Result<Matrix> {
    check_eps(eps)?;
    let mut cols = Vec::with_capacity(problem.dy());
    for j in 0..problem.dy() {
        let xp = problem.exact_root(&shifted(y, j, eps))?;
        let xm = problem.exact_root(&shifted(y, j, -eps))?;
        cols.push((&xp - &xm).scale(0.5 / eps));
    }
    Ok(Matrix::from_columns(problem.dx(), &cols))
}
