//! Deviation of a separable reparameterization from the Newton-like choice,
//! and the one-dimensional super-efficiency equation.

use crate::error::{Error, Result};
use crate::estimators::{f11_contract, Anchored, ReparamOracle, SeparableSpec};
use crate::linalg::{Matrix, Vector};
use crate::problem::BilevelProblem;
use crate::rng::Rng;
use crate::solvers::Lu;

use super::norm;

/// Seed of the probe directions used for the tensor-valued terms.
pub const PROBE_SEED: u64 = 0x005e_ed12;
const PROBES: usize = 8;

/// Operator-norm deviations of `Q`, `Q_1`, `Q_11`, `R`, `R_2` from
/// `−F`, `−F_1`, `−F_11`, `F_1^{-1}` and `∂_y F_1^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTerms {
    pub e_q: f64,
    pub e_q1: f64,
    pub e_q11: f64,
    pub e_r: f64,
    pub e_r2: f64,
}

impl ErrorTerms {
    pub fn max(&self) -> f64 {
        [self.e_q, self.e_q1, self.e_q11, self.e_r, self.e_r2]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn probes(n: usize) -> Vec<Vector> {
    let mut rng = Rng::new(PROBE_SEED);
    (0..PROBES)
        .map(|_| rng.normal_vector(n).normalized())
        .collect()
}

/// Evaluated at `x*(y)` and `z* = ψ^{-1}(x*)` with the anchor at `(x*, y)`.
pub fn newton_reparam_error_terms(
    problem: &BilevelProblem,
    spec: &dyn SeparableSpec,
    y: &Vector,
) -> Result<ErrorTerms> {
    let n = problem.dx();
    let x = problem.exact_root(y)?;
    let z = Anchored::new(spec, x.clone(), y.clone()).inverse(&x, y)?;

    let e_q = (&spec.q(&z, y)? + &problem.residual(&z, y)?).norm();
    let e_q1 = norm(&(&spec.q_jac(&z, y)? + &problem.jac_x(&z, y)?))?;

    let lu = Lu::factor(&problem.jac_x(&x, y)?).map_err(|e| e.blame("F_1"))?;
    let f1_inv = lu.solve(&Matrix::identity(n));
    let e_r = norm(&(&spec.r(&x, y)? - &f1_inv))?;

    let gs = (0..problem.dy())
        .map(|e| problem.djac_x_dir_y(&x, y, &Vector::basis(problem.dy(), e)))
        .collect::<Result<Vec<_>>>()?;
    let mut e_q11: f64 = 0.0;
    let mut e_r2: f64 = 0.0;
    for u in probes(n) {
        let dq = &spec.q_hess_contract(&z, y, &u)? + &f11_contract(problem, &z, y, &u)?;
        e_q11 = e_q11.max(norm(&dq)?);
        let fu = lu.solve_vec(&u);
        let reference: Vec<Vector> = gs.iter().map(|g| -&lu.solve_vec(&g.matvec(&fu))).collect();
        let dr = &spec.r2_contract_right(&x, y, &u)? - &Matrix::from_columns(n, &reference);
        e_r2 = e_r2.max(norm(&dr)?);
    }
    Ok(ErrorTerms {
        e_q,
        e_q1,
        e_q11,
        e_r,
        e_r2,
    })
}

fn scalar(m: &Matrix) -> f64 {
    m[(0, 0)]
}

/// Residual of the one-dimensional super-efficiency equation
///
/// `φ_12/φ_1 − φ_2φ_11/φ_1² − F_2φ_11/(F_1φ_1²) − (g_12/g_1 − F_12/F_1)`
///
/// at `(z*(y), y)`. Meant for problems with `F` and `g` affine in `x`, where a
/// zero residual means the reparameterized estimator is super-efficient.
pub fn ode1d_residual(
    problem: &BilevelProblem,
    phi: &dyn ReparamOracle,
    y: &Vector,
) -> Result<f64> {
    if problem.dx() != 1 || problem.dy() != 1 {
        return Err(Error::contract(
            "the one-dimensional equation needs d_x = d_y = 1",
        ));
    }
    let x = problem.exact_root(y)?;
    let g1 = problem.grad_x(&x, y)?[0];
    if g1 == 0.0 {
        return Err(Error::Degenerate("g_1 vanishes at the root".into()));
    }
    let z = phi.inverse(&x, y)?;
    let one = Vector::from_fn(1, |_| 1.0);
    let p1 = scalar(&phi.jac_z(&z, y)?);
    let p2 = scalar(&phi.jac_y(&z, y)?);
    let p11 = scalar(&phi.hess_zz_contract(&z, y, &one)?);
    let p12 = scalar(&phi.hess_zy_contract(&z, y, &one)?);
    let f1 = scalar(&problem.jac_x(&x, y)?);
    let f2 = scalar(&problem.jac_y(&x, y)?);
    let f12 = scalar(&problem.djac_x_dir_y(&x, y, &one)?);
    let g12 = scalar(&problem.jac_grad_x_y(&x, y)?);
    if p1 == 0.0 || f1 == 0.0 {
        return Err(Error::Degenerate("φ_1 or F_1 vanishes at the root".into()));
    }
    let lhs = p12 / p1 - p2 * p11 / (p1 * p1) - f2 * p11 / (f1 * p1 * p1);
    Ok(lhs - (g12 / g1 - f12 / f1))
}
