//! Inequalities relating the efficiency constants of preconditioned and
//! reparameterized estimators, all evaluated at the inner root.

use crate::error::Result;
use crate::estimators::{
    precond_error_matrix, Estimator, Preconditioned, PreconditionerOracle, Vanilla,
};
use crate::linalg::{Matrix, Vector};
use crate::problem::BilevelProblem;
use crate::solvers::Lu;

use super::{
    d_matrix_at, estimator_jacobian_fd, norm, psi1_g1_contract_fd, psi_efficiency_constant, top,
};

/// Both sides of the two comparison inequalities
/// `C(φ)² − C(P)² ≥ ⟨U₊v_P, U₋v_P⟩` and `C(P)² − C(φ)² ≥ ⟨V₊v_φ, V₋v_φ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonBounds {
    pub lhs_phi_minus_p: f64,
    pub rhs_phi_minus_p: f64,
    pub lhs_p_minus_phi: f64,
    pub rhs_p_minus_phi: f64,
    pub v_p: Vector,
    pub v_phi: Vector,
    pub c_p: f64,
    pub c_phi: f64,
}

/// A lower bound that holds up to a vanishing remainder, with an explicit
/// value for that remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// `δ = ‖P − F_1‖` or `σ = ‖g_1‖·C_y(Ψ^ψ)`.
    pub param: f64,
    pub lower_bound: f64,
    pub lhs: f64,
    /// `lhs ≥ lower_bound − remainder` holds exactly.
    pub remainder: f64,
}

impl GapReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs >= self.lower_bound - self.remainder - slack
    }
}

struct Ingredients {
    d: Matrix,
    /// `D + Ψ_1 g_1`
    omega1: Matrix,
    /// `D + Ψ_1^φ g_1`
    omega1_phi: Matrix,
    e_p: Matrix,
    c_p: f64,
    v_p: Vector,
    c_phi: f64,
    v_phi: Vector,
}

fn ingredients(
    problem: &BilevelProblem,
    p: &dyn PreconditionerOracle,
    phi: &dyn Estimator,
    y: &Vector,
) -> Result<Ingredients> {
    let x = problem.exact_root(y)?;
    let d = d_matrix_at(problem, &x, y)?;
    let omega1 = &d + &psi1_g1_contract_fd(problem, &Vanilla::new(problem), y)?;
    let omega1_phi = &d + &psi1_g1_contract_fd(problem, phi, y)?;
    let e_p = precond_error_matrix(problem, p, &x, y)?;
    let pre = Preconditioned::new(problem, p, "precond");
    let jp = top(&estimator_jacobian_fd(&pre, problem, y, None)?)?;
    let jphi = top(&estimator_jacobian_fd(phi, problem, y, None)?)?;
    Ok(Ingredients {
        d,
        omega1,
        omega1_phi,
        e_p,
        c_p: jp.value,
        v_p: jp.vector,
        c_phi: jphi.value,
        v_phi: jphi.vector,
    })
}

fn sq(v: &Vector) -> f64 {
    v.dot(v)
}

pub fn compare_bounds(
    problem: &BilevelProblem,
    p: &dyn PreconditionerOracle,
    phi: &dyn Estimator,
    y: &Vector,
) -> Result<ComparisonBounds> {
    let ing = ingredients(problem, p, phi, y)?;
    let a = &ing.omega1_phi;
    let b = ing.omega1.matmul(&ing.e_p);
    let u_plus = a + &b;
    let u_minus = a - &b;
    let rhs_phi_minus_p = u_plus.matvec(&ing.v_p).dot(&u_minus.matvec(&ing.v_p));
    let v_plus = &b + a;
    let v_minus = &b - a;
    let rhs_p_minus_phi = v_plus.matvec(&ing.v_phi).dot(&v_minus.matvec(&ing.v_phi));
    let (cp2, cphi2) = (ing.c_p * ing.c_p, ing.c_phi * ing.c_phi);
    Ok(ComparisonBounds {
        lhs_phi_minus_p: cphi2 - cp2,
        rhs_phi_minus_p,
        lhs_p_minus_phi: cp2 - cphi2,
        rhs_p_minus_phi,
        v_p: ing.v_p,
        v_phi: ing.v_phi,
        c_p: ing.c_p,
        c_phi: ing.c_phi,
    })
}

/// `C(φ)² − C(P)² ≥ ‖(D + Ψ_1^φ g_1) v_P‖² − ‖Ω_1‖²‖P^{-1}‖²δ²`.
pub fn delta_gap(
    problem: &BilevelProblem,
    p: &dyn PreconditionerOracle,
    phi: &dyn Estimator,
    y: &Vector,
) -> Result<GapReport> {
    let ing = ingredients(problem, p, phi, y)?;
    let x = problem.exact_root(y)?;
    let pm = p.matrix(&x, y)?;
    let delta = norm(&(&pm - &problem.jac_x(&x, y)?))?;
    let p_inv = Lu::factor(&pm)
        .map_err(|e| e.blame("P"))?
        .solve(&Matrix::identity(problem.dx()));
    let k = norm(&ing.omega1)? * norm(&p_inv)? * delta;
    Ok(GapReport {
        param: delta,
        lower_bound: sq(&ing.omega1_phi.matvec(&ing.v_p)),
        lhs: ing.c_phi * ing.c_phi - ing.c_p * ing.c_p,
        remainder: k * k,
    })
}

/// `C(P)² − C(ψ)² ≥ ‖(D + Ψ_1 g_1)E^P v_ψ‖² − ‖D v_ψ‖² − (2‖D v_ψ‖σ + σ²)`
/// with `σ = ‖g_1‖₂·C_y(Ψ^ψ)`.
pub fn sigma_gap(
    problem: &BilevelProblem,
    p: &dyn PreconditionerOracle,
    spec: &dyn Estimator,
    y: &Vector,
) -> Result<GapReport> {
    let ing = ingredients(problem, p, spec, y)?;
    let x = problem.exact_root(y)?;
    let sigma = problem.grad_x(&x, y)?.norm() * psi_efficiency_constant(problem, spec, y)?;
    let b = ing.omega1.matmul(&ing.e_p);
    let dv = ing.d.matvec(&ing.v_phi).norm();
    Ok(GapReport {
        param: sigma,
        lower_bound: sq(&b.matvec(&ing.v_phi)) - dv * dv,
        lhs: ing.c_p * ing.c_p - ing.c_phi * ing.c_phi,
        remainder: 2.0 * dv * sigma + sigma * sigma,
    })
}

/// `C_y(Ω) ≤ ‖D‖ + ‖g_1‖·C_y(Ψ)` with norms at the root.
#[derive(Debug, Clone, PartialEq)]
pub struct IftBoundReport {
    pub c_omega: f64,
    pub d_norm: f64,
    pub g1_norm: f64,
    pub c_psi: f64,
}

impl IftBoundReport {
    pub fn rhs(&self) -> f64 {
        self.d_norm + self.g1_norm * self.c_psi
    }
}

pub fn ift_bound(problem: &BilevelProblem, y: &Vector) -> Result<IftBoundReport> {
    let x = problem.exact_root(y)?;
    let vanilla = Vanilla::new(problem);
    let j = estimator_jacobian_fd(&vanilla, problem, y, None)?;
    Ok(IftBoundReport {
        c_omega: norm(&j)?,
        d_norm: norm(&d_matrix_at(problem, &x, y)?)?,
        g1_norm: problem.grad_x(&x, y)?.norm(),
        c_psi: psi_efficiency_constant(problem, &vanilla, y)?,
    })
}
