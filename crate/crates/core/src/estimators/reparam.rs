//! Changes of inner variable `x = φ(z, y)` and the estimator they induce.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::BilevelProblem;
use crate::solvers::Lu;

/// A change of variable with the derivatives the reparameterized formula needs.
pub trait ReparamOracle: Send + Sync {
    /// `φ(z, y)`
    fn forward(&self, z: &Vector, y: &Vector) -> Result<Vector>;

    /// `z` with `φ(z, y) = x`.
    fn inverse(&self, x: &Vector, y: &Vector) -> Result<Vector>;

    /// `φ_1`, `d_x × d_x`
    fn jac_z(&self, z: &Vector, y: &Vector) -> Result<Matrix>;

    /// `φ_2`, `d_x × d_y`
    fn jac_y(&self, z: &Vector, y: &Vector) -> Result<Matrix>;

    /// `(φ_11 w)_ij = Σ_k w_k ∂²φ_k/∂z_i∂z_j`
    fn hess_zz_contract(&self, z: &Vector, y: &Vector, w: &Vector) -> Result<Matrix>;

    /// `(φ_21 w)_ie = Σ_k w_k ∂²φ_k/∂z_i∂y_e`
    fn hess_zy_contract(&self, z: &Vector, y: &Vector, w: &Vector) -> Result<Matrix>;
}

impl<T: ReparamOracle + ?Sized> ReparamOracle for &T {
    fn forward(&self, z: &Vector, y: &Vector) -> Result<Vector> {
        (**self).forward(z, y)
    }
    fn inverse(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        (**self).inverse(x, y)
    }
    fn jac_z(&self, z: &Vector, y: &Vector) -> Result<Matrix> {
        (**self).jac_z(z, y)
    }
    fn jac_y(&self, z: &Vector, y: &Vector) -> Result<Matrix> {
        (**self).jac_y(z, y)
    }
    fn hess_zz_contract(&self, z: &Vector, y: &Vector, w: &Vector) -> Result<Matrix> {
        (**self).hess_zz_contract(z, y, w)
    }
    fn hess_zy_contract(&self, z: &Vector, y: &Vector, w: &Vector) -> Result<Matrix> {
        (**self).hess_zy_contract(z, y, w)
    }
}

/// `φ(z, y) = z`
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityReparam;

impl ReparamOracle for IdentityReparam {
    fn forward(&self, z: &Vector, _y: &Vector) -> Result<Vector> {
        Ok(z.clone())
    }
    fn inverse(&self, x: &Vector, _y: &Vector) -> Result<Vector> {
        Ok(x.clone())
    }
    fn jac_z(&self, z: &Vector, _y: &Vector) -> Result<Matrix> {
        Ok(Matrix::identity(z.len()))
    }
    fn jac_y(&self, z: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(z.len(), y.len()))
    }
    fn hess_zz_contract(&self, z: &Vector, _y: &Vector, _w: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(z.len(), z.len()))
    }
    fn hess_zy_contract(&self, z: &Vector, y: &Vector, _w: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(z.len(), y.len()))
    }
}

/// `φ(z) = α ⊙ exp(βz)`, independent of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpReparam {
    alpha: Vector,
    beta: f64,
}

impl ExpReparam {
    pub fn new(alpha: Vector, beta: f64) -> Result<Self> {
        if alpha.iter().any(|&a| a == 0.0) {
            return Err(Error::Domain(
                "exponential reparameterization needs nonzero α".into(),
            ));
        }
        if !(beta.is_finite() && beta != 0.0) {
            return Err(Error::Domain(format!("β must be nonzero, got {beta}")));
        }
        Ok(ExpReparam { alpha, beta })
    }

    fn values(&self, z: &Vector) -> Vector {
        z.zip_map(&self.alpha, |zi, a| a * (self.beta * zi).exp())
    }
}

/// `φ(z) = sign(x̄) ⊙ exp(z)`; every anchor coordinate must be nonzero.
pub fn exp_reparam(anchor_x: &Vector) -> Result<ExpReparam> {
    if let Some(i) = anchor_x.iter().position(|&v| v == 0.0) {
        return Err(Error::Domain(format!(
            "exponential reparameterization undefined: coordinate {i} is zero"
        )));
    }
    ExpReparam::new(anchor_x.map(f64::signum), 1.0)
}

impl ReparamOracle for ExpReparam {
    fn forward(&self, z: &Vector, _y: &Vector) -> Result<Vector> {
        Ok(self.values(z))
    }

    fn inverse(&self, x: &Vector, _y: &Vector) -> Result<Vector> {
        let mut z = Vec::with_capacity(x.len());
        for (i, (&xi, &a)) in x.iter().zip(self.alpha.iter()).enumerate() {
            let r = xi / a;
            if r.is_nan() || r <= 0.0 {
                return Err(Error::Domain(format!(
                    "coordinate {i} = {xi} lies outside the range of the exponential map"
                )));
            }
            z.push(r.ln() / self.beta);
        }
        Vector::new(z)
    }

    fn jac_z(&self, z: &Vector, _y: &Vector) -> Result<Matrix> {
        Ok(Matrix::from_diag(&self.values(z).scale(self.beta)))
    }

    fn jac_y(&self, z: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(z.len(), y.len()))
    }

    fn hess_zz_contract(&self, z: &Vector, _y: &Vector, w: &Vector) -> Result<Matrix> {
        let b2 = self.beta * self.beta;
        Ok(Matrix::from_diag(&self.values(z).hadamard(w).scale(b2)))
    }

    fn hess_zy_contract(&self, z: &Vector, y: &Vector, _w: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(z.len(), y.len()))
    }
}

/// `Ψ^φ(x, y)`, `d_y × d_x`.
///
/// With `U = F_2 + F_1φ_2 + φ_1^{-T}(φ_21 F)` and
/// `V = φ_1^{-T}(φ_11 F)φ_1^{-1} + F_1`, returns `φ_2ᵀ − (V^{-1}U)ᵀ`.
pub fn reparam_psi(
    problem: &BilevelProblem,
    phi: &dyn ReparamOracle,
    x: &Vector,
    y: &Vector,
) -> Result<Matrix> {
    problem.check_point(x, y)?;
    let z = phi.inverse(x, y)?;
    let f = problem.residual(x, y)?;
    let f1 = problem.jac_x(x, y)?;
    let f2 = problem.jac_y(x, y)?;
    let j = phi.jac_z(&z, y)?;
    let phi2 = phi.jac_y(&z, y)?;
    let h = phi.hess_zz_contract(&z, y, &f)?;
    let m = phi.hess_zy_contract(&z, y, &f)?;

    let lu_j = Lu::factor(&j).map_err(|e| e.blame("φ_1"))?;
    let u = &(&f2 + &f1.matmul(&phi2)) + &lu_j.solve_transposed(&m);
    // φ_1^{-T} H φ_1^{-1} = (φ_1^{-T} (φ_1^{-T} H)ᵀ)ᵀ
    let a = lu_j.solve_transposed(&h);
    let curvature = lu_j.solve_transposed(&a.transpose()).transpose();
    let v = &curvature + &f1;
    let w = Lu::factor(&v).map_err(|e| e.blame("V"))?.solve(&u);
    Ok(&phi2.transpose() - &w.transpose())
}

/// `g_2 + Ψ^φ g_1` at `(x, y)`.
pub fn reparam_estimate(
    problem: &BilevelProblem,
    phi: &dyn ReparamOracle,
    x: &Vector,
    y: &Vector,
) -> Result<Vector> {
    let psi = reparam_psi(problem, phi, x, y)?;
    Ok(&problem.grad_y(x, y)? + &psi.matvec(&problem.grad_x(x, y)?))
}
