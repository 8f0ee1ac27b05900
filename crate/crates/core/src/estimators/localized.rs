//! Separable reparameterizations `ψ(z, y) = R(x̄, y) Q(z, ȳ) + x̄` anchored
//! at the query point.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::BilevelProblem;
use crate::solvers::{damped_newton, solve_vec, Lu, NewtonOptions};

use super::reparam::{reparam_psi, ReparamOracle};

/// The two factors of a separable reparameterization.
///
/// `R` takes the anchor `x̄` and the live `y`; `Q` takes `z` and the frozen `ȳ`.
pub trait SeparableSpec: Send + Sync {
    fn r(&self, xbar: &Vector, y: &Vector) -> Result<Matrix>;

    /// `R^{-1} v`
    fn r_solve(&self, xbar: &Vector, y: &Vector, v: &Vector) -> Result<Vector> {
        solve_vec(&self.r(xbar, y)?, v).map_err(|e| e.blame("R"))
    }

    /// `M_me = Σ_k w_k ∂R_km/∂y_e`
    fn r2_contract_left(&self, xbar: &Vector, y: &Vector, w: &Vector) -> Result<Matrix>;

    /// `N_ke = Σ_m ∂R_km/∂y_e q_m`
    fn r2_contract_right(&self, xbar: &Vector, y: &Vector, q: &Vector) -> Result<Matrix>;

    fn q(&self, z: &Vector, ybar: &Vector) -> Result<Vector>;

    fn q_jac(&self, z: &Vector, ybar: &Vector) -> Result<Matrix>;

    /// `Σ_m w_m ∂²Q_m/∂z_i∂z_j`
    fn q_hess_contract(&self, z: &Vector, ybar: &Vector, w: &Vector) -> Result<Matrix>;

    /// `z` with `Q(z, ȳ) = v`.
    fn q_inverse(&self, v: &Vector, ybar: &Vector) -> Result<Vector>;

    /// Whether the anchor `x̄` is added back.
    fn has_offset(&self) -> bool;
}

/// A separable spec frozen at an anchor `(x̄, ȳ)`.
pub struct Anchored<'s, S: ?Sized> {
    spec: &'s S,
    xbar: Vector,
    ybar: Vector,
}

impl<'s, S: SeparableSpec + ?Sized> Anchored<'s, S> {
    pub fn new(spec: &'s S, xbar: Vector, ybar: Vector) -> Self {
        Anchored { spec, xbar, ybar }
    }

    fn offset(&self) -> Vector {
        if self.spec.has_offset() {
            self.xbar.clone()
        } else {
            Vector::zeros(self.xbar.len())
        }
    }
}

impl<S: SeparableSpec + ?Sized> ReparamOracle for Anchored<'_, S> {
    fn forward(&self, z: &Vector, y: &Vector) -> Result<Vector> {
        let rq = self
            .spec
            .r(&self.xbar, y)?
            .matvec(&self.spec.q(z, &self.ybar)?);
        Ok(&rq + &self.offset())
    }

    fn inverse(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        let v = self.spec.r_solve(&self.xbar, y, &(x - &self.offset()))?;
        self.spec.q_inverse(&v, &self.ybar)
    }

    fn jac_z(&self, z: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(self
            .spec
            .r(&self.xbar, y)?
            .matmul(&self.spec.q_jac(z, &self.ybar)?))
    }

    fn jac_y(&self, z: &Vector, y: &Vector) -> Result<Matrix> {
        self.spec
            .r2_contract_right(&self.xbar, y, &self.spec.q(z, &self.ybar)?)
    }

    fn hess_zz_contract(&self, z: &Vector, y: &Vector, w: &Vector) -> Result<Matrix> {
        let rtw = self.spec.r(&self.xbar, y)?.tr_matvec(w);
        self.spec.q_hess_contract(z, &self.ybar, &rtw)
    }

    fn hess_zy_contract(&self, z: &Vector, y: &Vector, w: &Vector) -> Result<Matrix> {
        let m = self.spec.r2_contract_left(&self.xbar, y, w)?;
        Ok(self.spec.q_jac(z, &self.ybar)?.tr_matmul(&m))
    }
}

/// `Ψ^ψ_loc(x, y)`: the reparameterized `Ψ` with the anchor at `(x, y)`.
pub fn localized_psi(
    problem: &BilevelProblem,
    spec: &dyn SeparableSpec,
    x: &Vector,
    y: &Vector,
) -> Result<Matrix> {
    let phi = Anchored::new(spec, x.clone(), y.clone());
    reparam_psi(problem, &phi, x, y)
}

pub fn localized_estimate(
    problem: &BilevelProblem,
    spec: &dyn SeparableSpec,
    x: &Vector,
    y: &Vector,
) -> Result<Vector> {
    let psi = localized_psi(problem, spec, x, y)?;
    Ok(&problem.grad_y(x, y)? + &psi.matvec(&problem.grad_x(x, y)?))
}

/// `Σ_m w_m ∂²F_m/∂x_i∂x_j`, assembled from directional derivatives of `F_1`.
pub fn f11_contract(
    problem: &BilevelProblem,
    x: &Vector,
    y: &Vector,
    w: &Vector,
) -> Result<Matrix> {
    let n = problem.dx();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        cols.push(
            problem
                .djac_x_dir_x(x, y, &Vector::basis(n, j))?
                .tr_matvec(w),
        );
    }
    Ok(Matrix::from_columns(n, &cols))
}

/// `R = [diag(F_1(x̄, y))]^{-1}`, `Q(z) = z`, no offset.
pub struct DiagReparam<'a> {
    problem: &'a BilevelProblem,
}

pub fn diag_reparam(problem: &BilevelProblem) -> DiagReparam<'_> {
    DiagReparam { problem }
}

impl DiagReparam<'_> {
    fn diag(&self, xbar: &Vector, y: &Vector) -> Result<Vector> {
        let d = self.problem.jac_x(xbar, y)?.diagonal();
        if let Some(&p) = d.iter().find(|&&p| p == 0.0) {
            return Err(Error::Singular {
                which: "diag(F_1)".into(),
                pivot: p,
                threshold: 0.0,
            });
        }
        Ok(d)
    }

    /// Column `e` is `∂(1/d)/∂y_e = −∂_e d / d²`.
    fn dr(&self, xbar: &Vector, y: &Vector) -> Result<Vec<Vector>> {
        let d = self.diag(xbar, y)?;
        (0..self.problem.dy())
            .map(|e| {
                let g = self
                    .problem
                    .djac_x_dir_y(xbar, y, &Vector::basis(self.problem.dy(), e))?
                    .diagonal();
                Ok(g.zip_map(&d, |gi, di| -gi / (di * di)))
            })
            .collect()
    }
}

impl SeparableSpec for DiagReparam<'_> {
    fn r(&self, xbar: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(Matrix::from_diag(&self.diag(xbar, y)?.map(|v| 1.0 / v)))
    }

    fn r_solve(&self, xbar: &Vector, y: &Vector, v: &Vector) -> Result<Vector> {
        Ok(v.hadamard(&self.diag(xbar, y)?))
    }

    fn r2_contract_left(&self, xbar: &Vector, y: &Vector, w: &Vector) -> Result<Matrix> {
        let cols: Vec<Vector> = self.dr(xbar, y)?.iter().map(|c| c.hadamard(w)).collect();
        Ok(Matrix::from_columns(xbar.len(), &cols))
    }

    fn r2_contract_right(&self, xbar: &Vector, y: &Vector, q: &Vector) -> Result<Matrix> {
        self.r2_contract_left(xbar, y, q)
    }

    fn q(&self, z: &Vector, _ybar: &Vector) -> Result<Vector> {
        Ok(z.clone())
    }

    fn q_jac(&self, z: &Vector, _ybar: &Vector) -> Result<Matrix> {
        Ok(Matrix::identity(z.len()))
    }

    fn q_hess_contract(&self, z: &Vector, _ybar: &Vector, _w: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(z.len(), z.len()))
    }

    fn q_inverse(&self, v: &Vector, _ybar: &Vector) -> Result<Vector> {
        Ok(v.clone())
    }

    fn has_offset(&self) -> bool {
        false
    }
}

/// How the `R` factor of [`OptReparam`] departs from `F_1^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptPerturbation {
    None,
    /// `R = (1 + ε) F_1^{-1}`
    Scale(f64),
    /// `R = [F_1 + ε·diag(F_1)]^{-1}`
    DiagShift(f64),
}

/// `R = [F_1(x̄, y)]^{-1}`, `Q(z, ȳ) = −F(z, ȳ)`, with offset.
pub struct OptReparam<'a> {
    problem: &'a BilevelProblem,
    perturbation: OptPerturbation,
}

pub fn opt_reparam(problem: &BilevelProblem) -> OptReparam<'_> {
    OptReparam {
        problem,
        perturbation: OptPerturbation::None,
    }
}

pub fn perturbed_opt_reparam(
    problem: &BilevelProblem,
    perturbation: OptPerturbation,
) -> OptReparam<'_> {
    OptReparam {
        problem,
        perturbation,
    }
}

impl OptReparam<'_> {
    /// `B = R^{-1}` with its `y`-derivatives along each basis direction.
    fn base(&self, xbar: &Vector, y: &Vector) -> Result<Matrix> {
        let f1 = self.problem.jac_x(xbar, y)?;
        Ok(match self.perturbation {
            OptPerturbation::None => f1,
            OptPerturbation::Scale(eps) => f1.scale(1.0 / (1.0 + eps)),
            OptPerturbation::DiagShift(eps) => {
                let d = f1.diagonal().scale(eps);
                f1.add_diag(&d)
            }
        })
    }

    fn base_dy(&self, xbar: &Vector, y: &Vector, e: usize) -> Result<Matrix> {
        let g = self
            .problem
            .djac_x_dir_y(xbar, y, &Vector::basis(self.problem.dy(), e))?;
        Ok(match self.perturbation {
            OptPerturbation::None => g,
            OptPerturbation::Scale(eps) => g.scale(1.0 / (1.0 + eps)),
            OptPerturbation::DiagShift(eps) => {
                let d = g.diagonal().scale(eps);
                g.add_diag(&d)
            }
        })
    }

    fn base_lu(&self, xbar: &Vector, y: &Vector) -> Result<Lu> {
        Lu::factor(&self.base(xbar, y)?).map_err(|e| e.blame("R^{-1}"))
    }
}

impl SeparableSpec for OptReparam<'_> {
    fn r(&self, xbar: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(self
            .base_lu(xbar, y)?
            .solve(&Matrix::identity(self.problem.dx())))
    }

    fn r_solve(&self, xbar: &Vector, y: &Vector, v: &Vector) -> Result<Vector> {
        Ok(self.base(xbar, y)?.matvec(v))
    }

    fn r2_contract_left(&self, xbar: &Vector, y: &Vector, w: &Vector) -> Result<Matrix> {
        // ∂_e R = −R (∂_e B) R, so column e is −Rᵀ(∂_e B)ᵀRᵀw.
        let lu = self.base_lu(xbar, y)?;
        let rtw = lu.solve_transposed_vec(w);
        let cols = (0..self.problem.dy())
            .map(|e| {
                let g = self.base_dy(xbar, y, e)?;
                Ok(-&lu.solve_transposed_vec(&g.tr_matvec(&rtw)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(self.problem.dx(), &cols))
    }

    fn r2_contract_right(&self, xbar: &Vector, y: &Vector, q: &Vector) -> Result<Matrix> {
        let lu = self.base_lu(xbar, y)?;
        let rq = lu.solve_vec(q);
        let cols = (0..self.problem.dy())
            .map(|e| {
                let g = self.base_dy(xbar, y, e)?;
                Ok(-&lu.solve_vec(&g.matvec(&rq)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(self.problem.dx(), &cols))
    }

    fn q(&self, z: &Vector, ybar: &Vector) -> Result<Vector> {
        Ok(-&self.problem.residual(z, ybar)?)
    }

    fn q_jac(&self, z: &Vector, ybar: &Vector) -> Result<Matrix> {
        Ok(-&self.problem.jac_x(z, ybar)?)
    }

    fn q_hess_contract(&self, z: &Vector, ybar: &Vector, w: &Vector) -> Result<Matrix> {
        Ok(-&f11_contract(self.problem, z, ybar, w)?)
    }

    /// Solves `F(z, ȳ) = −v`. `v = 0` is the inner root itself; other values
    /// are reached by Newton from that root. Both need a direct root solver.
    fn q_inverse(&self, v: &Vector, ybar: &Vector) -> Result<Vector> {
        let root = self.problem.exact_root(ybar).map_err(|e| match e {
            Error::Capability(m) => {
                Error::Capability(format!("inverting Q = -F needs an exact inner root: {m}"))
            }
            other => other,
        })?;
        if v.iter().all(|&c| c == 0.0) {
            return Ok(root);
        }
        damped_newton(
            root,
            |z| {
                self.problem
                    .residual(z, ybar)
                    .map(|f| &f + v)
                    .unwrap_or_else(|_| Vector::from_fn(v.len(), |_| f64::NAN))
            },
            |z| {
                self.problem
                    .jac_x(z, ybar)
                    .unwrap_or_else(|_| Matrix::zeros(v.len(), v.len()))
            },
            NewtonOptions::default(),
        )
    }

    fn has_offset(&self) -> bool {
        true
    }
}
