//! Hypergradient estimators: the plain IFT formula and its preconditioned,
//! reparameterized and localized variants.

mod localized;
mod precond;
mod reparam;

pub use localized::{
    diag_reparam, f11_contract, localized_estimate, localized_psi, opt_reparam,
    perturbed_opt_reparam, Anchored, DiagReparam, OptPerturbation, OptReparam, SeparableSpec,
};
pub use precond::{
    diag_preconditioner, newton_preconditioner, precond_error_matrix, precond_estimate,
    scaled_newton_preconditioner, shifted_newton_preconditioner, DiagPreconditioner,
    NewtonPreconditioner, PreconditionerOracle, ScaledNewtonPreconditioner,
    ShiftedNewtonPreconditioner,
};
pub use reparam::{
    exp_reparam, reparam_estimate, reparam_psi, ExpReparam, IdentityReparam, ReparamOracle,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::BilevelProblem;
use crate::solvers::Lu;

/// `Ψ(x, y) = −F_2ᵀ F_1^{-T}`, `d_y × d_x`; at the root `Ψᵀ = ∂x*`.
pub fn psi(problem: &BilevelProblem, x: &Vector, y: &Vector) -> Result<Matrix> {
    let f1 = problem.jac_x(x, y)?;
    let f2 = problem.jac_y(x, y)?;
    let w = Lu::factor(&f1).map_err(|e| e.blame("F_1"))?.solve(&f2);
    Ok(-&w.transpose())
}

/// `Ω(x, y) = g_2 + Ψ g_1`
pub fn vanilla_ift(problem: &BilevelProblem, x: &Vector, y: &Vector) -> Result<Vector> {
    let p = psi(problem, x, y)?;
    Ok(&problem.grad_y(x, y)? + &p.matvec(&problem.grad_x(x, y)?))
}

/// A map `(x, y) ↦` approximate `∇h(y)`.
pub trait Estimator: Send + Sync {
    fn id(&self) -> &str;

    fn evaluate(&self, x: &Vector, y: &Vector) -> Result<Vector>;

    /// The matrix multiplying `g_1` in [`Estimator::evaluate`].
    fn psi(&self, x: &Vector, y: &Vector) -> Result<Matrix>;
}

pub struct Vanilla<'a> {
    problem: &'a BilevelProblem,
}

impl<'a> Vanilla<'a> {
    pub fn new(problem: &'a BilevelProblem) -> Self {
        Vanilla { problem }
    }
}

impl Estimator for Vanilla<'_> {
    fn id(&self) -> &str {
        "vanilla"
    }
    fn evaluate(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        vanilla_ift(self.problem, x, y)
    }
    fn psi(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        psi(self.problem, x, y)
    }
}

pub struct Preconditioned<'a, P> {
    problem: &'a BilevelProblem,
    p: P,
    id: String,
}

impl<'a, P: PreconditionerOracle> Preconditioned<'a, P> {
    pub fn new(problem: &'a BilevelProblem, p: P, id: impl Into<String>) -> Self {
        Preconditioned {
            problem,
            p,
            id: id.into(),
        }
    }

    pub fn preconditioner(&self) -> &P {
        &self.p
    }
}

impl<P: PreconditionerOracle> Estimator for Preconditioned<'_, P> {
    fn id(&self) -> &str {
        &self.id
    }
    fn evaluate(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        precond_estimate(self.problem, &self.p, x, y)
    }
    fn psi(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        let xt = precond::precond_step(self.problem, &self.p, x, y)?;
        psi(self.problem, &xt, y).map_err(|e| e.blame("F_1"))
    }
}

/// A fixed change of variable.
pub struct Reparameterized<'a, R> {
    problem: &'a BilevelProblem,
    phi: R,
    id: String,
}

impl<'a, R: ReparamOracle> Reparameterized<'a, R> {
    pub fn new(problem: &'a BilevelProblem, phi: R, id: impl Into<String>) -> Self {
        Reparameterized {
            problem,
            phi,
            id: id.into(),
        }
    }
}

impl<R: ReparamOracle> Estimator for Reparameterized<'_, R> {
    fn id(&self) -> &str {
        &self.id
    }
    fn evaluate(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        reparam_estimate(self.problem, &self.phi, x, y)
    }
    fn psi(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        reparam_psi(self.problem, &self.phi, x, y)
    }
}

/// A separable reparameterization re-anchored at every query point.
pub struct Localized<'a, S> {
    problem: &'a BilevelProblem,
    spec: S,
    id: String,
}

impl<'a, S: SeparableSpec> Localized<'a, S> {
    pub fn new(problem: &'a BilevelProblem, spec: S, id: impl Into<String>) -> Self {
        Localized {
            problem,
            spec,
            id: id.into(),
        }
    }

    pub fn spec(&self) -> &S {
        &self.spec
    }
}

impl<S: SeparableSpec> Estimator for Localized<'_, S> {
    fn id(&self) -> &str {
        &self.id
    }
    fn evaluate(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        localized_estimate(self.problem, &self.spec, x, y)
    }
    fn psi(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        localized_psi(self.problem, &self.spec, x, y)
    }
}

/// `sign(x) ⊙ exp(z)` with the signs taken from each query point.
pub struct ExpLocalized<'a> {
    problem: &'a BilevelProblem,
}

impl<'a> ExpLocalized<'a> {
    pub fn new(problem: &'a BilevelProblem) -> Self {
        ExpLocalized { problem }
    }
}

impl Estimator for ExpLocalized<'_> {
    fn id(&self) -> &str {
        "exp"
    }
    fn evaluate(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        reparam_estimate(self.problem, &exp_reparam(x)?, x, y)
    }
    fn psi(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        reparam_psi(self.problem, &exp_reparam(x)?, x, y)
    }
}

/// The six named strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Vanilla,
    Newton,
    Diag,
    Exp,
    DiagRep,
    Opt,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Vanilla,
        Strategy::Newton,
        Strategy::Diag,
        Strategy::Exp,
        Strategy::DiagRep,
        Strategy::Opt,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Strategy::Vanilla => "vanilla",
            Strategy::Newton => "newton",
            Strategy::Diag => "diag",
            Strategy::Exp => "exp",
            Strategy::DiagRep => "diag-rep",
            Strategy::Opt => "opt",
        }
    }

    pub fn build(self, problem: &BilevelProblem) -> Box<dyn Estimator + '_> {
        match self {
            Strategy::Vanilla => Box::new(Vanilla::new(problem)),
            Strategy::Newton => Box::new(Preconditioned::new(
                problem,
                newton_preconditioner(problem),
                self.id(),
            )),
            Strategy::Diag => Box::new(Preconditioned::new(
                problem,
                diag_preconditioner(problem),
                self.id(),
            )),
            Strategy::Exp => Box::new(ExpLocalized::new(problem)),
            Strategy::DiagRep => {
                Box::new(Localized::new(problem, diag_reparam(problem), self.id()))
            }
            Strategy::Opt => Box::new(Localized::new(problem, opt_reparam(problem), self.id())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.id() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown strategy '{s}' (expected one of vanilla, newton, diag, exp, diag-rep, opt)"
                ))
            })
    }
}
