//! Plain gradient descent on the inner residual.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problem::BilevelProblem;

use super::spectral::op_norm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Constant(f64),
    /// `τ = 1/λ_max(F_1(x_0, y))`, computed once.
    InverseLipschitz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `x_0, …, x_steps`
    pub iterates: Vec<Vector>,
    /// `τ_1, …, τ_steps`
    pub step_sizes: Vec<f64>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.step_sizes.len()
    }

    pub fn last(&self) -> &Vector {
        self.iterates.last().expect("trajectory always holds x_0")
    }
}

fn at_step(err: crate::error::Error, k: usize) -> Error {
    match err {
        Error::Numerical {
            message,
            last_estimate,
            ..
        } => Error::Numerical {
            message,
            step: Some(k),
            last_estimate,
        },
        other => other,
    }
}

/// Iterates `x_k = x_{k-1} − τ F(x_{k-1}, y)`.
pub fn gradient_descent(
    problem: &BilevelProblem,
    y: &Vector,
    x0: &Vector,
    steps: usize,
    rule: StepRule,
) -> Result<Trajectory> {
    problem.check_point(x0, y)?;
    let tau = match rule {
        StepRule::Constant(t) => t,
        StepRule::InverseLipschitz if steps == 0 => 0.0,
        StepRule::InverseLipschitz => {
            let lip = op_norm(&problem.jac_x(x0, y)?)?;
            if lip == 0.0 {
                return Err(Error::Degenerate("F_1(x_0, y) is zero".into()));
            }
            1.0 / lip
        }
    };
    if !(tau.is_finite() && tau > 0.0) && steps > 0 {
        return Err(Error::Usage(format!(
            "step size must be positive, got {tau}"
        )));
    }
    let mut iterates = Vec::with_capacity(steps + 1);
    iterates.push(x0.clone());
    for k in 1..=steps {
        let prev = &iterates[k - 1];
        let f = problem.residual(prev, y).map_err(|e| at_step(e, k))?;
        let next = prev.axpy(-tau, &f);
        if !next.is_finite() {
            return Err(Error::Numerical {
                message: "gradient descent produced a non-finite iterate".into(),
                step: Some(k),
                last_estimate: Some(prev.norm()),
            });
        }
        iterates.push(next);
    }
    Ok(Trajectory {
        iterates,
        step_sizes: vec![tau; steps],
    })
}
