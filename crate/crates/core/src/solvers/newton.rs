//! Damped Newton root finding with Armijo backtracking on `½‖F‖²`.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

use super::linear::solve_vec;

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Stop once `‖F(x)‖ ≤ tol·(1 + ‖x‖)`.
    pub tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: super::ground_truth::ROOT_TOL,
            max_iter: 100,
            armijo: 1e-4,
            max_halvings: 60,
        }
    }
}

/// Solves `F(x) = 0` from `x0`.
///
/// When the full Newton step stops reducing the residual norm the iterate is
/// at the floating-point floor of `F`; that point is accepted if it already
/// meets `tol`, and reported as a numerical failure otherwise.
pub fn damped_newton(
    x0: Vector,
    residual: impl Fn(&Vector) -> Vector,
    jacobian: impl Fn(&Vector) -> Matrix,
    opts: NewtonOptions,
) -> Result<Vector> {
    let mut x = x0;
    let mut f = residual(&x);
    let mut fn2 = f.dot(&f);
    for it in 0..opts.max_iter {
        if !fn2.is_finite() {
            return Err(Error::Numerical {
                message: "Newton residual became non-finite".into(),
                step: Some(it),
                last_estimate: None,
            });
        }
        if fn2.sqrt() <= opts.tol * (1.0 + x.norm()) {
            return Ok(x);
        }
        let d = solve_vec(&jacobian(&x), &f).map_err(|e| e.blame("Newton Jacobian"))?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand = x.axpy(-t, &d);
            let fc = residual(&cand);
            let n2 = fc.dot(&fc);
            if n2 <= (1.0 - 2.0 * opts.armijo * t) * fn2 {
                accepted = Some((cand, fc, n2));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, fc, n2)) => {
                x = cand;
                f = fc;
                fn2 = n2;
            }
            None => {
                return Err(Error::Numerical {
                    message: "Newton line search stalled above tolerance".into(),
                    step: Some(it),
                    last_estimate: Some(fn2.sqrt()),
                })
            }
        }
    }
    if fn2.sqrt() <= opts.tol * (1.0 + x.norm()) {
        return Ok(x);
    }
    Err(Error::Numerical {
        message: format!("Newton did not converge in {} iterations", opts.max_iter),
        step: Some(opts.max_iter),
        last_estimate: Some(fn2.sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_scalar_sigmoid_equation() {
        // x = σ(−x)
        let sig = |t: f64| 1.0 / (1.0 + (-t).exp());
        let x = damped_newton(
            Vector::zeros(1),
            |x| Vector::from_fn(1, |_| x[0] - sig(-x[0])),
            |x| {
                let s = sig(-x[0]);
                Matrix::from_diag(&Vector::from_fn(1, |_| 1.0 + s * (1.0 - s)))
            },
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((x[0] - sig(-x[0])).abs() < 1e-15);
    }
}
