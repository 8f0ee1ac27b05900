//! Largest singular value by power iteration on `MᵀM`.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Top singular value with the right singular vector that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct TopSingular {
    pub value: f64,
    pub vector: Vector,
    pub iterations: usize,
}

fn power_iterate(m: &Matrix, start: Vector, tol: f64, max_iter: usize) -> Result<TopSingular> {
    let mut v = start.normalized();
    let mut sigma = m.matvec(&v).norm();
    for it in 1..=max_iter {
        let w = m.tr_matvec(&m.matvec(&v));
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(TopSingular {
                value: sigma,
                vector: v,
                iterations: it,
            });
        }
        let next = w.scale(1.0 / wn);
        let next_sigma = m.matvec(&next).norm();
        let converged = (next_sigma - sigma).abs() <= tol * next_sigma;
        v = next;
        sigma = next_sigma;
        if converged {
            return Ok(TopSingular {
                value: sigma,
                vector: v,
                iterations: it,
            });
        }
    }
    Err(Error::Numerical {
        message: format!("power iteration did not converge in {max_iter} iterations"),
        step: Some(max_iter),
        last_estimate: Some(sigma),
    })
}

/// Largest singular value and a maximizing unit vector.
///
/// Starts from the normalized all-ones vector. If that start is (numerically)
/// orthogonal to the dominant subspace the estimate lands below the largest
/// column norm, which is a lower bound on the true value; the iteration is
/// then restarted from the basis vector of that column.
pub fn top_singular(m: &Matrix, tol: f64, max_iter: usize) -> Result<TopSingular> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Usage(
            "spectral norm tolerance must be positive".into(),
        ));
    }
    let n = m.cols();
    if n == 0 || m.rows() == 0 || m.norm_max() == 0.0 {
        return Ok(TopSingular {
            value: 0.0,
            vector: Vector::basis(n.max(1), 0),
            iterations: 0,
        });
    }
    let ones = Vector::from_fn(n, |_| 1.0);
    let first = power_iterate(m, ones, tol, max_iter)?;
    let (best_col, best_norm) = (0..n)
        .map(|j| (j, m.column(j).norm()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    if first.value >= best_norm * (1.0 - 1e-12) {
        return Ok(first);
    }
    let second = power_iterate(m, Vector::basis(n, best_col), tol, max_iter)?;
    Ok(if second.value > first.value {
        second
    } else {
        first
    })
}

pub fn spectral_norm(m: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    top_singular(m, tol, max_iter).map(|t| t.value)
}

/// [`spectral_norm`] with the default tolerance and iteration cap.
pub fn op_norm(m: &Matrix) -> Result<f64> {
    spectral_norm(m, DEFAULT_TOL, DEFAULT_MAX_ITER)
}
