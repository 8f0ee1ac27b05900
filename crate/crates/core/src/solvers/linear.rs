//! LU factorization with partial pivoting.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Pivots smaller than this fraction of the largest entry are treated as zero.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// `P A = L U` with unit-diagonal `L`, both packed into one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    packed: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::contract(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let threshold = SINGULAR_PIVOT_RATIO * a.norm_max();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::Singular {
                    which: "matrix".into(),
                    pivot,
                    threshold,
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / d;
                lu[(i, k)] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    lu[(i, j)] -= l * lu[(k, j)];
                }
            }
        }
        Ok(Lu { packed: lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `A x = b`.
    pub fn solve_vec(&self, b: &Vector) -> Vector {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        let lu = &self.packed;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= lu[(i, j)] * x[j];
            }
            x[i] = s / lu[(i, i)];
        }
        Vector::from_vec(x)
    }

    /// Solves `Aᵀ x = b` from the same factors.
    pub fn solve_transposed_vec(&self, b: &Vector) -> Vector {
        let n = self.dim();
        debug_assert_eq!(b.len(), n);
        let lu = &self.packed;
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ w = b, then Lᵀ v = w, then x = Pᵀ v.
        let mut w = b.as_slice().to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= lu[(j, i)] * w[j];
            }
            w[i] = s / lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= lu[(j, i)] * w[j];
            }
            w[i] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        Vector::from_vec(x)
    }

    pub fn solve(&self, b: &Matrix) -> Matrix {
        let cols: Vec<Vector> = (0..b.cols())
            .map(|j| self.solve_vec(&b.column(j)))
            .collect();
        Matrix::from_columns(self.dim(), &cols)
    }

    pub fn solve_transposed(&self, b: &Matrix) -> Matrix {
        let cols: Vec<Vector> = (0..b.cols())
            .map(|j| self.solve_transposed_vec(&b.column(j)))
            .collect();
        Matrix::from_columns(self.dim(), &cols)
    }
}

fn check_rhs(a: &Matrix, b_rows: usize) -> Result<()> {
    if !a.is_square() || a.rows() != b_rows {
        return Err(Error::contract(format!(
            "cannot solve {}x{} system with {b_rows} right-hand-side rows",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Solves `A X = B`.
pub fn linear_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_rhs(a, b.rows())?;
    Ok(Lu::factor(a)?.solve(b))
}

/// Solves `Aᵀ X = B` without forming `Aᵀ`.
pub fn linear_solve_transposed(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_rhs(a, b.rows())?;
    Ok(Lu::factor(a)?.solve_transposed(b))
}

pub fn solve_vec(a: &Matrix, b: &Vector) -> Result<Vector> {
    check_rhs(a, b.len())?;
    Ok(Lu::factor(a)?.solve_vec(b))
}

pub fn solve_transposed_vec(a: &Matrix, b: &Vector) -> Result<Vector> {
    check_rhs(a, b.len())?;
    Ok(Lu::factor(a)?.solve_transposed_vec(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let b = m(&[&[1.0, -2.0], &[3.5, 4.0], &[0.0, 7.0]]);
        assert_eq!(linear_solve(&Matrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn diagonal_system() {
        let a = m(&[&[3.0, 0.0], &[0.0, 4.0]]);
        let x = linear_solve(&a, &m(&[&[3.0], &[8.0]])).unwrap();
        assert_eq!(x, m(&[&[1.0], &[2.0]]));
    }

    #[test]
    fn rank_deficient_is_singular() {
        let a = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let err = linear_solve(&a, &Matrix::identity(2)).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = m(&[&[0.0, 2.0], &[1.0, 1.0]]);
        let x = solve_vec(&a, &Vector::new(vec![4.0, 3.0]).unwrap()).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn transposed_solve_matches_explicit_transpose() {
        let a = m(&[&[2.0, 1.0, 0.0], &[-1.0, 3.0, 2.0], &[0.5, 0.0, 4.0]]);
        let b = m(&[&[1.0], &[2.0], &[3.0]]);
        let direct = linear_solve(&a.transpose(), &b).unwrap();
        let via_t = linear_solve_transposed(&a, &b).unwrap();
        assert!((&direct - &via_t).norm_max() < 1e-14);
    }

    #[test]
    fn non_square_is_contract_error() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(
            linear_solve(&a, &Matrix::zeros(2, 1)),
            Err(Error::Contract(_))
        ));
    }
}
