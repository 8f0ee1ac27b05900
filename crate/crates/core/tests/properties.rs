use hypergrad::model_zoo::{parse_libsvm, serialize_libsvm, Dataset};
use hypergrad::solvers::{linear_solve, op_norm, solve_vec};
use hypergrad::{Matrix, Vector};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-10.0f64..10.0, rows * cols).prop_map(move |d| {
        let rows_v: Vec<Vec<f64>> = d.chunks(cols).map(|c| c.to_vec()).collect();
        Matrix::from_rows(&rows_v).unwrap()
    })
}

fn sized_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| matrix(r, c))
}

/// Diagonally dominant, hence well conditioned.
fn well_conditioned() -> impl Strategy<Value = (Matrix, Vector)> {
    (1usize..8).prop_flat_map(|n| {
        (matrix(n, n), prop::collection::vec(-10.0f64..10.0, n)).prop_map(move |(m, b)| {
            let d = Vector::from_fn(n, |i| {
                10.0 * n as f64 + (0..n).map(|j| m[(i, j)].abs()).sum::<f64>()
            });
            (m.add_diag(&d), Vector::new(b).unwrap())
        })
    })
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..6, 1usize..6).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(
                prop_oneof![
                    Just(0.0),
                    -1e6f64..1e6,
                    any::<f64>().prop_filter("finite", |x| x.is_finite())
                ],
                n * d,
            ),
            prop::collection::vec(-1e3f64..1e3, n),
        )
            .prop_map(move |(f, l)| {
                let mut rows: Vec<Vec<f64>> = f.chunks(d).map(|c| c.to_vec()).collect();
                // Keep the last feature present so the width survives parsing.
                rows[0][d - 1] = 1.0;
                Dataset::new(Matrix::from_rows(&rows).unwrap(), Vector::new(l).unwrap()).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn solve_residual_is_small((a, b) in well_conditioned()) {
        let x = solve_vec(&a, &b).unwrap();
        let r = &a.matvec(&x) - &b;
        prop_assert!(r.norm() <= 1e-10 * (1.0 + a.norm_frobenius() * x.norm() + b.norm()));
    }

    #[test]
    fn identity_solve_is_exact(b in sized_matrix()) {
        prop_assert_eq!(linear_solve(&Matrix::identity(b.rows()), &b).unwrap(), b);
    }

    #[test]
    fn spectral_norm_is_bracketed(m in sized_matrix()) {
        let s = op_norm(&m).unwrap();
        let max_col = (0..m.cols()).map(|j| m.column(j).norm()).fold(0.0, f64::max);
        let lower = max_col / (m.cols() as f64).sqrt();
        prop_assert!(s >= lower * (1.0 - 1e-9), "{} < {}", s, lower);
        prop_assert!(s <= m.norm_frobenius() * (1.0 + 1e-9));
        prop_assert!(s >= max_col * (1.0 - 1e-9));
    }

    #[test]
    fn libsvm_round_trip(ds in dataset()) {
        let text = serialize_libsvm(&ds);
        let back = parse_libsvm(text.as_bytes()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_libsvm(&bytes);
    }

    #[test]
    fn parser_never_panics_on_near_valid_text(
        lines in prop::collection::vec("[-+]?[0-9.e]{0,4}( [0-9]{0,3}:[-0-9.e]{0,5}){0,4}", 0..6)
    ) {
        let _ = parse_libsvm(lines.join("\n").as_bytes());
    }
}
