mod common;

use common::*;
use hypergrad::estimators::psi;
use hypergrad::fd::{validate_oracles, FdInner};
use hypergrad::model_zoo::*;
use hypergrad::problem::OuterOracle;
use hypergrad::solvers::*;
use hypergrad::{BilevelProblem, Error, InnerOracle, Matrix, Vector};

/// `F(x, y) = x − y` with `g = x`.
struct Difference;

impl InnerOracle for Difference {
    fn residual(&self, x: &Vector, y: &Vector) -> Vector {
        x - y
    }
    fn jac_x(&self, x: &Vector, _y: &Vector) -> Matrix {
        Matrix::identity(x.len())
    }
    fn jac_y(&self, x: &Vector, _y: &Vector) -> Matrix {
        Matrix::identity(x.len()).scale(-1.0)
    }
    fn djac_x_dir_x(&self, x: &Vector, _y: &Vector, _u: &Vector) -> Matrix {
        Matrix::zeros(x.len(), x.len())
    }
    fn djac_x_dir_y(&self, x: &Vector, _y: &Vector, _e: &Vector) -> Matrix {
        Matrix::zeros(x.len(), x.len())
    }
    fn exact_root(&self, y: &Vector) -> Option<hypergrad::Result<Vector>> {
        Some(Ok(y.clone()))
    }
}

struct SumOuter;

impl OuterOracle for SumOuter {
    fn value(&self, x: &Vector, _y: &Vector) -> f64 {
        x.iter().sum()
    }
    fn grad_x(&self, x: &Vector, _y: &Vector) -> Vector {
        Vector::from_fn(x.len(), |_| 1.0)
    }
    fn grad_y(&self, _x: &Vector, y: &Vector) -> Vector {
        Vector::zeros(y.len())
    }
    fn hess_xx(&self, x: &Vector, _y: &Vector) -> Matrix {
        Matrix::zeros(x.len(), x.len())
    }
    fn jac_grad_y_x(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(y.len(), x.len())
    }
    fn jac_grad_x_y(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(x.len(), y.len())
    }
}

/// Returns a Jacobian one column too wide.
struct WrongShape;

impl InnerOracle for WrongShape {
    fn residual(&self, x: &Vector, _y: &Vector) -> Vector {
        x.clone()
    }
    fn jac_x(&self, x: &Vector, _y: &Vector) -> Matrix {
        Matrix::zeros(x.len(), x.len() + 1)
    }
    fn jac_y(&self, x: &Vector, y: &Vector) -> Matrix {
        Matrix::zeros(x.len(), y.len())
    }
    fn djac_x_dir_x(&self, x: &Vector, _y: &Vector, _u: &Vector) -> Matrix {
        Matrix::zeros(x.len(), x.len())
    }
    fn djac_x_dir_y(&self, x: &Vector, _y: &Vector, _e: &Vector) -> Matrix {
        Matrix::zeros(x.len(), x.len())
    }
}

fn difference(d: usize) -> BilevelProblem {
    BilevelProblem::new("difference", Box::new(Difference), Box::new(SumOuter), d, d).unwrap()
}

#[test]
fn affine_map_oracles_match_fd_exactly() {
    let p = difference(3);
    let r = validate_oracles(&p, &v(&[0.3, -1.0, 2.0]), &v(&[1.0, 0.5, -0.2]), 1e-5).unwrap();
    assert!(r.max() < 1e-10, "{r:?}");
}

#[test]
fn scalar_ridge_oracles_match_fd() {
    let r = validate_oracles(&scalar_ridge(), &v(&[0.3]), &v(&[0.0]), 1e-5).unwrap();
    assert!(r.max() <= 1e-8, "{r:?}");
}

#[test]
fn wrong_shape_oracle_is_contract_violation() {
    let p = BilevelProblem::new("bad", Box::new(WrongShape), Box::new(SumOuter), 2, 2).unwrap();
    let err = validate_oracles(&p, &v(&[1.0, 2.0]), &v(&[0.0, 0.0]), 1e-5).unwrap_err();
    assert!(matches!(err, Error::Contract(_)), "{err}");
    assert!(matches!(
        p.jac_x(&v(&[1.0]), &v(&[0.0, 0.0])),
        Err(Error::Contract(_))
    ));
}

#[test]
fn shipped_problems_pass_oracle_validation_at_random_points() {
    let problems = [
        scalar_ridge(),
        linear_1d(),
        mpg_ridge(OuterVariant::Quadratic),
        mpg_ridge(OuterVariant::Affine(None)),
        pima_logistic(),
    ];
    for p in &problems {
        for seed in 0..20 {
            let y = y_draw(p.dy(), -1.0, 1.0, seed);
            let x = y_draw(p.dx(), -1.0, 1.0, 1000 + seed);
            let r = validate_oracles(p, &x, &y, 1e-5).unwrap();
            assert!(r.max() <= 1e-6, "{} seed {seed}: {r:?}", p.name());
        }
    }
}

#[test]
fn fd_backed_inner_matches_analytic_ridge() {
    let exact = mpg_ridge(OuterVariant::Quadratic);
    let train = load_libsvm(&data_path("mpg_scale"), None).unwrap();
    let (a, b) = (train.features().clone(), train.labels().clone());
    let fd = FdInner::new(7, move |x: &Vector, y: &Vector| {
        let r = &a.matvec(x) - &b;
        &a.tr_matvec(&r).scale(2.0) + &y.map(f64::exp).hadamard(x)
    });
    let x = y_draw(7, -1.0, 1.0, 5);
    let y = y_draw(7, -1.0, 1.0, 6);
    let j = fd.jac_x(&x, &y);
    assert!(rel_diff(&j, &exact.jac_x(&x, &y).unwrap()) < 1e-6);
    let jy = fd.jac_y(&x, &y);
    assert!(rel_diff(&jy, &exact.jac_y(&x, &y).unwrap()) < 1e-6);
    let e = Vector::basis(7, 2);
    let g = fd.djac_x_dir_y(&x, &y, &e);
    assert!(rel_diff(&g, &exact.djac_x_dir_y(&x, &y, &e).unwrap()) < 1e-4);
}

#[test]
fn ridge_root_residual_is_at_roundoff() {
    let p = mpg_ridge(OuterVariant::Quadratic);
    for seed in 0..20 {
        let y = y_draw(7, -1.0, 1.0, seed);
        let x = p.exact_root(&y).unwrap();
        let r = p.residual(&x, &y).unwrap().norm();
        assert!(r <= 1e-12 * (1.0 + x.norm()), "seed {seed}: {r:e}");
    }
}

#[test]
fn half_scaled_unit_ridge_is_the_scalar_fixture() {
    let one = Dataset::new(Matrix::identity(1), v(&[1.0])).unwrap();
    let p = make_ridge_scaled(&one, &one, &OuterVariant::Quadratic, 1.0).unwrap();
    assert!((p.exact_root(&v(&[0.0])).unwrap()[0] - 0.5).abs() < 1e-15);
}

#[test]
fn ridge_tends_to_least_squares_for_tiny_penalty() {
    let train = load_libsvm(&data_path("mpg_scale"), None).unwrap();
    let p = mpg_ridge(OuterVariant::Quadratic);
    let x = p.exact_root(&Vector::from_fn(7, |_| -30.0)).unwrap();
    let ls = least_squares(train.features(), train.labels()).unwrap();
    assert!((&x - &ls).norm() / ls.norm() <= 1e-8);
}

#[test]
fn ridge_has_zero_second_x_derivative() {
    let p = mpg_ridge(OuterVariant::Quadratic);
    let (x, y, u) = (
        y_draw(7, -2.0, 2.0, 1),
        y_draw(7, -1.0, 1.0, 2),
        y_draw(7, -1.0, 1.0, 3),
    );
    assert_eq!(p.djac_x_dir_x(&x, &y, &u).unwrap(), Matrix::zeros(7, 7));
}

#[test]
fn ridge_jacobian_is_positive_definite() {
    let p = mpg_ridge(OuterVariant::Quadratic);
    for seed in 0..10 {
        let y = y_draw(7, -3.0, 3.0, seed);
        let f1 = p.jac_x(&Vector::zeros(7), &y).unwrap();
        // Cholesky by hand: every pivot of an SPD matrix stays above min e^{y_i}.
        let n = 7;
        let mut l = Matrix::zeros(n, n);
        let floor = y.iter().map(|v| v.exp()).fold(f64::INFINITY, f64::min);
        for j in 0..n {
            let mut d = f1[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            assert!(d >= floor * (1.0 - 1e-9), "pivot {d} below {floor}");
            l[(j, j)] = d.sqrt();
            for i in j + 1..n {
                let mut s = f1[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
}

#[test]
fn ridge_dimension_mismatch_is_contract_error() {
    let a = Dataset::new(Matrix::identity(2), v(&[1.0, 2.0])).unwrap();
    let b = Dataset::new(Matrix::identity(3), v(&[1.0, 2.0, 3.0])).unwrap();
    assert!(matches!(
        make_ridge(&a, &b, &OuterVariant::Quadratic),
        Err(Error::Contract(_))
    ));
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(lo) < 0.0) == (f(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn single_sample_logistic_root_matches_bisection() {
    let one = Dataset::new(Matrix::identity(1), v(&[1.0])).unwrap();
    let p = make_logistic(&one, &one, &OuterVariant::Quadratic).unwrap();
    let x = p.exact_root(&v(&[0.0])).unwrap()[0];
    let b = bisect(|t| t - sigmoid(-t), 0.0, 1.0);
    assert!((x - b).abs() <= 1e-12);
}

#[test]
fn logistic_residual_at_zero_is_half_correlation() {
    let p = pima_logistic();
    let train = load_libsvm(&data_path("pima.scale.tr"), None).unwrap();
    let f = p
        .residual(&Vector::zeros(7), &y_draw(7, -1.0, 1.0, 0))
        .unwrap();
    let expect = train.features().tr_matvec(train.labels()).scale(-0.5);
    assert!((&f - &expect).norm_inf() < 1e-13);
}

#[test]
fn logistic_residual_is_gradient_of_objective() {
    let train = load_libsvm(&data_path("pima.scale.tr"), None).unwrap();
    let p = pima_logistic();
    let f = |x: &Vector, y: &Vector| {
        let m = train.features().matvec(x).hadamard(train.labels());
        m.iter().map(|&t| softplus(-t)).sum::<f64>() + 0.5 * y.map(f64::exp).dot(&x.hadamard(x))
    };
    for seed in 0..5 {
        let x = y_draw(7, -1.0, 1.0, seed);
        let y = y_draw(7, -1.0, 1.0, 50 + seed);
        let g = p.residual(&x, &y).unwrap();
        let h = 1e-6;
        for j in 0..7 {
            let mut xp = x.clone();
            xp[j] += h;
            let mut xm = x.clone();
            xm[j] -= h;
            let fd = (f(&xp, &y) - f(&xm, &y)) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()));
        }
    }
}

#[test]
fn logistic_survives_extreme_logits() {
    let one = Dataset::new(Matrix::identity(1), v(&[1.0])).unwrap();
    let p = make_logistic(&one, &one, &OuterVariant::Quadratic).unwrap();
    let x = v(&[800.0]);
    let y = v(&[0.0]);
    assert!(p.residual(&x, &y).unwrap().is_finite());
    assert_eq!(p.jac_x(&x, &y).unwrap()[(0, 0)], 1.0);
    assert!(p.outer_value(&v(&[-800.0]), &y).unwrap().is_finite());
}

#[test]
fn logistic_rejects_non_binary_labels() {
    let a = Dataset::new(Matrix::identity(2), v(&[1.0, 0.0])).unwrap();
    assert!(matches!(
        make_logistic(&a, &a, &OuterVariant::Quadratic),
        Err(Error::Data(_))
    ));
}

#[test]
fn mpg_dimensions() {
    let ds = load_libsvm(&data_path("mpg"), None).unwrap();
    assert_eq!((ds.n(), ds.dx()), (392, 7));
    let ds = load_libsvm(&data_path("mpg_scale"), None).unwrap();
    assert_eq!((ds.n(), ds.dx()), (392, 7));
}

#[test]
fn libsvm_round_trip_on_shipped_data() {
    for name in ["mpg", "mpg_scale", "pima.scale.tr", "pima.scale.te"] {
        let ds = load_libsvm(&data_path(name), None).unwrap();
        let back = parse_libsvm_with_dims(serialize_libsvm(&ds).as_bytes(), Some(ds.dx())).unwrap();
        assert_eq!(back, ds, "{name}");
    }
}

// gradient descent

#[test]
fn one_step_on_linear_fixture() {
    let t = gradient_descent(
        &linear_1d(),
        &v(&[0.0]),
        &v(&[0.0]),
        1,
        StepRule::Constant(0.5),
    )
    .unwrap();
    assert_eq!(t.iterates[1][0], 0.5);
}

#[test]
fn zero_steps_is_just_the_start() {
    let t = gradient_descent(
        &linear_1d(),
        &v(&[0.0]),
        &v(&[3.0]),
        0,
        StepRule::InverseLipschitz,
    )
    .unwrap();
    assert_eq!(t.iterates, vec![v(&[3.0])]);
    assert!(t.step_sizes.is_empty());
}

#[test]
fn scalar_ridge_descent_contracts_monotonically() {
    for x0 in [-5.0, 0.0, 0.5, 2.0, 100.0] {
        let t = gradient_descent(
            &scalar_ridge(),
            &v(&[0.0]),
            &v(&[x0]),
            40,
            StepRule::Constant(0.5),
        )
        .unwrap();
        let errs: Vec<f64> = t.iterates.iter().map(|x| (x[0] - 0.5).abs()).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]));
        assert!(errs.last().unwrap() < &1e-10);
        let t2 = gradient_descent(
            &scalar_ridge(),
            &v(&[0.0]),
            &v(&[x0]),
            3,
            StepRule::InverseLipschitz,
        )
        .unwrap();
        assert_eq!(t2.step_sizes, vec![0.5; 3]);
    }
}

#[test]
fn ridge_descent_never_moves_away_from_root() {
    let p = mpg_ridge(OuterVariant::Quadratic);
    let y = y_draw(7, -1.0, 1.0, 3);
    let xs = p.exact_root(&y).unwrap();
    let x0 = y_draw(7, -5.0, 5.0, 4);
    let t = gradient_descent(&p, &y, &x0, 200, StepRule::InverseLipschitz).unwrap();
    let e0 = (&x0 - &xs).norm();
    assert!(t
        .iterates
        .iter()
        .all(|x| (x - &xs).norm() <= e0 * (1.0 + 1e-12)));
    assert_eq!(t.iterates.len(), 201);
}

#[test]
fn divergent_descent_reports_step() {
    let err = gradient_descent(
        &linear_1d(),
        &v(&[700.0]),
        &v(&[1.0]),
        50,
        StepRule::Constant(1.0),
    )
    .unwrap_err();
    assert!(
        matches!(err, Error::Numerical { step: Some(_), .. }),
        "{err:?}"
    );
}

// ground truth

#[test]
fn fd_hypergradient_on_fixtures() {
    let g = fd_hypergradient(&scalar_ridge(), &v(&[0.0]), 1e-6).unwrap();
    assert!((g[0] + 0.125).abs() <= 1e-9);
    let g = fd_hypergradient(&linear_1d(), &v(&[0.0]), 1e-6).unwrap();
    assert!((g[0] + 1.0).abs() <= 1e-9);
    let j = fd_jac_xstar(&scalar_ridge(), &v(&[0.0]), 1e-6).unwrap();
    assert!((j[(0, 0)] + 0.25).abs() <= 1e-9);
    let j = fd_jac_xstar(&linear_1d(), &v(&[0.0]), 1e-6).unwrap();
    assert!((j[(0, 0)] + 1.0).abs() <= 1e-9);
}

#[test]
fn fd_hypergradient_is_step_robust() {
    let base = fd_hypergradient(&scalar_ridge(), &v(&[0.0]), 1e-5).unwrap()[0];
    for eps in [1e-4, 1e-6] {
        let g = fd_hypergradient(&scalar_ridge(), &v(&[0.0]), eps).unwrap()[0];
        assert!((g - base).abs() <= 1e-6 * base.abs());
    }
}

#[test]
fn affine_ridge_hypergradient_is_a_times_jacobian() {
    let p = mpg_ridge(OuterVariant::Affine(None));
    let y = y_draw(7, -1.0, 1.0, 8);
    let g = fd_hypergradient(&p, &y, default_hypergrad_eps(&y)).unwrap();
    let j = fd_jac_xstar(&p, &y, default_hypergrad_eps(&y)).unwrap();
    let aj = j.tr_matvec(&Vector::from_fn(7, |_| 1.0));
    assert!((&g - &aj).norm_inf() <= 1e-8);
}

#[test]
fn ridge_jacobian_of_root_matches_ift() {
    let p = mpg_ridge(OuterVariant::Quadratic);
    let y = y_draw(7, -1.0, 1.0, 9);
    let xs = p.exact_root(&y).unwrap();
    let j = fd_jac_xstar(&p, &y, default_hypergrad_eps(&y)).unwrap();
    let ift = linear_solve(&p.jac_x(&xs, &y).unwrap(), &p.jac_y(&xs, &y).unwrap())
        .unwrap()
        .scale(-1.0);
    assert!(rel_diff(&j, &ift) <= 1e-6);
    assert!(rel_diff(&psi(&p, &xs, &y).unwrap().transpose(), &j) <= 1e-6);
}

#[test]
fn missing_root_solver_is_capability_error() {
    let fd = FdInner::new(1, |x: &Vector, y: &Vector| x - y);
    let p = BilevelProblem::new("fd", Box::new(fd), Box::new(SumOuter), 1, 1).unwrap();
    assert!(matches!(
        fd_hypergradient(&p, &v(&[0.0]), 1e-6),
        Err(Error::Capability(_))
    ));
}
