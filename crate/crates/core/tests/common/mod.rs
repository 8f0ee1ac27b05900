#![allow(dead_code)]

use std::path::PathBuf;

use hypergrad::model_zoo::{load_libsvm, make_logistic, make_ridge, Dataset, OuterVariant};
use hypergrad::rng::{sample_y, Rng};
use hypergrad::{BilevelProblem, Matrix, Vector};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn v(xs: &[f64]) -> Vector {
    Vector::new(xs.to_vec()).unwrap()
}

pub fn mpg_ridge(outer: OuterVariant) -> BilevelProblem {
    let train = load_libsvm(&data_path("mpg_scale"), None).unwrap();
    let val = Dataset::random_normal(train.n(), train.dx(), 0).unwrap();
    make_ridge(&train, &val, &outer).unwrap()
}

pub fn pima_logistic() -> BilevelProblem {
    let train = load_libsvm(&data_path("pima.scale.tr"), None).unwrap();
    let val = load_libsvm(&data_path("pima.scale.te"), Some(train.dx())).unwrap();
    make_logistic(&train, &val, &OuterVariant::Quadratic).unwrap()
}

/// Small seeded ridge instance for the many-instance theorem checks.
pub fn small_ridge(seed: u64, outer: OuterVariant) -> BilevelProblem {
    let mut rng = Rng::new(seed);
    let (n, d) = (12, 4);
    let train = Dataset::new(rng.normal_matrix(n, d), rng.normal_vector(n)).unwrap();
    let val = Dataset::new(rng.normal_matrix(n, d), rng.normal_vector(n)).unwrap();
    make_ridge(&train, &val, &outer).unwrap()
}

pub fn y_draw(d: usize, low: f64, high: f64, seed: u64) -> Vector {
    sample_y(d, low, high, seed).unwrap()
}

pub fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm_max() / b.norm_max().max(1e-300)
}
