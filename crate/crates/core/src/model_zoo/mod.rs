//! Concrete bilevel problems: ridge and logistic hyperparameter tuning,
//! two scalar fixtures, and LIBSVM loading.

mod dataset;
mod fixtures;
mod logistic;
mod outer;
mod ridge;

pub use dataset::{load_libsvm, parse_libsvm, parse_libsvm_with_dims, serialize_libsvm, Dataset};
pub use fixtures::{linear_1d, scalar_ridge};
pub use logistic::{sigmoid, sigmoid_prime, sigmoid_second, softplus};
pub use ridge::least_squares;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problem::{BilevelProblem, OuterOracle};

use outer::{AffineOuter, LogisticLossOuter, SquaredLossOuter};

/// Loss used by the ridge data term, `(z − b)²`.
pub const RIDGE_LOSS_SCALE: f64 = 2.0;

/// Which outer objective to pair with an inner problem.
#[derive(Debug, Clone, PartialEq)]
pub enum OuterVariant {
    /// The problem's own loss on the validation set.
    Quadratic,
    /// `aᵀx`; `None` means the all-ones vector.
    Affine(Option<Vector>),
}

impl OuterVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            OuterVariant::Quadratic => "quadratic",
            OuterVariant::Affine(_) => "affine",
        }
    }
}

fn affine_outer(a: &Option<Vector>, dx: usize) -> Result<Box<dyn OuterOracle>> {
    let a = a.clone().unwrap_or_else(|| Vector::from_fn(dx, |_| 1.0));
    if a.len() != dx {
        return Err(Error::contract(format!(
            "affine coefficient has length {}, expected {dx}",
            a.len()
        )));
    }
    Ok(Box::new(AffineOuter::new(a)))
}

fn check_dims(train: &Dataset, val: &Dataset) -> Result<()> {
    if train.dx() != val.dx() {
        return Err(Error::contract(format!(
            "train has {} features, validation has {}",
            train.dx(),
            val.dx()
        )));
    }
    Ok(())
}

/// Ridge problem with the `(z − b)²` loss.
pub fn make_ridge(train: &Dataset, val: &Dataset, outer: &OuterVariant) -> Result<BilevelProblem> {
    make_ridge_scaled(train, val, outer, RIDGE_LOSS_SCALE)
}

/// Ridge problem with loss `(s/2)(z − b)²` on both levels.
pub fn make_ridge_scaled(
    train: &Dataset,
    val: &Dataset,
    outer: &OuterVariant,
    loss_scale: f64,
) -> Result<BilevelProblem> {
    check_dims(train, val)?;
    if !(loss_scale.is_finite() && loss_scale > 0.0) {
        return Err(Error::Usage(format!(
            "loss scale must be positive, got {loss_scale}"
        )));
    }
    let dx = train.dx();
    let inner = ridge::RidgeInner::new(train.features(), train.labels(), loss_scale);
    let outer: Box<dyn OuterOracle> = match outer {
        OuterVariant::Quadratic => Box::new(SquaredLossOuter::new(
            val.features().clone(),
            val.labels().clone(),
            loss_scale,
        )),
        OuterVariant::Affine(a) => affine_outer(a, dx)?,
    };
    BilevelProblem::new("ridge", Box::new(inner), outer, dx, dx)
}

/// Logistic regression problem; training labels must be `±1`.
pub fn make_logistic(
    train: &Dataset,
    val: &Dataset,
    outer: &OuterVariant,
) -> Result<BilevelProblem> {
    check_dims(train, val)?;
    if !train.is_binary() {
        return Err(Error::Data(
            "logistic training labels must be -1 or +1".into(),
        ));
    }
    let dx = train.dx();
    let inner = logistic::LogisticInner::new(train.features().clone(), train.labels().clone());
    let outer: Box<dyn OuterOracle> = match outer {
        OuterVariant::Quadratic => {
            if !val.is_binary() {
                return Err(Error::Data(
                    "logistic validation labels must be -1 or +1".into(),
                ));
            }
            Box::new(LogisticLossOuter::new(
                val.features().clone(),
                val.labels().clone(),
            ))
        }
        OuterVariant::Affine(a) => affine_outer(a, dx)?,
    };
    BilevelProblem::new("logistic", Box::new(inner), outer, dx, dx)
}
