//! Run configuration and problem construction.

use std::path::{Path, PathBuf};

use hypergrad::estimators::Strategy;
use hypergrad::model_zoo::{
    linear_1d, load_libsvm, make_logistic, make_ridge, scalar_ridge, Dataset, OuterVariant,
};
use hypergrad::BilevelProblem;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Ridge,
    Logistic,
    Scalar,
    Linear1d,
}

impl ProblemKind {
    pub fn id(self) -> &'static str {
        match self {
            ProblemKind::Ridge => "ridge",
            ProblemKind::Logistic => "logistic",
            ProblemKind::Scalar => "scalar",
            ProblemKind::Linear1d => "linear1d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterKind {
    Quadratic,
    Affine,
}

/// Seed of the synthetic validation set used when ridge runs without `--val`.
pub const RIDGE_VAL_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub train: Option<PathBuf>,
    pub val: Option<PathBuf>,
    /// Feature count override for LIBSVM files.
    pub dims: Option<usize>,
    pub outer: OuterKind,
    pub strategies: Vec<Strategy>,
    pub steps: usize,
    pub y_low: f64,
    pub y_high: f64,
    pub trials: usize,
    pub seed: u64,
    /// Finite-difference step for estimator Jacobians.
    pub eps: Option<f64>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemKind::Ridge,
            train: None,
            val: None,
            dims: None,
            outer: OuterKind::Quadratic,
            strategies: Strategy::ALL.to_vec(),
            steps: 200,
            y_low: -1.0,
            y_high: 1.0,
            trials: 1,
            seed: 0,
            eps: None,
            out: None,
            svg: None,
        }
    }
}

/// A built problem together with a description of where its data came from.
pub struct LoadedProblem {
    pub problem: BilevelProblem,
    pub datasets: String,
}

fn default_data(name: &str) -> PathBuf {
    let local = Path::new("data").join(name);
    if local.exists() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn display_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(BenchError::Usage("trials must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(BenchError::Usage(
                "at least one strategy is required".into(),
            ));
        }
        if !(self.y_low.is_finite() && self.y_high.is_finite() && self.y_low < self.y_high) {
            return Err(BenchError::Usage(format!(
                "invalid y range [{}, {})",
                self.y_low, self.y_high
            )));
        }
        if let Some(e) = self.eps {
            if !(e.is_finite() && e > 0.0) {
                return Err(BenchError::Usage(format!("eps must be positive, got {e}")));
            }
        }
        if self.dims == Some(0) {
            return Err(BenchError::Usage("dims must be positive".into()));
        }
        Ok(())
    }

    fn outer_variant(&self) -> OuterVariant {
        match self.outer {
            OuterKind::Quadratic => OuterVariant::Quadratic,
            OuterKind::Affine => OuterVariant::Affine(None),
        }
    }

    pub fn load_problem(&self) -> Result<LoadedProblem> {
        self.validate()?;
        let fixture_outer = |name: &str| -> Result<()> {
            if self.outer == OuterKind::Affine {
                return Err(BenchError::Usage(format!(
                    "the {name} fixture has a fixed outer objective"
                )));
            }
            Ok(())
        };
        match self.problem {
            ProblemKind::Scalar => {
                fixture_outer("scalar")?;
                Ok(LoadedProblem {
                    problem: scalar_ridge(),
                    datasets: "fixture".into(),
                })
            }
            ProblemKind::Linear1d => {
                fixture_outer("linear1d")?;
                Ok(LoadedProblem {
                    problem: linear_1d(),
                    datasets: "fixture".into(),
                })
            }
            ProblemKind::Ridge => {
                let train_path = self
                    .train
                    .clone()
                    .unwrap_or_else(|| default_data("mpg_scale"));
                let train = load_libsvm(&train_path, self.dims)?;
                let (val, val_id) = match &self.val {
                    Some(p) => (load_libsvm(p, Some(train.dx()))?, display_name(p)),
                    None => (
                        Dataset::random_normal(train.n(), train.dx(), RIDGE_VAL_SEED)?,
                        format!("normal(seed={RIDGE_VAL_SEED})"),
                    ),
                };
                Ok(LoadedProblem {
                    problem: make_ridge(&train, &val, &self.outer_variant())?,
                    datasets: format!("{};{}", display_name(&train_path), val_id),
                })
            }
            ProblemKind::Logistic => {
                let train_path = self
                    .train
                    .clone()
                    .unwrap_or_else(|| default_data("pima.scale.tr"));
                let val_path = self
                    .val
                    .clone()
                    .unwrap_or_else(|| default_data("pima.scale.te"));
                let train = load_libsvm(&train_path, self.dims)?;
                let val = load_libsvm(&val_path, Some(train.dx()))?;
                Ok(LoadedProblem {
                    problem: make_logistic(&train, &val, &self.outer_variant())?,
                    datasets: format!("{};{}", display_name(&train_path), display_name(&val_path)),
                })
            }
        }
    }

    /// Seed of trial `t`; trial 0 uses the configured seed itself.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}
