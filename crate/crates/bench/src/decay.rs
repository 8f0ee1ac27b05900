//! Hypergradient error along a shared gradient-descent trajectory.

use hypergrad::estimators::{vanilla_ift, Strategy};
use hypergrad::rng::sample_y;
use hypergrad::solvers::{gradient_descent, StepRule};
use hypergrad::{BilevelProblem, Error, Vector};

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub step: usize,
    /// `‖x_k − x*‖`
    pub inner_error: f64,
    /// `‖E(x_k, y) − ∇h(y)‖`
    pub hyper_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub seed: u64,
    pub y: Vector,
    pub datasets: String,
    /// Steps skipped because the estimator is undefined there.
    pub filtered_steps: Vec<usize>,
    /// Set when a numerical failure stopped this strategy early.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTrace {
    pub strategy: String,
    pub rows: Vec<DecayRow>,
    pub meta: TraceMeta,
}

/// Runs all configured strategies against one trajectory started at zero.
pub fn run_decay(config: &RunConfig) -> Result<Vec<DecayTrace>> {
    let loaded = config.load_problem()?;
    decay_on(&loaded.problem, config, &loaded.datasets)
}

/// [`run_decay`] on an already built problem.
pub fn decay_on(
    problem: &BilevelProblem,
    config: &RunConfig,
    datasets: &str,
) -> Result<Vec<DecayTrace>> {
    config.validate()?;
    let seed = config.trial_seed(0);
    let y = sample_y(problem.dy(), config.y_low, config.y_high, seed)?;
    let x_star = problem.exact_root(&y)?;
    let truth = vanilla_ift(problem, &x_star, &y)?;
    let traj = gradient_descent(
        problem,
        &y,
        &Vector::zeros(problem.dx()),
        config.steps,
        StepRule::InverseLipschitz,
    )?;
    let inner: Vec<f64> = traj.iterates.iter().map(|x| (x - &x_star).norm()).collect();

    let traces = config
        .strategies
        .iter()
        .map(|&strategy| {
            let est = strategy.build(problem);
            let mut meta = TraceMeta {
                seed,
                y: y.clone(),
                datasets: datasets.to_string(),
                filtered_steps: vec![],
                failure: None,
            };
            let mut rows = Vec::with_capacity(traj.iterates.len());
            for (k, x) in traj.iterates.iter().enumerate() {
                match est.evaluate(x, &y) {
                    Ok(e) => rows.push(DecayRow {
                        step: k,
                        inner_error: inner[k],
                        hyper_error: (&e - &truth).norm(),
                    }),
                    Err(Error::Domain(_)) if strategy == Strategy::Exp => {
                        meta.filtered_steps.push(k)
                    }
                    Err(e) => {
                        meta.failure = Some(format!("step {k}: {e}"));
                        break;
                    }
                }
            }
            DecayTrace {
                strategy: strategy.id().to_string(),
                rows,
                meta,
            }
        })
        .collect();
    Ok(traces)
}
