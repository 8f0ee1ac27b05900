//! Efficiency constants over seeded draws of `y`.

use hypergrad::efficiency::{estimator_jacobian_fd, EfficiencyReport, Method, NORM_MAX_ITER};
use hypergrad::rng::sample_y;
use hypergrad::solvers::{spectral_norm, DEFAULT_TOL};
use hypergrad::BilevelProblem;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub report: EfficiencyReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub strategy: String,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sweep {
    /// Ordered by trial, then by configured strategy order.
    pub reports: Vec<TrialReport>,
    pub failures: Vec<TrialFailure>,
}

impl Sweep {
    pub fn c_y_of(&self, strategy: &str) -> Vec<f64> {
        self.reports
            .iter()
            .filter(|r| r.report.strategy == strategy)
            .map(|r| r.report.c_y)
            .collect()
    }
}

pub fn run_efficiency_sweep(config: &RunConfig) -> Result<Sweep> {
    let loaded = config.load_problem()?;
    sweep_on(&loaded.problem, config)
}

/// [`run_efficiency_sweep`] on an already built problem. Trials run in
/// parallel; results are merged in trial order.
pub fn sweep_on(problem: &BilevelProblem, config: &RunConfig) -> Result<Sweep> {
    config.validate()?;
    let per_trial: Vec<Result<(Vec<TrialReport>, Vec<TrialFailure>)>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = config.trial_seed(trial);
            let y = sample_y(problem.dy(), config.y_low, config.y_high, seed)?;
            let mut reports = vec![];
            let mut failures = vec![];
            for &s in &config.strategies {
                let est = s.build(problem);
                let outcome = estimator_jacobian_fd(est.as_ref(), problem, &y, config.eps)
                    .and_then(|j| Ok((spectral_norm(&j, DEFAULT_TOL, NORM_MAX_ITER)?, j)));
                match outcome {
                    Ok((c_y, jacobian)) => reports.push(TrialReport {
                        trial,
                        seed,
                        report: EfficiencyReport {
                            strategy: s.id().to_string(),
                            y: y.clone(),
                            c_y,
                            jacobian,
                            method: Method::Fd,
                        },
                    }),
                    Err(e) => failures.push(TrialFailure {
                        strategy: s.id().to_string(),
                        trial,
                        message: e.to_string(),
                    }),
                }
            }
            Ok((reports, failures))
        })
        .collect();
    let mut sweep = Sweep::default();
    for r in per_trial {
        let (reports, failures) = r?;
        sweep.reports.extend(reports);
        sweep.failures.extend(failures);
    }
    Ok(sweep)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemKind;
    use hypergrad::estimators::Strategy;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn rows_follow_trial_then_strategy_order() {
        let c = RunConfig {
            problem: ProblemKind::Linear1d,
            strategies: vec![Strategy::Newton, Strategy::Vanilla],
            trials: 4,
            seed: 3,
            ..RunConfig::default()
        };
        let s = run_efficiency_sweep(&c).unwrap();
        let order: Vec<(usize, &str)> = s
            .reports
            .iter()
            .map(|r| (r.trial, r.report.strategy.as_str()))
            .collect();
        assert_eq!(order[0], (0, "newton"));
        assert_eq!(order[1], (0, "vanilla"));
        assert_eq!(order[7], (3, "vanilla"));
        assert_eq!(s.reports[2].seed, 4);
    }

    #[test]
    fn deterministic_under_seed() {
        let c = RunConfig {
            strategies: vec![Strategy::Vanilla, Strategy::Diag],
            trials: 3,
            seed: 11,
            ..RunConfig::default()
        };
        assert_eq!(
            run_efficiency_sweep(&c).unwrap(),
            run_efficiency_sweep(&c).unwrap()
        );
    }
}
