use hypergrad::Error;

use crate::decay::DecayTrace;

pub const DEFAULT_FLOOR: f64 = 1e-12;

/// Least-squares slope of `log hyper_error` against `log inner_error` over
/// rows whose hypergradient error exceeds `floor`.
pub fn fit_loglog_slope(trace: &DecayTrace, floor: f64) -> Result<f64, Error> {
    let pts: Vec<(f64, f64)> = trace
        .rows
        .iter()
        .filter(|r| r.hyper_error > floor && r.inner_error > 0.0)
        .filter(|r| r.hyper_error.is_finite() && r.inner_error.is_finite())
        .map(|r| (r.inner_error.ln(), r.hyper_error.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{}: {} rows above floor {floor:e}, need 3",
            trace.strategy,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(format!(
            "{}: inner error is constant over the retained rows",
            trace.strategy
        )));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::{DecayRow, TraceMeta};
    use hypergrad::Vector;

    fn trace(f: impl Fn(f64) -> f64) -> DecayTrace {
        DecayTrace {
            strategy: "t".into(),
            rows: (1..=6)
                .map(|k| {
                    let e = 10f64.powi(-k);
                    DecayRow {
                        step: k as usize,
                        inner_error: e,
                        hyper_error: f(e),
                    }
                })
                .collect(),
            meta: TraceMeta {
                seed: 0,
                y: Vector::zeros(1),
                datasets: String::new(),
                filtered_steps: vec![],
                failure: None,
            },
        }
    }

    #[test]
    fn identity_has_slope_one() {
        assert!((fit_loglog_slope(&trace(|e| e), DEFAULT_FLOOR).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_has_slope_two() {
        assert!((fit_loglog_slope(&trace(|e| e * e), 0.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn floor_drops_rows() {
        // Only e² ∈ {1e-2, 1e-4} stay above the floor.
        assert!(matches!(
            fit_loglog_slope(&trace(|e| e * e), 1e-5),
            Err(Error::InsufficientData(_))
        ));
    }
}
