use hypergrad::Vector;
use hypergrad_bench::csv::fmt_f64;
use hypergrad_bench::decay::{DecayRow, TraceMeta};
use hypergrad_bench::svg::{render_svg, AxesConfig, Series};
use hypergrad_bench::{fit_loglog_slope, DecayTrace};
use proptest::prelude::*;

fn trace(rows: Vec<DecayRow>) -> DecayTrace {
    DecayTrace {
        strategy: "p".into(),
        rows,
        meta: TraceMeta {
            seed: 0,
            y: Vector::zeros(1),
            datasets: String::new(),
            filtered_steps: vec![],
            failure: None,
        },
    }
}

proptest! {
    #[test]
    fn float_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn slope_recovers_power_law(p in 0.2f64..3.0, c in 0.1f64..10.0, n in 3usize..12) {
        let rows = (0..n)
            .map(|k| {
                let e = 10f64.powf(-0.5 * k as f64);
                DecayRow { step: k, inner_error: e, hyper_error: c * e.powf(p) }
            })
            .collect();
        let s = fit_loglog_slope(&trace(rows), 0.0).unwrap();
        prop_assert!((s - p).abs() < 1e-9);
    }

    #[test]
    fn svg_is_deterministic_and_well_formed(
        pts in prop::collection::vec((0.0f64..100.0, -1e3f64..1e3), 0..30),
        n in 1usize..4,
    ) {
        let series: Vec<Series> = (0..n)
            .map(|i| Series { label: format!("s{i}<&>"), points: pts.clone() })
            .collect();
        let a = render_svg(&series, &AxesConfig::decay());
        prop_assert_eq!(&a, &render_svg(&series, &AxesConfig::decay()));
        prop_assert_eq!(a.matches("<polyline").count(), n);
        prop_assert!(!a.contains("NaN") && !a.contains("inf"));
        prop_assert!(a.trim_end().ends_with("</svg>"));
    }
}
