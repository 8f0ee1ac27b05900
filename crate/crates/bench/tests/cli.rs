use std::path::PathBuf;

use hypergrad::estimators::Strategy;
use hypergrad_bench::cli::run_cli;
use hypergrad_bench::csv::parse_decay_csv;
use hypergrad_bench::sweep::median;
use hypergrad_bench::{
    fit_loglog_slope, run_decay, run_efficiency_sweep, OuterKind, ProblemKind, RunConfig,
};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (vec![], vec![]);
    let code = run_cli(
        std::iter::once("hypergrad").chain(args.iter().copied()),
        &mut o,
        &mut e,
    );
    (
        code,
        String::from_utf8(o).unwrap(),
        String::from_utf8(e).unwrap(),
    )
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn decay_smoke_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let (code, _, err) = run(&[
        "decay",
        "--problem",
        "scalar",
        "--strategies",
        "vanilla,newton",
        "--steps",
        "30",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(body(&text).len(), 1 + 2 * 31);
    assert!(text.contains("# rng="));
}

#[test]
fn bogus_strategy_exits_with_usage() {
    let (code, _, err) = run(&["decay", "--strategies", "bogus"]);
    assert_eq!(code, 1);
    assert!(err.to_lowercase().contains("usage"));
}

#[test]
fn efficiency_row_count_is_trials_times_strategies() {
    let (code, out, err) = run(&[
        "efficiency",
        "--problem",
        "ridge",
        "--train",
        &data("mpg"),
        "--outer",
        "affine",
        "--strategies",
        "newton,opt",
        "--trials",
        "10",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = body(&out);
    assert_eq!(rows[0], "strategy,trial,seed,cy");
    assert_eq!(rows.len(), 21);
}

#[test]
fn malformed_data_exits_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad");
    std::fs::write(&bad, "1 2:x\n").unwrap();
    assert_eq!(run(&["efficiency", "--train", bad.to_str().unwrap()]).0, 2);
    std::fs::write(&bad, "").unwrap();
    assert_eq!(run(&["decay", "--train", bad.to_str().unwrap()]).0, 2);
}

#[test]
fn slope_subcommand_reads_decay_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let (code, _, err) = run(&[
        "decay",
        "--problem",
        "logistic",
        "--strategies",
        "vanilla,newton",
        "--steps",
        "2000",
        "--y-low",
        "3",
        "--y-high",
        "6",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, out, err) = run(&["slope", "--input", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "strategy,slope");
    let slope = |i: usize| lines[i].split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!((0.8..=1.2).contains(&slope(1)), "{out}");
    assert!(slope(2) >= 1.8, "{out}");
}

#[test]
fn slope_without_enough_rows_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    run(&[
        "decay",
        "--problem",
        "scalar",
        "--strategies",
        "newton",
        "--steps",
        "5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let (code, out, _) = run(&["slope", "--input", csv.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(out.contains("newton,NA"));
}

#[test]
fn compare_and_ode1d_run() {
    let (code, out, err) = run(&["compare", "--problem", "scalar", "--trials", "2"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("inequalities hold"));
    assert!(
        body(&out).iter().skip(1).all(|l| l.ends_with(",true")),
        "{out}"
    );
    let (code, out, _) = run(&["ode1d", "--alpha", "0.5", "--beta", "2", "--trials", "3"]);
    assert_eq!(code, 0);
    assert_eq!(body(&out).len(), 1 + 2 * 3);
}

#[test]
fn csv_values_round_trip_bit_exactly() {
    let config = RunConfig {
        problem: ProblemKind::Ridge,
        steps: 40,
        ..RunConfig::default()
    };
    let traces = run_decay(&config).unwrap();
    let mut buf = vec![];
    hypergrad_bench::csv::emit_decay_csv(&traces, &[], &mut buf).unwrap();
    let parsed = parse_decay_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(parsed.len(), traces.len());
    for (t, (id, rows)) in traces.iter().zip(&parsed) {
        assert_eq!(&t.strategy, id);
        assert_eq!(&t.rows, rows);
    }
}

#[test]
fn logistic_newton_decays_quadratically() {
    let config = RunConfig {
        problem: ProblemKind::Logistic,
        strategies: vec![Strategy::Newton],
        steps: 2000,
        y_low: 3.0,
        y_high: 6.0,
        ..RunConfig::default()
    };
    let t = run_decay(&config).unwrap();
    assert!(fit_loglog_slope(&t[0], 1e-12).unwrap() >= 1.8);
}

#[test]
fn efficiency_examples() {
    let affine = RunConfig {
        outer: OuterKind::Affine,
        strategies: vec![Strategy::Vanilla, Strategy::Newton, Strategy::Opt],
        trials: 10,
        seed: 7,
        ..RunConfig::default()
    };
    let s = run_efficiency_sweep(&affine).unwrap();
    let v = s.c_y_of("vanilla");
    for id in ["newton", "opt"] {
        for (c, base) in s.c_y_of(id).iter().zip(&v) {
            assert!(*c <= 1e-6 * base, "{id}: {c} vs {base}");
        }
    }

    let quad = RunConfig {
        strategies: vec![Strategy::Newton, Strategy::Opt],
        ..affine.clone()
    };
    let quad = RunConfig {
        outer: OuterKind::Quadratic,
        ..quad
    };
    let s = run_efficiency_sweep(&quad).unwrap();
    for (n, o) in s.c_y_of("newton").iter().zip(s.c_y_of("opt")) {
        assert!(*n <= 1e-6 * o);
    }

    let logistic = RunConfig {
        problem: ProblemKind::Logistic,
        strategies: vec![Strategy::Vanilla, Strategy::Diag],
        trials: 10,
        y_low: 3.0,
        y_high: 6.0,
        ..RunConfig::default()
    };
    let s = run_efficiency_sweep(&logistic).unwrap();
    assert!(median(&s.c_y_of("diag")).unwrap() < median(&s.c_y_of("vanilla")).unwrap());
}

#[test]
fn exp_filtering_is_recorded_in_metadata() {
    let (code, out, _) = run(&[
        "decay",
        "--problem",
        "linear1d",
        "--strategies",
        "exp",
        "--steps",
        "3",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("# filtered.exp=0\n"), "{out}");
}
