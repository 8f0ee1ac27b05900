//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypergrad::estimators::Strategy;

use crate::checks::{run_compare, run_ode1d, CheckRow, Relation};
use crate::config::{OuterKind, ProblemKind, RunConfig};
use crate::csv::{emit_decay_csv, emit_efficiency_csv, fmt_f64, parse_decay_csv, write_meta};
use crate::decay::{decay_on, DecayTrace, TraceMeta};
use crate::error::{exit, BenchError, Result};
use crate::slope::{fit_loglog_slope, DEFAULT_FLOOR};
use crate::svg::{decay_series, efficiency_series, render_svg, AxesConfig};
use crate::sweep::sweep_on;

#[derive(Debug, Parser)]
#[command(
    name = "hypergrad",
    version,
    about = "Hypergradient estimator experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hypergradient error along a gradient-descent trajectory.
    Decay(Common),
    /// Efficiency constants over seeded draws of y.
    Efficiency(Common),
    /// Check the comparison inequalities with P = c·F_1.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Scale c of the preconditioner P = c·F_1.
        #[arg(long, default_value_t = 2.0)]
        precond_scale: f64,
    },
    /// Residual of the 1-D super-efficiency equation for φ(z) = α·exp(βz).
    Ode1d {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        beta: f64,
    },
    /// Fit log-log decay slopes to a decay CSV.
    Slope {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FLOOR)]
        floor: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemArg {
    Ridge,
    Logistic,
    Scalar,
    Linear1d,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OuterArg {
    Quadratic,
    Affine,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    val: Option<PathBuf>,
    /// Number of features to assume when reading LIBSVM files.
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long, value_enum, default_value = "quadratic")]
    outer: OuterArg,
    /// Comma-separated subset of vanilla,newton,diag,exp,diag-rep,opt.
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
    strategies: Option<Vec<Strategy>>,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    y_low: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    y_high: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Finite-difference step for estimator Jacobians.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse::<Strategy>().map_err(|e| e.to_string())
}

impl Common {
    fn config(&self, default_problem: ProblemKind) -> RunConfig {
        RunConfig {
            problem: match self.problem {
                None => default_problem,
                Some(ProblemArg::Ridge) => ProblemKind::Ridge,
                Some(ProblemArg::Logistic) => ProblemKind::Logistic,
                Some(ProblemArg::Scalar) => ProblemKind::Scalar,
                Some(ProblemArg::Linear1d) => ProblemKind::Linear1d,
            },
            train: self.train.clone(),
            val: self.val.clone(),
            dims: self.dims,
            outer: match self.outer {
                OuterArg::Quadratic => OuterKind::Quadratic,
                OuterArg::Affine => OuterKind::Affine,
            },
            strategies: self
                .strategies
                .clone()
                .unwrap_or_else(|| Strategy::ALL.to_vec()),
            steps: self.steps,
            y_low: self.y_low,
            y_high: self.y_high,
            trials: self.trials,
            seed: self.seed,
            eps: self.eps,
            out: self.out.clone(),
            svg: self.svg.clone(),
        }
    }
}

fn run_meta(cmd: &str, config: &RunConfig, datasets: &str) -> Vec<(String, String)> {
    let strategies: Vec<&str> = config.strategies.iter().map(|s| s.id()).collect();
    vec![
        ("command".into(), cmd.into()),
        ("problem".into(), config.problem.id().into()),
        ("datasets".into(), datasets.into()),
        (
            "outer".into(),
            match config.outer {
                OuterKind::Quadratic => "quadratic",
                OuterKind::Affine => "affine",
            }
            .into(),
        ),
        ("strategies".into(), strategies.join(" ")),
        ("seed".into(), config.seed.to_string()),
        ("trials".into(), config.trials.to_string()),
        ("steps".into(), config.steps.to_string()),
        (
            "y_range".into(),
            format!("{} {}", fmt_f64(config.y_low), fmt_f64(config.y_high)),
        ),
    ]
}

/// Writes to `path`, or to `stdout` when no path is given.
fn with_sink(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| BenchError::io(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| BenchError::io(p, e))
        }
        None => f(stdout).map_err(|e| BenchError::io("<stdout>", e)),
    }
}

fn write_svg(path: Option<&Path>, svg: impl FnOnce() -> String) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, svg()).map_err(|e| BenchError::io(p, e))?;
    }
    Ok(())
}

fn cmd_decay(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config = c.config(ProblemKind::Ridge);
    let loaded = config.load_problem()?;
    let traces = decay_on(&loaded.problem, &config, &loaded.datasets)?;
    for t in &traces {
        if let Some(f) = &t.meta.failure {
            let _ = writeln!(stderr, "warning: {} stopped early: {f}", t.strategy);
        }
    }
    // Seed, y and datasets come from the traces themselves.
    let meta: Vec<(String, String)> = run_meta("decay", &config, &loaded.datasets)
        .into_iter()
        .filter(|(k, _)| k != "seed" && k != "datasets")
        .collect();
    with_sink(config.out.as_deref(), stdout, |w| {
        emit_decay_csv(&traces, &meta, w)
    })?;
    write_svg(config.svg.as_deref(), || {
        render_svg(&decay_series(&traces), &AxesConfig::decay())
    })
}

fn cmd_efficiency(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config = c.config(ProblemKind::Ridge);
    let loaded = config.load_problem()?;
    let sweep = sweep_on(&loaded.problem, &config)?;
    for f in &sweep.failures {
        let _ = writeln!(
            stderr,
            "warning: {} failed on trial {}: {}",
            f.strategy, f.trial, f.message
        );
    }
    let meta = run_meta("efficiency", &config, &loaded.datasets);
    with_sink(config.out.as_deref(), stdout, |w| {
        emit_efficiency_csv(&sweep, &meta, w)
    })?;
    write_svg(config.svg.as_deref(), || {
        render_svg(&efficiency_series(&sweep), &AxesConfig::efficiency())
    })
}

fn cmd_compare(
    c: &Common,
    scale: f64,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let config = c.config(ProblemKind::Ridge);
    let loaded = config.load_problem()?;
    let rows = run_compare(&loaded.problem, &config, scale)?;
    let mut meta = run_meta("compare", &config, &loaded.datasets);
    meta.push(("precond_scale".into(), fmt_f64(scale)));
    with_sink(config.out.as_deref(), stdout, |w| {
        write_meta(w, &meta)?;
        writeln!(
            w,
            "check,strategy,trial,seed,lhs,relation,bound,remainder,holds"
        )?;
        for r in &rows {
            let rel = match r.relation {
                Relation::AtMost => "le",
                Relation::AtLeast => "ge",
            };
            writeln!(
                w,
                "{},{},{},{},{},{rel},{},{},{}",
                r.check,
                r.strategy,
                r.trial,
                r.seed,
                fmt_f64(r.lhs),
                fmt_f64(r.bound),
                fmt_f64(r.remainder),
                r.holds()
            )?;
        }
        Ok(())
    })?;
    let held = rows.iter().filter(|r| CheckRow::holds(r)).count();
    let _ = writeln!(stderr, "{held} of {} inequalities hold", rows.len());
    Ok(())
}

fn cmd_ode1d(c: &Common, alpha: f64, beta: f64, stdout: &mut dyn Write) -> Result<()> {
    let config = c.config(ProblemKind::Linear1d);
    let loaded = config.load_problem()?;
    let rows = run_ode1d(&loaded.problem, &config, alpha, beta)?;
    let meta = run_meta("ode1d", &config, &loaded.datasets);
    with_sink(config.out.as_deref(), stdout, |w| {
        write_meta(w, &meta)?;
        writeln!(w, "phi,trial,y,residual,cy")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.phi,
                r.trial,
                fmt_f64(r.y),
                fmt_f64(r.residual),
                fmt_f64(r.c_y)
            )?;
        }
        Ok(())
    })
}

fn cmd_slope(
    input: &Path,
    floor: f64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    if floor.is_nan() || floor < 0.0 {
        return Err(BenchError::Usage(format!(
            "floor must be non-negative, got {floor}"
        )));
    }
    let text = std::fs::read_to_string(input).map_err(|e| BenchError::io(input, e))?;
    let groups = parse_decay_csv(&text)?;
    let mut fitted = vec![];
    let mut last_err = None;
    for (strategy, rows) in groups {
        let trace = DecayTrace {
            strategy,
            rows,
            meta: TraceMeta {
                seed: 0,
                y: hypergrad::Vector::zeros(0),
                datasets: String::new(),
                filtered_steps: vec![],
                failure: None,
            },
        };
        match fit_loglog_slope(&trace, floor) {
            Ok(s) => fitted.push((trace.strategy, Some(s))),
            Err(e) => {
                let _ = writeln!(stderr, "warning: {e}");
                fitted.push((trace.strategy, None));
                last_err = Some(e);
            }
        }
    }
    with_sink(out, stdout, |w| {
        writeln!(w, "strategy,slope")?;
        for (s, v) in &fitted {
            writeln!(w, "{s},{}", v.map(fmt_f64).unwrap_or_else(|| "NA".into()))?;
        }
        Ok(())
    })?;
    match last_err {
        Some(e) if fitted.iter().all(|f| f.1.is_none()) => Err(e.into()),
        _ => Ok(()),
    }
}

/// Runs the tool with explicit output streams and returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                exit::USAGE
            } else {
                let _ = write!(stdout, "{text}");
                exit::OK
            };
        }
    };
    let outcome = match &cli.command {
        Command::Decay(c) => cmd_decay(c, stdout, stderr),
        Command::Efficiency(c) => cmd_efficiency(c, stdout, stderr),
        Command::Compare {
            common,
            precond_scale,
        } => cmd_compare(common, *precond_scale, stdout, stderr),
        Command::Ode1d {
            common,
            alpha,
            beta,
        } => cmd_ode1d(common, *alpha, *beta, stdout),
        Command::Slope { input, floor, out } => {
            cmd_slope(input, *floor, out.as_deref(), stdout, stderr)
        }
    };
    match outcome {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut err = std::io::stderr();
    run_cli(args, &mut out, &mut err)
}
