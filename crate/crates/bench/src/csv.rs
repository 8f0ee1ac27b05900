//! CSV output with `# key=value` metadata lines before the header.

use std::io::Write;

use hypergrad::rng::RNG_NAME;
use hypergrad::Error;

use crate::decay::{DecayRow, DecayTrace};
use crate::sweep::Sweep;

pub const DECAY_HEADER: &str = "strategy,step,inner_error,hypergrad_error";
pub const EFFICIENCY_HEADER: &str = "strategy,trial,seed,cy";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn clean(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

fn join_f64(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(fmt_f64).collect::<Vec<_>>().join(" ")
}

/// Metadata common to every output: generator name plus caller-supplied pairs.
pub fn write_meta<W: Write + ?Sized>(
    sink: &mut W,
    pairs: &[(String, String)],
) -> std::io::Result<()> {
    writeln!(sink, "# rng={RNG_NAME}")?;
    for (k, v) in pairs {
        writeln!(sink, "# {}={}", clean(k), clean(v))?;
    }
    Ok(())
}

pub fn emit_decay_csv<W: Write + ?Sized>(
    traces: &[DecayTrace],
    extra: &[(String, String)],
    sink: &mut W,
) -> std::io::Result<()> {
    let mut meta = extra.to_vec();
    if let Some(t) = traces.first() {
        meta.push(("seed".into(), t.meta.seed.to_string()));
        meta.push(("y".into(), join_f64(t.meta.y.iter().copied())));
        meta.push(("datasets".into(), t.meta.datasets.clone()));
    }
    for t in traces {
        if !t.meta.filtered_steps.is_empty() {
            let steps: Vec<String> = t
                .meta
                .filtered_steps
                .iter()
                .map(|s| s.to_string())
                .collect();
            meta.push((format!("filtered.{}", t.strategy), steps.join(" ")));
        }
        if let Some(f) = &t.meta.failure {
            meta.push((format!("failed.{}", t.strategy), f.clone()));
        }
    }
    write_meta(sink, &meta)?;
    writeln!(sink, "{DECAY_HEADER}")?;
    for t in traces {
        for r in &t.rows {
            writeln!(
                sink,
                "{},{},{},{}",
                t.strategy,
                r.step,
                fmt_f64(r.inner_error),
                fmt_f64(r.hyper_error)
            )?;
        }
    }
    Ok(())
}

pub fn emit_efficiency_csv<W: Write + ?Sized>(
    sweep: &Sweep,
    extra: &[(String, String)],
    sink: &mut W,
) -> std::io::Result<()> {
    let mut meta = extra.to_vec();
    for f in &sweep.failures {
        meta.push((
            format!("failed.{}.{}", f.strategy, f.trial),
            f.message.clone(),
        ));
    }
    write_meta(sink, &meta)?;
    writeln!(sink, "{EFFICIENCY_HEADER}")?;
    for r in &sweep.reports {
        writeln!(
            sink,
            "{},{},{},{}",
            r.report.strategy,
            r.trial,
            r.seed,
            fmt_f64(r.report.c_y)
        )?;
    }
    Ok(())
}

fn parse_f64(field: &str, line: usize) -> Result<f64, Error> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {field:?}"),
    })
}

/// Reads traces back from decay CSV text, grouped by strategy in order of
/// first appearance. Metadata lines are skipped.
pub fn parse_decay_csv(text: &str) -> Result<Vec<(String, Vec<DecayRow>)>, Error> {
    let mut out: Vec<(String, Vec<DecayRow>)> = vec![];
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.starts_with('#') || raw.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if raw != DECAY_HEADER {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header {DECAY_HEADER:?}"),
                });
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = raw.split(',').collect();
        if f.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, found {}", f.len()),
            });
        }
        let row = DecayRow {
            step: f[1].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad step {:?}", f[1]),
            })?,
            inner_error: parse_f64(f[2], line)?,
            hyper_error: parse_f64(f[3], line)?,
        };
        match out.iter_mut().find(|(s, _)| s == f[0]) {
            Some((_, rows)) => rows.push(row),
            None => out.push((f[0].to_string(), vec![row])),
        }
    }
    if !seen_header {
        return Err(Error::Parse {
            line: 0,
            message: "missing CSV header".into(),
        });
    }
    Ok(out)
}
