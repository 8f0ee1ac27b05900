//! Minimal standalone SVG line plots with linear or log axes.

use std::fmt::Write;

use crate::decay::DecayTrace;
use crate::sweep::Sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxesConfig {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub width: u32,
    pub height: u32,
}

impl AxesConfig {
    /// Hypergradient error against iteration count.
    pub fn decay() -> Self {
        AxesConfig {
            title: "hypergradient error".into(),
            x_label: "step".into(),
            y_label: "‖E − ∇h‖".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Log,
            width: 640,
            height: 420,
        }
    }

    pub fn efficiency() -> Self {
        AxesConfig {
            title: "efficiency constant".into(),
            x_label: "trial".into(),
            y_label: "C_y".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Log,
            width: 640,
            height: 420,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub fn decay_series(traces: &[DecayTrace]) -> Vec<Series> {
    traces
        .iter()
        .map(|t| Series {
            label: t.strategy.clone(),
            points: t
                .rows
                .iter()
                .map(|r| (r.step as f64, r.hyper_error))
                .collect(),
        })
        .collect()
}

/// One series per strategy, in order of first appearance.
pub fn efficiency_series(sweep: &Sweep) -> Vec<Series> {
    let mut out: Vec<Series> = vec![];
    for r in &sweep.reports {
        let p = (r.trial as f64, r.report.c_y);
        match out.iter_mut().find(|s| s.label == r.report.strategy) {
            Some(s) => s.points.push(p),
            None => out.push(Series {
                label: r.report.strategy.clone(),
                points: vec![p],
            }),
        }
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

fn usable(v: f64, s: Scale) -> bool {
    v.is_finite() && (s == Scale::Linear || v > 0.0)
}

fn fwd(v: f64, s: Scale) -> f64 {
    match s {
        Scale::Linear => v,
        Scale::Log => v.log10(),
    }
}

/// Axis range in transformed coordinates, padded to whole decades on log axes.
fn range(vals: impl Iterator<Item = f64>, s: Scale) -> (f64, f64) {
    let (mut lo, mut hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        let t = fwd(v, s);
        (a.min(t), b.max(t))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if s == Scale::Log {
        lo = lo.floor();
        hi = hi.ceil();
    }
    if hi - lo < 1e-12 {
        let pad = if s == Scale::Log {
            1.0
        } else {
            lo.abs().max(1.0) * 0.5
        };
        lo -= pad;
        hi += pad;
    }
    (lo, hi)
}

fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let f = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    f * mag
}

/// Tick positions in transformed coordinates and their labels.
fn ticks(lo: f64, hi: f64, s: Scale) -> Vec<(f64, String)> {
    match s {
        Scale::Log => {
            let (a, b) = (lo.round() as i64, hi.round() as i64);
            let stride = ((b - a + 15) / 16).max(1);
            (a..=b)
                .filter(|e| (e - a) % stride == 0)
                .map(|e| (e as f64, format!("1e{e}")))
                .collect()
        }
        Scale::Linear => {
            let step = nice_step(hi - lo, 6.0);
            let first = (lo / step).ceil() as i64;
            let last = (hi / step).floor() as i64;
            (first..=last)
                .map(|i| {
                    let v = i as f64 * step;
                    (v, format!("{}", (v * 1e9).round() / 1e9))
                })
                .collect()
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders series as polylines. Output depends only on the inputs.
pub fn render_svg(series: &[Series], axes: &AxesConfig) -> String {
    let (w, h) = (axes.width as f64, axes.height as f64);
    let (pw, ph) = (w - MARGIN_L - MARGIN_R, h - MARGIN_T - MARGIN_B);
    let pts = || {
        series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| usable(p.0, axes.x_scale) && usable(p.1, axes.y_scale))
    };
    let (x0, x1) = range(pts().map(|p| p.0), axes.x_scale);
    let (y0, y1) = range(pts().map(|p| p.1), axes.y_scale);
    let sx = |t: f64| MARGIN_L + (t - x0) / (x1 - x0) * pw;
    let sy = |t: f64| MARGIN_T + ph - (t - y0) / (y1 - y0) * ph;

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(o, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        MARGIN_L + pw / 2.0,
        esc(&axes.title)
    );
    let _ = writeln!(
        o,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{l:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}"/><line x1="{l:.2}" y1="{t:.2}" x2="{l:.2}" y2="{b:.2}"/></g>"#,
        l = MARGIN_L,
        r = MARGIN_L + pw,
        t = MARGIN_T,
        b = MARGIN_T + ph
    );
    for (t, label) in ticks(x0, x1, axes.x_scale) {
        let x = sx(t);
        let _ = writeln!(
            o,
            r#"<g class="xtick"><line x1="{x:.2}" y1="{b:.2}" x2="{x:.2}" y2="{b2:.2}" stroke="black"/><text x="{x:.2}" y="{ty:.2}" text-anchor="middle">{}</text></g>"#,
            esc(&label),
            b = MARGIN_T + ph,
            b2 = MARGIN_T + ph + 5.0,
            ty = MARGIN_T + ph + 18.0
        );
    }
    for (t, label) in ticks(y0, y1, axes.y_scale) {
        let y = sy(t);
        let _ = writeln!(
            o,
            r#"<g class="ytick"><line x1="{l2:.2}" y1="{y:.2}" x2="{l:.2}" y2="{y:.2}" stroke="black"/><text x="{tx:.2}" y="{ty:.2}" text-anchor="end">{}</text></g>"#,
            esc(&label),
            l = MARGIN_L,
            l2 = MARGIN_L - 5.0,
            tx = MARGIN_L - 8.0,
            ty = y + 4.0
        );
    }
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        h - 10.0,
        esc(&axes.x_label)
    );
    let _ = writeln!(
        o,
        r#"<text x="14" y="{c:.2}" text-anchor="middle" transform="rotate(-90 14 {c:.2})">{}</text>"#,
        esc(&axes.y_label),
        c = MARGIN_T + ph / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|p| usable(p.0, axes.x_scale) && usable(p.1, axes.y_scale))
            .map(|p| {
                format!(
                    "{:.2},{:.2}",
                    sx(fwd(p.0, axes.x_scale)),
                    sy(fwd(p.1, axes.y_scale))
                )
            })
            .collect();
        let _ = writeln!(
            o,
            r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            esc(&s.label),
            coords.join(" ")
        );
        let ly = MARGIN_T + 10.0 + 16.0 * i as f64;
        let lx = MARGIN_L + pw + 12.0;
        let _ = writeln!(
            o,
            r#"<g class="legend"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            esc(&s.label)
        );
    }
    o.push_str("</svg>\n");
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> Vec<Series> {
        vec![
            Series {
                label: "vanilla".into(),
                points: vec![(0.0, 1.0), (1.0, 1e-3), (2.0, 1e-6)],
            },
            Series {
                label: "newton".into(),
                points: vec![(0.0, 1e-2), (1.0, 1e-9), (2.0, 1e-15)],
            },
        ]
    }

    #[test]
    fn one_polyline_per_series() {
        let svg = render_svg(&two(), &AxesConfig::decay());
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">vanilla</text>") && svg.contains(">newton</text>"));
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            render_svg(&two(), &AxesConfig::decay()),
            render_svg(&two(), &AxesConfig::decay())
        );
    }

    #[test]
    fn log_ticks_are_powers_of_ten() {
        let svg = render_svg(&two(), &AxesConfig::decay());
        let labels: Vec<&str> = svg
            .split("<g class=\"ytick\">")
            .skip(1)
            .map(|s| {
                let t = &s[s.find("text-anchor=\"end\">").unwrap() + 18..];
                &t[..t.find('<').unwrap()]
            })
            .collect();
        assert!(
            labels.contains(&"1e0") && labels.contains(&"1e-15"),
            "{labels:?}"
        );
        for l in labels {
            assert!(l.strip_prefix("1e").unwrap().parse::<i32>().is_ok());
        }
    }

    #[test]
    fn empty_input_draws_axes_only() {
        let svg = render_svg(&[], &AxesConfig::efficiency());
        assert!(svg.contains("class=\"axes\""));
        assert_eq!(svg.matches("<polyline").count(), 0);
    }

    #[test]
    fn non_positive_values_are_skipped_on_log_axis() {
        let s = vec![Series {
            label: "z".into(),
            points: vec![(0.0, 0.0), (1.0, 1e-3)],
        }];
        let svg = render_svg(&s, &AxesConfig::decay());
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
