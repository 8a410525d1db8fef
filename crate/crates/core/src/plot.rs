//! Minimal deterministic SVG line charts.
//!
//! Output depends only on the data: fixed canvas, fixed palette, fixed number
//! formatting and no timestamps, so identical inputs give identical bytes.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::experiments::{Strategy, SweepResult, ThresholdPoint};
use crate::optimizer::OptimizationTrace;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 80.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#7f7f7f", "#9467bd", "#ff7f0e",
];
const TICKS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YAxis {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub axis: YAxis,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            axis: YAxis::Left,
        }
    }

    pub fn on_right(mut self) -> Self {
        self.axis = YAxis::Right;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y2_label: Option<String>,
    pub log_x: bool,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo > hi {
            return None;
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            let pad = 0.5 * lo.abs().max(1.0);
            return Some(Self {
                lo: lo - pad,
                hi: hi + pad,
            });
        }
        let pad = 0.05 * (hi - lo);
        Some(Self {
            lo: lo - pad,
            hi: hi + pad,
        })
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    }
}

impl Chart {
    pub fn render(&self) -> Result<String> {
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let all = |axis: YAxis| {
            self.series
                .iter()
                .filter(move |s| s.axis == axis)
                .flat_map(|s| s.points.iter().copied())
        };
        if self.series.iter().all(|s| s.points.is_empty()) {
            return Err(Error::invalid("chart has no data points"));
        }
        if self.log_x
            && self
                .series
                .iter()
                .flat_map(|s| &s.points)
                .any(|p| !(p.0 > 0.0))
        {
            return Err(Error::invalid("log-scaled axis needs positive x values"));
        }
        let xr = Range::of(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| tx(p.0))),
        )
        .ok_or_else(|| Error::invalid("chart has no finite x values"))?;
        let yl = Range::of(all(YAxis::Left).map(|p| p.1));
        let yr = Range::of(all(YAxis::Right).map(|p| p.1));
        if yl.is_none() && yr.is_none() {
            return Err(Error::invalid("chart has no finite y values"));
        }

        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            svg,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );

        // x ticks
        for k in 0..=TICKS {
            let v = xr.lo + (xr.hi - xr.lo) * k as f64 / TICKS as f64;
            let px = xr.map(v, x0, x1);
            let label = if self.log_x {
                tick_label(10f64.powf(v))
            } else {
                tick_label(v)
            };
            let _ = writeln!(
                svg,
                r##"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
                y0 + 5.0,
                y0 + 20.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );

        for (range, axis, label) in [
            (yl, YAxis::Left, Some(&self.y_label)),
            (yr, YAxis::Right, self.y2_label.as_ref()),
        ] {
            let Some(range) = range else { continue };
            let (edge, dir, anchor) = match axis {
                YAxis::Left => (x0, -1.0, "end"),
                YAxis::Right => (x1, 1.0, "start"),
            };
            for k in 0..=TICKS {
                let v = range.lo + (range.hi - range.lo) * k as f64 / TICKS as f64;
                let py = range.map(v, y0, y1);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{edge:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"##,
                    edge + 5.0 * dir,
                    edge + 8.0 * dir,
                    py + 4.0,
                    tick_label(v)
                );
            }
            if let Some(label) = label {
                let lx = edge + 60.0 * dir;
                let ly = (y0 + y1) / 2.0;
                let _ = writeln!(
                    svg,
                    r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
                    escape(label)
                );
            }
        }

        for (idx, s) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let range = match s.axis {
                YAxis::Left => yl,
                YAxis::Right => yr,
            };
            let Some(range) = range else { continue };
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|p| p.1.is_finite())
                .map(|p| (xr.map(tx(p.0), x0, x1), range.map(p.1, y0, y1)))
                .collect();
            if pts.len() > 1 {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    path.join(" ")
                );
            }
            if pts.len() <= 40 {
                for (x, y) in &pts {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#
                    );
                }
            }
            let ly = TOP + 16.0 + 16.0 * idx as f64;
            let lx = x1 - 150.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

/// Pathloss against receiver angle, one series per strategy.
pub fn sweep_chart(result: &SweepResult, strategies: &[Strategy]) -> Chart {
    let series = strategies
        .iter()
        .map(|st| {
            Series::new(
                st.label(),
                result
                    .records
                    .iter()
                    .map(|r| (r.alpha, r.pathloss(*st)))
                    .collect(),
            )
        })
        .collect();
    Chart {
        title: "Pathloss versus receiver angle".into(),
        x_label: "alpha (rad)".into(),
        y_label: "pathloss (dB)".into(),
        y2_label: None,
        log_x: false,
        series,
    }
}

/// Mean reduction (left) and mean iteration count (right) against threshold.
pub fn threshold_chart(points: &[ThresholdPoint]) -> Chart {
    Chart {
        title: "Convergence threshold trade-off".into(),
        x_label: "threshold delta (dB)".into(),
        y_label: "mean reduction (%)".into(),
        y2_label: Some("mean iterations".into()),
        log_x: true,
        series: vec![
            Series::new(
                "reduction %",
                points
                    .iter()
                    .map(|p| (p.delta, p.mean_reduction_pct))
                    .collect(),
            ),
            Series::new(
                "iterations",
                points
                    .iter()
                    .map(|p| (p.delta, p.mean_iterations))
                    .collect(),
            )
            .on_right(),
        ],
    }
}

/// Pathloss per alternating round.
pub fn trace_chart(trace: &OptimizationTrace, alpha: f64) -> Chart {
    Chart {
        title: format!("Alternating optimization at alpha = {alpha:.4} rad"),
        x_label: "iteration".into(),
        y_label: "pathloss (dB)".into(),
        y2_label: None,
        log_x: false,
        series: vec![Series::new(
            "joint",
            trace
                .entries
                .iter()
                .map(|e| (e.iteration as f64, e.pathloss_db))
                .collect(),
        )],
    }
}

pub fn sweep_svg(result: &SweepResult, strategies: &[Strategy]) -> Result<String> {
    sweep_chart(result, strategies).render()
}

pub fn threshold_svg(points: &[ThresholdPoint]) -> Result<String> {
    threshold_chart(points).render()
}

pub fn trace_svg(trace: &OptimizationTrace, alpha: f64) -> Result<String> {
    trace_chart(trace, alpha).render()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(series: Vec<Series>) -> Chart {
        Chart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            y2_label: None,
            log_x: false,
            series,
        }
    }

    #[test]
    fn empty_is_rejected() {
        assert!(chart(vec![]).render().is_err());
        assert!(chart(vec![Series::new("a", vec![])]).render().is_err());
        assert!(threshold_svg(&[]).is_err());
    }

    #[test]
    fn single_point_draws_marker() {
        let svg = chart(vec![Series::new("a", vec![(1.0, 2.0)])])
            .render()
            .unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn four_series_and_stable_bytes() {
        let s: Vec<Series> = (0..4)
            .map(|k| {
                Series::new(
                    format!("s{k}"),
                    (0..100).map(|i| (i as f64 * 0.1, (i * k) as f64)).collect(),
                )
            })
            .collect();
        let a = chart(s.clone()).render().unwrap();
        let b = chart(s).render().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<polyline").count(), 4);
    }

    #[test]
    fn dual_axis_log_chart() {
        let pts: Vec<ThresholdPoint> = [1e-3, 1e-2, 1e-1]
            .iter()
            .map(|&d| ThresholdPoint {
                delta: d,
                mean_reduction_pct: 30.0,
                mean_iterations: 1.0 / d,
            })
            .collect();
        let svg = threshold_svg(&pts).unwrap();
        assert!(svg.contains("mean iterations"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn labels_are_escaped() {
        let mut c = chart(vec![Series::new("a<b", vec![(0.0, 0.0), (1.0, 1.0)])]);
        c.title = "x & y".into();
        let svg = c.render().unwrap();
        assert!(svg.contains("a&lt;b") && svg.contains("x &amp; y"));
    }
}
