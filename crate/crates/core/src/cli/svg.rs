//! Bifurcation diagrams as standalone SVG 1.1: parameter on the horizontal
//! axis, sup-norm on a logarithmic vertical axis.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::radial::BranchPoint;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

/// Branch parameter drawn on the horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Lambda,
    Kappa,
    Mass,
}

impl Axis {
    fn value(self, p: &BranchPoint) -> Option<f64> {
        match self {
            Axis::Lambda => p.lambda,
            Axis::Kappa => p.kappa,
            Axis::Mass => p.mass,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Axis::Lambda => "λ",
            Axis::Kappa => "κ",
            Axis::Mass => "M",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(Axis::Lambda),
            "kappa" => Ok(Axis::Kappa),
            "M" | "mass" => Ok(Axis::Mass),
            _ => Err(Error::InvalidInput(format!("unknown axis {s:?} (lambda|kappa|M)"))),
        }
    }
}

/// A vertical line at a parameter value, e.g. a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub label: String,
    pub value: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if hi > lo {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let w = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        (lo - w, hi + w)
    }
}

/// Tick positions: `n` roughly even, rounded to 1/2/5 steps.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-12 * step && out.len() < 50 {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn tick_label(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Renders the branch; points without a value for `axis` or with a
/// non-positive sup-norm are left out.
pub fn emit_svg(points: &[BranchPoint], axis: Axis, markers: &[Marker]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty branch".into()));
    }
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| Some((axis.value(p)?, p.sup_norm)))
        .filter(|(x, s)| x.is_finite() && *s > 0.0 && s.is_finite())
        .map(|(x, s)| (x, s.log10()))
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidInput(format!("no branch point carries {}", axis.label())));
    }
    let marks: Vec<&Marker> = markers.iter().filter(|m| m.value.is_finite()).collect();
    let (x0, x1) = range(pts.iter().map(|p| p.0).chain(marks.iter().map(|m| m.value)));
    let (ylo, yhi) = range(pts.iter().map(|p| p.1));
    let (y0, y1) = (ylo.floor().min(ylo), yhi.ceil().max(yhi));
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let w = &mut s;
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    )
    .unwrap();
    for t in ticks(x0, x1) {
        let x = num(px(t));
        writeln!(w, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#, num(TOP + ph), num(TOP + ph + 5.0)).unwrap();
        writeln!(
            w,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            num(TOP + ph + 20.0),
            tick_label(t)
        )
        .unwrap();
    }
    let (d0, d1) = (y0.ceil() as i64, y1.floor() as i64);
    let stride = ((d1 - d0) / 8 + 1).max(1);
    for e in (d0..=d1).filter(|e| (e - d0) % stride == 0) {
        let y = num(py(e as f64));
        writeln!(w, r#"<line x1="{}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>"#, num(LEFT - 5.0)).unwrap();
        writeln!(
            w,
            r#"<text x="{}" y="{y}" font-size="12" text-anchor="end" dominant-baseline="middle">1e{e}</text>"#,
            num(LEFT - 8.0)
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
        num(LEFT + pw / 2.0),
        num(HEIGHT - 15.0),
        axis.label()
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="20" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {})">‖u‖∞ (log scale)</text>"#,
        num(TOP + ph / 2.0),
        num(TOP + ph / 2.0)
    )
    .unwrap();
    for m in &marks {
        let x = num(px(m.value));
        writeln!(
            w,
            r#"<line x1="{x}" y1="{TOP}" x2="{x}" y2="{}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            num(TOP + ph)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{x}" y="{}" font-size="12" fill="firebrick" text-anchor="middle">{}</text>"#,
            num(TOP - 8.0),
            escape(&m.label)
        )
        .unwrap();
    }
    let poly: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", num(px(x)), num(py(y)))).collect();
    writeln!(w, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, poly.join(" ")).unwrap();
    writeln!(w, "</svg>").unwrap();
    Ok(s)
}
