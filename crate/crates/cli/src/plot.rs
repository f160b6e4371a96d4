//! Minimal standalone SVG rendering of a delay scan.

use std::fmt::Write;

use homdip::HomCurve;

use crate::report::FitReport;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const MODEL_SAMPLES: usize = 400;

/// 1, 2 or 5 times a power of ten, giving roughly `target` ticks.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let magnitude = 10f64.powf(raw.log10().floor());
    let unit = raw / magnitude;
    let nice = if unit < 1.5 {
        1.0
    } else if unit < 3.5 {
        2.0
    } else if unit < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * magnitude
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(hi - lo, 5.0);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Scatter of counts (with √N bars) or of expected values, an optional fit
/// overlay and the fitted FWHM.
pub fn render_svg(curve: &HomCurve, fit: Option<&FitReport>, title: &str) -> Result<String, CliError> {
    if curve.is_empty() {
        return Err(CliError::Schema("curve has no data rows to plot".into()));
    }
    let values = curve.observations();
    let bars: Vec<f64> = match &curve.counts {
        Some(counts) => counts.iter().map(|&c| (c as f64).sqrt()).collect(),
        None => vec![0.0; values.len()],
    };
    let x_lo = curve.delays.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = curve.delays.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_hi = values.iter().zip(&bars).map(|(v, b)| v + b).fold(0.0, f64::max);
    let pad = if x_hi > x_lo { 0.03 * (x_hi - x_lo) } else { 1.0 };
    let frame = Frame {
        x: (x_lo - pad, x_hi + pad),
        y: (0.0, if y_hi > 0.0 { 1.08 * y_hi } else { 1.0 }),
    };

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(w, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));

    let (x0, x1) = (frame.px(frame.x.0), frame.px(frame.x.1));
    let (y0, y1) = (frame.py(frame.y.0), frame.py(frame.y.1));
    let _ = writeln!(
        w,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for t in ticks(frame.x.0, frame.x.1) {
        let x = frame.px(t);
        let _ = writeln!(w, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(w, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 18.0, label(t));
    }
    for t in ticks(frame.y.0, frame.y.1) {
        let y = frame.py(t);
        let _ = writeln!(w, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, label(t));
    }
    let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">delay (ps)</text>"#, (x0 + x1) / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        w,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">coincidences</text>"#,
        (y0 + y1) / 2.0
    );

    for ((&tau, &v), &b) in curve.delays.iter().zip(&values).zip(&bars) {
        let (x, y) = (frame.px(tau), frame.py(v));
        if b > 0.0 {
            let _ = writeln!(
                w,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#1f5fbf"/>"##,
                frame.py(v - b),
                frame.py(v + b)
            );
        }
        let _ = writeln!(w, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#1f5fbf"/>"##);
    }

    if let Some(fit) = fit {
        let points: Vec<String> = (0..MODEL_SAMPLES)
            .map(|i| {
                let tau = frame.x.0 + (frame.x.1 - frame.x.0) * i as f64 / (MODEL_SAMPLES - 1) as f64;
                format!("{:.2},{:.2}", frame.px(tau), frame.py(fit.model(tau)))
            })
            .collect();
        let _ = writeln!(
            w,
            r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##,
            points.join(" ")
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">FWHM = {:.4} ± {:.4} ps</text>"#,
            x1 - 8.0,
            y1 + 18.0,
            fit.fwhm_ps.value,
            fit.fwhm_ps.sigma
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

fn label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
