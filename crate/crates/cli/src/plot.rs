//! Line charts with a logarithmic vertical axis, as SVG 1.1.

use std::fmt::Write;

use flowgrowth_core::MomentCurve;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// One polyline: abscissae and natural logs of the ordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub log_ys: Vec<f64>,
}

impl From<&MomentCurve> for Series {
    fn from(c: &MomentCurve) -> Self {
        Series {
            label: c.label().to_string(),
            xs: c.grid().to_vec(),
            log_ys: c.log_values().to_vec(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the series; points with non-finite log values break the line.
pub fn emit_svg(series: &[Series]) -> CliResult<String> {
    if series.is_empty() {
        return Err(CliError::validation("curves", "nothing to plot"));
    }
    let ln10 = std::f64::consts::LN_10;
    let finite = || {
        series
            .iter()
            .flat_map(|s| s.xs.iter().zip(&s.log_ys))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
    };
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in finite() {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(y / ln10);
        y1 = y1.max(y / ln10);
    }
    if !x0.is_finite() {
        return Err(CliError::validation("curves", "no finite points to plot"));
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    let (d0, mut d1) = (y0.floor(), y1.ceil());
    if d1 == d0 {
        d1 = d0 + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (d1 - y / ln10) / (d1 - d0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );

    // decade ticks, thinned to at most 10 labels
    let decades = (d1 - d0) as i64;
    let step = (decades / 10 + 1).max(1);
    let mut k = d0 as i64;
    while k <= d1 as i64 {
        let y = TOP + (d1 - k as f64) / (d1 - d0) * ph;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="#dddddd" stroke-width="1"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="end">1e{k}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
        k += step;
    }
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="middle">{}</text>"#,
            px(x),
            TOP + ph + 18.0,
            format_tick(x)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-size="13" text-anchor="middle">t</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, s: &mut String| {
            if segment.len() >= 2 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    segment.join(" ")
                );
            } else if segment.len() == 1 {
                let (cx, cy) = segment[0].split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>"#);
            }
            segment.clear();
        };
        for (x, y) in ser.xs.iter().zip(&ser.log_ys) {
            if x.is_finite() && y.is_finite() {
                segment.push(format!("{:.3},{:.3}", px(*x), py(*y)));
            } else {
                flush(&mut segment, &mut s);
            }
        }
        flush(&mut segment, &mut s);
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    format!("{r}")
}
