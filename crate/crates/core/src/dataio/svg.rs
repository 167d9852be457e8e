use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::ica::{DcaCurve, DcaFeatureSet, Feature};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// One curve in an overlay plot, optionally with its feature markers.
#[derive(Debug, Clone, Copy)]
pub struct PlotSeries<'a> {
    pub label: &'a str,
    pub curve: &'a DcaCurve,
    pub features: Option<&'a DcaFeatureSet>,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// SVG text of voltage-vs-dQ/dV overlays with labelled feature markers.
pub fn render_plot_svg(series: &[PlotSeries<'_>]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Data("nothing to plot".into()));
    }
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    let mut ymax: f64 = 0.0;
    for s in series {
        if s.curve.is_empty() {
            return Err(Error::Data(format!("series `{}` is empty", s.label)));
        }
        for p in &s.curve.samples {
            vmin = vmin.min(p.voltage);
            vmax = vmax.max(p.voltage);
            ymax = ymax.max(p.dq_dv);
        }
    }
    if !(vmax > vmin) {
        vmax = vmin + 1e-3;
    }
    if ymax <= 0.0 {
        ymax = 1.0;
    }
    ymax *= 1.05;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |v: f64| MARGIN_LEFT + (v - vmin) / (vmax - vmin) * plot_w;
    let y = |d: f64| MARGIN_TOP + plot_h - d.clamp(0.0, ymax) / ymax * plot_h;

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        o,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        o,
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for t in ticks(vmin, vmax) {
        let px = x(t);
        let _ = writeln!(
            o,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#444"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{t:.2}</text>"##,
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0,
            MARGIN_TOP + plot_h + 20.0
        );
    }
    for t in ticks(0.0, ymax) {
        let py = y(t);
        let _ = writeln!(
            o,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT}" y2="{py:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            py + 4.0,
            t
        );
    }
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Voltage (V)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        o,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">dQ/dV (Ah/V)</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .curve
            .samples
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.voltage), y(p.dq_dv)))
            .collect();
        let _ = writeln!(
            o,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(s.label),
            points.join(" ")
        );
        if let Some(f) = s.features {
            for (name, feat) in [
                ("peak", f.low_voltage_peak),
                ("valley", f.high_voltage_valley),
            ] {
                let Some(Feature {
                    position,
                    magnitude,
                }) = feat
                else {
                    continue;
                };
                let (px, py) = (x(position), y(magnitude));
                let _ = writeln!(
                    o,
                    r#"<circle class="feature" cx="{px:.2}" cy="{py:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{:.2}" fill="{color}">{} {position:.3} V</text>"#,
                    px + 6.0,
                    py - 6.0,
                    escape(&format!("{} {name}", s.label))
                );
            }
        }
        let ly = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 15.0;
        let _ = writeln!(
            o,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    o.push_str("</svg>\n");
    Ok(o)
}

pub fn export_plot_svg(series: &[PlotSeries<'_>], path: impl AsRef<Path>) -> Result<()> {
    let text = render_plot_svg(series)?;
    write_atomic(path.as_ref(), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape(r#"a<b & "c">"#), "a&lt;b &amp; &quot;c&quot;&gt;");
    }

    #[test]
    fn ticks_are_round() {
        let t = ticks(3.0, 4.0);
        let want = [3.0, 3.2, 3.4, 3.6, 3.8, 4.0];
        assert_eq!(t.len(), want.len());
        assert!(
            t.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12),
            "{t:?}"
        );
        let t = ticks(0.0, 37.0);
        assert_eq!(t.first(), Some(&0.0));
        assert!(t.len() >= 4 && t.len() <= 9);
    }
}
