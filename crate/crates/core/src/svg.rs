//! Minimal static SVG charts: bars for histograms and spectra, polylines for
//! overlays.

use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct ChartStyle {
    pub width: u32,
    pub height: u32,
    pub title: String,
}

impl ChartStyle {
    pub fn new(title: impl Into<String>, width: u32, height: u32) -> Self {
        ChartStyle {
            width,
            height,
            title: title.into(),
        }
    }
}

const MARGIN: f64 = 30.0;

fn header(out: &mut String, style: &ChartStyle) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = style.width,
        h = style.height
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        style.width, style.height
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        style.width as f64 / 2.0,
        escape(&style.title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn axes(out: &mut String, style: &ChartStyle, ymax: f64) {
    let (w, h) = (style.width as f64, style.height as f64);
    let _ = writeln!(
        out,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none" stroke-width="1"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = h - MARGIN,
        r = w - MARGIN / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{:.3}</text>"#,
        MARGIN - 3.0,
        MARGIN + 4.0,
        ymax
    );
}

fn y_max(series: &[&[f64]]) -> f64 {
    let m = series
        .iter()
        .flat_map(|s| s.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// One bar per value, scaled to the largest value.
pub fn bar_chart(values: &[f64], style: &ChartStyle) -> String {
    let mut out = String::new();
    header(&mut out, style);
    let ymax = y_max(&[values]);
    axes(&mut out, style, ymax);
    let (w, h) = (style.width as f64, style.height as f64);
    let plot_w = w - 1.5 * MARGIN;
    let plot_h = h - 2.0 * MARGIN;
    let bw = plot_w / values.len().max(1) as f64;
    let _ = writeln!(out, r##"<g fill="#4a6fa5">"##);
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0) {
            continue;
        }
        let bh = v / ymax * plot_h;
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
            MARGIN + i as f64 * bw,
            h - MARGIN - bh,
            bw,
            bh
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Several polylines over a common index axis.
pub fn line_chart(series: &[(&str, &[f64])], style: &ChartStyle) -> String {
    const COLORS: [&str; 4] = ["#c0392b", "#2e6fd1", "#27ae60", "#7f8c8d"];
    let mut out = String::new();
    header(&mut out, style);
    let all: Vec<&[f64]> = series.iter().map(|s| s.1).collect();
    let ymax = y_max(&all);
    axes(&mut out, style, ymax);
    let (w, h) = (style.width as f64, style.height as f64);
    let plot_w = w - 1.5 * MARGIN;
    let plot_h = h - 2.0 * MARGIN;
    for (k, (name, values)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let step = plot_w / values.len().saturating_sub(1).max(1) as f64;
        let mut d = String::new();
        for (i, &v) in values.iter().enumerate() {
            let x = MARGIN + i as f64 * step;
            let y = h - MARGIN - v.max(0.0) / ymax * plot_h;
            let _ = write!(d, "{}{x:.3} {y:.3} ", if i == 0 { 'M' } else { 'L' });
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" stroke="{color}" fill="none" stroke-width="1.2"/>"#,
            d.trim_end()
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            w - 140.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bars_are_well_formed() {
        let s = bar_chart(&[1.0, 0.0, 2.0], &ChartStyle::new("a < b", 200, 100));
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<rect").count(), 1 + 2);
        assert!(s.contains("a &lt; b"));
    }

    #[test]
    fn lines() {
        let a = [0.0, 1.0, 0.5];
        let s = line_chart(&[("x", &a), ("y", &a)], &ChartStyle::new("t", 300, 200));
        assert_eq!(s.matches("<path").count(), 3);
    }
}
