//! Minimal static SVG line and bar charts. Output depends only on the input
//! numbers, so identical data always yields identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const TICKS: usize = 5;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn range_of(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x_label: &str, y_label: &str, y_range: (f64, f64)) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=TICKS {
        let frac = k as f64 / TICKS as f64;
        let y = y0 - frac * (y0 - y1);
        let v = y_range.0 + frac * (y_range.1 - y_range.0);
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{y:.2}" x2="{x1:.1}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0,
            x0 - 6.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, names: &[(&str, &str)]) {
    let x = WIDTH - MARGIN_RIGHT + 12.0;
    for (i, (name, color)) in names.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{:.1}" width="14" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            y - 9.0,
            x + 20.0,
            y,
            escape(name)
        );
    }
}

/// One named polyline.
pub struct Line<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, lines: &[Line<'_>]) -> String {
    let all = || lines.iter().flat_map(|l| l.points.iter());
    let x_range = range_of(all().map(|p| p.0));
    let y_range = range_of(all().map(|p| p.1));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, x_label, y_label, y_range);

    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    for k in 0..=TICKS {
        let frac = k as f64 / TICKS as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x0 + frac * (x1 - x0),
            y0 + 16.0,
            tick_label(x_range.0 + frac * (x_range.1 - x_range.0))
        );
    }
    let sx = |x: f64| x0 + (x - x_range.0) / (x_range.1 - x_range.0) * (x1 - x0);
    let sy = |y: f64| y0 - (y - y_range.0) / (y_range.1 - y_range.0) * (y0 - y1);
    let mut names = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        names.push((line.name, color));
        let mut pts = String::with_capacity(line.points.len() * 16);
        for &(x, y) in line
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
        {
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-name="{}" fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            escape(line.name),
            pts.trim_end()
        );
    }
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// A labelled group of bars, one per series.
pub struct BarGroup {
    pub label: String,
    pub values: Vec<f64>,
    /// Extra `data-*` attributes per bar (same length as `values`).
    pub attrs: Vec<Vec<(String, String)>>,
}

pub fn bar_chart(title: &str, y_label: &str, series_names: &[&str], groups: &[BarGroup]) -> String {
    let max = groups
        .iter()
        .flat_map(|g| g.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let y_range = (0.0, if max > 0.0 { max * 1.15 } else { 1.0 });
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, "", y_label, y_range);

    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    let group_w = (x1 - x0) / groups.len().max(1) as f64;
    let n = series_names.len().max(1) as f64;
    let bar_w = group_w * 0.8 / n;
    let sy = |y: f64| y0 - (y - y_range.0) / (y_range.1 - y_range.0) * (y0 - y1);
    for (gi, g) in groups.iter().enumerate() {
        let gx = x0 + gi as f64 * group_w;
        for (si, &v) in g.values.iter().enumerate() {
            let color = PALETTE[si % PALETTE.len()];
            let x = gx + group_w * 0.1 + si as f64 * bar_w;
            let top = sy(v.max(0.0));
            let mut extra = String::new();
            if let Some(attrs) = g.attrs.get(si) {
                for (k, val) in attrs {
                    let _ = write!(extra, r#" data-{}="{}""#, k, escape(val));
                }
            }
            let _ = writeln!(
                out,
                r#"<rect class="bar"{extra} data-value="{v}" x="{x:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                bar_w,
                y0 - top
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                x + bar_w / 2.0,
                top - 3.0,
                tick_label(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            gx + group_w / 2.0,
            y0 + 16.0,
            escape(&g.label)
        );
    }
    let names: Vec<(&str, &str)> = series_names
        .iter()
        .enumerate()
        .map(|(i, n)| (*n, PALETTE[i % PALETTE.len()]))
        .collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}
