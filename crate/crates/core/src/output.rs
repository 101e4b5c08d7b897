//! CSV tables and SVG line plots.
//!
//! Numbers are written as `{:.11e}` (12 significant digits), so repeated
//! runs on the same input produce byte-identical files.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::iteration::SolutionProfile;

pub fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_sci(x: Option<f64>) -> String {
    x.map_or_else(String::new, sci)
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes a table; every row must have the header's width.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.iter().map(|c| field(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}

pub fn solution_rows(p: &SolutionProfile) -> Vec<Vec<String>> {
    (0..p.grid.len()).map(|i| [p.grid[i], p.u1[i], p.u2[i], p.du1[i], p.du2[i]].map(sci).to_vec()).collect()
}

pub const SOLUTION_HEADER: [&str; 5] = ["r", "u1", "u2", "du1", "du2"];

pub fn write_solution_csv(path: &Path, p: &SolutionProfile) -> io::Result<()> {
    write_csv(path, &SOLUTION_HEADER, &solution_rows(p))
}

/// A named series for [`line_plot`].
pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub y: &'a [f64],
}

/// Values above this switch the y axis to a log scale.
pub const LOG_SCALE_THRESHOLD: f64 = 1e6;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Renders series over a shared x grid as a standalone SVG document.
/// Non-finite points (and non-positive ones on a log axis) are skipped.
pub fn line_plot(title: &str, x_label: &str, x: &[f64], series: &[Series<'_>]) -> String {
    let ymax_raw = series.iter().flat_map(|s| s.y.iter().copied()).filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let log = ymax_raw > LOG_SCALE_THRESHOLD;
    let tf = |v: f64| if log { if v > 0.0 { v.log10() } else { f64::NAN } } else { v };
    let ys: Vec<f64> = series.iter().flat_map(|s| s.y.iter().map(|&v| tf(v))).filter(|v| v.is_finite()).collect();
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(y0.is_finite() && y1.is_finite()) {
        (y0, y1) = (0.0, 1.0);
    }
    if y1 - y0 <= 1e-12 * y1.abs().max(1.0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (x0, x1) = match (x.first(), x.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => (0.0, 1.0),
    };
    let px = |v: f64| LEFT + (v - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |v: f64| H - BOTTOM - (v - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="20" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let (bx, by) = (px(x0), py(y0));
    let _ = writeln!(s, r#"<path d="M {bx:.2} {:.2} L {bx:.2} {by:.2} L {:.2} {by:.2}" stroke="black" fill="none"/>"#, py(y1), px(x1));
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let ylab = if log { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{xv:.3}</text>"#, px(xv), by + 16.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{ylab}</text>"#, bx - 4.0, py(yv) + 3.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(x_label));
    if log {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="10">log scale</text>"#, LEFT, TOP - 2.0);
    }
    for (k, se) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for (&xv, &yv) in x.iter().zip(se.y) {
            let v = tf(yv);
            if !(v.is_finite() && xv.is_finite()) {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2} {:.2} ", if pen_down { "L " } else { "M " }, px(xv), py(v));
            pen_down = true;
        }
        if !d.is_empty() {
            let _ = writeln!(s, r#"<path d="{}" stroke="{}" stroke-width="1.5" fill="none"/>"#, d.trim_end(), se.color);
        }
        let ly = TOP + 14.0 * (k as f64 + 1.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}" font-size="11" fill="{}">{}</text>"#, W - RIGHT - 60.0, se.color, escape(se.name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_solution_svg(path: &Path, p: &SolutionProfile) -> io::Result<()> {
    let svg = line_plot(
        "radial profiles",
        "r",
        &p.grid,
        &[Series { name: "u1", color: "#1f77b4", y: &p.u1 }, Series { name: "u2", color: "#d62728", y: &p.u2 }],
    );
    std::fs::write(path, svg)
}

pub(crate) fn limit_row(name: &str, est: Option<&crate::limits::LimitEstimate>) -> Vec<String> {
    match est {
        Some(e) => vec![
            name.to_string(),
            "limit".into(),
            sci(e.value_at_rmax),
            e.verdict.to_string(),
            opt_sci(e.extrapolated_limit),
            opt_sci(e.error_estimate),
        ],
        None => vec![name.to_string(), "limit".into(), String::new(), "absent".into(), String::new(), String::new()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format_has_twelve_digits() {
        assert_eq!(sci(1.0), "1.00000000000e0");
        assert_eq!(sci(-626.0), "-6.26000000000e2");
    }

    #[test]
    fn csv_fields_are_quoted_when_needed() {
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(field("plain"), "plain");
    }

    #[test]
    fn large_values_switch_to_log_scale() {
        let x = [0.0, 1.0, 2.0];
        let small = line_plot("t", "r", &x, &[Series { name: "u", color: "red", y: &[1.0, 2.0, 3.0] }]);
        let big = line_plot("t", "r", &x, &[Series { name: "u", color: "red", y: &[1.0, 1e3, 1e7] }]);
        assert!(!small.contains("log scale"));
        assert!(big.contains("log scale"));
    }

    #[test]
    fn non_finite_points_break_the_path() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let svg = line_plot("t", "r", &x, &[Series { name: "u", color: "red", y: &[1.0, f64::NAN, 2.0, 3.0] }]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        let path = svg.lines().find(|l| l.contains("stroke=\"red\"")).unwrap();
        assert_eq!(path.matches('M').count(), 2);
    }
}
