//! Minimal scatter-plot SVG writer for the CSV files produced by the CLI.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const CURVE_POINTS: usize = 200;

/// Named, coloured polyline.
type Curve = (&'static str, &'static str, Vec<(f64, f64)>);

/// Reference curves drawn as functions of the Bell value on the x axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Overlay {
    None,
    /// Lower and upper distance bounds for a raw pair.
    Bounds {
        d: usize,
        m: usize,
    },
    /// Exact distance for a doubled pair.
    Embedded {
        d: usize,
        m: usize,
    },
}

impl Overlay {
    fn curves(self) -> Vec<Curve> {
        let sample = |d: usize, m: usize, f: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> {
            let (lo, hi) = (-(m as f64), (m * (d - 1)) as f64);
            (0..CURVE_POINTS)
                .map(|k| {
                    let v = lo + (hi - lo) * k as f64 / (CURVE_POINTS - 1) as f64;
                    (v, f(v).clamp(0.0, 1.0).sqrt())
                })
                .collect()
        };
        match self {
            Overlay::None => Vec::new(),
            Overlay::Bounds { d, m } => {
                let (df, mf) = (d as f64, m as f64);
                vec![
                    ("lower", "#d62728", sample(d, m, &|v| 1.0 - (v + mf) / (mf * df))),
                    ("upper", "#2ca02c", sample(d, m, &|v| 1.0 - (v - mf * (df - 2.0)) / mf)),
                ]
            }
            Overlay::Embedded { d, m } => {
                let (df, mf) = (d as f64, m as f64);
                vec![("exact", "#d62728", sample(d, m, &|v| 1.0 - (v + mf) / (mf * df)))]
            }
        }
    }
}

/// Reads two named numeric columns from a CSV file.
pub fn read_columns(path: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::from(e).in_file(path))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in {}", path.display())))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut points = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize, name: &str| -> Result<f64> {
            let cell = rec.get(i).unwrap_or("");
            cell.trim()
                .parse()
                .map_err(|_| Error::Schema(format!("row {}: `{cell}` in column `{name}` is not a number", row + 2)))
        };
        points.push((parse(ix, x)?, parse(iy, y)?));
    }
    Ok(points)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a scatter plot with axes, ticks and optional overlay curves.
pub fn render_scatter(points: &[(f64, f64)], x_label: &str, y_label: &str, overlay: Overlay) -> String {
    let curves = overlay.curves();
    let all = || {
        points
            .iter()
            .copied()
            .chain(curves.iter().flat_map(|c| c.2.iter().copied()))
    };
    let (x0, x1) = range(all().map(|p| p.0));
    let (y0, y1) = range(all().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/></g>"#
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11" fill="black">"#);
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#,
            bottom + 5.0,
            bottom + 18.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g fill="#1f77b4" fill-opacity="0.6">"##);
    for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(x), sy(y));
    }
    let _ = writeln!(s, "</g>");

    for (name, color, pts) in &curves {
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="{name}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Reads `csv_path`, plots column `x` against column `y`, and writes `out`.
pub fn plot_csv(csv_path: &Path, x: &str, y: &str, overlay: Overlay, out: &Path) -> Result<()> {
    let points = read_columns(csv_path, x, y)?;
    std::fs::write(out, render_scatter(&points, x, y, overlay)).map_err(|e| Error::from(e).in_file(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_csv_gives_valid_svg() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("a.csv");
        std::fs::write(&csv, "pair_id,V,D,lower,upper\n").unwrap();
        let out = dir.path().join("a.svg");
        plot_csv(&csv, "V", "D", Overlay::Bounds { d: 4, m: 2 }, &out).unwrap();
        let svg = std::fs::read_to_string(&out).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 0);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn missing_column_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("a.csv");
        std::fs::write(&csv, "V,D\n1,0.5\n").unwrap();
        let err = read_columns(&csv, "V", "nope").unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn points_and_curve_lengths() {
        let svg = render_scatter(&[(0.0, 0.5), (1.0, 0.2)], "V", "D", Overlay::Embedded { d: 4, m: 2 });
        assert_eq!(svg.matches("<circle").count(), 2);
        let poly = svg.lines().find(|l| l.contains("<polyline")).unwrap();
        let pts = poly.split("points=\"").nth(1).unwrap();
        assert_eq!(pts.split(' ').count(), CURVE_POINTS);
    }
}
