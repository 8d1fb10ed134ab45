//! Static SVG figures with fixed canvas sizes and deterministic bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const BAR_COLORS: [&str; 6] = [
    "#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c613c",
];

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

/// Grouped bar chart: one group per entry of `groups`, one bar per series.
/// Used for per-coordinate error bars per model and for sensor-count
/// ablations.
pub fn grouped_bar_svg(
    title: &str,
    groups: &[String],
    series: &[String],
    values: &[Vec<f64>],
    path: &Path,
) -> Result<()> {
    if groups.is_empty() || series.is_empty() {
        return Err(Error::InvalidArgument(
            "bar chart needs at least one group and one series".into(),
        ));
    }
    if values.len() != groups.len() || values.iter().any(|v| v.len() != series.len()) {
        return Err(Error::InvalidArgument(
            "bar chart values must be groups x series".into(),
        ));
    }

    let (w, h) = (720.0, 420.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 70.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let vmax = values
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(*v))
        .max(f64::MIN_POSITIVE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{title}</text>"#,
        w / 2.0
    );
    // Axes.
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#,
        top + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{}" x2="{}" y2="{0}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{:.3e}</text>"#,
        left - 6.0,
        top + 10.0,
        vmax
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">0</text>"#,
        left - 6.0,
        top + plot_h
    );

    let group_w = plot_w / groups.len() as f64;
    let bar_w = group_w * 0.8 / series.len() as f64;
    for (g, group) in groups.iter().enumerate() {
        let gx = left + g as f64 * group_w;
        for (i, _) in series.iter().enumerate() {
            let v = values[g][i];
            let bh = (v / vmax) * plot_h;
            let x = gx + group_w * 0.1 + i as f64 * bar_w;
            let y = top + plot_h - bh;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                fmt2(x),
                fmt2(y),
                fmt2(bar_w * 0.92),
                fmt2(bh),
                BAR_COLORS[i % BAR_COLORS.len()]
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{group}</text>"#,
            fmt2(gx + group_w / 2.0),
            top + plot_h + 18.0
        );
    }
    // Legend.
    for (i, label) in series.iter().enumerate() {
        let lx = left + i as f64 * 110.0;
        let ly = h - 22.0;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/>"#,
            fmt2(lx),
            fmt2(ly - 10.0),
            BAR_COLORS[i % BAR_COLORS.len()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{label}</text>"#,
            fmt2(lx + 16.0),
            fmt2(ly)
        );
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Truth-vs-prediction scatter projected to the xy, xz and yz planes:
/// truths as circles, predictions as crosses, one pane per plane.
pub fn scatter_panes_svg(
    title: &str,
    y_true: &Matrix,
    y_pred: &Matrix,
    path: &Path,
) -> Result<()> {
    if y_true.nrows() == 0 || y_true.ncols() != 3 || y_pred.ncols() != 3 {
        return Err(Error::InvalidArgument(
            "scatter needs non-empty N x 3 matrices".into(),
        ));
    }
    if y_true.nrows() != y_pred.nrows() {
        return Err(Error::InvalidArgument("scatter shapes must match".into()));
    }

    let (w, h) = (960.0, 380.0);
    let pane_w = 280.0;
    let pane_h = 260.0;
    let top = 60.0;
    let panes: [(usize, usize, &str, &str); 3] =
        [(0, 1, "x", "y"), (0, 2, "x", "z"), (1, 2, "y", "z")];

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="26" font-family="sans-serif" font-size="15" text-anchor="middle">{title}</text>"#,
        w / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="44" font-family="sans-serif" font-size="11" text-anchor="middle">circles: truth, crosses: prediction</text>"#,
        w / 2.0
    );

    for (p, (cx, cy, lx, ly)) in panes.iter().enumerate() {
        let ox = 40.0 + p as f64 * (pane_w + 30.0);
        // Shared data range per axis pair.
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for m in [y_true, y_pred] {
            for r in 0..m.nrows() {
                for (d, &c) in [*cx, *cy].iter().enumerate() {
                    lo[d] = lo[d].min(m.get(r, c));
                    hi[d] = hi[d].max(m.get(r, c));
                }
            }
        }
        for d in 0..2 {
            if hi[d] <= lo[d] {
                hi[d] = lo[d] + 1.0;
            }
        }
        let sx = |v: f64| ox + (v - lo[0]) / (hi[0] - lo[0]) * pane_w;
        let sy = |v: f64| top + pane_h - (v - lo[1]) / (hi[1] - lo[1]) * pane_h;

        let _ = writeln!(
            s,
            r#"<rect x="{ox}" y="{top}" width="{pane_w}" height="{pane_h}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{lx} vs {ly}</text>"#,
            fmt2(ox + pane_w / 2.0),
            top + pane_h + 24.0
        );
        for r in 0..y_true.nrows() {
            let (tx, ty) = (sx(y_true.get(r, *cx)), sy(y_true.get(r, *cy)));
            let _ = writeln!(
                s,
                r##"<circle cx="{}" cy="{}" r="2.4" fill="none" stroke="#4878d0"/>"##,
                fmt2(tx),
                fmt2(ty)
            );
            let (px, py) = (sx(y_pred.get(r, *cx)), sy(y_pred.get(r, *cy)));
            let _ = writeln!(
                s,
                r##"<path d="M{} {}l4 4m0 -4l-4 4" stroke="#d65f5f" fill="none"/>"##,
                fmt2(px - 2.0),
                fmt2(py - 2.0)
            );
        }
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
