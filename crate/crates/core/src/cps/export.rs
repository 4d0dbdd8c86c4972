//! Window exports: cloud CSV, cover-box JSON and an SVG scatter plot for planar internal spaces.

use std::fmt::Write;

use serde_json::json;

use super::WindowEstimate;

/// One row per cloud point: colour, then internal coordinates.
pub fn windows_to_csv(windows: &[WindowEstimate], colours: &[String]) -> String {
    let dim = windows.first().map_or(0, |w| w.dimension());
    let mut out = String::from("colour");
    for a in 0..dim {
        let _ = write!(out, ",z{a}");
    }
    out.push('\n');
    for w in windows {
        for z in &w.points {
            out.push_str(&colours[w.colour]);
            for x in z {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn windows_to_json(windows: &[WindowEstimate], colours: &[String]) -> serde_json::Value {
    let items: Vec<_> = windows
        .iter()
        .map(|w| {
            let (inner, outer) = w.cover_boxes();
            json!({
                "colour": colours[w.colour],
                "source_radius": w.source_radius,
                "cell": w.cell,
                "points": w.points.len(),
                "bbox": {"lo": w.bbox.0, "hi": w.bbox.1},
                "inner_volume": w.inner_volume(),
                "outer_volume": w.outer_volume(),
                "inner_cover": inner.iter().map(|(lo, hi)| json!({"lo": lo, "hi": hi})).collect::<Vec<_>>(),
                "outer_cover": outer.iter().map(|(lo, hi)| json!({"lo": lo, "hi": hi})).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "windows": items })
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Planar internal spaces give a scatter plot of the clouds; a line gives one row per colour
/// with the outer cover, the inner cover and the points. `None` in higher dimension.
pub fn windows_to_svg(windows: &[WindowEstimate]) -> Option<String> {
    match windows.first().map(WindowEstimate::dimension) {
        Some(1) if windows.iter().all(|w| w.dimension() == 1) => Some(strips(windows)),
        Some(2) if windows.iter().all(|w| w.dimension() == 2) => Some(scatter(windows)),
        _ => None,
    }
}

fn strips(windows: &[WindowEstimate]) -> String {
    let lo = windows
        .iter()
        .map(|w| w.bbox.0[0] - w.cell)
        .fold(f64::INFINITY, f64::min);
    let hi = windows
        .iter()
        .map(|w| w.bbox.1[0] + w.cell)
        .fold(f64::NEG_INFINITY, f64::max);
    let (width, row) = (600.0, 40.0);
    let scale = width / (hi - lo).max(1e-9);
    let height = row * windows.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    for (k, w) in windows.iter().enumerate() {
        let colour = PALETTE[w.colour % PALETTE.len()];
        let top = row * k as f64;
        let (inner, outer) = w.cover_boxes();
        for (boxes, opacity) in [(outer, 0.25), (inner, 0.6)] {
            for (a, b) in boxes {
                let x = (a[0] - lo) * scale;
                let dx = (b[0] - a[0]) * scale;
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.3}" y="{:.3}" width="{dx:.3}" height="{:.3}" fill="{colour}" fill-opacity="{opacity}"/>"#,
                    top + 8.0,
                    row - 16.0
                );
            }
        }
        for z in &w.points {
            let x = (z[0] - lo) * scale;
            let _ = writeln!(
                out,
                r#"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="black" stroke-width="0.5"/>"#,
                top + 4.0,
                top + row - 4.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn scatter(windows: &[WindowEstimate]) -> String {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for w in windows {
        for a in 0..2 {
            lo[a] = lo[a].min(w.bbox.0[a]);
            hi[a] = hi[a].max(w.bbox.1[a]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let size = 600.0;
    let scale = size / span;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    for w in windows {
        let colour = PALETTE[w.colour % PALETTE.len()];
        for z in &w.points {
            let x = (z[0] - lo[0]) * scale;
            let y = size - (z[1] - lo[1]) * scale;
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.3}" cy="{y:.3}" r="1.5" fill="{colour}"/>"#
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
