//! Static SVG pictures of quadrangulations.
//!
//! Each quadrilateral is drawn in its own chart — vertices `0`, `w_r`,
//! `w_d`, `w_ℓ` in counterclockwise order — and the charts are laid out
//! left to right in index order.  Every side carries the label of the
//! wedge side it is a copy of, so the gluing can be read off: the side
//! labeled `2r` on one quadrilateral is identified with the side labeled
//! `2r` on another.  Output is deterministic: rendering the same
//! quadrangulation twice produces byte-identical documents.

use std::fmt::Write;

use crate::combinatorics::Side;
use crate::quadrangulation::{Quadrangulation, Vec2};

/// Pixels per unit length.
const SCALE: f64 = 60.0;
/// Margin around and between charts, in pixels.
const MARGIN: f64 = 30.0;

fn fmt_px(v: f64) -> String {
    // Fixed precision keeps the output stable across runs.
    format!("{v:.2}")
}

fn corners(q: &Quadrangulation, i: usize) -> [(f64, f64); 4] {
    let wl = q.side(i, Side::Left);
    let wr = q.side(i, Side::Right);
    let d = q.diagonal(i);
    let p = |v: &Vec2| (v.x.to_f64(), v.y.to_f64());
    [(0.0, 0.0), p(wr), p(&d), p(wl)]
}

/// Renders `q` as a standalone SVG document.
pub fn render_svg(q: &Quadrangulation) -> String {
    // Chart bounding boxes in math coordinates.
    let boxes: Vec<(f64, f64, f64, f64)> = (1..=q.k())
        .map(|i| {
            let cs = corners(q, i);
            let xs = cs.iter().map(|c| c.0);
            let ys = cs.iter().map(|c| c.1);
            (
                xs.clone().fold(f64::INFINITY, f64::min),
                xs.fold(f64::NEG_INFINITY, f64::max),
                ys.clone().fold(f64::INFINITY, f64::min),
                ys.fold(f64::NEG_INFINITY, f64::max),
            )
        })
        .collect();
    let height_units = boxes.iter().map(|b| b.3 - b.2).fold(0.0, f64::max);
    let height = height_units * SCALE + 2.0 * MARGIN + 20.0;
    let mut width = MARGIN;

    let mut body = String::new();
    for i in 1..=q.k() {
        let (xmin, xmax, _ymin, ymax) = boxes[i - 1];
        let ox = width - xmin * SCALE;
        let oy = MARGIN + ymax * SCALE;
        let to_px = |(x, y): (f64, f64)| (ox + x * SCALE, oy - y * SCALE);
        let cs = corners(q, i);

        let points: Vec<String> = cs
            .iter()
            .map(|&c| {
                let (px, py) = to_px(c);
                format!("{},{}", fmt_px(px), fmt_px(py))
            })
            .collect();
        writeln!(
            body,
            r#"  <polygon class="quad" points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();

        // Side labels: corners are 0, w_r, w_d, w_ℓ; the side from w_ℓ to
        // w_d is a copy of wedge side (π_ℓ(i), r), the side from w_r to
        // w_d a copy of (π_r(i), ℓ).
        let labels = [
            (0usize, 3usize, i, Side::Left),
            (0, 1, i, Side::Right),
            (3, 2, q.datum().perm_l().apply(i), Side::Right),
            (1, 2, q.datum().perm_r().apply(i), Side::Left),
        ];
        for (a, b, index, side) in labels {
            let mid = ((cs[a].0 + cs[b].0) / 2.0, (cs[a].1 + cs[b].1) / 2.0);
            let (px, py) = to_px(mid);
            writeln!(
                body,
                r#"  <text class="side" x="{}" y="{}">{}{}</text>"#,
                fmt_px(px),
                fmt_px(py),
                index,
                side.letter()
            )
            .unwrap();
        }

        // Chart title under the base vertex.
        let (px, py) = to_px((0.0, 0.0));
        writeln!(
            body,
            r#"  <text class="title" x="{}" y="{}">q{}</text>"#,
            fmt_px(px),
            fmt_px(py + 16.0),
            i
        )
        .unwrap();

        width += (xmax - xmin) * SCALE + MARGIN;
    }

    let mut doc = String::new();
    writeln!(
        doc,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt_px(width),
        fmt_px(height),
        fmt_px(width),
        fmt_px(height)
    )
    .unwrap();
    writeln!(
        doc,
        r#"  <style>.quad {{ fill: #dce8f5; stroke: #27415e; stroke-width: 1.5 }} .side {{ font: 12px monospace; fill: #27415e; text-anchor: middle }} .title {{ font: bold 13px monospace; text-anchor: middle }}</style>"#
    )
    .unwrap();
    doc.push_str(&body);
    doc.push_str("</svg>\n");
    doc
}
