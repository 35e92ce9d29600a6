//! Static SVG rendering of embeddings and ratio traces.

use std::collections::BTreeSet;
use std::fmt::Write;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

// one colour per traced component
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

struct Frame {
    min: (f64, f64),
    scale: (f64, f64),
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone, equal: bool) -> Self {
        let bounds = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (x0, x1) = bounds(&mut xs.clone());
        let (y0, y1) = bounds(&mut ys.clone());
        let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
        let inner = SIZE - 2.0 * MARGIN;
        let (mut sx, mut sy) = (inner / span(x0, x1), inner / span(y0, y1));
        if equal {
            let s = sx.min(sy);
            sx = s;
            sy = s;
        }
        Frame { min: (x0, y0), scale: (sx, sy) }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (
            MARGIN + (x - self.min.0) * self.scale.0,
            SIZE - MARGIN - (y - self.min.1) * self.scale.1,
        )
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Nodes, undirected neighbour edges and 0-based index labels of a 1-D or
/// 2-D embedding. Higher-dimensional embeddings are drawn on their first two
/// axes.
pub fn embedding(coords: &[Vec<f64>], edges: &[(usize, usize)]) -> String {
    let xy: Vec<(f64, f64)> = coords
        .iter()
        .map(|c| (c.first().copied().unwrap_or(0.0), c.get(1).copied().unwrap_or(0.0)))
        .collect();
    let frame = Frame::fit(xy.iter().map(|p| p.0), xy.iter().map(|p| p.1), true);
    let pairs: BTreeSet<(usize, usize)> = edges
        .iter()
        .map(|&(i, j)| (i.min(j), i.max(j)))
        .filter(|&(i, j)| i != j && j < xy.len())
        .collect();

    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(out, r##"<g stroke="#888" stroke-width="1">"##);
    for (i, j) in pairs {
        let (x1, y1) = frame.map(xy[i].0, xy[i].1);
        let (x2, y2) = frame.map(xy[j].0, xy[j].1);
        let _ = writeln!(out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g fill="#1f77b4">"##);
    for &(x, y) in &xy {
        let (cx, cy) = frame.map(x, y);
        let _ = writeln!(out, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="4"/>"#);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="9" fill="black">"#);
    for (i, &(x, y)) in xy.iter().enumerate() {
        let (cx, cy) = frame.map(x, y);
        let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}">{i}</text>"#, cx + 5.0, cy - 5.0);
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

/// One curve per component (labelled from 1) against the step count.
/// `rows` holds `(step, ratios)` for every traced step.
pub fn ratio_trace(rows: &[(usize, Vec<f64>)]) -> String {
    let steps = rows.iter().map(|r| r.0 as f64);
    let frame = Frame::fit(
        steps.chain([0.0]),
        rows.iter().flat_map(|r| r.1.iter().copied()).chain([0.0, 1.0]),
        false,
    );
    let m = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);

    let mut out = String::new();
    header(&mut out);
    let (ox, oy) = frame.map(0.0, 0.0);
    let (_, top) = frame.map(0.0, 1.0);
    let (right, _) = frame.map(rows.last().map_or(1.0, |r| r.0 as f64), 0.0);
    let _ = writeln!(
        out,
        r#"<g stroke="black"><line x1="{ox:.3}" y1="{oy:.3}" x2="{right:.3}" y2="{oy:.3}"/><line x1="{ox:.3}" y1="{oy:.3}" x2="{ox:.3}" y2="{top:.3}"/></g>"#
    );
    let _ = writeln!(
        out,
        r#"<g font-family="sans-serif" font-size="11"><text x="{:.3}" y="{:.3}">step</text><text x="{:.3}" y="{:.3}">0</text><text x="{:.3}" y="{top:.3}">1</text><text x="{right:.3}" y="{:.3}">{}</text></g>"#,
        SIZE / 2.0,
        SIZE - 8.0,
        ox - 14.0,
        oy + 4.0,
        ox - 14.0,
        oy + 16.0,
        rows.last().map_or(0, |r| r.0)
    );
    for c in 0..m {
        let colour = PALETTE[c % PALETTE.len()];
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|(s, r)| frame.map(*s as f64, r.get(c).copied().unwrap_or(0.0)))
            .collect();
        if pts.len() == 1 {
            let (x, y) = pts[0];
            let _ = writeln!(
                out,
                r#"<circle data-component="{}" cx="{x:.3}" cy="{y:.3}" r="3" fill="{colour}"/>"#,
                c + 1
            );
        } else {
            let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline data-component="{}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                c + 1,
                coords.join(" ")
            );
        }
        let (lx, ly) = *pts.last().expect("rows is non-empty when m > 0");
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{ly:.3}" font-family="sans-serif" font-size="11" fill="{colour}">{}</text>"#,
            lx + 4.0,
            c + 1
        );
    }
    out.push_str("</svg>\n");
    out
}
