//! SVG sketches of function profiles, one panel per edge.

use std::fmt::Write;

use tropgraph::rational::to_f64;
use tropgraph::{MetricGraph, TropFunction};

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 180.0;
const PAD: f64 = 24.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub fn profiles(g: &MetricGraph, names: &[String], fs: &[TropFunction]) -> String {
    let edges: Vec<_> = g.edge_ids().collect();
    let height = PANEL_H * edges.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    for (row, &e) in edges.iter().enumerate() {
        let top = row as f64 * PANEL_H;
        let edge = g.edge(e);
        let len = to_f64(&edge.length);
        let polylines: Vec<Vec<(f64, f64)>> = fs
            .iter()
            .map(|f| {
                f.profile(e)
                    .map(|p| p.breaks().iter().zip(p.values_at_breaks()).map(|(t, y)| (to_f64(t), to_f64(y))).collect())
                    .unwrap_or_default()
            })
            .collect();
        let ys = polylines.iter().flatten().map(|&(_, y)| y);
        let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 1.0, lo.max(0.0) + 1.0) };
        let sx = |t: f64| PAD + t / len * (PANEL_W - 2.0 * PAD);
        let sy = |y: f64| top + PANEL_H - PAD - (y - lo) / (hi - lo) * (PANEL_H - 2.0 * PAD);
        let _ = writeln!(
            svg,
            r#"<text x="{PAD}" y="{:.1}">{} ({} to {})</text>"#,
            top + 14.0,
            edge.name,
            g.vertex_name(edge.ends[0]),
            g.vertex_name(edge.ends[1])
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999"/>"##,
            sx(0.0),
            top + PANEL_H - PAD,
            sx(len),
            top + PANEL_H - PAD
        );
        for (k, pts) in polylines.iter().enumerate() {
            if pts.is_empty() {
                continue;
            }
            let path: Vec<String> = pts.iter().map(|&(t, y)| format!("{:.1},{:.1}", sx(t), sy(y))).collect();
            let color = COLORS[k % COLORS.len()];
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
                path.join(" "),
                names.get(k).map_or("", String::as_str)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
