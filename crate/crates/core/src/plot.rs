//! Ternary SVG diagrams of topology maps.

use std::fmt::Write as _;

use crate::locus::{SimplexPoint, TopologyMap};
use crate::split::LeafSet;

pub const WIDTH: f64 = 600.0;
pub const HEIGHT: f64 = 520.0;

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
    "#bab0ac", "#86bcb6", "#d37295",
];

/// Pixel positions of the corners for weights e0, e1, e2.
const CORNERS: [(f64, f64); 3] = [(50.0, 470.0), (550.0, 470.0), (300.0, 470.0 - 433.012_701_892_219_3)];

fn to_px(p: [f64; 3]) -> (f64, f64) {
    let x = p[0] * CORNERS[0].0 + p[1] * CORNERS[1].0 + p[2] * CORNERS[2].0;
    let y = p[0] * CORNERS[0].1 + p[1] * CORNERS[1].1 + p[2] * CORNERS[2].1;
    (x, y)
}

/// Keeps the part of a polygon (in barycentric coordinates) where coordinate `axis` is nonnegative.
fn clip(poly: &[[f64; 3]], axis: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ina, inb) = (a[axis] >= 0.0, b[axis] >= 0.0);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = a[axis] / (a[axis] - b[axis]);
            out.push([0, 1, 2].map(|k| a[k] + t * (b[k] - a[k])));
        }
    }
    out
}

/// The lattice point's dual hexagon, clipped to the simplex.
fn cell(counts: [usize; 3], r: usize) -> Vec<[f64; 3]> {
    const OFFSETS: [[f64; 3]; 6] = [
        [2.0, -1.0, -1.0],
        [1.0, 1.0, -2.0],
        [-1.0, 2.0, -1.0],
        [-2.0, 1.0, 1.0],
        [-1.0, -1.0, 2.0],
        [1.0, -2.0, 1.0],
    ];
    let r = r as f64;
    let q = counts.map(|c| c as f64 / r);
    let mut poly: Vec<[f64; 3]> = OFFSETS
        .iter()
        .map(|o| [0, 1, 2].map(|k| q[k] + o[k] / (3.0 * r)))
        .collect();
    for axis in 0..3 {
        poly = clip(&poly, axis);
    }
    poly
}

/// Ternary diagram with one filled path per topology region and a dot per
/// weight vector in `dots`. Output depends only on the inputs.
pub fn simplex_svg(map: &TopologyMap, leaves: &LeafSet, dots: &[SimplexPoint]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for (id, region) in map.regions.iter().enumerate() {
        let colour = PALETTE[region.topology % PALETTE.len()];
        let mut d = String::new();
        for p in map.points.iter().filter(|p| p.region == id) {
            let poly = cell(p.counts, map.resolution);
            for (k, v) in poly.iter().enumerate() {
                let (x, y) = to_px(*v);
                let _ = write!(d, "{}{x:.2},{y:.2} ", if k == 0 { "M" } else { "L" });
            }
            d.push_str("Z ");
        }
        let topo = &map.topologies[region.topology];
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="{colour}" stroke="{colour}" stroke-width="0.3"><title>T{}: {}</title></path>"#,
            d.trim_end(),
            region.topology + 1,
            escape(&topo.describe(leaves))
        );
    }
    let outline: Vec<String> = CORNERS.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        svg,
        r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        outline.join(" ")
    );
    for p in dots {
        let s = p.as_slice();
        if s.len() != 3 {
            continue;
        }
        let (x, y) = to_px([s[0], s[1], s[2]]);
        let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="black"/>"#);
    }
    let labels = [("v0", -24.0, 16.0), ("v1", 8.0, 16.0), ("v2", -8.0, -8.0)];
    for ((x, y), (name, dx, dy)) in CORNERS.iter().zip(labels) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14">{name}</text>"#,
            x + dx,
            y + dy
        );
    }
    let sizes = map.topology_sizes();
    for (t, size) in sizes.iter().enumerate() {
        let y = 20.0 + 16.0 * t as f64;
        let colour = PALETTE[t % PALETTE.len()];
        let _ = writeln!(svg, r#"<rect x="10" y="{:.2}" width="10" height="10" fill="{colour}"/>"#, y - 9.0);
        let _ = writeln!(
            svg,
            r#"<text x="26" y="{y:.2}" font-family="sans-serif" font-size="11">T{} ({size} pts)</text>"#,
            t + 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
