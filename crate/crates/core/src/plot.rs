//! Standalone SVG rendering of domain boundaries and eigenfunctions.
//!
//! Coordinates are written in data units inside a single transformed group,
//! so a boundary can be read back from the file exactly as it was sampled.

use std::fmt::Write as _;

use crate::eigsolver::ScalarField;
use crate::maps::MapDescriptor;
use crate::mesh::Mesh;

/// Number of contour levels, end points included.
pub const CONTOUR_LEVELS: usize = 11;
const CANVAS: f64 = 480.0;
const MARGIN: f64 = 16.0;

/// `φ(e^{iθ})` at `n` equally spaced angles.
pub fn boundary_points(map: &MapDescriptor, n: usize) -> Vec<[f64; 2]> {
    map.boundary(n).into_iter().map(|w| [w.re, w.im]).collect()
}

fn colour(t: f64) -> String {
    // blue → white → red
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = t / 0.5;
        (0.23 + 0.77 * s, 0.30 + 0.70 * s, 0.75 + 0.25 * s)
    } else {
        let s = (t - 0.5) / 0.5;
        (1.0 - 0.29 * s, 1.0 - 0.98 * s, 1.0 - 0.85 * s)
    };
    let c = |x: f64| (x * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

/// Renders the closed `boundary` and, when given, a filled contour plot of
/// `field` on `mesh`: triangles are coloured by the band of their mean value
/// and the interior level lines are drawn on top.
pub fn render_svg(boundary: &[[f64; 2]], field: Option<(&Mesh, &ScalarField)>, title: &str) -> String {
    let mut pts: Vec<[f64; 2]> = boundary.to_vec();
    if let Some((m, _)) = field {
        pts.extend_from_slice(&m.vertices);
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let s = (CANVAS - 2.0 * MARGIN) / span;
    let tx = MARGIN - s * x0 + 0.5 * (CANVAS - 2.0 * MARGIN - s * (x1 - x0));
    let ty = MARGIN + s * y1 + 0.5 * (CANVAS - 2.0 * MARGIN - s * (y1 - y0));

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    )
    .unwrap();
    writeln!(out, "<title>{}</title>", escape(title)).unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(out, r#"<g transform="matrix({s:.9} 0 0 {:.9} {tx:.9} {ty:.9})">"#, -s).unwrap();

    if let Some((mesh, u)) = field {
        let v = u.values();
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        let bands = (CONTOUR_LEVELS - 1) as f64;
        writeln!(out, r#"<g id="field" stroke="none">"#).unwrap();
        for t in &mesh.triangles {
            let mean = (v[t[0]] + v[t[1]] + v[t[2]]) / 3.0;
            let band = (((mean - lo) / width) * bands).floor().min(bands - 1.0);
            let c = colour((band + 0.5) / bands);
            let [a, b, d] = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
            writeln!(
                out,
                r#"<polygon points="{:.9},{:.9} {:.9},{:.9} {:.9},{:.9}" fill="{c}"/>"#,
                a[0], a[1], b[0], b[1], d[0], d[1]
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
        writeln!(
            out,
            r##"<g id="levels" stroke="#333333" stroke-width="0.6" vector-effect="non-scaling-stroke" fill="none">"##
        )
        .unwrap();
        for l in 1..CONTOUR_LEVELS - 1 {
            let level = lo + width * l as f64 / bands;
            let mut d = String::new();
            for t in &mesh.triangles {
                if let Some((p, q)) = level_segment(mesh, v, t, level) {
                    write!(d, "M{:.9},{:.9}L{:.9},{:.9}", p[0], p[1], q[0], q[1]).unwrap();
                }
            }
            if !d.is_empty() {
                writeln!(out, r#"<path d="{d}" vector-effect="non-scaling-stroke"/>"#).unwrap();
            }
        }
        writeln!(out, "</g>").unwrap();
    }

    if !boundary.is_empty() {
        let mut d = String::new();
        for (i, p) in boundary.iter().enumerate() {
            write!(d, "{}{:.12},{:.12} ", if i == 0 { "M" } else { "L" }, p[0], p[1]).unwrap();
        }
        d.push('Z');
        writeln!(
            out,
            r#"<path id="boundary" d="{d}" fill="none" stroke="black" stroke-width="1.5" vector-effect="non-scaling-stroke"/>"#
        )
        .unwrap();
    }
    writeln!(out, "</g>\n</svg>").unwrap();
    out
}

fn level_segment(mesh: &Mesh, v: &[f64], t: &[usize; 3], level: f64) -> Option<([f64; 2], [f64; 2])> {
    let mut hits = Vec::with_capacity(2);
    for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
        let (fa, fb) = (v[a] - level, v[b] - level);
        if (fa < 0.0) != (fb < 0.0) {
            let s = fa / (fa - fb);
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            hits.push([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]);
        }
    }
    (hits.len() == 2).then(|| (hits[0], hits[1]))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Points of the `id="boundary"` path of an SVG produced by [`render_svg`].
pub fn read_boundary(svg: &str) -> Option<Vec<[f64; 2]>> {
    let start = svg.find(r#"id="boundary" d=""#)? + r#"id="boundary" d=""#.len();
    let d = &svg[start..start + svg[start..].find('"')?];
    d.split_whitespace()
        .filter(|t| *t != "Z")
        .map(|t| {
            let (x, y) = t.trim_start_matches(['M', 'L']).split_once(',')?;
            Some([x.parse().ok()?, y.parse().ok()?])
        })
        .collect()
}

/// Number of cusps of a closed polyline: places where the tangent turns by
/// more than a right angle between consecutive edges, with adjacent
/// detections merged.
pub fn count_cusps(points: &[[f64; 2]]) -> usize {
    let n = points.len();
    if n < 3 {
        return 0;
    }
    let edge = |i: usize| {
        let (a, b) = (points[i % n], points[(i + 1) % n]);
        [b[0] - a[0], b[1] - a[1]]
    };
    let sharp: Vec<bool> = (0..n)
        .map(|i| {
            let (e0, e1) = (edge(i + n - 1), edge(i));
            e0[0] * e1[0] + e0[1] * e1[1] < 0.0
        })
        .collect();
    (0..n).filter(|&i| sharp[i] && !sharp[(i + n - 1) % n]).count()
}
