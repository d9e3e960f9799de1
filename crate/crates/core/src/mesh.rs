//! Concentric-ring triangulations of the unit disc and their images.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{MapDescriptor, MapKind};

/// Image triangles with `|area|` below this fraction of the mean triangle
/// area are reported as degenerate.
const DEGENERATE_FRACTION: f64 = 1e-12;

/// Geometric shrinking of the outermost ring widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    /// Ratio between consecutive ring widths, in `(0, 1]`.
    pub factor: f64,
    /// Number of outer rings that are graded.
    pub rings: usize,
}

impl Grading {
    /// Grading applied to cusped boundaries.
    pub const CUSP: Grading = Grading { factor: 0.8, rings: 8 };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub rings: usize,
    pub grading: Option<Grading>,
    /// Angle of the first vertex of every ring.
    #[serde(default)]
    pub rotation: f64,
    /// Every ring carries a multiple of this many vertices.
    #[serde(default = "one")]
    pub angular_multiple: usize,
}

fn one() -> usize {
    1
}

impl MeshSpec {
    pub fn uniform(rings: usize) -> Self {
        MeshSpec {
            rings,
            grading: None,
            rotation: 0.0,
            angular_multiple: 1,
        }
    }

    /// Uniform rings, or for cusped boundaries rings graded toward the
    /// boundary and aligned so that every ring has a vertex on each ray
    /// through a cusp preimage `e^{iθ}`, `θ = (2j+1)π/(n−1)`. Triangles
    /// straddling such a ray fold over under the map.
    pub fn for_map(rings: usize, map: &MapDescriptor) -> Self {
        match map.kind() {
            MapKind::Epicycloid { n, .. } if *n >= 2 => {
                let cusps = (*n - 1) as usize;
                MeshSpec {
                    rings,
                    grading: Some(Grading::CUSP),
                    rotation: PI / cusps as f64,
                    angular_multiple: cusps,
                }
            }
            _ => MeshSpec::uniform(rings),
        }
    }

    /// Vertex count of ring `k` (1-based): `6k` rounded up to a multiple of
    /// `angular_multiple`.
    pub fn ring_vertices(&self, k: usize) -> usize {
        let m = self.angular_multiple.max(1);
        (6 * k).div_ceil(m) * m
    }

    /// Ring radii `r_1 < … < r_R = 1`.
    pub fn radii(&self) -> Result<Vec<f64>> {
        let n = self.rings;
        if n == 0 {
            return Err(Error::Mesh("at least one ring is required".into()));
        }
        let mut widths = vec![1.0; n];
        if let Some(g) = self.grading {
            if !(g.factor > 0.0 && g.factor <= 1.0) {
                return Err(Error::param(format!("grading factor must lie in (0, 1], got {}", g.factor)));
            }
            let m = g.rings.min(n.saturating_sub(1));
            for (j, w) in widths[n - m..].iter_mut().enumerate() {
                *w = g.factor.powi(j as i32 + 1);
            }
        }
        let total: f64 = widths.iter().sum();
        let mut acc = 0.0;
        let mut radii: Vec<f64> = widths
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        radii[n - 1] = 1.0;
        Ok(radii)
    }
}

/// Triangulation with counter-clockwise triangles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
}

/// Uniform concentric-ring mesh: ring `k` at radius `k/rings` carries `6k`
/// vertices, with a six-triangle fan at the centre.
pub fn mesh_disc(rings: usize) -> Result<Mesh> {
    mesh_disc_spec(&MeshSpec::uniform(rings))
}

pub fn mesh_disc_spec(spec: &MeshSpec) -> Result<Mesh> {
    let radii = spec.radii()?;
    let n = radii.len();
    let mut vertices = vec![[0.0, 0.0]];
    let mut boundary = vec![false];
    let mut ring_start = vec![0usize];
    for (k, &r) in radii.iter().enumerate() {
        let m = spec.ring_vertices(k + 1);
        ring_start.push(vertices.len());
        for j in 0..m {
            let t = spec.rotation + 2.0 * PI * j as f64 / m as f64;
            vertices.push([r * t.cos(), r * t.sin()]);
            boundary.push(k + 1 == n);
        }
    }
    let mut triangles = Vec::with_capacity(6 * n * n);
    let centre = spec.ring_vertices(1);
    for j in 0..centre {
        triangles.push([0, 1 + j, 1 + (j + 1) % centre]);
    }
    for k in 1..n {
        // merge ring k with ring k+1 by angle
        let (si, so) = (ring_start[k], ring_start[k + 1]);
        let (ni, no) = (spec.ring_vertices(k), spec.ring_vertices(k + 1));
        let (mut i, mut o) = (0usize, 0usize);
        while i < ni || o < no {
            let next_inner = (i + 1) as f64 / ni as f64;
            let next_outer = (o + 1) as f64 / no as f64;
            let a = si + i % ni;
            let b = so + o % no;
            if o < no && (i == ni || next_outer <= next_inner) {
                triangles.push([a, b, so + (o + 1) % no]);
                o += 1;
            } else {
                triangles.push([a, b, si + (i + 1) % ni]);
                i += 1;
            }
        }
    }
    let mut mesh = Mesh {
        vertices,
        triangles,
        boundary,
    };
    mesh.orient();
    Ok(mesh)
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    fn corners(&self, t: &[usize; 3]) -> [[f64; 2]; 3] {
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Signed area of triangle `i`, positive when counter-clockwise.
    pub fn signed_area(&self, i: usize) -> f64 {
        signed_area(self.corners(&self.triangles[i]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.signed_area(i)).sum()
    }

    fn orient(&mut self) {
        for i in 0..self.triangles.len() {
            if self.signed_area(i) < 0.0 {
                self.triangles[i].swap(1, 2);
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        let mut edges = HashSet::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    /// `V − E + F`, which is 1 for a triangulated disc.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    pub fn min_signed_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| self.signed_area(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest edge length.
    pub fn max_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in &self.triangles {
            let c = self.corners(t);
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                h = h.max((c[a][0] - c[b][0]).hypot(c[a][1] - c[b][1]));
            }
        }
        h
    }

    /// `x ↦ λ R x + s` for a rotation by `angle`.
    pub fn transformed(&self, scale: f64, angle: f64, shift: [f64; 2]) -> Mesh {
        let (s, c) = angle.sin_cos();
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                [
                    scale * (c * v[0] - s * v[1]) + shift[0],
                    scale * (s * v[0] + c * v[1]) + shift[1],
                ]
            })
            .collect();
        Mesh {
            vertices,
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
        }
    }

    /// Plain text: `vertices V`, `V` lines `x y b`, `triangles T`, `T` lines
    /// `i j k`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "vertices {}", self.vertices.len()).unwrap();
        for (v, b) in self.vertices.iter().zip(&self.boundary) {
            writeln!(s, "{:.17e} {:.17e} {}", v[0], v[1], u8::from(*b)).unwrap();
        }
        writeln!(s, "triangles {}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let bad = |m: &str| Error::Parse(format!("mesh text: {m}"));
        let mut it = text.lines().filter(|l| !l.trim().is_empty());
        let mut header = |name: &str| -> Result<usize> {
            let mut f = it.next().ok_or_else(|| bad("truncated"))?.split_whitespace();
            if f.next() != Some(name) {
                return Err(bad(&format!("expected '{name}'")));
            }
            f.next().and_then(|n| n.parse().ok()).ok_or_else(|| bad("bad count"))
        };
        let nv = header("vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        let mut boundary = Vec::with_capacity(nv);
        for _ in 0..nv {
            let f: Vec<&str> = it.next().ok_or_else(|| bad("truncated"))?.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad("vertex line needs 3 fields"));
            }
            let x: f64 = f[0].parse().map_err(|_| bad("bad coordinate"))?;
            let y: f64 = f[1].parse().map_err(|_| bad("bad coordinate"))?;
            vertices.push([x, y]);
            boundary.push(f[2] == "1");
        }
        let nt = {
            let mut f = it.next().ok_or_else(|| bad("truncated"))?.split_whitespace();
            if f.next() != Some("triangles") {
                return Err(bad("expected 'triangles'"));
            }
            f.next().and_then(|n| n.parse::<usize>().ok()).ok_or_else(|| bad("bad count"))?
        };
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let f: Vec<usize> = it
                .next()
                .ok_or_else(|| bad("truncated"))?
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad("bad index")))
                .collect::<Result<_>>()?;
            if f.len() != 3 || f.iter().any(|&i| i >= nv) {
                return Err(bad("triangle line needs 3 valid indices"));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        Ok(Mesh {
            vertices,
            triangles,
            boundary,
        })
    }
}

pub(crate) fn signed_area(c: [[f64; 2]; 3]) -> f64 {
    0.5 * ((c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]))
}

/// Replaces every vertex `z` by `φ(z)`.
///
/// Fails when an image triangle is inverted or degenerate.
pub fn push_forward(mesh: &Mesh, map: &MapDescriptor) -> Result<Mesh> {
    let vertices = mesh
        .vertices
        .iter()
        .map(|v| {
            let w = map.evaluate(Complex64::new(v[0], v[1]))?;
            Ok([w.re, w.im])
        })
        .collect::<Result<Vec<_>>>()?;
    let image = Mesh {
        vertices,
        triangles: mesh.triangles.clone(),
        boundary: mesh.boundary.clone(),
    };
    let mean = image.area().abs() / image.triangles.len() as f64;
    for i in 0..image.triangles.len() {
        let a = image.signed_area(i);
        if !(a > DEGENERATE_FRACTION * mean) {
            let c = image.corners(&image.triangles[i]);
            return Err(Error::Mesh(format!(
                "image triangle {i} near ({:.4}, {:.4}) has area {a:e}; refine the mesh or grade it toward the boundary",
                (c[0][0] + c[1][0] + c[2][0]) / 3.0,
                (c[0][1] + c[1][1] + c[2][1]) / 3.0
            )));
        }
    }
    Ok(image)
}
