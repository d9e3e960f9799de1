//! First non-trivial Neumann eigenvalue of the p-Laplacian by P1 finite
//! elements.
//!
//! The discrete problem is to minimise `Q(u) = ∫|∇u|^p / ∫|u|^p` over
//! piecewise-linear `u` with `∫|u|^{p−2}u = 0`. Since `D(c) = ∫|u − c|^p` is
//! convex in `c` and stationary exactly where that constraint holds, the
//! constrained problem is the unconstrained minimisation of the shift
//! invariant functional `R(u) = Q(u − c*(u))`, whose gradient is `∇Q` at the
//! shifted field. The descent below works on `R`, so every recorded value is
//! an admissible Rayleigh quotient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::maps::MapDescriptor;
use crate::mesh::{mesh_disc_spec, push_forward, Mesh, MeshSpec};

/// Symmetric degree-4 rule on the reference triangle: (barycentric point,
/// weight) with weights summing to 1, each orbit listed once.
const QUAD_ORBITS: [(f64, f64); 2] = [
    (0.445_948_490_915_964_886, 0.223_381_589_678_011_466),
    (0.091_576_213_509_770_743, 1.0 / 3.0 - 0.223_381_589_678_011_466),
];

fn quad_points() -> [([f64; 3], f64); 6] {
    let mut out = [([0.0; 3], 0.0); 6];
    let mut k = 0;
    for (a, w) in QUAD_ORBITS {
        let b = 1.0 - 2.0 * a;
        for l in [[a, a, b], [a, b, a], [b, a, a]] {
            out[k] = (l, w);
            k += 1;
        }
    }
    out
}

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

/// A value per mesh vertex, interpolated linearly on each triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::param(format!(
                "field has {} values for {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("field values must be finite"));
        }
        Ok(ScalarField { values })
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::new(mesh, mesh.vertices.iter().map(|v| f(v[0], v[1])).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `x y value` rows, one per vertex.
    pub fn to_table(&self, mesh: &Mesh) -> String {
        let mut s = String::from("x y u\n");
        for (v, u) in mesh.vertices.iter().zip(&self.values) {
            s.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v[0], v[1], u));
        }
        s
    }
}

/// Per-triangle areas and shape-function gradients.
#[derive(Debug, Clone)]
pub struct Discretization {
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
    n_vertices: usize,
}

impl Discretization {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let mut areas = Vec::with_capacity(mesh.triangles.len());
        let mut grads = Vec::with_capacity(mesh.triangles.len());
        for (i, t) in mesh.triangles.iter().enumerate() {
            let [a, b, c] = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
            let area = mesh.signed_area(i);
            if !(area > 0.0) {
                return Err(Error::Mesh(format!("triangle {i} has non-positive area {area:e}")));
            }
            let s = 0.5 / area;
            grads.push([
                [(b[1] - c[1]) * s, (c[0] - b[0]) * s],
                [(c[1] - a[1]) * s, (a[0] - c[0]) * s],
                [(a[1] - b[1]) * s, (b[0] - a[0]) * s],
            ]);
            areas.push(area);
        }
        Ok(Discretization {
            triangles: mesh.triangles.clone(),
            areas,
            grads,
            n_vertices: mesh.n_vertices(),
        })
    }

    fn gradient_on(&self, i: usize, u: &[f64]) -> [f64; 2] {
        let (t, g) = (&self.triangles[i], &self.grads[i]);
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += u[t[k]] * g[k][0];
            out[1] += u[t[k]] * g[k][1];
        }
        out
    }

    /// `Σ_T area_T |∇u|_T^p`.
    pub fn energy(&self, u: &[f64], p: f64) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let g = self.gradient_on(i, u);
                self.areas[i] * (g[0] * g[0] + g[1] * g[1]).powf(0.5 * p)
            })
            .sum()
    }

    /// `∫ f(u − c)` by the degree-4 rule.
    fn integrate(&self, u: &[f64], c: f64, f: impl Fn(f64) -> f64) -> f64 {
        let qp = quad_points();
        let mut total = 0.0;
        for (i, t) in self.triangles.iter().enumerate() {
            let mut s = 0.0;
            for (l, w) in &qp {
                let v = l[0] * u[t[0]] + l[1] * u[t[1]] + l[2] * u[t[2]] - c;
                s += w * f(v);
            }
            total += self.areas[i] * s;
        }
        total
    }

    /// `∫|u − c|^p`.
    pub fn p_mass(&self, u: &[f64], c: f64, p: f64) -> f64 {
        self.integrate(u, c, |v| v.abs().powf(p))
    }

    /// `g(c) = ∫|u − c|^{p−2}(u − c)` and `g'(c)`.
    fn constraint(&self, u: &[f64], c: f64, p: f64) -> (f64, f64) {
        let qp = quad_points();
        let (mut g, mut dg) = (0.0, 0.0);
        for (i, t) in self.triangles.iter().enumerate() {
            let (mut s, mut ds) = (0.0, 0.0);
            for (l, w) in &qp {
                let v = l[0] * u[t[0]] + l[1] * u[t[1]] + l[2] * u[t[2]] - c;
                let a = v.abs().powf(p - 2.0);
                s += w * a * v;
                ds += w * a;
            }
            g += self.areas[i] * s;
            dg -= (p - 1.0) * self.areas[i] * ds;
        }
        (g, dg)
    }

    /// `∫|u|^{p−1}`, the scale of the constraint.
    fn constraint_scale(&self, u: &[f64], c: f64, p: f64) -> f64 {
        self.integrate(u, c, |v| v.abs().powf(p - 1.0))
    }

    /// Root of `g` by Newton steps safeguarded with bisection on the bracket
    /// `[min u, max u]`, stopped at `|g| ≤ 1e−13 ∫|u − c|^{p−1}`.
    pub fn shift_root(&self, u: &[f64], p: f64) -> Result<f64> {
        let (lo, hi) = u
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !(hi > lo) {
            return Err(Error::DegenerateField("constant field has no admissible shift".into()));
        }
        monotone_root(|c| self.constraint(u, c, p), |c| self.constraint_scale(u, c, p), lo, hi)
    }

    /// `Q(u)` and, on request, its gradient with respect to nodal values.
    pub fn quotient_and_gradient(&self, u: &[f64], p: f64, grad: Option<&mut [f64]>) -> Result<f64> {
        let qp = quad_points();
        let (mut num, mut den) = (0.0, 0.0);
        let mut gn = grad.as_ref().map(|_| vec![0.0; self.n_vertices]);
        let mut gd = grad.as_ref().map(|_| vec![0.0; self.n_vertices]);
        for (i, t) in self.triangles.iter().enumerate() {
            let a = self.areas[i];
            let g = self.gradient_on(i, u);
            let n2 = g[0] * g[0] + g[1] * g[1];
            num += a * n2.powf(0.5 * p);
            let vals = [u[t[0]], u[t[1]], u[t[2]]];
            let mut s = 0.0;
            let mut ds = [0.0; 3];
            for (l, w) in &qp {
                let v = l[0] * vals[0] + l[1] * vals[1] + l[2] * vals[2];
                let av = v.abs();
                s += w * av.powf(p);
                let d = w * av.powf(p - 2.0) * v;
                for k in 0..3 {
                    ds[k] += d * l[k];
                }
            }
            den += a * s;
            if let (Some(gn), Some(gd)) = (gn.as_mut(), gd.as_mut()) {
                let c = p * a * if n2 > 0.0 { n2.powf(0.5 * p - 1.0) } else { 0.0 };
                let gr = &self.grads[i];
                for k in 0..3 {
                    gn[t[k]] += c * (g[0] * gr[k][0] + g[1] * gr[k][1]);
                    gd[t[k]] += p * a * ds[k];
                }
            }
        }
        if !(den > 0.0) {
            return Err(Error::DegenerateField("field vanishes identically".into()));
        }
        let q = num / den;
        if let (Some(out), Some(gn), Some(gd)) = (grad, gn, gd) {
            for (o, (n, d)) in out.iter_mut().zip(gn.iter().zip(&gd)) {
                *o = (n - q * d) / den;
            }
        }
        Ok(q)
    }

    /// `R(u) = Q(u − c*)`, with the shifted field.
    fn shifted_quotient(&self, u: &[f64], p: f64) -> Result<(f64, Vec<f64>)> {
        let c = self.shift_root(u, p)?;
        let v: Vec<f64> = u.iter().map(|x| x - c).collect();
        Ok((self.quotient_and_gradient(&v, p, None)?, v))
    }

    /// P1 stiffness plus `sigma` times the consistent mass matrix.
    pub fn stiffness_plus_mass(&self, sigma: f64) -> CsMat<f64> {
        let n = self.n_vertices;
        let mut tri = TriMat::with_capacity((n, n), 9 * self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let (area, g) = (self.areas[i], &self.grads[i]);
            for j in 0..3 {
                for k in 0..3 {
                    let stiff = area * (g[j][0] * g[k][0] + g[j][1] * g[k][1]);
                    let mass = area / 12.0 * if j == k { 2.0 } else { 1.0 };
                    tri.add_triplet(t[j], t[k], stiff + sigma * mass);
                }
            }
        }
        tri.to_csr()
    }

    /// Hessian of `∫|∇u|^p + ∫|u|^p` at `u`, divided by `p`. The coefficients
    /// `|∇u|^{p−2}(I + (p−2) n nᵀ)` and `(p−1)|u|^{p−2}` are lifted by a small
    /// fraction of their means so the operator stays definite where `u` or
    /// `∇u` vanishes. For p = 2 this is [`Self::stiffness_plus_mass`] with
    /// `sigma = 1`.
    fn hessian_model(&self, u: &[f64], p: f64) -> CsMat<f64> {
        if p == 2.0 {
            return self.stiffness_plus_mass(1.0);
        }
        let qp = quad_points();
        let total: f64 = self.areas.iter().sum();
        let (mut grad_mean, mut value_mean) = (0.0, 0.0);
        for (i, t) in self.triangles.iter().enumerate() {
            let g = self.gradient_on(i, u);
            grad_mean += self.areas[i] * (g[0] * g[0] + g[1] * g[1]).powf(0.5 * (p - 2.0));
            value_mean += self.areas[i]
                * qp.iter()
                    .map(|(l, w)| w * (l[0] * u[t[0]] + l[1] * u[t[1]] + l[2] * u[t[2]]).abs().powf(p - 2.0))
                    .sum::<f64>();
        }
        let grad_floor = 1e-2 * grad_mean / total;
        let value_floor = 1e-2 * (p - 1.0) * value_mean / total;

        let n = self.n_vertices;
        let mut tri = TriMat::with_capacity((n, n), 9 * self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let (area, gr) = (self.areas[i], &self.grads[i]);
            let g = self.gradient_on(i, u);
            let norm2 = g[0] * g[0] + g[1] * g[1];
            let w = norm2.powf(0.5 * (p - 2.0));
            let aniso = if norm2 > 0.0 { (p - 2.0) * w / norm2 } else { 0.0 };
            let a = [
                w + grad_floor + aniso * g[0] * g[0],
                aniso * g[0] * g[1],
                w + grad_floor + aniso * g[1] * g[1],
            ];
            let mut local = [[0.0; 3]; 3];
            for (l, qw) in &qp {
                let v = l[0] * u[t[0]] + l[1] * u[t[1]] + l[2] * u[t[2]];
                let c = qw * area * ((p - 1.0) * v.abs().powf(p - 2.0) + value_floor);
                for j in 0..3 {
                    for k in 0..3 {
                        local[j][k] += c * l[j] * l[k];
                    }
                }
            }
            for j in 0..3 {
                for k in 0..3 {
                    let (x, y) = (gr[j], gr[k]);
                    let stiff = area * (a[0] * x[0] * y[0] + a[1] * (x[0] * y[1] + x[1] * y[0]) + a[2] * x[1] * y[1]);
                    tri.add_triplet(t[j], t[k], stiff + local[j][k]);
                }
            }
        }
        tri.to_csr()
    }

    /// Consistent mass matrix applied to `u`.
    pub fn mass_apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        for (i, t) in self.triangles.iter().enumerate() {
            let s = u[t[0]] + u[t[1]] + u[t[2]];
            for &k in t {
                out[k] += self.areas[i] / 12.0 * (s + u[k]);
            }
        }
        out
    }
}

/// Root of a decreasing function on `[lo, hi]` with `f(lo) ≥ 0 ≥ f(hi)`.
fn monotone_root(
    f: impl Fn(f64) -> (f64, f64),
    scale: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let mut c = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (g, dg) = f(c);
        if g.abs() <= 1e-13 * scale(c) || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(c);
        }
        if g > 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        let newton = c - g / dg;
        c = if dg < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(c)
}

/// Shift `c` solving `Σ w_i |v_i − c|^{p−2}(v_i − c) = 0` for weighted samples.
pub fn weighted_shift(values: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        return Err(Error::DegenerateField("constant samples have no admissible shift".into()));
    }
    let g = |c: f64| {
        values.iter().zip(weights).fold((0.0, 0.0), |(g, dg), (&v, &w)| {
            let a = (v - c).abs().powf(p - 2.0);
            (g + w * a * (v - c), dg - (p - 1.0) * w * a)
        })
    };
    let scale = |c: f64| {
        values
            .iter()
            .zip(weights)
            .map(|(&v, &w)| w * (v - c).abs().powf(p - 1.0))
            .sum()
    };
    monotone_root(g, scale, lo, hi)
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::param(format!("p must be finite and >= 2, got {p}")));
    }
    Ok(())
}

/// `Σ_T |∇u|_T^p area_T / ∫|u|^p`.
pub fn rayleigh_quotient(mesh: &Mesh, u: &ScalarField, p: f64) -> Result<f64> {
    check_p(p)?;
    Discretization::new(mesh)?.quotient_and_gradient(u.values(), p, None)
}

/// Gradient of [`rayleigh_quotient`] with respect to the nodal values.
pub fn rayleigh_gradient(mesh: &Mesh, u: &ScalarField, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    let mut g = vec![0.0; mesh.n_vertices()];
    Discretization::new(mesh)?.quotient_and_gradient(u.values(), p, Some(&mut g))?;
    Ok(g)
}

/// `(u − c, c)` with `∫|u − c|^{p−2}(u − c) = 0`.
pub fn constraint_shift(mesh: &Mesh, u: &ScalarField, p: f64) -> Result<(ScalarField, f64)> {
    check_p(p)?;
    let c = Discretization::new(mesh)?.shift_root(u.values(), p)?;
    let shifted = u.values().iter().map(|v| v - c).collect();
    Ok((ScalarField { values: shifted }, c))
}

/// `|∫|u|^{p−2}u| / ∫|u|^{p−1}`.
pub fn constraint_residual(mesh: &Mesh, u: &ScalarField, p: f64) -> Result<f64> {
    let d = Discretization::new(mesh)?;
    let (g, _) = d.constraint(u.values(), 0.0, p);
    Ok(g.abs() / d.constraint_scale(u.values(), 0.0, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Relative decrease of the quotient below which the descent stops.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Start fields, in order: x, y, then seeded random fields.
    pub starts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tolerance: 1e-8,
            max_iter: 5000,
            starts: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub start: String,
    pub mu: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub mu: f64,
    pub field: ScalarField,
    pub constraint_residual: f64,
    pub iterations: usize,
    /// Quotient after every accepted step, starting with the initial field.
    pub rayleigh_trace: Vec<f64>,
    pub converged: bool,
    /// Which start produced `mu`.
    pub start: String,
    pub seed: u64,
    pub starts: Vec<StartSummary>,
}

impl EigenResult {
    pub fn trace_is_monotone(&self) -> bool {
        self.rayleigh_trace.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Conjugate gradients with Jacobi preconditioning; `x` holds the initial
/// guess and receives the solution. Returns the iteration count.
pub fn pcg(a: &CsMat<f64>, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> usize {
    let n = b.len();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).copied().unwrap_or(1.0)).collect();
    let mut r = b.to_vec();
    let ax = mat_vec(a, x);
    for (ri, axi) in r.iter_mut().zip(&ax) {
        *ri -= axi;
    }
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= rel_tol * bnorm {
            return it;
        }
        let ad = mat_vec(a, &d);
        let alpha = rz / dot(&d, &ad);
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            d[i] = z[i] + beta * d[i];
        }
    }
    max_iter
}

fn mat_vec(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    a.outer_iterator()
        .map(|row| row.iter().map(|(j, v)| v * x[j]).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Centroid and scale `s = √(|Ω|/π)` that map the mesh to unit area scale.
fn normalisation(mesh: &Mesh) -> ([f64; 2], f64) {
    let n = mesh.n_vertices() as f64;
    let (sx, sy) = mesh.vertices.iter().fold((0.0, 0.0), |(a, b), v| (a + v[0], b + v[1]));
    ([sx / n, sy / n], (mesh.area() / std::f64::consts::PI).sqrt())
}

struct Descent {
    mu: f64,
    field: Vec<f64>,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// `z = P⁻¹ g / p`, with `P` the Hessian model at the current
/// iterate. For p = 2 a unit step along `−z` is a shifted inverse-iteration
/// step.
fn precondition(precond: &CsMat<f64>, g: &[f64], z: &mut [f64], p: f64) {
    let b: Vec<f64> = g.iter().map(|x| x / p).collect();
    pcg(precond, &b, z, 1e-10, 10 * g.len());
}

/// Preconditioned Polak–Ribière+ descent on `R`, with Armijo backtracking
/// from the unit step.
fn descend(d: &Discretization, u0: Vec<f64>, p: f64, opts: &EigenOptions) -> Result<Descent> {
    let n = u0.len();
    let normalise = |v: Vec<f64>| -> Result<(f64, Vec<f64>)> {
        let (q, v) = d.shifted_quotient(&v, p)?;
        let s = d.p_mass(&v, 0.0, p).powf(-1.0 / p);
        Ok((q, v.into_iter().map(|x| x * s).collect()))
    };
    let (mut q, mut u) = normalise(u0)?;
    let mut trace = vec![q];
    let mut g = vec![0.0; n];
    d.quotient_and_gradient(&u, p, Some(&mut g))?;
    let mut z = vec![0.0; n];
    precondition(&d.hessian_model(&u, p), &g, &mut z, p);
    let mut dir: Vec<f64> = z.iter().map(|x| -x).collect();
    let mut gz = dot(&g, &z);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            dir = z.iter().map(|x| -x).collect();
            slope = -gz;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            if let Ok((qt, vt)) = normalise(trial) {
                if qt <= q + ARMIJO * t * slope {
                    accepted = Some((qt, vt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((q_new, u_new)) = accepted else {
            // no decrease representable along a descent direction
            converged = gz.abs() <= opts.tolerance * q.max(f64::MIN_POSITIVE) || trace.len() > 1;
            break;
        };
        let decrease = (q - q_new) / q;
        q = q_new;
        u = u_new;
        trace.push(q);

        let mut g_new = vec![0.0; n];
        d.quotient_and_gradient(&u, p, Some(&mut g_new))?;
        let mut z_new = z.clone();
        precondition(&d.hessian_model(&u, p), &g_new, &mut z_new, p);
        let gz_new = dot(&g_new, &z_new);
        let beta = ((gz_new - dot(&z_new, &g)) / gz).max(0.0);
        for i in 0..n {
            dir[i] = -z_new[i] + beta * dir[i];
        }
        g = g_new;
        z = z_new;
        gz = gz_new;
        if decrease < opts.tolerance && gz.abs() < opts.tolerance * q {
            converged = true;
            break;
        }
    }
    Ok(Descent {
        mu: q,
        field: u,
        trace,
        iterations,
        converged,
    })
}

fn start_fields(mesh: &Mesh, opts: &EigenOptions) -> Vec<(String, Vec<f64>)> {
    (0..opts.starts)
        .map(|k| match k {
            0 => ("x".to_string(), mesh.vertices.iter().map(|v| v[0]).collect()),
            1 => ("y".to_string(), mesh.vertices.iter().map(|v| v[1]).collect()),
            _ => {
                let seed = opts.seed.wrapping_add(k as u64 - 2);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v = (0..mesh.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (format!("random:{seed}"), v)
            }
        })
        .collect()
}

/// Minimises the p-Rayleigh quotient from every start and keeps the best.
///
/// The mesh is first translated to its vertex centroid and scaled to the
/// area of the unit disc, so that the iteration is identical for dilated
/// copies of a mesh; the eigenvalue is then rescaled by `s^{−p}`.
pub fn minimize_eigen(mesh: &Mesh, p: f64, opts: &EigenOptions) -> Result<EigenResult> {
    check_p(p)?;
    if opts.starts == 0 || !(opts.tolerance > 0.0) {
        return Err(Error::param("at least one start and a positive tolerance are required"));
    }
    let (centre, s) = normalisation(mesh);
    let inv = 1.0 / s;
    let unit = mesh.transformed(inv, 0.0, [-centre[0] * inv, -centre[1] * inv]);
    let d = Discretization::new(&unit)?;
    let runs = start_fields(&unit, opts)
        .into_par_iter()
        .map(|(name, u0)| descend(&d, u0, p, opts).map(|r| (name, r)))
        .collect::<Vec<_>>();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.1.mu < runs[b].1.mu { i } else { b });
    let starts = runs
        .iter()
        .map(|(name, r)| StartSummary {
            start: name.clone(),
            mu: r.mu * s.powf(-p),
            iterations: r.iterations,
            converged: r.converged,
        })
        .collect();
    let (name, run) = runs.into_iter().nth(best).expect("at least one start");
    let scale_mu = s.powf(-p);
    let field_scale = s.powf(-2.0 / p);
    let field = ScalarField {
        values: run.field.iter().map(|v| v * field_scale).collect(),
    };
    let (g, _) = d.constraint(&run.field, 0.0, p);
    let residual = g.abs() / d.constraint_scale(&run.field, 0.0, p);
    Ok(EigenResult {
        mu: run.mu * scale_mu,
        field,
        constraint_residual: residual,
        iterations: run.iterations,
        rayleigh_trace: run.trace.iter().map(|q| q * scale_mu).collect(),
        converged: run.converged,
        start: name,
        seed: opts.seed,
        starts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEigen {
    pub mu: f64,
    pub field: ScalarField,
    pub iterations: usize,
    pub converged: bool,
}

/// Smallest positive eigenvalue of `K u = μ M u` by inverse iteration with
/// the constants deflated in the mass inner product.
pub fn linear_eigen(mesh: &Mesh, tolerance: f64, max_iter: usize) -> Result<LinearEigen> {
    let d = Discretization::new(mesh)?;
    let k = d.stiffness_plus_mass(0.0);
    let n = mesh.n_vertices();
    let ones = vec![1.0; n];
    let m1 = d.mass_apply(&ones);
    let total = dot(&ones, &m1);
    let deflate = |u: &mut Vec<f64>| {
        let c = dot(u, &m1) / total;
        u.iter_mut().for_each(|x| *x -= c);
        let nrm = dot(u, &d.mass_apply(u)).sqrt();
        u.iter_mut().for_each(|x| *x /= nrm);
    };
    let mut u: Vec<f64> = mesh.vertices.iter().map(|v| v[0] + 0.3 * v[1]).collect();
    deflate(&mut u);
    let rayleigh = |u: &[f64]| dot(u, &mat_vec(&k, u)) / dot(u, &d.mass_apply(u));
    let mut mu = rayleigh(&u);
    let mut x = u.clone();
    for it in 1..=max_iter {
        let mut b = d.mass_apply(&u);
        let mean = b.iter().sum::<f64>() / n as f64;
        b.iter_mut().for_each(|v| *v -= mean);
        pcg(&k, &b, &mut x, 1e-13, 20 * n);
        u = x.clone();
        deflate(&mut u);
        let mu_new = rayleigh(&u);
        let change = (mu - mu_new).abs() / mu_new;
        mu = mu_new;
        if change < tolerance {
            return Ok(LinearEigen {
                mu,
                field: ScalarField { values: u },
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(LinearEigen {
        mu,
        field: ScalarField { values: u },
        iterations: max_iter,
        converged: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyLevel {
    pub rings: usize,
    /// Largest edge of the image mesh.
    pub h: f64,
    pub mu: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<StudyLevel>,
    /// Richardson limit from the last three levels, when their differences
    /// shrink geometrically.
    pub extrapolated: Option<f64>,
    pub observed_order: Option<f64>,
    /// Consecutive values move in one direction, up to 1e−3 relative noise.
    pub monotone: bool,
}

/// Solves on each refinement level and extrapolates.
pub fn convergence_study(map: &MapDescriptor, p: f64, rings: &[usize], opts: &EigenOptions) -> Result<ConvergenceStudy> {
    if rings.is_empty() || rings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("ring counts must be non-empty and increasing"));
    }
    let levels = rings
        .par_iter()
        .map(|&r| {
            let mesh = push_forward(&mesh_disc_spec(&MeshSpec::for_map(r, map))?, map)?;
            let res = minimize_eigen(&mesh, p, opts)?;
            Ok(StudyLevel {
                rings: r,
                h: mesh.max_edge(),
                mu: res.mu,
                converged: res.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mus: Vec<f64> = levels.iter().map(|l| l.mu).collect();
    let monotone = {
        let noise = |a: f64, b: f64| (a - b).abs() <= 1e-3 * a.abs();
        let down = mus.windows(2).all(|w| w[1] <= w[0] || noise(w[0], w[1]));
        let up = mus.windows(2).all(|w| w[1] >= w[0] || noise(w[0], w[1]));
        down || up
    };
    let (mut extrapolated, mut observed_order) = (None, None);
    if levels.len() >= 3 {
        let l = &levels[levels.len() - 3..];
        let (d1, d2) = (l[1].mu - l[0].mu, l[2].mu - l[1].mu);
        let ratio = l[1].h / l[2].h;
        if d1 * d2 > 0.0 && d2.abs() < d1.abs() && ratio > 1.0 {
            let order = (d1 / d2).ln() / ratio.ln();
            observed_order = Some(order);
            extrapolated = Some(l[2].mu + d2 / (ratio.powf(order) - 1.0));
        }
    }
    Ok(ConvergenceStudy {
        levels,
        extrapolated,
        observed_order,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::mesh_disc;
    use proptest::prelude::*;
    use rand::Rng;

    /// `j′₁,₁` by Newton's method on the power series of `J₁′`.
    fn bessel_j1_prime_root() -> f64 {
        let j1p = |x: f64| {
            // J₁′(x) = Σ (−1)^k (2k+1) (x/2)^{2k} / (2 k! (k+1)!)
            let mut term = 0.5;
            let mut s = 0.0;
            let mut ds = 0.0;
            let h = 0.25 * x * x;
            for k in 0..40 {
                let kf = k as f64;
                s += (2.0 * kf + 1.0) * term;
                if k > 0 {
                    ds += (2.0 * kf + 1.0) * term * 2.0 * kf / x;
                }
                term *= -h / ((kf + 1.0) * (kf + 2.0));
            }
            (s, ds)
        };
        let mut x = 1.8;
        for _ in 0..50 {
            let (f, df) = j1p(x);
            x -= f / df;
        }
        x
    }

    #[test]
    fn bessel_oracle() {
        let j = bessel_j1_prime_root();
        assert!((j - 1.841_183_781_340_659).abs() < 1e-12, "{j}");
    }

    #[test]
    fn quadrature_weights() {
        let qp = quad_points();
        let w: f64 = qp.iter().map(|q| q.1).sum();
        assert!((w - 1.0).abs() < 1e-14);
        // exact for x⁴ on the reference triangle: ∫ λ₀⁴ = 2·4!/6! = 1/15 of twice the area
        let s: f64 = qp.iter().map(|(l, w)| w * l[0].powi(4)).sum();
        assert!((s - 2.0 * 24.0 / 720.0).abs() < 1e-14);
    }

    #[test]
    fn constant_field_has_zero_quotient() {
        let m = mesh_disc(4).unwrap();
        let u = ScalarField::from_fn(&m, |_, _| 2.5).unwrap();
        assert!(rayleigh_quotient(&m, &u, 3.0).unwrap() < 1e-20);
        let z = ScalarField::from_fn(&m, |_, _| 0.0).unwrap();
        assert!(matches!(rayleigh_quotient(&m, &z, 3.0), Err(Error::DegenerateField(_))));
        assert!(constraint_shift(&m, &u, 3.0).is_err());
    }

    #[test]
    fn linear_field_on_disc() {
        let m = mesh_disc(64).unwrap();
        let u = ScalarField::from_fn(&m, |x, _| x).unwrap();
        let q = rayleigh_quotient(&m, &u, 2.0).unwrap();
        assert!((q - 4.0).abs() / 4.0 < 1e-2, "{q}");
    }

    #[test]
    fn dilation_scales_quotient() {
        let m = mesh_disc(6).unwrap();
        let u = ScalarField::from_fn(&m, |x, y| x * x - 0.3 * y + x * y).unwrap();
        for p in [2.0, 3.0, 4.5] {
            let q = rayleigh_quotient(&m, &u, p).unwrap();
            let lam = 1.7;
            let q2 = rayleigh_quotient(&m.transformed(lam, 0.4, [1.0, 2.0]), &u, p).unwrap();
            assert!((q2 / q - lam.powf(-p)).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_examples() {
        let m = mesh_disc(8).unwrap();
        let u = ScalarField::from_fn(&m, |x, y| x.exp() + y).unwrap();
        let (_, c) = constraint_shift(&m, &u, 2.0).unwrap();
        let d = Discretization::new(&m).unwrap();
        let ones = vec![1.0; m.n_vertices()];
        let mean = dot(u.values(), &d.mass_apply(&ones)) / m.area();
        assert!((c - mean).abs() < 1e-12);
        // odd under x → −x
        let odd = ScalarField::from_fn(&m, |x, y| x * x * x + x * y * y).unwrap();
        for p in [2.0, 3.0, 4.0, 7.0] {
            let (_, c) = constraint_shift(&m, &odd, p).unwrap();
            assert!(c.abs() < 1e-12, "p={p}: {c}");
        }
        let c = weighted_shift(&[0.0, 0.0, 1.0], &[1.0, 1.0, 1.0], 4.0).unwrap();
        assert!((c - 1.0 / (1.0 + 2f64.cbrt())).abs() < 1e-12);
        assert!((c - 0.4425).abs() < 1e-4);
    }

    #[test]
    fn shift_meets_constraint() {
        let m = mesh_disc(10).unwrap();
        let u = ScalarField::from_fn(&m, |x, y| (3.0 * x).sin() + y * y * y + 0.2).unwrap();
        for p in [2.0, 2.5, 4.0, 10.0] {
            let (v, _) = constraint_shift(&m, &u, p).unwrap();
            assert!(constraint_residual(&m, &v, p).unwrap() < 1e-12);
        }
    }

    fn perturbed_mesh(seed: u64) -> Mesh {
        let mut m = mesh_disc(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in m.vertices.iter_mut() {
            v[0] += rng.gen_range(-0.05..0.05);
            v[1] += rng.gen_range(-0.05..0.05);
        }
        m
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn gradient_matches_finite_differences(seed in 0u64..1000, p in 2.0f64..6.0) {
            let m = perturbed_mesh(seed);
            prop_assume!(m.min_signed_area() > 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
            let u = ScalarField::new(&m, (0..m.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let g = rayleigh_gradient(&m, &u, p).unwrap();
            let h = 1e-6;
            for i in 0..m.n_vertices() {
                let mut a = u.values().to_vec();
                let mut b = a.clone();
                a[i] += h;
                b[i] -= h;
                let fd = (rayleigh_quotient(&m, &ScalarField::new(&m, a).unwrap(), p).unwrap()
                    - rayleigh_quotient(&m, &ScalarField::new(&m, b).unwrap(), p).unwrap()) / (2.0 * h);
                let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((fd - g[i]).abs() <= 1e-5 * gnorm.max(g[i].abs()), "i={} fd={} g={}", i, fd, g[i]);
            }
        }
    }

    #[test]
    fn p2_disc_calibration() {
        let m = mesh_disc(32).unwrap();
        let r = minimize_eigen(&m, 2.0, &EigenOptions::default()).unwrap();
        let target = bessel_j1_prime_root().powi(2);
        assert!(r.converged);
        assert!((r.mu - target).abs() / target < 1e-2, "{}", r.mu);
        assert!(r.trace_is_monotone());
        assert!(r.constraint_residual < 1e-10);
        let lin = linear_eigen(&m, 1e-14, 500).unwrap();
        assert!(lin.converged);
        assert!((lin.mu - r.mu).abs() / lin.mu < 1e-6, "{} vs {}", lin.mu, r.mu);
    }

    #[test]
    fn dilation_of_the_eigenvalue() {
        let m = mesh_disc(8).unwrap();
        for p in [2.0, 3.0] {
            let a = minimize_eigen(&m, p, &EigenOptions::default()).unwrap();
            let b = minimize_eigen(&m.transformed(2.0, 0.0, [0.0, 0.0]), p, &EigenOptions::default()).unwrap();
            assert!((b.mu / a.mu - 2f64.powf(-p)).abs() < 1e-10);
        }
    }

    #[test]
    fn rigid_motion_invariance() {
        let m = push_forward(&mesh_disc(6).unwrap(), &MapDescriptor::ellipse_shear(0.5).unwrap()).unwrap();
        let opts = EigenOptions {
            tolerance: 1e-15,
            ..EigenOptions::default()
        };
        let a = minimize_eigen(&m, 3.0, &opts).unwrap();
        let b = minimize_eigen(&m.transformed(1.0, 1.1, [5.0, -3.0]), 3.0, &opts).unwrap();
        assert!((a.mu - b.mu).abs() / a.mu < 1e-12, "{} {}", a.mu, b.mu);
    }

    #[test]
    fn p4_disc_is_bracketed() {
        let m = mesh_disc(16).unwrap();
        let r = minimize_eigen(&m, 4.0, &EigenOptions::default()).unwrap();
        let lower = crate::bounds::convex_lower_bound(4.0, 2.0).unwrap();
        let x = ScalarField::from_fn(&m, |x, _| x).unwrap();
        let (xs, _) = constraint_shift(&m, &x, 4.0).unwrap();
        let upper = rayleigh_quotient(&m, &xs, 4.0).unwrap();
        assert!(lower <= r.mu && r.mu <= upper, "{lower} {} {upper}", r.mu);
        assert!(r.trace_is_monotone());
        assert_eq!(r.starts.len(), 3);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let m = mesh_disc(5).unwrap();
        let opts = EigenOptions {
            seed: 42,
            ..EigenOptions::default()
        };
        let a = minimize_eigen(&m, 3.0, &opts).unwrap();
        let b = minimize_eigen(&m, 3.0, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.starts[2].start, "random:42");
    }

    #[test]
    fn study_extrapolates() {
        let s = convergence_study(&MapDescriptor::identity(), 2.0, &[8, 16, 32], &EigenOptions::default()).unwrap();
        assert!(s.monotone);
        assert!(s.levels.iter().all(|l| l.mu > 0.0));
        let e = s.extrapolated.unwrap();
        assert!((e - 3.390).abs() / 3.390 < 5e-3, "{e}");
        assert!(convergence_study(&MapDescriptor::identity(), 2.0, &[8, 8], &EigenOptions::default()).is_err());
    }
}
