//! Tensor-product polar quadrature on the unit disc.
//!
//! The radial direction uses Gauss–Legendre panels on `[0, 1]` (optionally
//! graded geometrically toward `r = 1`), the angular direction the uniform
//! trapezoid rule, which is spectrally accurate for periodic integrands.
//! Values are accumulated radial-major with Neumaier compensation, so the
//! result does not depend on how node evaluations are scheduled.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::MapDescriptor;

/// Number of geometrically graded panels toward `r = 1`.
const GRADED_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Geometric grading factor toward `r = 1`; `1.0` means a single panel.
    pub boundary_refinement: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_nodes: 64,
            angular_nodes: 256,
            boundary_refinement: 0.7,
        }
    }
}

impl QuadratureSpec {
    pub fn new(radial_nodes: usize, angular_nodes: usize, boundary_refinement: f64) -> Result<Self> {
        let spec = QuadratureSpec {
            radial_nodes,
            angular_nodes,
            boundary_refinement,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 4 {
            return Err(Error::param(format!(
                "radial_nodes must be >= 4, got {}",
                self.radial_nodes
            )));
        }
        if self.angular_nodes < 8 {
            return Err(Error::param(format!(
                "angular_nodes must be >= 8, got {}",
                self.angular_nodes
            )));
        }
        let g = self.boundary_refinement;
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::param(format!("grading factor must lie in (0, 1], got {g}")));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            radial_nodes: 2 * self.radial_nodes,
            angular_nodes: 2 * self.angular_nodes,
            boundary_refinement: self.boundary_refinement,
        }
    }

    /// Radial nodes and weights on `[0, 1]`, including the polar factor `r`.
    fn radial_rule(&self) -> Vec<(f64, f64)> {
        let breaks: Vec<f64> = if self.boundary_refinement >= 1.0 {
            vec![0.0, 1.0]
        } else {
            let g = self.boundary_refinement;
            let mut b: Vec<f64> = (0..=GRADED_PANELS).map(|j| 1.0 - g.powi(j as i32)).collect();
            b.push(1.0);
            b
        };
        let panels = breaks.len() - 1;
        let per_panel = self.radial_nodes.div_ceil(panels).max(4);
        let rule = GaussLegendre::new(NonZeroUsize::new(per_panel).expect("nonzero"));
        let mut out = Vec::with_capacity(panels * per_panel);
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            for (x, wt) in rule.nodes().zip(rule.weights()) {
                let r = a + half * (x + 1.0);
                out.push((r, wt * half * r));
            }
        }
        out
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `∬_D f(x, y) dx dy` by the polar tensor rule of `spec`.
pub fn integrate_disc<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    spec.validate()?;
    let radial = spec.radial_rule();
    let m = spec.angular_nodes;
    let dtheta = 2.0 * PI / m as f64;
    let rows: Vec<Result<Vec<f64>>> = radial
        .par_iter()
        .map(|&(r, wr)| {
            (0..m)
                .map(|j| {
                    let theta = dtheta * j as f64;
                    let v = f(Complex64::from_polar(r, theta));
                    if v.is_finite() {
                        Ok(v * wr * dtheta)
                    } else {
                        Err(Error::Evaluation { r, theta })
                    }
                })
                .collect()
        })
        .collect();
    let mut acc = CompensatedSum::default();
    for row in rows {
        for v in row? {
            acc.add(v);
        }
    }
    Ok(acc.value())
}

/// Result of integrating at a spec and at the node-doubled spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub spec: QuadratureSpec,
    pub value: f64,
    pub refined_value: f64,
    /// `|refined − value| / |refined|`; bounds the last refinement increment.
    pub relative_change: f64,
}

impl ConvergenceReport {
    pub fn converged(&self, tol: f64) -> bool {
        self.relative_change < tol
    }
}

pub fn integrate_with_report<F>(f: F, spec: &QuadratureSpec) -> Result<ConvergenceReport>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    let value = integrate_disc(&f, spec)?;
    let refined_value = integrate_disc(&f, &spec.doubled())?;
    let scale = refined_value.abs().max(f64::MIN_POSITIVE);
    Ok(ConvergenceReport {
        spec: *spec,
        value,
        refined_value,
        relative_change: (refined_value - value).abs() / scale,
    })
}

fn abs_jacobian(map: &MapDescriptor, z: Complex64) -> f64 {
    map.jacobian(z).map(f64::abs).unwrap_or(f64::NAN)
}

/// `|φ(D)| = ∬_D |J(z, φ)| dx dy`.
pub fn image_area(map: &MapDescriptor, spec: &QuadratureSpec) -> Result<f64> {
    integrate_disc(|z| abs_jacobian(map, z), spec)
}

/// `(∬_D |J(z, φ)|^β dx dy)^{1/β}`, `β ≥ 1`.
pub fn jacobian_norm(map: &MapDescriptor, beta: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(beta >= 1.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta must be finite and >= 1, got {beta}")));
    }
    if beta == 1.0 {
        return image_area(map, spec);
    }
    let integral = integrate_disc(|z| abs_jacobian(map, z).powf(beta), spec)?;
    Ok(integral.powf(1.0 / beta))
}

/// Supremum of `|J|` over the disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    /// `true` when only a sampled maximum (a lower estimate of the sup) is known.
    pub lower_estimate: bool,
}

/// Analytic essential supremum of `|J|` when the catalog has one, otherwise
/// the maximum over the quadrature nodes of `spec`, flagged as a lower
/// estimate.
pub fn jacobian_sup(map: &MapDescriptor, spec: &QuadratureSpec) -> Result<SupEstimate> {
    match map.info().jacobian_sup {
        Some(value) => Ok(SupEstimate {
            value,
            lower_estimate: false,
        }),
        None => Ok(SupEstimate {
            value: sampled_jacobian_max(map, spec)?,
            lower_estimate: true,
        }),
    }
}

/// Maximum of `|J|` over the quadrature nodes of `spec`.
pub fn sampled_jacobian_max(map: &MapDescriptor, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let m = spec.angular_nodes;
    let mut best = 0.0f64;
    for (r, _) in spec.radial_rule() {
        for j in 0..m {
            let theta = 2.0 * PI * j as f64 / m as f64;
            let v = abs_jacobian(map, Complex64::from_polar(r, theta));
            if !v.is_finite() {
                return Err(Error::Evaluation { r, theta });
            }
            best = best.max(v);
        }
    }
    Ok(best)
}

/// `n` quasi-random points of the disc of radius `radius` (additive
/// recurrence with the plastic constant, area-uniform radial map).
pub fn quasi_random_points(n: usize, radius: f64) -> Vec<Complex64> {
    const G: f64 = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / G, 1.0 / (G * G));
    (1..=n)
        .map(|i| {
            let u = (0.5 + a1 * i as f64).fract();
            let v = (0.5 + a2 * i as f64).fract();
            Complex64::from_polar(radius * u.sqrt(), 2.0 * PI * v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::ShearProfile;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn constant_and_radial_moments() {
        let spec = QuadratureSpec::default();
        assert!(rel(integrate_disc(|_| 1.0, &spec).unwrap(), PI) < 1e-14);
        assert!(rel(integrate_disc(|z| z.norm_sqr(), &spec).unwrap(), PI / 2.0) < 1e-14);
    }

    #[test]
    fn epicycloid_integrand_area() {
        let spec = QuadratureSpec::default();
        let (a, b) = (2.0f64, 1.0f64);
        let v = integrate_disc(|z| (a * a - b * b) * (1.0 + z.powu(2)).norm_sqr(), &spec).unwrap();
        assert!(rel(v, 4.0 * PI) < 1e-13);
    }

    #[test]
    fn refinement_is_stable_for_smooth_integrands() {
        let rep = integrate_with_report(|z| (z.re * 3.0).cos() * (1.0 + z.im * z.im), &QuadratureSpec::default()).unwrap();
        assert!(rep.converged(1e-8), "{rep:?}");
        let ungraded = QuadratureSpec::new(32, 64, 1.0).unwrap();
        let rep = integrate_with_report(|z| z.norm_sqr().powi(3), &ungraded).unwrap();
        assert!(rep.relative_change < 1e-14);
        assert!(rel(rep.value, PI / 4.0) < 1e-14);
    }

    #[test]
    fn non_finite_integrand_names_node() {
        let err = integrate_disc(|z| if z.re > 0.5 { f64::NAN } else { 1.0 }, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, Error::Evaluation { r, .. } if r > 0.5));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(3, 64, 1.0).is_err());
        assert!(QuadratureSpec::new(8, 7, 1.0).is_err());
        assert!(QuadratureSpec::new(8, 8, 0.0).is_err());
        assert!(QuadratureSpec::new(8, 8, 1.5).is_err());
        assert!(QuadratureSpec::new(8, 8, 1.0).is_ok());
    }

    #[test]
    fn jacobian_norm_examples() {
        let spec = QuadratureSpec::default();
        let e = MapDescriptor::ellipse_shear(0.5).unwrap();
        assert!(rel(jacobian_norm(&e, 3.0, &spec).unwrap(), PI.powf(1.0 / 3.0)) < 1e-12);
        let epi = MapDescriptor::epicycloid(2.0, 1.0, 3).unwrap();
        let n1 = jacobian_norm(&epi, 1.0, &spec).unwrap();
        assert!(rel(n1, 4.0 * PI) < 1e-13);
        assert_eq!(n1, image_area(&epi, &spec).unwrap());
        // ∬|1+z|⁴ = π(1 + 4/2 + 1/3) by orthogonality of monomials
        let epi2 = MapDescriptor::epicycloid(1.0, 0.0, 2).unwrap();
        let expected = (10.0 * PI / 3.0).sqrt();
        assert!(rel(jacobian_norm(&epi2, 2.0, &spec).unwrap(), expected) < 1e-13);
        assert!((expected - 3.2360).abs() < 1e-4);
        assert!(jacobian_norm(&epi2, 0.5, &spec).is_err());
    }

    #[test]
    fn jacobian_sup_examples() {
        let spec = QuadratureSpec::default();
        let epi = MapDescriptor::epicycloid(2.0, 1.0, 3).unwrap();
        let s = jacobian_sup(&epi, &spec).unwrap();
        assert_eq!((s.value, s.lower_estimate), (12.0, false));
        // the sampled maximum approaches the sup from below
        let sampled = sampled_jacobian_max(&epi, &spec).unwrap();
        assert!(sampled <= 12.0 && sampled > 11.5);
        for m in [MapDescriptor::identity(), MapDescriptor::rose_petal()] {
            assert_eq!(jacobian_sup(&m, &spec).unwrap().value, 1.0);
        }
    }

    #[test]
    fn image_area_examples() {
        let spec = QuadratureSpec::default();
        // semi-axes (√1.25 + 0.5)(√1.25 − 0.5) = 1
        let e = MapDescriptor::ellipse_shear(0.5).unwrap();
        assert!(rel(image_area(&e, &spec).unwrap(), PI) < 1e-13);
        assert!(rel(image_area(&MapDescriptor::identity(), &spec).unwrap(), PI) < 1e-14);
        let shear = MapDescriptor::linear_shear(0.7, ShearProfile::Polynomial { coeffs: vec![0.1, -0.4, 0.3] }).unwrap();
        assert!(rel(image_area(&shear, &spec).unwrap(), PI) < 1e-13);
    }

    #[test]
    fn quasi_random_points_fill_disc() {
        let pts = quasi_random_points(1000, 0.9);
        assert!(pts.iter().all(|z| z.norm() <= 0.9));
        let mean_r2: f64 = pts.iter().map(|z| z.norm_sqr()).sum::<f64>() / 1000.0;
        // E|z|² = R²/2 for the area-uniform distribution
        assert!((mean_r2 - 0.405).abs() < 0.01);
    }
}
