//! Catalog of quasiconformal maps of the unit disc.
//!
//! Every map is given in closed form together with its Wirtinger derivatives
//! `φ_z = (φ_x − iφ_y)/2` and `φ_z̄ = (φ_x + iφ_y)/2`, so that the Jacobian
//! `J = |φ_z|² − |φ_z̄|²` and the local distortion
//! `(|φ_z| + |φ_z̄|)/(|φ_z| − |φ_z̄|)` are exact up to rounding.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points with `|z| ≤ 1 + DISC_TOLERANCE` are accepted by [`MapDescriptor::evaluate`].
pub const DISC_TOLERANCE: f64 = 1e-12;

/// Exclusion radius around `z = −1` for rose-petal derivatives.
pub const ROSE_SINGULAR_RADIUS: f64 = 1e-8;

/// Profile `f` of the shear `(x, y) ↦ (a x + f(y), y / a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum ShearProfile {
    /// `f(y) = amplitude · sin(frequency · y)`
    Sine { amplitude: f64, frequency: f64 },
    /// `f(y) = Σ coeffs[k] · y^k`
    Polynomial { coeffs: Vec<f64> },
}

impl ShearProfile {
    pub fn value(&self, y: f64) -> f64 {
        match self {
            ShearProfile::Sine {
                amplitude,
                frequency,
            } => amplitude * (frequency * y).sin(),
            ShearProfile::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
            }
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match self {
            ShearProfile::Sine {
                amplitude,
                frequency,
            } => amplitude * frequency * (frequency * y).cos(),
            ShearProfile::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * y + k as f64 * c),
        }
    }

    /// Supremum of `|f'|` over `y ∈ [−1, 1]` and whether it is exact.
    ///
    /// The sine profile attains `|amplitude · frequency|` at `y = 0`. For
    /// polynomials the value is a dense-sampling maximum refined by golden
    /// section, i.e. an empirical sup.
    pub fn max_abs_derivative(&self) -> (f64, bool) {
        match self {
            ShearProfile::Sine {
                amplitude,
                frequency,
            } => ((amplitude * frequency).abs(), true),
            ShearProfile::Polynomial { .. } => {
                let n = 4096;
                let h = 2.0 / n as f64;
                let (mut best_y, mut best) = (-1.0, self.derivative(-1.0).abs());
                for i in 1..=n {
                    let y = -1.0 + h * i as f64;
                    let v = self.derivative(y).abs();
                    if v > best {
                        best = v;
                        best_y = y;
                    }
                }
                let lo = (best_y - h).max(-1.0);
                let hi = (best_y + h).min(1.0);
                let (_, neg) = crate::optim::golden_section(|y| -self.derivative(y).abs(), lo, hi, 1e-14);
                (best.max(-neg), false)
            }
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            ShearProfile::Sine {
                amplitude,
                frequency,
            } => amplitude.is_finite() && frequency.is_finite(),
            ShearProfile::Polynomial { coeffs } => coeffs.iter().all(|c| c.is_finite()),
        }
    }
}

/// The kinds of map in the catalog with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapKind {
    Identity,
    /// `A(z + zⁿ/n) + B(z̄ + z̄ⁿ/n)`, `A > B ≥ 0`.
    Epicycloid {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "B")]
        b: f64,
        n: u32,
    },
    /// `√(a²+1) z + a z̄`, `a ≥ 0`; maps the disc onto an ellipse of area π.
    EllipseShear { a: f64 },
    /// `√2 (1+z)^{3/4} (1+z̄)^{1/4}`; maps the disc onto a rose petal.
    RosePetal,
    /// `(x, y) ↦ (a x + f(y), y / a)`, `a > 0`.
    LinearShear { a: f64, profile: ShearProfile },
}

/// How the distortion coefficient reported by [`MapDescriptor::info`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSource {
    Analytic,
    EmpiricalSup,
}

/// Analytic constants of a catalog map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapInfo {
    #[serde(rename = "K")]
    pub k: f64,
    pub k_source: KSource,
    /// Area of the image `φ(D)` when known in closed form.
    pub area: Option<f64>,
    pub measure_preserving: bool,
    /// Essential supremum of the Jacobian over the disc when known in closed form.
    pub jacobian_sup: Option<f64>,
}

/// A validated, immutable catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MapDescriptor {
    kind: MapKind,
}

impl<'de> Deserialize<'de> for MapDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let kind = MapKind::deserialize(d)?;
        MapDescriptor::new(kind).map_err(serde::de::Error::custom)
    }
}

impl MapDescriptor {
    pub fn new(kind: MapKind) -> Result<Self> {
        match &kind {
            MapKind::Identity | MapKind::RosePetal => {}
            MapKind::Epicycloid { a, b, n } => {
                if !(a.is_finite() && b.is_finite() && *b >= 0.0 && a > b) {
                    return Err(Error::param(format!(
                        "epicycloid needs A > B >= 0, got A={a}, B={b}"
                    )));
                }
                if *n < 1 {
                    return Err(Error::param("epicycloid needs n >= 1"));
                }
            }
            MapKind::EllipseShear { a } => {
                if !(a.is_finite() && *a >= 0.0) {
                    return Err(Error::param(format!("ellipse-shear needs a >= 0, got {a}")));
                }
            }
            MapKind::LinearShear { a, profile } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::param(format!("linear-shear needs a > 0, got {a}")));
                }
                if !profile.is_finite() {
                    return Err(Error::param("linear-shear profile must be finite"));
                }
            }
        }
        Ok(MapDescriptor { kind })
    }

    pub fn identity() -> Self {
        MapDescriptor {
            kind: MapKind::Identity,
        }
    }

    pub fn epicycloid(a: f64, b: f64, n: u32) -> Result<Self> {
        Self::new(MapKind::Epicycloid { a, b, n })
    }

    pub fn ellipse_shear(a: f64) -> Result<Self> {
        Self::new(MapKind::EllipseShear { a })
    }

    pub fn rose_petal() -> Self {
        MapDescriptor {
            kind: MapKind::RosePetal,
        }
    }

    pub fn linear_shear(a: f64, profile: ShearProfile) -> Result<Self> {
        Self::new(MapKind::LinearShear { a, profile })
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MapKind::Identity => "identity",
            MapKind::Epicycloid { .. } => "epicycloid",
            MapKind::EllipseShear { .. } => "ellipse-shear",
            MapKind::RosePetal => "rose-petal",
            MapKind::LinearShear { .. } => "linear-shear",
        }
    }

    /// `φ(z)` for `|z| ≤ 1`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() <= 1.0 + DISC_TOLERANCE) {
            return Err(Error::OutsideDisc(z));
        }
        Ok(self.evaluate_unchecked(z))
    }

    pub(crate) fn evaluate_unchecked(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            MapKind::Identity => z,
            MapKind::Epicycloid { a, b, n } => {
                let nf = *n as f64;
                let zb = z.conj();
                *a * (z + z.powu(*n) / nf) + *b * (zb + zb.powu(*n) / nf)
            }
            MapKind::EllipseShear { a } => (a * a + 1.0).sqrt() * z + *a * z.conj(),
            MapKind::RosePetal => {
                // w^{3/4} w̄^{1/4} on the principal branch is |w| e^{i arg(w)/2}.
                let w = 1.0 + z;
                if w == Complex64::new(0.0, 0.0) {
                    return w;
                }
                Complex64::from_polar(SQRT_2 * w.norm(), 0.5 * w.arg())
            }
            MapKind::LinearShear { a, profile } => {
                Complex64::new(a * z.re + profile.value(z.im), z.im / a)
            }
        }
    }

    /// Wirtinger derivatives `(φ_z, φ_z̄)` at an interior point.
    pub fn wirtinger(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        if !(z.norm() < 1.0 + DISC_TOLERANCE) {
            return Err(Error::OutsideDisc(z));
        }
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Ok(match &self.kind {
            MapKind::Identity => (one, zero),
            MapKind::Epicycloid { a, b, n } => {
                let zn1 = z.powu(n - 1);
                (*a * (one + zn1), *b * (one + zn1.conj()))
            }
            MapKind::EllipseShear { a } => (Complex64::new((a * a + 1.0).sqrt(), 0.0), Complex64::new(*a, 0.0)),
            MapKind::RosePetal => {
                let w = 1.0 + z;
                if w.norm() < ROSE_SINGULAR_RADIUS {
                    return Err(Error::Singularity(z));
                }
                let alpha = w.arg();
                (
                    Complex64::from_polar(0.75 * SQRT_2, -0.5 * alpha),
                    Complex64::from_polar(0.25 * SQRT_2, 1.5 * alpha),
                )
            }
            MapKind::LinearShear { a, profile } => {
                let fp = profile.derivative(z.im);
                (
                    Complex64::new(0.5 * (a + 1.0 / a), -0.5 * fp),
                    Complex64::new(0.5 * (a - 1.0 / a), 0.5 * fp),
                )
            }
        })
    }

    /// `J(z, φ) = |φ_z|² − |φ_z̄|²`.
    ///
    /// The rose petal is extended by its constant value 1 at the singular
    /// point `z = −1`.
    pub fn jacobian(&self, z: Complex64) -> Result<f64> {
        match self.wirtinger(z) {
            Ok((dz, dzb)) => Ok(dz.norm_sqr() - dzb.norm_sqr()),
            Err(Error::Singularity(_)) if self.kind == MapKind::RosePetal => Ok(1.0),
            Err(e) => Err(e),
        }
    }

    /// `(|φ_z| + |φ_z̄|)/(|φ_z| − |φ_z̄|)`, equal to `|Dφ|²/J`.
    pub fn local_distortion(&self, z: Complex64) -> Result<f64> {
        let (dz, dzb) = self.wirtinger(z)?;
        let (m, n) = (dz.norm(), dzb.norm());
        if m <= n {
            return Err(Error::Orientation(z));
        }
        Ok((m + n) / (m - n))
    }

    pub fn info(&self) -> MapInfo {
        let unit = |k: f64, k_source| MapInfo {
            k,
            k_source,
            area: Some(PI),
            measure_preserving: true,
            jacobian_sup: Some(1.0),
        };
        match &self.kind {
            MapKind::Identity => unit(1.0, KSource::Analytic),
            MapKind::Epicycloid { a, b, n } => {
                let nf = *n as f64;
                let c = a * a - b * b;
                // For n = 1 the map is 2(Az + Bz̄) and |1 + z⁰|² ≡ 4.
                let area = if *n == 1 {
                    4.0 * c * PI
                } else {
                    c * (nf + 1.0) / nf * PI
                };
                MapInfo {
                    k: (a + b) / (a - b),
                    k_source: KSource::Analytic,
                    area: Some(area),
                    measure_preserving: false,
                    jacobian_sup: Some(4.0 * c),
                }
            }
            MapKind::EllipseShear { a } => {
                let s = (a * a + 1.0).sqrt();
                unit((s + a) / (s - a), KSource::Analytic)
            }
            MapKind::RosePetal => unit(2.0, KSource::Analytic),
            MapKind::LinearShear { a, profile } => {
                let (fmax, exact) = profile.max_abs_derivative();
                let source = if exact {
                    KSource::Analytic
                } else {
                    KSource::EmpiricalSup
                };
                unit(shear_lambda_scaled(*a, fmax), source)
            }
        }
    }

    /// Samples `φ(e^{iθ})` at `n` equally spaced angles starting at θ = 0.
    pub fn boundary(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let theta = 2.0 * PI * j as f64 / n as f64;
                self.evaluate_unchecked(Complex64::from_polar(1.0, theta))
            })
            .collect()
    }
}

/// Largest eigenvalue of `DDᵀ` for `D = [[1, f'], [0, 1]]`:
/// `(1 + f'²/2)(1 + √(1 − 4/(2 + f'²)²))`.
pub fn shear_lambda(fprime: f64) -> f64 {
    let t = 2.0 + fprime * fprime;
    (1.0 + 0.5 * fprime * fprime) * (1.0 + (1.0 - 4.0 / (t * t)).sqrt())
}

/// Largest eigenvalue of `DDᵀ` for `D = [[a, f'], [0, 1/a]]`; reduces to
/// [`shear_lambda`] at `a = 1`.
pub fn shear_lambda_scaled(a: f64, fprime: f64) -> f64 {
    if a == 1.0 {
        return shear_lambda(fprime);
    }
    let t = a * a + 1.0 / (a * a) + fprime * fprime;
    0.5 * (t + (t * t - 4.0).max(0.0).sqrt())
}

impl fmt::Display for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MapKind::Identity => write!(f, "identity"),
            MapKind::RosePetal => write!(f, "rose-petal"),
            MapKind::Epicycloid { a, b, n } => write!(f, "epicycloid:A={a},B={b},n={n}"),
            MapKind::EllipseShear { a } => write!(f, "ellipse-shear:a={a}"),
            MapKind::LinearShear { a, profile } => match profile {
                ShearProfile::Sine {
                    amplitude,
                    frequency,
                } => write!(f, "linear-shear:a={a},profile=sine,amp={amplitude},freq={frequency}"),
                ShearProfile::Polynomial { coeffs } => {
                    write!(f, "linear-shear:a={a},profile=poly")?;
                    for (k, c) in coeffs.iter().enumerate() {
                        write!(f, ",c{k}={c}")?;
                    }
                    Ok(())
                }
            },
        }
    }
}

/// Parses `kind[:key=value,...]`, e.g. `epicycloid:A=2,B=1,n=3` or
/// `linear-shear:a=1,profile=sine,amp=0.5,freq=2`.
impl FromStr for MapDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params: Vec<(String, String)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))?;
            params.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str, default: Option<f64>| -> Result<f64> {
            match get(key) {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("{key}={v} is not a number"))),
                None => default.ok_or_else(|| Error::Parse(format!("missing parameter {key}"))),
            }
        };
        let check_keys = |allowed: &[&str]| -> Result<()> {
            for (k, _) in &params {
                let poly_coeff = k.starts_with('c') && k[1..].parse::<usize>().is_ok();
                if !allowed.contains(&k.as_str()) && !(poly_coeff && allowed.contains(&"c*")) {
                    return Err(Error::Parse(format!("unknown parameter '{k}' for {kind}")));
                }
            }
            Ok(())
        };
        match kind {
            "identity" => {
                check_keys(&[])?;
                Ok(Self::identity())
            }
            "rose-petal" => {
                check_keys(&[])?;
                Ok(Self::rose_petal())
            }
            "epicycloid" => {
                check_keys(&["A", "B", "n"])?;
                let n = num("n", None)?;
                if n.fract() != 0.0 || n < 1.0 || n > u32::MAX as f64 {
                    return Err(Error::Parse(format!("n={n} is not a positive integer")));
                }
                Self::epicycloid(num("A", None)?, num("B", Some(0.0))?, n as u32)
            }
            "ellipse-shear" => {
                check_keys(&["a"])?;
                Self::ellipse_shear(num("a", None)?)
            }
            "linear-shear" => {
                check_keys(&["a", "profile", "amp", "freq", "c*"])?;
                let a = num("a", Some(1.0))?;
                let profile = match get("profile").unwrap_or("sine") {
                    "sine" => ShearProfile::Sine {
                        amplitude: num("amp", Some(0.5))?,
                        frequency: num("freq", Some(2.0))?,
                    },
                    "poly" => {
                        let mut coeffs = Vec::new();
                        let mut k = 0;
                        while let Some(v) = get(&format!("c{k}")) {
                            coeffs.push(v.parse::<f64>().map_err(|_| {
                                Error::Parse(format!("c{k}={v} is not a number"))
                            })?);
                            k += 1;
                        }
                        ShearProfile::Polynomial { coeffs }
                    }
                    other => return Err(Error::Parse(format!("unknown shear profile '{other}'"))),
                };
                Self::linear_shear(a, profile)
            }
            other => Err(Error::Parse(format!("unknown map kind '{other}'"))),
        }
    }
}

/// One representative of every catalog kind, as used by the CLI `catalog`
/// subcommand and the test suites.
pub fn catalog() -> Vec<MapDescriptor> {
    vec![
        MapDescriptor::identity(),
        MapDescriptor::epicycloid(2.0, 1.0, 3).expect("valid"),
        MapDescriptor::ellipse_shear(0.5).expect("valid"),
        MapDescriptor::rose_petal(),
        MapDescriptor::linear_shear(
            1.0,
            ShearProfile::Sine {
                amplitude: 0.5,
                frequency: 2.0,
            },
        )
        .expect("valid"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let id = MapDescriptor::identity();
        assert_eq!(id.evaluate(c(0.5, 0.0)).unwrap(), c(0.5, 0.0));
        let e0 = MapDescriptor::ellipse_shear(0.0).unwrap();
        assert_eq!(e0.evaluate(c(0.3, 0.4)).unwrap(), c(0.3, 0.4));
        let epi = MapDescriptor::epicycloid(1.0, 0.0, 2).unwrap();
        assert!((epi.evaluate(c(1.0, 0.0)).unwrap() - c(1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_points_outside_disc() {
        let id = MapDescriptor::identity();
        assert!(matches!(id.evaluate(c(1.0, 1e-3)), Err(Error::OutsideDisc(_))));
        assert!(id.evaluate(c(1.0 + 1e-13, 0.0)).is_ok());
    }

    #[test]
    fn wirtinger_examples() {
        let e1 = MapDescriptor::ellipse_shear(1.0).unwrap();
        let (dz, dzb) = e1.wirtinger(c(0.2, -0.7)).unwrap();
        assert!((dz - c(SQRT_2, 0.0)).norm() < 1e-15);
        assert_eq!(dzb, c(1.0, 0.0));
        let (dz, dzb) = MapDescriptor::identity().wirtinger(c(0.1, 0.1)).unwrap();
        assert_eq!((dz, dzb), (c(1.0, 0.0), c(0.0, 0.0)));
        let epi = MapDescriptor::epicycloid(1.0, 0.0, 2).unwrap();
        let (dz, dzb) = epi.wirtinger(c(0.0, 0.0)).unwrap();
        assert_eq!((dz, dzb), (c(1.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn rose_petal_singularity() {
        let rose = MapDescriptor::rose_petal();
        assert!(matches!(rose.wirtinger(c(-1.0, 0.0)), Err(Error::Singularity(_))));
        assert_eq!(rose.jacobian(c(-1.0, 0.0)).unwrap(), 1.0);
        assert!(matches!(
            rose.local_distortion(c(-1.0, 0.0)),
            Err(Error::Singularity(_))
        ));
        assert_eq!(rose.evaluate(c(-1.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn jacobian_examples() {
        let e2 = MapDescriptor::ellipse_shear(2.0).unwrap();
        assert!((e2.jacobian(c(0.0, 0.1)).unwrap() - 1.0).abs() < 1e-14);
        let rose = MapDescriptor::rose_petal();
        assert!((rose.jacobian(c(0.5, 0.0)).unwrap() - 1.0).abs() < 1e-14);
        let epi = MapDescriptor::epicycloid(2.0, 1.0, 3).unwrap();
        assert!((epi.jacobian(c(0.0, 0.0)).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn distortion_examples() {
        let z = c(0.3, -0.2);
        assert!((MapDescriptor::identity().local_distortion(z).unwrap() - 1.0).abs() < 1e-15);
        let e1 = MapDescriptor::ellipse_shear(1.0).unwrap();
        let k = (SQRT_2 + 1.0) / (SQRT_2 - 1.0);
        assert!((e1.local_distortion(z).unwrap() - k).abs() < 1e-12);
        assert!((k - 5.828427124746).abs() < 1e-9);
        let rose = MapDescriptor::rose_petal();
        assert!((rose.local_distortion(c(0.0, 0.0)).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn orientation_error_at_epicycloid_cusp_preimage() {
        // 1 + z^{n-1} = 0 makes both derivatives vanish.
        let epi = MapDescriptor::epicycloid(2.0, 1.0, 2).unwrap();
        assert!(matches!(
            epi.local_distortion(c(-1.0, 0.0)),
            Err(Error::Orientation(_))
        ));
    }

    #[test]
    fn shear_lambda_examples() {
        assert_eq!(shear_lambda(0.0), 1.0);
        let expected = 1.5 * (1.0 + 5f64.sqrt() / 3.0);
        assert!((shear_lambda(1.0) - expected).abs() < 1e-14);
        assert!((shear_lambda(1.0) - 2.618033988749895).abs() < 1e-12);
        assert!((shear_lambda(2.0) - (3.0 + 2.0 * SQRT_2)).abs() < 1e-13);
    }

    #[test]
    fn shear_lambda_is_largest_eigenvalue_of_ddt() {
        for &fp in &[0.0f64, 0.3, 1.0, 2.0, 7.5] {
            // DDᵀ = [[1 + f'², f'], [f', 1]]
            let (a, b, d) = (1.0 + fp * fp, fp, 1.0);
            let tr = a + d;
            let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
            let (lmax, lmin) = (0.5 * (tr + disc), 0.5 * (tr - disc));
            let lambda = shear_lambda(fp);
            assert!((lambda - lmax).abs() < 1e-12 * lmax);
            assert!((lambda * lmin - 1.0).abs() < 1e-9);
        }
        for &a in &[0.5, 2.0] {
            let lam = shear_lambda_scaled(a, 0.0);
            assert!((lam - (a * a).max(1.0 / (a * a))).abs() < 1e-12);
        }
    }

    #[test]
    fn map_info_examples() {
        let epi = MapDescriptor::epicycloid(2.0, 1.0, 3).unwrap().info();
        assert_eq!(epi.k, 3.0);
        assert!((epi.area.unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!(!epi.measure_preserving);
        let e0 = MapDescriptor::ellipse_shear(0.0).unwrap().info();
        assert_eq!((e0.k, e0.area), (1.0, Some(PI)));
        let rose = MapDescriptor::rose_petal().info();
        assert_eq!((rose.k, rose.area, rose.measure_preserving), (2.0, Some(PI), true));
    }

    #[test]
    fn linear_shear_k_sources() {
        let sine = MapDescriptor::linear_shear(
            1.0,
            ShearProfile::Sine {
                amplitude: 0.5,
                frequency: 2.0,
            },
        )
        .unwrap();
        let info = sine.info();
        assert_eq!(info.k_source, KSource::Analytic);
        assert!((info.k - shear_lambda(1.0)).abs() < 1e-14);
        // f(y) = 0.3 y², f' = 0.6 y, sup |f'| = 0.6 at the endpoints.
        let poly = MapDescriptor::linear_shear(
            1.0,
            ShearProfile::Polynomial {
                coeffs: vec![0.0, 0.0, 0.3],
            },
        )
        .unwrap();
        let info = poly.info();
        assert_eq!(info.k_source, KSource::EmpiricalSup);
        assert!((info.k - shear_lambda(0.6)).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(MapDescriptor::epicycloid(1.0, 1.0, 3).is_err());
        assert!(MapDescriptor::epicycloid(1.0, -0.1, 3).is_err());
        assert!(MapDescriptor::epicycloid(1.0, 0.0, 0).is_err());
        assert!(MapDescriptor::ellipse_shear(-0.1).is_err());
        assert!(MapDescriptor::ellipse_shear(f64::NAN).is_err());
        assert!(MapDescriptor::linear_shear(
            0.0,
            ShearProfile::Polynomial { coeffs: vec![] }
        )
        .is_err());
    }

    #[test]
    fn text_records_parse() {
        let m: MapDescriptor = "epicycloid:A=2,B=1,n=3".parse().unwrap();
        assert_eq!(m, MapDescriptor::epicycloid(2.0, 1.0, 3).unwrap());
        let m: MapDescriptor = "linear-shear:a=1,profile=poly,c0=0,c1=0.2,c2=-0.1".parse().unwrap();
        assert_eq!(
            m.kind(),
            &MapKind::LinearShear {
                a: 1.0,
                profile: ShearProfile::Polynomial {
                    coeffs: vec![0.0, 0.2, -0.1]
                }
            }
        );
        for bad in ["disc", "epicycloid:A=2", "ellipse-shear:a=x", "rose-petal:a=1", "epicycloid:A=2,B=1,n=2.5"] {
            assert!(bad.parse::<MapDescriptor>().is_err(), "{bad}");
        }
        for m in catalog() {
            let back: MapDescriptor = m.to_string().parse().unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn json_records_validate() {
        let m = MapDescriptor::epicycloid(2.0, 1.0, 3).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"kind":"epicycloid","A":2.0,"B":1.0,"n":3}"#);
        assert_eq!(serde_json::from_str::<MapDescriptor>(&json).unwrap(), m);
        assert!(serde_json::from_str::<MapDescriptor>(r#"{"kind":"ellipse-shear","a":-1.0}"#).is_err());
    }
}
