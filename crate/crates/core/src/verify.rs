//! Numerical eigenvalues checked against the theoretical lower bounds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_beta_regular, bound_inf_regular, bound_intro_form, bound_measure_preserving, convex_lower_bound, pi_p, Beta,
    BoundReport,
};
use crate::discquad::{image_area, jacobian_norm, jacobian_sup, QuadratureSpec};
use crate::eigsolver::{minimize_eigen, EigenOptions, EigenResult};
use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::maps::{MapDescriptor, MapKind};
use crate::mesh::{mesh_disc_spec, push_forward, MeshSpec};
use crate::quasidisc::{quasidisc_lower_bound, QuasidiscBound};

/// Fraction of the lower bound the numerical value may fall short by.
pub const DISCRETIZATION_ALLOWANCE: f64 = 0.02;

/// Which lower bound to test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum VerifyVariant {
    /// Measure-preserving maps use the measure-preserving β = ∞ bound, all
    /// others the β = ∞ bound with their Jacobian supremum.
    Auto,
    BetaRegular { beta: f64 },
    InfRegular,
    MeasurePreserving { beta: Beta },
    IntroForm { beta: Beta },
    Quasidisc,
}

impl fmt::Display for VerifyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyVariant::Auto => write!(f, "auto"),
            VerifyVariant::BetaRegular { beta } => write!(f, "beta-regular:{beta}"),
            VerifyVariant::InfRegular => write!(f, "inf-regular"),
            VerifyVariant::MeasurePreserving { beta } => write!(f, "measure-preserving:{beta}"),
            VerifyVariant::IntroForm { beta } => write!(f, "intro-form:{beta}"),
            VerifyVariant::Quasidisc => write!(f, "quasidisc"),
        }
    }
}

impl FromStr for VerifyVariant {
    type Err = Error;

    /// `auto`, `inf-regular`, `quasidisc`, `beta-regular:<β>`,
    /// `measure-preserving[:<β|inf>]`, `intro-form[:<β|inf>]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let beta = |default: Option<Beta>| -> Result<Beta> {
            match arg {
                Some(a) => a.parse(),
                None => default.ok_or_else(|| Error::Parse(format!("variant '{name}' needs ':<beta>'"))),
            }
        };
        Ok(match name {
            "auto" if arg.is_none() => VerifyVariant::Auto,
            "inf-regular" if arg.is_none() => VerifyVariant::InfRegular,
            "quasidisc" if arg.is_none() => VerifyVariant::Quasidisc,
            "beta-regular" => match beta(None)? {
                Beta::Finite(b) => VerifyVariant::BetaRegular { beta: b },
                Beta::Infinite => VerifyVariant::InfRegular,
            },
            "measure-preserving" => VerifyVariant::MeasurePreserving {
                beta: beta(Some(Beta::Infinite))?,
            },
            "intro-form" => VerifyVariant::IntroForm {
                beta: beta(Some(Beta::Infinite))?,
            },
            _ => return Err(Error::Parse(format!("unknown variant '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// The eigensolver did not converge.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Theory {
    Bound(BoundReport),
    Quasidisc(QuasidiscBound),
}

/// Numerical side of a verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary {
    pub mu: f64,
    pub rings: usize,
    pub converged: bool,
    pub iterations: usize,
    pub constraint_residual: f64,
    pub start: String,
    pub seed: u64,
    pub trace_monotone: bool,
}

/// `μ ≥ (π_p/d)^p` for convex domains of diameter `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexCheck {
    pub diameter: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub map: MapDescriptor,
    #[serde(rename = "K")]
    pub k: f64,
    pub p: f64,
    pub variant: VerifyVariant,
    pub mu_lower: LogValue,
    /// `mu_lower` as a double when it is representable.
    pub mu_lower_plain: Option<f64>,
    pub theory: Theory,
    pub numeric: NumericSummary,
    /// `μ_numeric / mu_lower`.
    pub slack_ratio: LogValue,
    pub convex: Option<ConvexCheck>,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub rings: usize,
    pub eigen: EigenOptions,
    pub quadrature: QuadratureSpec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            rings: 64,
            eigen: EigenOptions::default(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Lower bound of the requested variant, without any eigenvalue solve.
pub fn theoretical_bound(map: &MapDescriptor, p: f64, variant: VerifyVariant, quad: &QuadratureSpec) -> Result<(VerifyVariant, Theory)> {
    let info = map.info();
    let k = info.k;
    let variant = match variant {
        VerifyVariant::Auto if info.measure_preserving => VerifyVariant::MeasurePreserving { beta: Beta::Infinite },
        VerifyVariant::Auto => VerifyVariant::InfRegular,
        v => v,
    };
    let area = || -> Result<f64> {
        match info.area {
            Some(a) => Ok(a),
            None => image_area(map, quad),
        }
    };
    let theory = match variant {
        VerifyVariant::Auto => unreachable!("resolved above"),
        VerifyVariant::BetaRegular { beta } => {
            Theory::Bound(bound_beta_regular(p, beta, k, area()?, jacobian_norm(map, beta, quad)?)?)
        }
        VerifyVariant::InfRegular => {
            let jsup = match info.jacobian_sup {
                Some(s) => s,
                None => jacobian_sup(map, quad)?.value,
            };
            Theory::Bound(bound_inf_regular(p, k, area()?, jsup)?)
        }
        VerifyVariant::MeasurePreserving { beta } => {
            require_measure_preserving(map, info.measure_preserving)?;
            Theory::Bound(bound_measure_preserving(p, beta, k)?)
        }
        VerifyVariant::IntroForm { beta } => {
            require_measure_preserving(map, info.measure_preserving)?;
            Theory::Bound(bound_intro_form(p, beta, k)?)
        }
        VerifyVariant::Quasidisc => Theory::Quasidisc(quasidisc_lower_bound(k, p, area()?)?),
    };
    Ok((variant, theory))
}

fn require_measure_preserving(map: &MapDescriptor, mp: bool) -> Result<()> {
    if mp {
        Ok(())
    } else {
        Err(Error::param(format!("{} is not measure preserving", map.kind_name())))
    }
}

impl Theory {
    pub fn mu_lower(&self) -> LogValue {
        match self {
            Theory::Bound(b) => LogValue::from_f64(b.mu_lower),
            Theory::Quasidisc(q) => q.mu_lower,
        }
    }
}

/// Diameter of the image for maps whose image is convex.
fn convex_diameter(map: &MapDescriptor) -> Option<f64> {
    match map.kind() {
        MapKind::Identity => Some(2.0),
        MapKind::EllipseShear { a } => Some(2.0 * ((a * a + 1.0).sqrt() + a)),
        _ => None,
    }
}

/// Compares the lower bound with an eigenvalue already computed for `map`.
pub fn compare(map: &MapDescriptor, p: f64, variant: VerifyVariant, theory: Theory, eigen: &EigenResult, rings: usize) -> Result<VerifyReport> {
    let mu_lower = theory.mu_lower();
    let mu = eigen.mu;
    let slack_ratio = LogValue::from_f64(mu) / mu_lower;
    let holds = match (slack_ratio.ln_abs(), mu_lower.ln_abs()) {
        (Some(s), Some(_)) => s >= (1.0 - DISCRETIZATION_ALLOWANCE).ln(),
        _ => false,
    };
    let convex = match convex_diameter(map) {
        Some(d) => {
            let bound = convex_lower_bound(p, d)?;
            Some(ConvexCheck {
                diameter: d,
                bound,
                holds: mu >= bound * (1.0 - DISCRETIZATION_ALLOWANCE),
            })
        }
        None => None,
    };
    let status = if !eigen.converged {
        Status::Inconclusive
    } else if holds && convex.is_none_or(|c| c.holds) {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(VerifyReport {
        map: map.clone(),
        k: map.info().k,
        p,
        variant,
        mu_lower,
        mu_lower_plain: mu_lower.to_decimal_string().map(|_| mu_lower.to_f64()),
        theory,
        numeric: NumericSummary {
            mu,
            rings,
            converged: eigen.converged,
            iterations: eigen.iterations,
            constraint_residual: eigen.constraint_residual,
            start: eigen.start.clone(),
            seed: eigen.seed,
            trace_monotone: eigen.trace_is_monotone(),
        },
        slack_ratio,
        convex,
        status,
    })
}

/// Solves the eigenproblem on `φ(D)` and checks it against the bound.
pub fn verify_bound(map: &MapDescriptor, p: f64, variant: VerifyVariant, opts: &VerifyOptions) -> Result<(VerifyReport, EigenResult)> {
    let (variant, theory) = theoretical_bound(map, p, variant, &opts.quadrature)?;
    let mesh = push_forward(&mesh_disc_spec(&MeshSpec::for_map(opts.rings, map))?, map)?;
    let eigen = minimize_eigen(&mesh, p, &opts.eigen)?;
    let report = compare(map, p, variant, theory, &eigen, opts.rings)?;
    Ok((report, eigen))
}

/// `(π_p/2)^p`, the convex lower bound for the unit disc.
pub fn disc_convex_bound(p: f64) -> Result<f64> {
    Ok((pi_p(p)? / 2.0).powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            rings: 16,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn variant_text() {
        for s in ["auto", "inf-regular", "quasidisc", "beta-regular:2", "measure-preserving:inf", "intro-form:3"] {
            let v: VerifyVariant = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        assert_eq!(
            "measure-preserving".parse::<VerifyVariant>().unwrap(),
            VerifyVariant::MeasurePreserving { beta: Beta::Infinite }
        );
        assert!("beta-regular".parse::<VerifyVariant>().is_err());
        assert!("nonsense".parse::<VerifyVariant>().is_err());
    }

    #[test]
    fn auto_resolution() {
        let q = QuadratureSpec::default();
        let (v, _) = theoretical_bound(&MapDescriptor::rose_petal(), 3.0, VerifyVariant::Auto, &q).unwrap();
        assert_eq!(v, VerifyVariant::MeasurePreserving { beta: Beta::Infinite });
        let epi = MapDescriptor::epicycloid(2.0, 1.0, 3).unwrap();
        let (v, _) = theoretical_bound(&epi, 3.0, VerifyVariant::Auto, &q).unwrap();
        assert_eq!(v, VerifyVariant::InfRegular);
        assert!(theoretical_bound(&epi, 3.0, VerifyVariant::MeasurePreserving { beta: Beta::Infinite }, &q).is_err());
    }

    #[test]
    fn identity_passes() {
        let (r, _) = verify_bound(&MapDescriptor::identity(), 4.0, VerifyVariant::Auto, &quick()).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert!(r.convex.unwrap().holds);
        assert!(r.numeric.trace_monotone);
    }

    #[test]
    fn rose_petal_slack() {
        let (r, _) = verify_bound(&MapDescriptor::rose_petal(), 3.0, VerifyVariant::Auto, &quick()).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert!(r.slack_ratio.ln_abs().unwrap() >= 0.0);
    }

    #[test]
    fn quasidisc_slack_is_astronomical() {
        let map = MapDescriptor::ellipse_shear(1.0).unwrap();
        let (r, _) = verify_bound(&map, 4.0, VerifyVariant::Quasidisc, &quick()).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert!(r.slack_ratio.ln_abs().unwrap() > 1000.0);
        assert!(r.mu_lower_plain.is_none());
    }
}
