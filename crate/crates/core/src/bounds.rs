//! Upper bounds on `1/μ_p` for K-quasiconformal β-regular domains.
//!
//! The common building block is the q-bracket
//!
//! ```text
//! 2^p ((1 − 1/q + 1/r) / (1/2 − 1/q + 1/r))^{p − p/q + p/r},   q ∈ (q*, 2],
//! ```
//!
//! with `r = pβ/(β−1)` and `1/q* = 1/2 + 1/r`. Internally the bracket is
//! evaluated in the reduced variable `θ = r(1/q − 1/2) ∈ [0, 1)`, in which
//! the numerator is `1/2 + (1−θ)/r` and the denominator `(1−θ)/r`. This keeps
//! every quantity well conditioned even when β is within 1e−15 of 1 and `q*`
//! is indistinguishable from 2 in double precision.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::optim::grid_then_golden;

/// Number of grid points of the q-search before golden-section refinement.
pub const Q_GRID_POINTS: usize = 1024;
/// Largest θ searched; `θ → 1` is `q → q*⁺`, where the bracket diverges.
pub const THETA_MAX: f64 = 1.0 - 1e-9;

/// Integrability exponent of the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Beta::Infinite),
            t => t
                .parse::<f64>()
                .map(Beta::Finite)
                .map_err(|_| Error::Parse(format!("beta must be a number or 'inf', got '{t}'"))),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Ok(Beta::Finite(b)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `r` and `q*` for a given `(p, β)`, with `1/r` kept exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub r: f64,
    pub inv_r: f64,
    pub q_star: f64,
}

impl Exponents {
    fn from_inv_r(p: f64, inv_r: f64) -> Self {
        Exponents {
            p,
            r: 1.0 / inv_r,
            inv_r,
            q_star: 1.0 / (0.5 + inv_r),
        }
    }

    /// Exponents for `β = 1 + ε`, exact for offsets far below machine epsilon.
    pub fn from_beta_offset(p: f64, eps: f64) -> Self {
        Self::from_inv_r(p, eps / (p * (1.0 + eps)))
    }

    /// `q = 1/(1/2 + θ/r)`.
    pub fn q_from_theta(&self, theta: f64) -> f64 {
        1.0 / (0.5 + theta * self.inv_r)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::param(format!("p must be finite and > 2, got {p}")));
    }
    Ok(())
}

/// `r = pβ/(β−1)` (`r = p` for β = ∞) and `q* = 2βp/(βp + 2(β−1))`.
pub fn exponents(p: f64, beta: Beta) -> Result<Exponents> {
    check_p(p)?;
    match beta {
        Beta::Infinite => Ok(Exponents::from_inv_r(p, 1.0 / p)),
        Beta::Finite(b) => {
            if !(b > 1.0 && b.is_finite()) {
                return Err(Error::param(format!("beta must be > 1, got {b}")));
            }
            Ok(Exponents::from_inv_r(p, (b - 1.0) / (p * b)))
        }
    }
}

/// Upper estimate `2^{−δ}((1−δ)/(1−2δ))^{1−δ} π^δ`, `δ = 1/q − 1/r`, of the
/// Poincaré–Sobolev constant `B_{r,q}` of the unit disc.
pub fn poincare_constant_upper(r: f64, q: f64) -> Result<f64> {
    let delta = 1.0 / q - 1.0 / r;
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::param(format!(
            "delta = 1/q - 1/r must lie in [0, 1/2), got {delta}"
        )));
    }
    Ok(ln_poincare_upper(delta).exp())
}

fn ln_poincare_upper(delta: f64) -> f64 {
    -delta * LN_2 + (1.0 - delta) * ((1.0 - delta) / (1.0 - 2.0 * delta)).ln() + delta * PI.ln()
}

/// `π_p = 2π (p−1)^{1/p} / (p sin(π/p))`.
pub fn pi_p(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param(format!("p must be > 1, got {p}")));
    }
    Ok(2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin()))
}

/// `(π_p / d)^p`, the lower bound on `μ_p` of a convex domain of diameter `d`.
/// Convexity is the caller's responsibility.
pub fn convex_lower_bound(p: f64, diameter: f64) -> Result<f64> {
    if !(diameter > 0.0 && diameter.is_finite()) {
        return Err(Error::param(format!("diameter must be > 0, got {diameter}")));
    }
    Ok((pi_p(p)? / diameter).powf(p))
}

/// `ln` of the q-bracket at reduced coordinate `θ ∈ [0, 1)`.
pub fn ln_bracket_theta(p: f64, inv_r: f64, theta: f64) -> f64 {
    let den = (1.0 - theta) * inv_r;
    p * LN_2 + p * (0.5 + den) * (0.5 / den).ln_1p()
}

/// The q-bracket `2^p ((1−1/q+1/r)/(1/2−1/q+1/r))^{p−p/q+p/r}` for `q ∈ (q*, 2]`.
pub fn q_bracket(p: f64, q: f64, r: f64) -> Result<f64> {
    let num = 1.0 - 1.0 / q + 1.0 / r;
    let den = 0.5 - 1.0 / q + 1.0 / r;
    if !(den > 0.0) {
        return Err(Error::param(format!("q = {q} does not exceed q* for r = {r}")));
    }
    if !(q <= 2.0) {
        return Err(Error::param(format!("q must be <= 2, got {q}")));
    }
    Ok((p * LN_2 + p * num * (num / den).ln()).exp())
}

/// Minimiser and minimum of an objective over `q ∈ (q*, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QInfimum {
    pub q_opt: f64,
    pub theta_opt: f64,
    pub value: f64,
    pub ln_value: f64,
}

/// Minimises `ln_objective(θ)` over `θ ∈ [0, THETA_MAX]`.
pub(crate) fn minimize_over_theta(e: &Exponents, ln_objective: impl Fn(f64) -> f64) -> QInfimum {
    let (theta, ln_value) = grid_then_golden(ln_objective, 0.0, THETA_MAX, Q_GRID_POINTS, 1e-13);
    QInfimum {
        q_opt: e.q_from_theta(theta),
        theta_opt: theta,
        value: ln_value.exp(),
        ln_value,
    }
}

/// `inf_{q ∈ (q*, 2]} q_bracket(p, q, r)`; the bracket diverges at `q*⁺`, so
/// the infimum is attained.
pub fn infimum_over_q(p: f64, r: f64, q_star: f64) -> Result<QInfimum> {
    check_p(p)?;
    if !(r > 0.0) || (1.0 / q_star - (0.5 + 1.0 / r)).abs() > 1e-12 {
        return Err(Error::param(format!(
            "inconsistent exponents: 1/q* = {} but 1/2 + 1/r = {}",
            1.0 / q_star,
            0.5 + 1.0 / r
        )));
    }
    Ok(infimum_bracket(&Exponents::from_inv_r(p, 1.0 / r)))
}

pub(crate) fn infimum_bracket(e: &Exponents) -> QInfimum {
    minimize_over_theta(e, |t| ln_bracket_theta(e.p, e.inv_r, t))
}

/// Which form of the bound produced a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    BetaRegular,
    InfRegular,
    MeasurePreservingBeta,
    MeasurePreservingInf,
    IntroForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ingredients {
    pub area: f64,
    /// `‖J | L_β(D)‖`, or the essential supremum for β = ∞.
    pub jacobian_norm: f64,
    /// Value of the minimised bracket.
    pub bracket: f64,
}

/// A bound `1/μ_p ≤ rhs`, i.e. `μ_p ≥ mu_lower = 1/rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: f64,
    pub beta: Beta,
    #[serde(rename = "K")]
    pub k: f64,
    pub r: f64,
    pub q_star: f64,
    pub q_opt: f64,
    pub rhs: f64,
    pub mu_lower: f64,
    pub ingredients: Ingredients,
    pub variant: BoundVariant,
}

fn check_k(k: f64) -> Result<()> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::param(format!("K must be finite and >= 1, got {k}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::param(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    e: &Exponents,
    beta: Beta,
    k: f64,
    area: f64,
    jnorm: f64,
    inf: QInfimum,
    ln_rest: f64,
    variant: BoundVariant,
) -> BoundReport {
    let rhs = (inf.ln_value + ln_rest).exp();
    BoundReport {
        p: e.p,
        beta,
        k,
        r: e.r,
        q_star: e.q_star,
        q_opt: inf.q_opt,
        rhs,
        mu_lower: 1.0 / rhs,
        ingredients: Ingredients {
            area,
            jacobian_norm: jnorm,
            bracket: inf.value,
        },
        variant,
    }
}

fn general(e: &Exponents, beta: Beta, k: f64, area: f64, jnorm: f64, variant: BoundVariant) -> BoundReport {
    let p = e.p;
    let inf = infimum_bracket(e);
    let ln_rest = (p * e.inv_r - 0.5 * p) * PI.ln() + 0.5 * p * k.ln() + 0.5 * (p - 2.0) * area.ln() + jnorm.ln();
    assemble(e, beta, k, area, jnorm, inf, ln_rest, variant)
}

/// `1/μ_p ≤ inf_q{bracket} · π^{p/r − p/2} K^{p/2} |Ω|^{(p−2)/2} ‖J | L_β(D)‖`.
pub fn bound_beta_regular(p: f64, beta: f64, k: f64, area: f64, jnorm: f64) -> Result<BoundReport> {
    let e = exponents(p, Beta::Finite(beta))?;
    check_k(k)?;
    check_positive("area", area)?;
    check_positive("jacobian norm", jnorm)?;
    Ok(general(&e, Beta::Finite(beta), k, area, jnorm, BoundVariant::BetaRegular))
}

/// The β = ∞ case: `r = p`, `q* = 2p/(p+2)`, `π^{1 − p/2}` and the essential
/// supremum of the Jacobian in place of its `L_β` norm.
pub fn bound_inf_regular(p: f64, k: f64, area: f64, jsup: f64) -> Result<BoundReport> {
    let e = exponents(p, Beta::Infinite)?;
    check_k(k)?;
    check_positive("area", area)?;
    check_positive("jacobian sup", jsup)?;
    Ok(general(&e, Beta::Infinite, k, area, jsup, BoundVariant::InfRegular))
}

/// Measure-preserving maps: `1/μ_p ≤ inf_q{bracket} · K^{p/2}`.
pub fn bound_measure_preserving(p: f64, beta: Beta, k: f64) -> Result<BoundReport> {
    let e = exponents(p, beta)?;
    check_k(k)?;
    let inf = infimum_bracket(&e);
    let (jnorm, variant) = match beta {
        Beta::Finite(b) => (PI.powf(1.0 / b), BoundVariant::MeasurePreservingBeta),
        Beta::Infinite => (1.0, BoundVariant::MeasurePreservingInf),
    };
    Ok(assemble(&e, beta, k, PI, jnorm, inf, 0.5 * p * k.ln(), variant))
}

/// The alternative headline form for measure-preserving maps,
/// `inf_q{B_{r,q}^p π^{p/q}} · K^{p/2} π^{1/β − 1}`, with `B_{r,q}` replaced by
/// its upper estimate [`poincare_constant_upper`].
pub fn bound_intro_form(p: f64, beta: Beta, k: f64) -> Result<BoundReport> {
    let e = exponents(p, beta)?;
    check_k(k)?;
    let inv_beta = match beta {
        Beta::Finite(b) => 1.0 / b,
        Beta::Infinite => 0.0,
    };
    let inf = minimize_over_theta(&e, |theta| {
        let den = (1.0 - theta) * e.inv_r;
        let delta = 0.5 - den;
        let ln_b = -delta * LN_2 + (0.5 + den) * ((0.5 / den).ln_1p() - LN_2) + delta * PI.ln();
        p * ln_b + p * (0.5 + theta * e.inv_r) * PI.ln()
    });
    let jnorm = PI.powf(inv_beta);
    let ln_rest = 0.5 * p * k.ln() + (inv_beta - 1.0) * PI.ln();
    Ok(assemble(&e, beta, k, PI, jnorm, inf, ln_rest, BoundVariant::IntroForm))
}
