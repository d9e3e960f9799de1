//! Reverse Hölder constants and the quasidisc eigenvalue bound.
//!
//! Everything here lives in log space. The prefactor
//! `exp(−K²π²(2+π²)²/(2 ln 3))` is below `e^{−2500}` already for `K = 2`, and
//! the integrability exponent κ (or β) is confined to `(1, β̃)` with
//! `β̃ − 1 ≈ 1e−13`, so every function of κ is evaluated in the offset
//! `ε = κ − 1`, which doubles represent exactly while `1 + ε` does not.

use std::f64::consts::{LN_10, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::bounds::{infimum_bracket, Exponents};
use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::optim::golden_section;

/// Smallest offset probed by the β-infimum.
pub const EPS_MIN: f64 = 1e-300;
/// Log-uniform grid size of the β-infimum before refinement.
pub const BETA_GRID_POINTS: usize = 64;

/// Which distortion power enters the reverse Hölder constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reflection {
    /// Plane maps: constants carry `K`.
    Plane,
    /// Maps of the disc onto a K-quasidisc, extended by quasiconformal
    /// reflection: constants carry `K²`.
    Quasidisc,
}

impl Reflection {
    fn power(self) -> i32 {
        match self {
            Reflection::Plane => 1,
            Reflection::Quasidisc => 2,
        }
    }
}

/// The base `24π²K^m` appearing in ν.
pub fn nu_factor(k: f64, reflection: Reflection) -> f64 {
    24.0 * PI * PI * k.powi(reflection.power())
}

/// `K^m π²(2+π²)²/(2 ln 3)`, the exponent of the reverse Hölder constant.
pub fn distortion_exponent(k: f64, reflection: Reflection) -> f64 {
    let s = 2.0 + PI * PI;
    k.powi(reflection.power()) * PI * PI * s * s / (2.0 * 3f64.ln())
}

/// `ln ν(1+ε) = 8(1+ε) ln 10 + ln(2ε) − ln(1+2ε) + 2(1+ε) ln(factor)`.
pub fn ln_nu_offset(eps: f64, factor: f64) -> f64 {
    let kappa = 1.0 + eps;
    8.0 * kappa * LN_10 + (2.0 * eps).ln() - (2.0 * eps).ln_1p() + 2.0 * kappa * factor.ln()
}

/// `ν(κ)` as a [`LogValue`].
pub fn nu_log(kappa: f64, factor: f64) -> Result<LogValue> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(Error::param(format!("kappa must be > 1, got {kappa}")));
    }
    Ok(LogValue::from_ln(ln_nu_offset(kappa - 1.0, factor)))
}

/// `ln(1 − e^x)` for `x < 0`, accurate at both ends.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x < -LN_2 {
        (-x.exp()).ln_1p()
    } else {
        (-x.exp_m1()).ln()
    }
}

/// `ln C_{1+ε} = 6 ln 10 − (ln(2κ−1) + ln(1−ν)) / (2κ)`.
pub fn ln_c_offset(eps: f64, factor: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("kappa offset must be > 0, got {eps}")));
    }
    let ln_nu = ln_nu_offset(eps, factor);
    if !(ln_nu < 0.0) {
        return Err(Error::BeyondBetaTilde { ln_nu });
    }
    let kappa = 1.0 + eps;
    Ok(6.0 * LN_10 - ((2.0 * eps).ln_1p() + ln_one_minus_exp(ln_nu)) / (2.0 * kappa))
}

/// `C_κ = 10⁶ / [(2κ−1)(1−ν)]^{1/(2κ)}` as a [`LogValue`].
pub fn c_kappa_log(kappa: f64, factor: f64) -> Result<LogValue> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(Error::param(format!("kappa must be > 1, got {kappa}")));
    }
    ln_c_offset(kappa - 1.0, factor).map(LogValue::from_ln)
}

/// Offset `ε` of the root `β̃ = 1 + ε` of `ν(β) = 1` (factor `24π²K²`).
///
/// Bisection in `ln ε` on the increasing function `ln ν`; the residual
/// `|ln ν(1+ε)|` is below 1e−10.
pub fn beta_tilde(k: f64) -> Result<f64> {
    check_k(k)?;
    let factor = nu_factor(k, Reflection::Quasidisc);
    let (mut lo, mut hi) = (EPS_MIN.ln(), 0.0f64);
    debug_assert!(ln_nu_offset(lo.exp(), factor) < 0.0 && ln_nu_offset(hi.exp(), factor) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_nu_offset(mid.exp(), factor) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    // report the side with the smaller residual
    let (a, b) = (lo.exp(), hi.exp());
    if ln_nu_offset(a, factor).abs() <= ln_nu_offset(b, factor).abs() {
        Ok(a)
    } else {
        Ok(b)
    }
}

/// `β* = min(K/(K−1), β̃)`, stored as the offset `β* − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaStar {
    pub offset: f64,
    /// `true` when `β̃` is the smaller of the two.
    pub limited_by_beta_tilde: bool,
}

pub fn beta_star(k: f64) -> Result<BetaStar> {
    let eps = beta_tilde(k)?;
    // K/(K−1) − 1 = 1/(K−1), +∞ when K = 1
    let conformal = if k == 1.0 { f64::INFINITY } else { 1.0 / (k - 1.0) };
    Ok(if eps <= conformal {
        BetaStar {
            offset: eps,
            limited_by_beta_tilde: true,
        }
    } else {
        BetaStar {
            offset: conformal,
            limited_by_beta_tilde: false,
        }
    })
}

/// Right-hand side of the reverse Hölder inequality,
/// `C_κ² K^m π^{1/κ−1}/4 · exp(K^m π²(2+π²)²/(2 ln 3)) · area`,
/// for `κ = 1 + kappa_offset`.
pub fn reverse_holder_rhs(kappa_offset: f64, k: f64, area: f64, reflection: Reflection) -> Result<LogValue> {
    check_k(k)?;
    if !(area > 0.0) {
        return Err(Error::param(format!("area must be > 0, got {area}")));
    }
    let m = reflection.power() as f64;
    let ln_c = ln_c_offset(kappa_offset, nu_factor(k, reflection))?;
    let inv_kappa_minus_one = -kappa_offset / (1.0 + kappa_offset);
    Ok(LogValue::from_ln(
        2.0 * ln_c + m * k.ln() + inv_kappa_minus_one * PI.ln() - 2.0 * LN_2
            + distortion_exponent(k, reflection)
            + area.ln(),
    ))
}

fn check_k(k: f64) -> Result<()> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::param(format!("K must be finite and >= 1, got {k}")));
    }
    Ok(())
}

/// `M_p(K)`, `M_p*(K)` and everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasidiscConstants {
    #[serde(rename = "K")]
    pub k: f64,
    pub p: f64,
    /// `β̃ − 1`.
    pub beta_tilde_offset: f64,
    pub beta_star: BetaStar,
    pub mp: LogValue,
    pub mp_star: LogValue,
    /// Optimising `β − 1`.
    pub beta_opt_offset: f64,
    /// Optimising `q`, and `2 − q` computed without cancellation.
    pub q_opt: f64,
    pub two_minus_q_opt: f64,
    /// The β-search ended on an end point of its interval.
    pub boundary_attained: bool,
}

/// `ln` of `inf_q (bracket / 2^p) · C_β²` at `β = 1 + ε`; `+∞` past `β̃`.
fn beta_objective(p: f64, eps: f64, factor: f64) -> (f64, f64) {
    let ln_c = match ln_c_offset(eps, factor) {
        Ok(v) => v,
        Err(_) => return (f64::INFINITY, 0.0),
    };
    let e = Exponents::from_beta_offset(p, eps);
    let inf = infimum_bracket(&e);
    (inf.ln_value - p * LN_2 + 2.0 * ln_c, inf.theta_opt)
}

/// Evaluates
/// `M_p(K) = π^{p/2} / (2^{p−2} K^{p/2+2}) · exp(−K²π²(2+π²)²/(2 ln 3))
///           · sup_{β ∈ (1, β*)} sup_{q ∈ (q*, 2]} ratio^{−(p − p/q + p/r)} C_β^{−2}`.
///
/// The double extremum is taken over the reciprocal of the minimised
/// bracket: for each β the q-bracket is minimised by the same search as the
/// β-regular bounds, and the outer search runs over a log-uniform grid in
/// `ε = β − 1` followed by golden-section refinement in `ln ε`.
pub fn mp_constant(k: f64, p: f64) -> Result<QuasidiscConstants> {
    check_k(k)?;
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::param(format!("p must be finite and > 2, got {p}")));
    }
    let factor = nu_factor(k, Reflection::Quasidisc);
    let beta_tilde_offset = beta_tilde(k)?;
    let star = beta_star(k)?;
    let (lo, hi) = (EPS_MIN.ln(), star.offset.ln());
    let objective = |t: f64| beta_objective(p, t.exp(), factor).0;

    let n = BETA_GRID_POINTS;
    let h = (hi - lo) / (n - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = if i == n - 1 { hi } else { lo + h * i as f64 };
            (t, objective(t))
        })
        .collect();
    let best_i = grid
        .iter()
        .enumerate()
        .fold(0, |b, (i, g)| if g.1 < grid[b].1 { i } else { b });
    let a = grid[best_i.saturating_sub(1)].0;
    let b = grid[(best_i + 1).min(n - 1)].0;
    let (mut t_opt, mut g_opt) = golden_section(objective, a, b, 1e-13);
    if grid[best_i].1 < g_opt {
        (t_opt, g_opt) = grid[best_i];
    }
    let boundary_attained = (t_opt - lo).abs() < 1e-9 || (hi - t_opt).abs() < 1e-9;

    let eps_opt = t_opt.exp();
    let (_, theta) = beta_objective(p, eps_opt, factor);
    let e = Exponents::from_beta_offset(p, eps_opt);
    let x = theta * e.inv_r;

    let ln_pref = 0.5 * p * PI.ln() - (p - 2.0) * LN_2 - (0.5 * p + 2.0) * k.ln()
        - distortion_exponent(k, Reflection::Quasidisc);
    let mp = LogValue::from_ln(ln_pref - g_opt);
    Ok(QuasidiscConstants {
        k,
        p,
        beta_tilde_offset,
        beta_star: star,
        mp,
        mp_star: mp * LogValue::from_ln(-0.5 * p * PI.ln()),
        beta_opt_offset: eps_opt,
        q_opt: e.q_from_theta(theta),
        two_minus_q_opt: 2.0 * x / (0.5 + x),
        boundary_attained,
    })
}

/// The two equal forms of the quasidisc bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasidiscBound {
    pub constants: QuasidiscConstants,
    pub area: f64,
    /// `M_p / |Ω|^{p/2}`.
    pub mu_lower: LogValue,
    /// `M_p* / R_*^p` with `R_* = √(|Ω|/π)`.
    pub via_radius: LogValue,
}

pub fn quasidisc_lower_bound(k: f64, p: f64, area: f64) -> Result<QuasidiscBound> {
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::param(format!("area must be finite and > 0, got {area}")));
    }
    let constants = mp_constant(k, p)?;
    Ok(bound_from_constants(constants, area))
}

/// Applies precomputed constants to a domain of the given area.
pub fn bound_from_constants(constants: QuasidiscConstants, area: f64) -> QuasidiscBound {
    let p = constants.p;
    let mu_lower = constants.mp / LogValue::from_f64(area).powf(0.5 * p);
    let radius = LogValue::from_f64(area / PI).powf(0.5);
    let via_radius = constants.mp_star / radius.powf(p);
    QuasidiscBound {
        constants,
        area,
        mu_lower,
        via_radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F1: f64 = 24.0 * PI * PI;

    #[test]
    fn nu_vanishes_toward_one() {
        let a = ln_nu_offset(1e-200, F1);
        let b = ln_nu_offset(1e-100, F1);
        assert!(a < b && a < -400.0);
        assert!(nu_log(1.0, F1).is_err());
    }

    #[test]
    fn nu_hand_value() {
        // log10 ν ≈ 8.0008 + log10(2e-4/1.0002) + 2.0002 log10(236.87)
        let l10 = nu_log(1.0001, F1).unwrap().log10_abs().unwrap();
        let hand = 8.0008 + (2e-4f64 / 1.0002).log10() + 2.0002 * F1.log10();
        assert!((l10 - hand).abs() < 1e-9, "{l10} vs {hand}");
        assert!((l10 - 9.05).abs() < 0.01);
    }

    #[test]
    fn nu_is_monotone() {
        let v: Vec<f64> = [1.0001, 1.001, 1.01]
            .iter()
            .map(|&k| nu_log(k, F1).unwrap().ln_abs().unwrap())
            .collect();
        assert!(v[0] < v[1] && v[1] < v[2]);
    }

    #[test]
    fn c_kappa_limits() {
        let c = ln_c_offset(1e-40, F1).unwrap();
        assert!((c - 6.0 * LN_10).abs() < 1e-12);
        assert!(c_kappa_log(1.0 + 1e-15, F1).unwrap().ln_abs().unwrap() > 6.0 * LN_10);
        assert!(matches!(c_kappa_log(1.01, F1), Err(Error::BeyondBetaTilde { .. })));
    }

    #[test]
    fn ln_one_minus_exp_near_one() {
        let x = (-1e-10f64).ln_1p();
        let v = ln_one_minus_exp(x);
        assert!((v - (1e-10f64).ln()).abs() < 1e-12 * 23.1, "{v}");
        let y = -50.0;
        assert!((ln_one_minus_exp(y) + (-50f64).exp()).abs() < 1e-30);
    }

    #[test]
    fn beta_tilde_k1() {
        let eps = beta_tilde(1.0).unwrap();
        let f = nu_factor(1.0, Reflection::Quasidisc);
        assert!(ln_nu_offset(eps, f).abs() < 1e-10);
        let lead = 0.5 * (-8.0 * LN_10 - 2.0 * F1.ln()).exp();
        assert!((eps / lead - 1.0).abs() < 0.2);
        assert!(ln_nu_offset(eps / 2.0, f) < 0.0 && ln_nu_offset(2.0 * eps, f) > 0.0);
        assert!(beta_tilde(2.0).unwrap() < eps);
        assert!(beta_tilde(0.5).is_err());
    }

    #[test]
    fn beta_star_is_beta_tilde_for_moderate_k() {
        for k in [1.0, 1.0001, 2.0] {
            let s = beta_star(k).unwrap();
            assert!(s.limited_by_beta_tilde);
            assert_eq!(s.offset, beta_tilde(k).unwrap());
        }
        // β̃ − 1 shrinks like K^{−4}, faster than K/(K−1) − 1 = 1/(K−1)
        for k in [10.0, 1e3, 1e20] {
            let s = beta_star(k).unwrap();
            assert!(s.limited_by_beta_tilde);
            assert!(s.offset < 1.0 / (k - 1.0));
        }
        assert!(beta_star(0.9).is_err());
    }

    #[test]
    fn reverse_holder_assembly() {
        let eps = 1e-15;
        let rhs = reverse_holder_rhs(eps, 1.0, PI, Reflection::Plane).unwrap().ln_abs().unwrap();
        let c = ln_c_offset(eps, F1).unwrap();
        let hand = 2.0 * c - 4f64.ln() + distortion_exponent(1.0, Reflection::Plane) + PI.ln() - eps / (1.0 + eps) * PI.ln();
        assert!((rhs - hand).abs() < 1e-12);
        let doubled = reverse_holder_rhs(eps, 1.0, 2.0 * PI, Reflection::Plane).unwrap().ln_abs().unwrap();
        assert!((doubled - rhs - LN_2).abs() < 1e-12);
        assert!(reverse_holder_rhs(1e-3, 2.0, PI, Reflection::Quasidisc).is_err());
    }

    // 60-digit reference values (tests/oracles/quasidisc_mp.py)
    const ORACLE_BETA_TILDE: [(f64, f64); 2] = [(1.0, 8.9114429293917611959e-14), (2.0, 5.569651830882493769e-15)];
    const ORACLE_LN_MP: [(f64, f64, f64, f64); 5] = [
        (1.0, 3.0, -706.8167145467522769947105, 5.346865758e-14),
        (1.0, 4.0, -722.9670343850106325563238, 5.940961953e-14),
        (2.0, 4.0, -2629.821695221045124355867, 3.713101221e-15),
        (3.0, 6.0, -5836.94825592623475422076, 8.251336046e-16),
        (10.0, 10.0, -63535.1803347443941468968, 7.426202441e-18),
    ];

    #[test]
    fn beta_tilde_matches_oracle() {
        for (k, want) in ORACLE_BETA_TILDE {
            let got = beta_tilde(k).unwrap();
            assert!((got / want - 1.0).abs() < 1e-10, "K={k}: {got:e} vs {want:e}");
        }
    }

    #[test]
    fn c_kappa_matches_oracle() {
        let eps = 0.5 * ORACLE_BETA_TILDE[1].1;
        let got = ln_c_offset(eps, nu_factor(2.0, Reflection::Quasidisc)).unwrap();
        assert!((got - 14.16208414824420105781286).abs() < 1e-9, "{got}");
    }

    #[test]
    fn mp_matches_oracle() {
        for (k, p, want, eps) in ORACLE_LN_MP {
            let c = mp_constant(k, p).unwrap();
            let got = c.mp.ln_abs().unwrap();
            assert!(got.is_finite());
            assert!(((got - want) / want).abs() < 1e-10, "K={k} p={p}: {got} vs {want}");
            assert!((c.beta_opt_offset / eps - 1.0).abs() < 1e-3, "{:e}", c.beta_opt_offset);
        }
    }

    #[test]
    fn mp_is_positive_and_finite() {
        for k in [1.0, 1.5, 2.0, 3.0, 5.0] {
            for p in [3.0, 4.0, 6.0] {
                let c = mp_constant(k, p).unwrap();
                assert_eq!(c.mp.sign(), crate::logvalue::Sign::Positive);
                assert!(c.mp.ln_abs().unwrap().is_finite());
            }
        }
    }

    #[test]
    fn mp_decreases_in_k() {
        let a = mp_constant(1.0, 4.0).unwrap().mp.ln_abs().unwrap();
        let b = mp_constant(1.5, 4.0).unwrap().mp.ln_abs().unwrap();
        let c = mp_constant(2.0, 4.0).unwrap().mp.ln_abs().unwrap();
        assert!(a > b && b > c);
        assert!(mp_constant(2.0, 2.0).is_err());
        assert!(quasidisc_lower_bound(1.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn mp_star_and_radius_identities() {
        let c = mp_constant(2.0, 4.0).unwrap();
        let diff = c.mp.ln_abs().unwrap() - c.mp_star.ln_abs().unwrap() - 2.0 * PI.ln();
        assert!(diff.abs() < 1e-12);
        assert!(!c.boundary_attained);
        assert!(c.beta_opt_offset < c.beta_tilde_offset);
        assert!(c.two_minus_q_opt >= 0.0 && c.q_opt <= 2.0);
        for area in [PI, 0.01, 3.7, 1e6] {
            let b = bound_from_constants(c.clone(), area);
            let (l1, l2) = (b.mu_lower.ln_abs().unwrap(), b.via_radius.ln_abs().unwrap());
            assert!((l1 - l2).abs() <= 8.0 * f64::EPSILON * l1.abs(), "{l1} {l2}");
        }
        let unit = bound_from_constants(c.clone(), PI);
        assert!((unit.mu_lower.ln_abs().unwrap() - c.mp_star.ln_abs().unwrap()).abs() < 1e-12);
        let four = bound_from_constants(c.clone(), 4.0 * PI);
        let drop = unit.mu_lower.ln_abs().unwrap() - four.mu_lower.ln_abs().unwrap();
        assert!((drop - 2.0 * 4f64.ln()).abs() < 1e-10);
    }
}
