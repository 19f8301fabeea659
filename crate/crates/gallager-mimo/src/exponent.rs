//! The Gallager error exponent `E(r)` in all regimes: closed forms for
//! `beta > 1` and `beta = 1`, the variational (quadrature) oracle, the
//! fast-fading `Q -> infinity` limit, and the quadratic dispersion
//! approximations near the ergodic rate.
//!
//! The variational evaluation is the source of truth; the closed forms are
//! fast paths kept honest by equivalence tests. For `beta = 1` the closed
//! form is re-derived from the stationarity identity (the printed corollary
//! does not reproduce the variational value; see the crate tests).

use crate::error::{Error, Result};
use crate::rmt::{self, ChannelParams, MpSupport};
use crate::saddle::{self, Mode, SaddleSolution};
use serde::{Deserialize, Serialize};

/// Where on the curve a point sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `r < r1`: tilt clamped at `rho = 1`, exponent affine in `r`.
    Clamped,
    /// `r1 <= r < r_erg`: interior maximizer.
    Interior,
    /// `r >= r_erg`: exponent is zero.
    Zero,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Clamped => "clamped",
            Regime::Interior => "interior",
            Regime::Zero => "zero",
        })
    }
}

/// One evaluated point of an exponent curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub r: f64,
    pub e: f64,
    pub rho: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub mode: Mode,
    pub regime: Regime,
}

/// A swept curve; failed points carry the error text instead of a point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveTable {
    pub params: ChannelParams,
    pub mode: Mode,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub point: Option<ExponentPoint>,
    pub error: Option<String>,
}

/// Finite-blocklength dispersion `v_alpha = v_inf + delta_v / alpha`.
pub fn v_alpha(params: &ChannelParams) -> f64 {
    rmt::dispersion_vinf(params) + rmt::delta_v(params) / params.alpha
}

/// Regime selector for [`quadratic_approx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadraticRegime {
    /// Infinite codelength (outage) curvature `1/v_inf`.
    Outage,
    /// Finite blocklength curvature `1/v_alpha`.
    FiniteAlpha,
    /// Fast-fading curvature `1/delta_v`.
    QInfinity,
}

/// Quadratic expansion `(r - r_erg)^2 / (2 v)` of the exponent near `r_erg`.
pub fn quadratic_approx(r: f64, params: &ChannelParams, regime: QuadraticRegime) -> f64 {
    let v = match regime {
        QuadraticRegime::Outage => rmt::dispersion_vinf(params),
        QuadraticRegime::FiniteAlpha => v_alpha(params),
        QuadraticRegime::QInfinity => rmt::delta_v(params),
    };
    let d = r - rmt::ergodic_rate(params);
    d * d / (2.0 * v)
}

/// `0.5 (3 beta - beta^2 log beta + (beta-1)^2 log(beta-1))`, with the
/// `beta -> 1` limit of the last term taken as zero.
fn rate_function_constant(beta: f64) -> f64 {
    let edge = if beta > 1.0 {
        (beta - 1.0) * (beta - 1.0) * (beta - 1.0).ln()
    } else {
        0.0
    };
    0.5 * (3.0 * beta - beta * beta * beta.ln() + edge)
}

/// Closed-form exponent at a converged saddle, per unit `Q` (the caller
/// multiplies by `Q`). `beta > 1` follows the published closed form;
/// `beta = 1` (or a pinned lower edge) uses the re-derived expression.
fn exponent_closed(r: f64, sol: &SaddleSolution, params: &ChannelParams) -> Result<f64> {
    let SaddleSolution { a, b, z, rho, s, .. } = *sol;
    let ae = params.alpha_eff();
    let beta = params.beta;
    let d = b - a;
    let big_s = ((z + a) * (z + b)).sqrt();
    let g = rmt::g_kernel;
    if beta > 1.0 && a > 0.0 {
        let sq = (z + b).sqrt() - (z + a).sqrt();
        let e = d * d / 32.0 - ae * rho * r + a / 2.0 - d.ln() - (beta - 1.0) / 2.0 * (a * d).ln()
            + ae * (1.0 + rho) * (s + (1.0 - s).ln())
            + ae * rho / 2.0 * ((1.0 + a / z).ln() + z * sq * sq / (4.0 * big_s))
            + d * ae * rho / (2.0 * big_s)
                * (g(0.0, (z + a) / d)? + (beta - 1.0) / 2.0 * g(a / d, (z + a) / d)?)
            - d / 2.0
                * (1.0 + ae * rho / big_s)
                * (g(0.0, a / d)? + (beta - 1.0) / 2.0 * g(a / d, a / d)?)
            - rate_function_constant(beta)
            + ae * rho / 2.0
                * ((d / z).ln() - d * ae * rho / (2.0 * big_s) * g((z + a) / d, (z + a) / d)?
                    + (d / 2.0 + ae * rho * d / (2.0 * big_s)) * g((z + a) / d, a / d)?);
        Ok(e)
    } else {
        // beta = 1 (a = 0): the double logarithmic integral reduces through
        // the stationarity identity evaluated at x = 0, giving c = -2 L with
        // L = int log(x) p*(x) dx in closed form.
        let k = ae * rho / big_s;
        let c1 = k * z;
        let ya = a / d;
        let yz = (a + z) / d;
        let m1 = d * d / 16.0 + c1 * ((a + b + 2.0 * z) / 4.0 - big_s / 2.0);
        let j = (d / z).ln() + 0.5 * d * (1.0 + k) * g(yz, ya)? - 0.5 * d * k * g(yz, yz)?;
        let l = 0.5
            * d
            * ((1.0 + k) * (d.ln() * rmt::pi_kernel(ya) + g(ya, ya)?)
                - k * (d.ln() * rmt::pi_kernel(yz) + g(ya, yz)?));
        let c = -2.0 * l;
        Ok(0.5 * m1 + 0.5 * c + 0.5 * ae * rho * j - ae * rho * r
            + ae * (1.0 + rho) * (s + (1.0 - s).ln())
            - rate_function_constant(1.0))
    }
}

fn zero_point(r: f64, params: &ChannelParams, mode: Mode) -> Result<ExponentPoint> {
    let MpSupport { a0, b0 } = rmt::mp_support(params);
    Ok(ExponentPoint {
        r,
        e: 0.0,
        rho: 0.0,
        s: 0.0,
        a: a0,
        b: b0,
        mode,
        regime: Regime::Zero,
    })
}

/// The large-system Gallager exponent at rate `r` (nats per antenna).
///
/// ```
/// use gallager_mimo::{exponent, rmt, ChannelParams, Mode};
/// let p = ChannelParams::new(3.0, 0.05, 2.0, 1).unwrap();
/// let r_erg = rmt::ergodic_rate(&p);
/// let pt = exponent::gallager_exponent(0.7 * r_erg, &p, Mode::PeakPower).unwrap();
/// assert!(pt.e > 0.0);
/// assert!(exponent::gallager_exponent(r_erg, &p, Mode::PeakPower).unwrap().e == 0.0);
/// ```
pub fn gallager_exponent(r: f64, params: &ChannelParams, mode: Mode) -> Result<ExponentPoint> {
    if !(r > 0.0) {
        return Err(Error::InvalidParams(format!("need r > 0, got {r}")));
    }
    let q = params.q_blocks as f64;
    let r_erg = rmt::ergodic_rate(params);
    if r >= r_erg {
        return zero_point(r, params, mode);
    }
    // rho underflows right below r_erg; the quadratic expansion is exact to
    // second order there
    if r_erg - r < 1e-6 * r_erg {
        let ae = params.alpha_eff();
        let dv = match mode {
            Mode::AveragePower => 2.0 * rmt::g0(params),
            _ => rmt::delta_v(params),
        };
        let v_ae = rmt::dispersion_vinf(params) + dv / ae;
        let d = r - r_erg;
        let mut pt = zero_point(r, params, mode)?;
        pt.e = q * d * d / (2.0 * v_ae);
        pt.regime = Regime::Interior;
        return Ok(pt);
    }
    let rho = saddle::rho_of_rate(r, params, mode)?;
    let sol = saddle::solve_saddle(rho, params, mode)?;
    let e = q * exponent_closed(r, &sol, params)?;
    let regime = if mode != Mode::SpherePacking && rho >= 1.0 {
        Regime::Clamped
    } else {
        Regime::Interior
    };
    Ok(ExponentPoint {
        r,
        e: e.max(0.0),
        rho,
        s: sol.s,
        a: sol.a,
        b: sol.b,
        mode,
        regime,
    })
}

/// Quadrature oracle for the closed forms: evaluates the full variational
/// expression at the converged `p*`. The double logarithmic integral is
/// reduced to a single one through the stationarity identity evaluated at
/// `x = b`, which works uniformly in `beta`.
pub fn exponent_variational(r: f64, params: &ChannelParams, mode: Mode) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParams(format!("need r > 0, got {r}")));
    }
    let q = params.q_blocks as f64;
    let ae = params.alpha_eff();
    let beta = params.beta;
    let rho = saddle::rho_of_rate(r, params, mode)?;
    let sol = saddle::solve_saddle(rho, params, mode)?;
    let SaddleSolution { b, z, s, .. } = sol;
    let tol = 1e-11;
    let m1 = saddle::pstar_integrate(|x| x, &sol, params, tol)?;
    let l = saddle::pstar_integrate(|x| x.ln(), &sol, params, tol)?;
    let j = saddle::pstar_integrate(|x| (1.0 + x / z).ln(), &sol, params, tol)?;
    let log_b_gap = saddle::pstar_integrate(|x| (b - x).max(f64::MIN_POSITIVE).ln(), &sol, params, tol)?;
    let c = b - (beta - 1.0) * b.ln() + ae * rho * (1.0 + b / z).ln() - 2.0 * log_b_gap;
    Ok(q * (0.5 * m1 - 0.5 * (beta - 1.0) * l + 0.5 * c + 0.5 * ae * rho * j - ae * rho * r
        + ae * (1.0 + rho) * (s + (1.0 - s).ln())
        - rate_function_constant(beta)))
}

fn qinf_s_fixed_point(rho: f64, params: &ChannelParams, mode: Mode) -> f64 {
    if !mode.uses_s() || rho == 0.0 {
        return 0.0;
    }
    let MpSupport { a0, b0 } = rmt::mp_support(params);
    let mut s = 0.0f64;
    for _ in 0..500 {
        let z = (1.0 + rho) * (1.0 - s) * params.sigma2;
        let d = (z + b0).sqrt() - (z + a0).sqrt();
        let s_eq = rho / (4.0 * (1.0 + rho)) * d * d;
        let next = 0.5 * s + 0.5 * s_eq.min(1.0 - 1e-12);
        if (next - s).abs() < 1e-15 {
            return next;
        }
        s = next;
    }
    s
}

fn qinf_rbar(rho: f64, params: &ChannelParams, mode: Mode) -> f64 {
    let s = qinf_s_fixed_point(rho, params, mode);
    let z = (1.0 + rho) * (1.0 - s) * params.sigma2;
    (1.0 - s).ln() + rmt::ergodic_rate_at_noise(params.beta, z)
}

/// Fast-fading limit of the exponent (`Q -> infinity` at fixed `alpha`):
/// the saddle density collapses to the Marchenko–Pastur law and only the
/// `(rho, s)` maximization survives.
pub fn exponent_q_infinity(r: f64, params: &ChannelParams, mode: Mode) -> Result<ExponentPoint> {
    if !(r > 0.0) {
        return Err(Error::InvalidParams(format!("need r > 0, got {r}")));
    }
    let r_erg = rmt::ergodic_rate(params);
    if r >= r_erg {
        return zero_point(r, params, mode);
    }
    let r1 = qinf_rbar(1.0, params, mode);
    let (rho, regime) = if r <= r1 && mode != Mode::SpherePacking {
        (1.0, Regime::Clamped)
    } else {
        let mut lo = 0.0;
        let mut hi = 1.0;
        if mode == Mode::SpherePacking && r <= r1 {
            while qinf_rbar(hi, params, mode) > r {
                hi *= 2.0;
                if hi > saddle::RHO_MAX {
                    return Err(Error::BracketFailure(
                        "sphere-packing bracket exceeded rho_max in the Q->infinity limit".into(),
                    ));
                }
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if qinf_rbar(mid, params, mode) > r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * hi.max(1.0) {
                break;
            }
        }
        (0.5 * (lo + hi), Regime::Interior)
    };
    let s = qinf_s_fixed_point(rho, params, mode);
    let z = (1.0 + rho) * (1.0 - s) * params.sigma2;
    let e = params.alpha
        * (rho * rmt::ergodic_rate_at_noise(params.beta, z) - rho * r
            + (1.0 + rho) * (s + (1.0 - s).ln()));
    let MpSupport { a0, b0 } = rmt::mp_support(params);
    Ok(ExponentPoint {
        r,
        e: e.max(0.0),
        rho,
        s,
        a: a0,
        b: b0,
        mode,
        regime,
    })
}

/// Evaluate the exponent on a rate grid; per-point failures are recorded in
/// the row and the sweep continues.
pub fn sweep(r_grid: &[f64], params: &ChannelParams, mode: Mode) -> Result<CurveTable> {
    if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid.iter().any(|r| *r <= 0.0) {
        return Err(Error::InvalidParams(
            "rate grid must be strictly increasing and positive".into(),
        ));
    }
    let rows = r_grid
        .iter()
        .map(|&r| match gallager_exponent(r, params, mode) {
            Ok(point) => SweepRow {
                r,
                point: Some(point),
                error: None,
            },
            Err(err) => SweepRow {
                r,
                point: None,
                error: Some(err.to_string()),
            },
        })
        .collect();
    Ok(CurveTable {
        params: *params,
        mode,
        rows,
    })
}

/// Sweep for the fast-fading limit (used by the figure reproduction).
pub fn sweep_q_infinity(r_grid: &[f64], params: &ChannelParams, mode: Mode) -> Result<CurveTable> {
    if r_grid.windows(2).any(|w| w[1] <= w[0]) || r_grid.iter().any(|r| *r <= 0.0) {
        return Err(Error::InvalidParams(
            "rate grid must be strictly increasing and positive".into(),
        ));
    }
    let rows = r_grid
        .iter()
        .map(|&r| match exponent_q_infinity(r, params, mode) {
            Ok(point) => SweepRow {
                r,
                point: Some(point),
                error: None,
            },
            Err(err) => SweepRow {
                r,
                point: None,
                error: Some(err.to_string()),
            },
        })
        .collect();
    Ok(CurveTable {
        params: *params,
        mode,
        rows,
    })
}
