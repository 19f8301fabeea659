//! Saddle-point system for the tilted eigenvalue density: support endpoints
//! `(a, b)` and power-constraint parameter `s` at fixed tilt `rho`, the
//! optimal density `p*`, the rate map `rbar(rho)` and its inversion.
//!
//! Solver layout: for fixed `z` the normalization mass `n(b)` of the Tricomi
//! solution (with `a = a(b)` from the edge-continuity equation) is strictly
//! increasing in `b`, so `b` is found by bisection, with an inner bisection
//! for `a(b)`. The power-constraint parameter `s` is an outer damped fixed
//! point on its stationarity condition `s = rho/(1+rho) int x/(z+x) p* dx`
//! (the integral has a closed form). All computations run at the per-block
//! ratio `alpha/Q`; the `Q` rescaling happens in the exponent layer.
//!
//! The `s` condition involves the resolvent of the tilted density, not of
//! the Marchenko–Pastur law; the two coincide only at `rho = 0`. Using the
//! MP specialization `(sqrt(z+b)-sqrt(z+a))^2/4` instead breaks the envelope
//! identity `dE/dr = -alpha rho` by a few percent at moderate tilts.

use crate::error::{Error, Result};
use crate::quad;
use crate::rmt::{self, ChannelParams, MpSupport};
use serde::{Deserialize, Serialize};

/// Input-ensemble / maximization variant for the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Per-codeword trace constraint, enforced through `s in [0, 1)`.
    PeakPower,
    /// Unconstrained Gaussian ensemble, `s = 0`.
    AveragePower,
    /// Peak-power constraint with the `rho` maximization extended past 1.
    SpherePacking,
}

impl Mode {
    pub(crate) fn uses_s(self) -> bool {
        !matches!(self, Mode::AveragePower)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::PeakPower => "peak-power",
            Mode::AveragePower => "average-power",
            Mode::SpherePacking => "sphere-packing",
        })
    }
}

/// Converged saddle-point data for one value of `rho`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SaddleSolution {
    pub rho: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    /// Effective noise `z = (1+rho)(1-s) sigma2`.
    pub z: f64,
    /// Absolute residuals of the edge, normalization and s equations.
    pub residuals: [f64; 3],
    pub mode: Mode,
}

/// Effective noise `z_{rho,s} = (1+rho)(1-s) sigma2`.
pub fn z_of(rho: f64, s: f64, params: &ChannelParams) -> f64 {
    (1.0 + rho) * (1.0 - s) * params.sigma2
}

const RESIDUAL_TOL: f64 = 1e-10;

/// Bisection in log space; assumes `f(lo)` and `f(hi)` straddle zero.
fn bisect_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, flo_pos: bool) -> f64 {
    let mut tlo = lo.ln();
    let mut thi = hi.ln();
    for _ in 0..200 {
        let tm = 0.5 * (tlo + thi);
        let fm = f(tm.exp());
        if (fm > 0.0) == flo_pos {
            tlo = tm;
        } else {
            thi = tm;
        }
        if thi - tlo < 1e-15 {
            break;
        }
    }
    (0.5 * (tlo + thi)).exp()
}

/// Lower edge `a(b)` from the edge-continuity equation
/// `(beta-1)/sqrt(ab) - rho*ae/sqrt((z+a)(z+b)) = 1`, or `None` when the
/// equation has no root in `(0, b)`.
fn edge_a(b: f64, z: f64, rho: f64, ae: f64, beta: f64) -> Option<f64> {
    let h = |a: f64| (beta - 1.0) / (a * b).sqrt() - rho * ae / ((z + a) * (z + b)).sqrt() - 1.0;
    // h -> +inf as a -> 0; no root if still positive at a = b
    if h(b) > 0.0 {
        return None;
    }
    Some(bisect_log(h, 1e-280, b, true))
}

/// Closed-form mass of the Tricomi density with endpoints `(a, b)`:
/// `n = (a+b)/4 - sqrt(ab)/2 + (ae rho / 2)(1 - (sqrt(ab)+z)/S)`,
/// `S = sqrt((z+a)(z+b))`.
fn tricomi_mass(a: f64, b: f64, z: f64, rho: f64, ae: f64) -> f64 {
    let s_ab = (a * b).sqrt();
    let big_s = ((z + a) * (z + b)).sqrt();
    (a + b) / 4.0 - s_ab / 2.0 + 0.5 * ae * rho * (1.0 - (s_ab + z) / big_s)
}

/// Normalization mass `n(b)` at fixed `(rho, s)`: the edge equation fixes
/// `a(b)` and the closed-form mass of the resulting density is returned.
/// `None` when the edge equation has no root at this `b`. Strict monotonicity
/// of this function in `b` is what makes the endpoint bisection valid.
pub fn normalization_mass(b: f64, rho: f64, s: f64, params: &ChannelParams) -> Option<f64> {
    let z = z_of(rho, s, params);
    let ae = params.alpha_eff();
    if params.beta == 1.0 {
        return Some(tricomi_mass(0.0, b, z, rho, ae));
    }
    edge_a(b, z, rho, ae, params.beta).map(|a| tricomi_mass(a, b, z, rho, ae))
}

fn endpoints_at(rho: f64, s: f64, params: &ChannelParams) -> Result<(f64, f64)> {
    let z = z_of(rho, s, params);
    let ae = params.alpha_eff();
    let beta = params.beta;
    let MpSupport { b0, .. } = rmt::mp_support(params);

    let mass_defect = |b: f64| -> f64 {
        if beta == 1.0 {
            return tricomi_mass(0.0, b, z, rho, ae) - 1.0;
        }
        match edge_a(b, z, rho, ae, beta) {
            // mass undefined below the edge-equation threshold; treat as
            // deficit so the bisection moves b upward
            None => -1.0,
            Some(a) => tricomi_mass(a, b, z, rho, ae) - 1.0,
        }
    };

    let b_lo = 1e-12;
    let mut b_hi = 4.0 * b0 + 4.0 * ae * rho + 10.0;
    let mut grow = 0;
    while mass_defect(b_hi) < 0.0 {
        b_hi *= 2.0;
        grow += 1;
        if grow > 40 {
            return Err(Error::BracketFailure(format!(
                "normalization mass stays below 1 up to b = {b_hi:e}"
            )));
        }
    }
    if mass_defect(b_lo) > 0.0 {
        return Err(Error::BracketFailure(
            "normalization mass exceeds 1 at the lower bracket edge".into(),
        ));
    }
    let b = bisect_log(|b| -mass_defect(b), b_lo, b_hi, true);
    let a = if beta == 1.0 {
        0.0
    } else {
        let a = edge_a(b, z, rho, ae, beta)
            .ok_or_else(|| Error::BracketFailure("edge equation lost its root".into()))?;
        // beta barely above 1: the lower edge underflows; pin it to zero
        if a < 1e-12 {
            0.0
        } else {
            a
        }
    };
    Ok((a, b))
}

/// `W = int x/(z+x) p*(x) dx = 1 - z m*(-z)` in closed form, using the edge
/// equation to express the density prefactor. The power stationarity reads
/// `s = rho/(1+rho) W`; the empirical counterpart `(1/NQ) sum l/(z+l)` is
/// what the finite-N Monte Carlo maximizes over.
fn power_fraction(a: f64, b: f64, z: f64, rho: f64, ae: f64, beta: f64) -> f64 {
    let big_s = ((z + a) * (z + b)).sqrt();
    let i1 = 0.5 * (a + b) + z - big_s;
    let i2 = (2.0 * z + a + b) / (2.0 * big_s) - 1.0;
    let kappa = ae * rho / big_s;
    // (beta-1)/sqrt(ab) = 1 + kappa at the edge-equation root; the right
    // side also covers the pinned hard edge a = 0
    let gamma = if a > 1e-11 {
        (beta - 1.0) / (a * b).sqrt()
    } else {
        1.0 + kappa
    };
    0.5 * gamma * i1 - 0.5 * kappa * (i1 - z * i2)
}

fn residuals_at(a: f64, b: f64, s: f64, rho: f64, params: &ChannelParams, mode: Mode) -> [f64; 3] {
    let z = z_of(rho, s, params);
    let ae = params.alpha_eff();
    let beta = params.beta;
    let big_s = ((z + a) * (z + b)).sqrt();
    let edge = if beta == 1.0 || a == 0.0 {
        0.0
    } else {
        (beta - 1.0) / (a * b).sqrt() - rho * ae / big_s - 1.0
    };
    let norm = a + b + 2.0 * rho * ae - 2.0 * (beta + 1.0) - 2.0 * rho * ae * z / big_s;
    let s_res = if mode.uses_s() {
        s - rho / (1.0 + rho) * power_fraction(a, b, z, rho, ae, beta)
    } else {
        0.0
    };
    [edge.abs(), norm.abs(), s_res.abs()]
}

/// Solve the endpoint pair `(a, b)` at fixed `(rho, s)`.
///
/// At `rho = 0` the system reduces to the Marchenko–Pastur edges:
///
/// ```
/// use gallager_mimo::{ChannelParams, saddle};
/// let p = ChannelParams::new(3.0, 0.05, 2.0, 1).unwrap();
/// let (a, b) = saddle::solve_endpoints(0.0, 0.0, &p).unwrap();
/// assert!((a - 0.535898).abs() < 1e-5 && (b - 7.464102).abs() < 1e-5);
/// ```
pub fn solve_endpoints(rho: f64, s: f64, params: &ChannelParams) -> Result<(f64, f64)> {
    if rho < 0.0 || !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidParams(format!(
            "need rho >= 0 and s in [0,1), got rho={rho}, s={s}"
        )));
    }
    let (a, b) = endpoints_at(rho, s, params)?;
    let res = residuals_at(a, b, s, rho, params, Mode::AveragePower);
    if res[0] > RESIDUAL_TOL || res[1] > RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            iterations: 0,
            residuals: res.to_vec(),
        });
    }
    Ok((a, b))
}

/// Jointly converged `(a, b, s)` at fixed `rho`: inner endpoint solve at
/// fixed `z`, outer damped fixed point on the power stationarity
/// `s = rho/(1+rho) int x/(z+x) p*(x) dx` (skipped for
/// [`Mode::AveragePower`], where `s = 0`).
pub fn solve_saddle(rho: f64, params: &ChannelParams, mode: Mode) -> Result<SaddleSolution> {
    if rho < 0.0 {
        return Err(Error::InvalidParams(format!("need rho >= 0, got {rho}")));
    }
    const DAMPING: f64 = 0.5;
    const MAX_ITER: usize = 500;
    let mut s = 0.0;
    let mut iterations = 0;
    if mode.uses_s() && rho > 0.0 {
        loop {
            let z = z_of(rho, s, params);
            let (a, b) = endpoints_at(rho, s, params)?;
            let w = power_fraction(a, b, z, rho, params.alpha_eff(), params.beta);
            let s_eq = (rho / (1.0 + rho) * w).min(1.0 - 1e-12);
            let s_next = (1.0 - DAMPING) * s + DAMPING * s_eq;
            iterations += 1;
            if (s_next - s).abs() < 1e-14 {
                s = s_next;
                break;
            }
            s = s_next;
            if iterations >= MAX_ITER {
                let (a, b) = endpoints_at(rho, s, params)?;
                return Err(Error::NoConvergence {
                    iterations,
                    residuals: residuals_at(a, b, s, rho, params, mode).to_vec(),
                });
            }
        }
    }
    let (a, b) = endpoints_at(rho, s, params)?;
    let residuals = residuals_at(a, b, s, rho, params, mode);
    if residuals.iter().any(|r| *r > RESIDUAL_TOL) {
        return Err(Error::NoConvergence {
            iterations,
            residuals: residuals.to_vec(),
        });
    }
    Ok(SaddleSolution {
        rho,
        s,
        a,
        b,
        z: z_of(rho, s, params),
        residuals,
        mode,
    })
}

/// Optimal (tilted) eigenvalue density `p*` on `[a, b]`, zero outside.
/// Vanishes like a square root at both support edges.
pub fn pstar_density(x: f64, sol: &SaddleSolution, params: &ChannelParams) -> f64 {
    let SaddleSolution { a, b, z, rho, .. } = *sol;
    if x <= a || x >= b || x <= 0.0 {
        return 0.0;
    }
    let ae = params.alpha_eff();
    let big_s = ((z + a) * (z + b)).sqrt();
    ((x - a) * (b - x)).sqrt() / (2.0 * std::f64::consts::PI * x * (x + z))
        * (x + z + ae * rho * z / big_s)
}

/// Integrate `f` against `p*` by quadrature with the sqrt-edge substitution.
pub fn pstar_integrate<F: Fn(f64) -> f64>(
    f: F,
    sol: &SaddleSolution,
    params: &ChannelParams,
    tol: f64,
) -> Result<f64> {
    quad::integrate_sqrt_edges(|x| f(x) * pstar_density(x, sol, params), sol.a, sol.b, tol)
}

/// Rate map `rbar(rho)` via the closed form in the `G` kernel.
/// Strictly decreasing in `rho`, with `rbar(0) = r_erg`.
pub fn rbar(rho: f64, params: &ChannelParams, mode: Mode) -> Result<f64> {
    let sol = solve_saddle(rho, params, mode)?;
    rbar_of_solution(&sol, params)
}

pub(crate) fn rbar_of_solution(sol: &SaddleSolution, params: &ChannelParams) -> Result<f64> {
    let SaddleSolution { a, b, z, rho, s, .. } = *sol;
    let ae = params.alpha_eff();
    let d = b - a;
    let big_s = ((z + a) * (z + b)).sqrt();
    let k = rho * ae / big_s;
    Ok((d * (1.0 - s) / z).ln() + 0.5 * d * (1.0 + k) * rmt::g_kernel((z + a) / d, a / d)?
        - 0.5 * d * k * rmt::g_kernel((z + a) / d, (z + a) / d)?)
}

/// Quadrature oracle for [`rbar`]: `log(1-s) + int p*(x) log(1 + x/z) dx`.
pub fn rbar_quadrature(rho: f64, params: &ChannelParams, mode: Mode) -> Result<f64> {
    let sol = solve_saddle(rho, params, mode)?;
    let integral = pstar_integrate(|x| (1.0 + x / sol.z).ln(), &sol, params, 1e-11)?;
    Ok((1.0 - sol.s).ln() + integral)
}

/// `r1 = rbar(1)`: the rate below which the tilt clamps at `rho = 1` and the
/// exponent becomes affine in `r`.
pub fn r1(params: &ChannelParams, mode: Mode) -> Result<f64> {
    rbar(1.0, params, mode)
}

/// Maximum tilt explored by the sphere-packing bracket expansion.
pub const RHO_MAX: f64 = 1e3;

/// Invert the rate map: the `rho >= 0` with `rbar(rho) = r`.
///
/// Returns 0 for `r >= r_erg` (zero-exponent regime). For `r < r1` the
/// result clamps at 1 unless `mode` is [`Mode::SpherePacking`], in which
/// case the bracket expands geometrically up to [`RHO_MAX`].
pub fn rho_of_rate(r: f64, params: &ChannelParams, mode: Mode) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParams(format!("need r > 0, got {r}")));
    }
    if r >= rmt::ergodic_rate(params) {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    if rbar(hi, params, mode)? > r {
        // r < r1
        if mode != Mode::SpherePacking {
            return Ok(1.0);
        }
        loop {
            let next = hi * 2.0;
            if next > RHO_MAX {
                return Err(Error::BracketFailure(format!(
                    "sphere-packing bracket exceeded rho_max = {RHO_MAX}"
                )));
            }
            hi = next;
            if rbar(hi, params, mode)? <= r {
                break;
            }
        }
    }
    let mut lo = 0.0;
    let mut flo = rmt::ergodic_rate(params) - r; // rbar(0) - r > 0
    debug_assert!(flo >= 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let fm = rbar(mid, params, mode)? - r;
        if fm.abs() < 1e-12 && hi - lo < 1e-10 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(beta: f64, sigma2: f64, alpha: f64, q: u32) -> ChannelParams {
        ChannelParams::new(beta, sigma2, alpha, q).unwrap()
    }

    #[test]
    fn z_of_basics() {
        let p = params(3.0, 0.05, 2.0, 1);
        assert_eq!(z_of(0.0, 0.0, &p), 0.05);
        assert_eq!(z_of(1.0, 0.0, &p), 0.10);
        let p1 = params(3.0, 1.0, 2.0, 1);
        assert_eq!(z_of(1.0, 0.5, &p1), 1.0);
    }

    #[test]
    fn rho_zero_recovers_mp_edges() {
        for (beta, sigma2) in [(1.0, 0.05), (1.5, 0.3), (3.0, 0.05), (5.0, 1.0)] {
            let p = params(beta, sigma2, 2.0, 1);
            let MpSupport { a0, b0 } = rmt::mp_support(&p);
            let (a, b) = solve_endpoints(0.0, 0.0, &p).unwrap();
            assert_abs_diff_eq!(a, a0, epsilon = 1e-9);
            assert_abs_diff_eq!(b, b0, epsilon = 1e-9);
            let sol = solve_saddle(0.0, &p, Mode::PeakPower).unwrap();
            assert_eq!(sol.s, 0.0);
        }
    }

    #[test]
    fn joint_solve_is_self_consistent() {
        let p = params(3.0, 0.05, 2.0, 1);
        let sol = solve_saddle(1.0, &p, Mode::PeakPower).unwrap();
        assert!(sol.s > 0.0 && sol.s < 1.0);
        assert!(sol.a > 0.0 && sol.a < sol.b);
        for r in sol.residuals {
            assert!(r <= RESIDUAL_TOL, "residual {r}");
        }
        // power stationarity holds against the quadrature resolvent
        let w = pstar_integrate(|x| x / (sol.z + x), &sol, &p, 1e-12).unwrap();
        assert_abs_diff_eq!(sol.s, 0.5 * w, epsilon = 1e-10);
    }

    #[test]
    fn average_power_keeps_s_zero() {
        let p = params(3.0, 0.05, 2.0, 1);
        let sol = solve_saddle(0.8, &p, Mode::AveragePower).unwrap();
        assert_eq!(sol.s, 0.0);
        assert_abs_diff_eq!(sol.z, 1.8 * 0.05, epsilon = 1e-15);
        let (a, b) = solve_endpoints(0.8, 0.0, &p).unwrap();
        assert_abs_diff_eq!(sol.a, a, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.b, b, epsilon = 1e-12);
    }

    #[test]
    fn pstar_vanishes_at_edges_and_normalizes() {
        let p = params(3.0, 0.05, 2.0, 1);
        for rho in [0.25, 0.5, 1.0] {
            let sol = solve_saddle(rho, &p, Mode::PeakPower).unwrap();
            assert_eq!(pstar_density(sol.a, &sol, &p), 0.0);
            assert_eq!(pstar_density(sol.b, &sol, &p), 0.0);
            let mass = pstar_integrate(|_| 1.0, &sol, &p, 1e-11).unwrap();
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn pstar_at_rho_zero_is_marchenko_pastur() {
        let p = params(3.0, 0.05, 2.0, 1);
        let sol = solve_saddle(0.0, &p, Mode::PeakPower).unwrap();
        let MpSupport { a0, b0 } = rmt::mp_support(&p);
        for i in 1..200 {
            let x = a0 + (b0 - a0) * i as f64 / 200.0;
            assert_abs_diff_eq!(
                pstar_density(x, &sol, &p),
                rmt::mp_density(x, &p),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn beta_one_pins_lower_edge() {
        let p = params(1.0, 0.05, 2.0, 1);
        let sol = solve_saddle(0.7, &p, Mode::PeakPower).unwrap();
        assert_eq!(sol.a, 0.0);
        assert!(sol.b > 0.0);
        let mass = pstar_integrate(|_| 1.0, &sol, &p, 1e-11).unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
        // the hard-edge branch of the closed-form resolvent
        let w = pstar_integrate(|x| x / (sol.z + x), &sol, &p, 1e-12).unwrap();
        assert_abs_diff_eq!(sol.s, 0.7 / 1.7 * w, epsilon = 1e-9);
    }

    #[test]
    fn rbar_closed_form_matches_quadrature() {
        for beta in [1.0, 3.0] {
            let p = params(beta, 0.05, 2.0, 1);
            for rho in [0.25, 0.5, 1.0] {
                let closed = rbar(rho, &p, Mode::PeakPower).unwrap();
                let oracle = rbar_quadrature(rho, &p, Mode::PeakPower).unwrap();
                assert!(
                    (closed - oracle).abs() < 1e-8,
                    "beta={beta} rho={rho}: {closed} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn rbar_limits_and_monotonicity() {
        let p = params(3.0, 0.05, 2.0, 1);
        let r_erg = rmt::ergodic_rate(&p);
        assert_abs_diff_eq!(rbar(1e-8, &p, Mode::PeakPower).unwrap(), r_erg, epsilon = 1e-6);
        let r1v = r1(&p, Mode::PeakPower).unwrap();
        let rmid = rbar(0.5, &p, Mode::PeakPower).unwrap();
        assert!(r1v < rmid && rmid < r_erg);
        // strictly decreasing on a 50-point grid
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let rho = 2.0 * i as f64 / 49.0;
            let v = rbar(rho, &p, Mode::PeakPower).unwrap();
            assert!(v < prev, "rbar not decreasing at rho={rho}");
            prev = v;
        }
    }

    #[test]
    fn r1_average_vs_peak_differ() {
        let p = params(3.0, 0.05, 2.0, 1);
        let peak = r1(&p, Mode::PeakPower).unwrap();
        let avg = r1(&p, Mode::AveragePower).unwrap();
        assert!((peak - avg).abs() > 1e-6);
    }

    #[test]
    fn rho_of_rate_regimes() {
        let p = params(3.0, 0.05, 2.0, 1);
        let r_erg = rmt::ergodic_rate(&p);
        assert_eq!(rho_of_rate(r_erg, &p, Mode::PeakPower).unwrap(), 0.0);
        assert_eq!(rho_of_rate(r_erg + 1.0, &p, Mode::PeakPower).unwrap(), 0.0);
        let r1v = r1(&p, Mode::PeakPower).unwrap();
        let r = r1v + 0.1 * (r_erg - r1v);
        let rho = rho_of_rate(r, &p, Mode::PeakPower).unwrap();
        assert!(rho > 0.0 && rho < 1.0);
        assert_abs_diff_eq!(rbar(rho, &p, Mode::PeakPower).unwrap(), r, epsilon = 1e-10);
        // clamp below r1
        assert_eq!(rho_of_rate(0.5 * r1v, &p, Mode::PeakPower).unwrap(), 1.0);
        // sphere packing continues past 1
        let rho_sp = rho_of_rate(0.5 * r1v, &p, Mode::SpherePacking).unwrap();
        assert!(rho_sp > 1.0);
        assert_abs_diff_eq!(rbar(rho_sp, &p, Mode::SpherePacking).unwrap(), 0.5 * r1v, epsilon = 1e-9);
    }

    #[test]
    fn normalization_mass_monotone_spot_check() {
        let p = params(3.0, 0.05, 2.0, 1);
        let mut prev = -f64::INFINITY;
        for i in 1..40 {
            let b = 0.2 + i as f64 * 0.5;
            if let Some(n) = normalization_mass(b, 0.7, 0.2, &p) {
                assert!(n > prev, "n(b) not increasing at b={b}");
                prev = n;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn converged_solutions_are_ordered_and_normalized(
            beta in 1.0f64..4.0,
            sigma2 in 0.02f64..2.0,
            alpha in 0.5f64..8.0,
            rho in 0.0f64..1.5,
        ) {
            let p = params(beta, sigma2, alpha, 1);
            let sol = solve_saddle(rho, &p, Mode::PeakPower).unwrap();
            prop_assert!(sol.a >= 0.0 && sol.a < sol.b);
            prop_assert!(sol.s >= 0.0 && sol.s < 1.0);
            let mass = pstar_integrate(|_| 1.0, &sol, &p, 1e-11).unwrap();
            prop_assert!((mass - 1.0).abs() < 1e-8);
        }
    }
}
