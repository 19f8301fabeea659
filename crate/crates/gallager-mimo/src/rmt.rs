//! Closed-form random-matrix quantities for the large-system MIMO channel:
//! Marchenko–Pastur law, ergodic rate, dispersion constants and the
//! logarithmic kernel `G(x, y)`, each paired with an independent quadrature
//! oracle used by the test suites.

use crate::error::{Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};

/// Problem instance shared by every module: antenna ratio `beta = K/N >= 1`,
/// noise power `sigma2` (linear), blocklength ratio `alpha = T/N` and the
/// number of independent fading blocks `q_blocks`.
///
/// ```
/// use gallager_mimo::ChannelParams;
/// let p = ChannelParams::new(3.0, 0.05, 2.0, 1).unwrap();
/// assert!(ChannelParams::new(0.5, 0.05, 2.0, 1).is_err()); // beta < 1 rejected
/// assert_eq!(p.beta, 3.0);
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub beta: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub q_blocks: u32,
}

impl ChannelParams {
    pub fn new(beta: f64, sigma2: f64, alpha: f64, q_blocks: u32) -> Result<Self> {
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::InvalidParams(format!(
                "beta must be finite and >= 1, got {beta}"
            )));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParams(format!(
                "sigma2 must be finite and > 0, got {sigma2}"
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite and > 0, got {alpha}"
            )));
        }
        if q_blocks < 1 {
            return Err(Error::InvalidParams("q_blocks must be >= 1".into()));
        }
        Ok(Self {
            beta,
            sigma2,
            alpha,
            q_blocks,
        })
    }

    /// Blocklength ratio per fading block, `alpha / Q`. All saddle-point
    /// computations run at this effective ratio with `Q = 1` and rescale.
    pub fn alpha_eff(&self) -> f64 {
        self.alpha / self.q_blocks as f64
    }

    /// Same channel with `alpha` reduced by one to budget for training
    /// (one `N`-symbol slot is spent estimating the channel).
    pub fn training_adjusted(&self) -> Result<Self> {
        if self.alpha <= 1.0 {
            return Err(Error::InvalidParams(format!(
                "training adjustment needs alpha > 1, got {}",
                self.alpha
            )));
        }
        Self::new(self.beta, self.sigma2, self.alpha - 1.0, self.q_blocks)
    }
}

/// Support of the Marchenko–Pastur law, `[(sqrt(beta)-1)^2, (sqrt(beta)+1)^2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpSupport {
    pub a0: f64,
    pub b0: f64,
}

pub fn mp_support(params: &ChannelParams) -> MpSupport {
    let s = params.beta.sqrt();
    MpSupport {
        a0: (s - 1.0) * (s - 1.0),
        b0: (s + 1.0) * (s + 1.0),
    }
}

/// Marchenko–Pastur density `sqrt((b0-x)(x-a0)) / (2 pi x)` on its support,
/// zero outside. At `beta = 1` the `1/sqrt(x)` edge at zero is integrable;
/// point evaluation at `x = 0` returns zero.
pub fn mp_density(x: f64, params: &ChannelParams) -> f64 {
    let MpSupport { a0, b0 } = mp_support(params);
    if x <= a0 || x >= b0 {
        return 0.0;
    }
    ((b0 - x) * (x - a0)).sqrt() / (2.0 * std::f64::consts::PI * x)
}

/// Positive root `u` of `sigma2 u^2 - (sigma2 + beta - 1) u - 1 = 0`.
pub fn ergodic_u(params: &ChannelParams) -> f64 {
    let s2 = params.sigma2;
    let c = s2 + params.beta - 1.0;
    (c + (c * c + 4.0 * s2).sqrt()) / (2.0 * s2)
}

/// Large-system ergodic mutual information per transmit antenna, in nats.
///
/// ```
/// use gallager_mimo::{ChannelParams, rmt};
/// let p = ChannelParams::new(3.0, 0.05, 2.0, 1).unwrap();
/// let r_erg = rmt::ergodic_rate(&p);
/// assert!((r_erg - 3.9298).abs() < 1e-3);
/// ```
pub fn ergodic_rate(params: &ChannelParams) -> f64 {
    ergodic_rate_at_noise(params.beta, params.sigma2)
}

/// Ergodic rate as an explicit function of the noise power; the saddle-point
/// solver for the fast-fading limit evaluates it at the effective noise `z`.
pub fn ergodic_rate_at_noise(beta: f64, noise: f64) -> f64 {
    let c = noise + beta - 1.0;
    let u = (c + (c * c + 4.0 * noise).sqrt()) / (2.0 * noise);
    u.ln() + beta * (1.0 + 1.0 / (u * noise)).ln() - (1.0 - 1.0 / u)
}

/// The kernel `G(x, y) = (1/pi) int_0^1 sqrt(t(1-t)) log(t+x)/(t+y) dt`
/// in closed form; defined for `x, y >= 0` (`y = 0` drops the first term).
pub fn g_kernel(x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 {
        return Err(Error::InvalidParams(format!(
            "g_kernel needs x, y >= 0, got ({x}, {y})"
        )));
    }
    let t1 = if y > 0.0 {
        let num = (x * (1.0 + y)).sqrt() + (y * (1.0 + x)).sqrt();
        let den = (1.0 + y).sqrt() + y.sqrt();
        -2.0 * (y * (1.0 + y)).sqrt() * (num / den).ln()
    } else {
        0.0
    };
    let t2 = (1.0 + 2.0 * y) * (((1.0 + x).sqrt() + x.sqrt()) / 2.0).ln();
    let t3 = -0.5 * {
        let d = (1.0 + x).sqrt() - x.sqrt();
        d * d
    };
    Ok(t1 + t2 + t3)
}

/// Quadrature oracle for [`g_kernel`]: integrates the defining integral with
/// the `t = sin^2(theta)` substitution.
pub fn g_kernel_quadrature(x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 {
        return Err(Error::InvalidParams(format!(
            "g_kernel_quadrature needs x, y >= 0, got ({x}, {y})"
        )));
    }
    let v = quad::integrate(
        |th| {
            let (s, c) = th.sin_cos();
            let t = s * s;
            // sqrt(t(1-t)) dt -> 2 sin^2 cos^2 dth
            2.0 * (s * c) * (s * c) * (t + x).ln() / (t + y)
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-13,
    )?;
    Ok(v / std::f64::consts::PI)
}

/// `(1/pi) int_0^1 sqrt(t(1-t)) / (t+y) dt` in closed form; companion of the
/// `G` kernel for integrands without the logarithm.
pub fn pi_kernel(y: f64) -> f64 {
    0.5 * (1.0 + 2.0 * y) - (y * (1.0 + y)).sqrt()
}

/// Infinite-codelength dispersion `v_inf = -log(1 - (1-u)^2 / (beta u^2))`.
pub fn dispersion_vinf(params: &ChannelParams) -> f64 {
    let u = ergodic_u(params);
    -(1.0 - (1.0 - u) * (1.0 - u) / (params.beta * u * u)).ln()
}

/// `g0 = int x p0(x) / (x + sigma2) dx = (sqrt(sigma2+b0) - sqrt(sigma2+a0))^2 / 4`.
pub fn g0(params: &ChannelParams) -> f64 {
    g0_at_noise(params.beta, params.sigma2)
}

pub(crate) fn g0_at_noise(beta: f64, noise: f64) -> f64 {
    let MpSupport { a0, b0 } = mp_support(&ChannelParams {
        beta,
        sigma2: noise,
        alpha: 1.0,
        q_blocks: 1,
    });
    let d = (noise + b0).sqrt() - (noise + a0).sqrt();
    d * d / 4.0
}

/// Finite-blocklength dispersion correction `delta_v = 2 g0 - g0^2`.
/// Dropping the `-g0^2` term gives the average-power variant.
pub fn delta_v(params: &ChannelParams) -> f64 {
    let g = g0(params);
    2.0 * g - g * g
}

/// Dispersion bounds `(theta_minus, theta_plus)` of the second-order
/// analysis; `theta_plus = alpha * v_alpha` exactly.
pub fn theta_bounds(params: &ChannelParams) -> (f64, f64) {
    let MpSupport { a0, b0 } = mp_support(params);
    let beta = params.beta;
    let s2 = params.sigma2;
    let vinf = dispersion_vinf(params);
    let theta_minus = params.alpha * vinf
        + 0.5
            * (beta + 1.0
                - (s2 * (beta + 1.0) + (beta - 1.0) * (beta - 1.0))
                    / ((s2 + a0) * (s2 + b0)).sqrt());
    let theta_plus = params.alpha * vinf + delta_v(params);
    (theta_minus, theta_plus)
}

/// Integrate `f` against the Marchenko–Pastur density by quadrature.
pub fn mp_integrate<F: Fn(f64) -> f64>(f: F, params: &ChannelParams, tol: f64) -> Result<f64> {
    let MpSupport { a0, b0 } = mp_support(params);
    quad::integrate_sqrt_edges(|x| f(x) * mp_density(x, params), a0, b0, tol)
}
