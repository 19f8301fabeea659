//! Large-system error exponents for MIMO Rayleigh block-fading channels.
//!
//! For an `N x K` channel (`beta = K/N >= 1`) used over `Q` fading blocks of
//! `T = alpha N / Q` symbols each, the random-coding error probability of a
//! Gaussian codebook decays as `exp(-N^2 E(r))` with `r` the rate per
//! receive antenna in nats. This crate computes `E(r)` in the large-`N`
//! limit by solving the associated saddle-point (Coulomb-gas) equations, as
//! well as the dispersion quantities governing its behaviour near the
//! ergodic rate, and finite-`N` Monte Carlo estimates for comparison.
//!
//! ```
//! use gallager_mimo::{exponent, rmt, ChannelParams, Mode};
//!
//! // beta = 3, SNR = 13 dB (sigma^2 = 0.05), T = 2N, single fading block
//! let p = ChannelParams::new(3.0, 0.05, 2.0, 1).unwrap();
//! let r_erg = rmt::ergodic_rate(&p);
//! let pt = exponent::gallager_exponent(0.6 * r_erg, &p, Mode::PeakPower).unwrap();
//! assert!((pt.e - 1.4118032519).abs() < 1e-8);
//! ```
//!
//! The saddle solver ([`saddle`]) finds the support endpoints `(a, b)` of
//! the tilted eigenvalue density and the power-constraint parameter `s` at
//! each tilt `rho`, then [`exponent`] evaluates the exponent in closed form
//! (cross-checked against a quadrature oracle). [`mc`] estimates the same
//! quantity at finite `N` from sampled Wishart eigenvalues.

pub mod error;
pub mod exponent;
pub mod mc;
pub mod quad;
pub mod rmt;
pub mod saddle;

// run the guide's code blocks as doc-tests so the book stays in sync with
// the library
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel-model.md")]
    mod channel_model {}
    #[doc = include_str!("../../../book/src/saddle-point.md")]
    mod saddle_point {}
    #[doc = include_str!("../../../book/src/exponent.md")]
    mod exponent_chapter {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

pub use error::{Error, Result};
pub use exponent::{CurveTable, ExponentPoint, Regime, SweepRow};
pub use rmt::{ChannelParams, MpSupport};
pub use saddle::{Mode, SaddleSolution};
