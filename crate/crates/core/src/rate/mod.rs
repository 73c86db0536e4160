//! Curves mapping a test multiplier `beta` to a rate in bits per pixel.
//!
//! Every search in [`crate::brm`] talks to a [`RateCurve`]; the toy codec,
//! closed-form log-linear curves and recorded tables all implement it.

mod codec_curve;
mod synthetic;
mod tabulated;

use serde::{Deserialize, Serialize};

pub use self::codec_curve::{make_codec_curve, CodecCurve, LatentCache};
pub use self::synthetic::{synthetic_eval, SinePerturbation, SyntheticLogLinearCurve};
pub use self::tabulated::TabulatedCurve;
use crate::cost::Cost;
use crate::error::{Error, Result};

/// One curve evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub beta: f64,
    pub bpp: f64,
    /// Distortion (MSE) when the caller asked for it and the curve has a decoder.
    pub loss: Option<f64>,
    pub cost: Cost,
}

pub trait RateCurve {
    fn model_id(&self) -> u32;

    fn beta_train(&self) -> f64;

    fn beta_min(&self) -> f64;

    fn beta_max(&self) -> f64;

    /// Evaluates the rate at `beta`, then computes the loss only if
    /// `want_loss(bpp)` holds.
    fn eval_gated(&self, beta: f64, want_loss: &dyn Fn(f64) -> bool) -> Result<Probe>;

    fn eval(&self, beta: f64) -> Result<Probe> {
        self.eval_gated(beta, &|_| false)
    }
}

impl<C: RateCurve + ?Sized> RateCurve for &C {
    fn model_id(&self) -> u32 {
        (**self).model_id()
    }
    fn beta_train(&self) -> f64 {
        (**self).beta_train()
    }
    fn beta_min(&self) -> f64 {
        (**self).beta_min()
    }
    fn beta_max(&self) -> f64 {
        (**self).beta_max()
    }
    fn eval_gated(&self, beta: f64, want_loss: &dyn Fn(f64) -> bool) -> Result<Probe> {
        (**self).eval_gated(beta, want_loss)
    }
}

impl<C: RateCurve + ?Sized> RateCurve for Box<C> {
    fn model_id(&self) -> u32 {
        (**self).model_id()
    }
    fn beta_train(&self) -> f64 {
        (**self).beta_train()
    }
    fn beta_min(&self) -> f64 {
        (**self).beta_min()
    }
    fn beta_max(&self) -> f64 {
        (**self).beta_max()
    }
    fn eval_gated(&self, beta: f64, want_loss: &dyn Fn(f64) -> bool) -> Result<Probe> {
        (**self).eval_gated(beta, want_loss)
    }
}

// admits bounds recomputed as beta_train * delta with an ulp of drift
const BOUND_SLACK: f64 = 1e-12;

/// Rejects `beta` outside `[min, max]` (with a relative slack of 1e-12) and
/// clamps it onto the interval otherwise.
pub(crate) fn check_bounds(beta: f64, min: f64, max: f64) -> Result<f64> {
    if !beta.is_finite() || beta < min * (1.0 - BOUND_SLACK) || beta > max * (1.0 + BOUND_SLACK) {
        return Err(Error::OutOfRange { beta, min, max });
    }
    Ok(beta.clamp(min, max))
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln() / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        lo * (ratio * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Rate samples over a geometric beta grid and the indices where the rate
/// failed to increase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityAudit {
    pub betas: Vec<f64>,
    pub bpps: Vec<f64>,
    /// `i` such that `bpps[i + 1] <= bpps[i]`, excluding ties at zero rate.
    pub violations: Vec<usize>,
}

impl MonotonicityAudit {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `curve` on an `n`-point geometric grid over its bounds and checks
/// that the rate is strictly increasing (ties only allowed at zero rate).
pub fn audit_monotone<C: RateCurve + ?Sized>(curve: &C, n: usize) -> Result<MonotonicityAudit> {
    let betas = geometric_grid(curve.beta_min(), curve.beta_max(), n);
    let bpps = betas
        .iter()
        .map(|&b| curve.eval(b).map(|p| p.bpp))
        .collect::<Result<Vec<_>>>()?;
    let violations = bpps
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] <= w[0] && !(w[0] == 0.0 && w[1] == 0.0))
        .map(|(i, _)| i)
        .collect();
    Ok(MonotonicityAudit {
        betas,
        bpps,
        violations,
    })
}
