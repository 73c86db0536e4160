//! Bit rate matching: pick a model and a test multiplier `beta` so the
//! achieved rate lands within a relative tolerance of a target.
//!
//! Two pipelines are provided:
//!
//! * **baseline**: every model whose `[bpp(beta_min), bpp(beta_max)]` range
//!   covers the target is a candidate; each candidate runs a geometric
//!   bisection on `beta`, every validation re-runs the encoder, and a matched
//!   validation also decodes to compute the loss. The candidate with the
//!   lowest loss wins.
//! * **proposed**: each model is evaluated once at its training multiplier;
//!   the model with the smallest relative bit distance to the target is
//!   searched alone, with a log-log linear model of the rate curve and a
//!   cached latent. No decoder runs.

mod oracle;
mod pipeline;
mod search;
mod select;

use serde::{Deserialize, Serialize};

pub use self::oracle::{
    oracle_best_beta, oracle_best_betas, OracleResult, DEFAULT_ORACLE_GRID, MIN_ORACLE_GRID,
};
pub use self::pipeline::{run_brm, BrmConfig, BrmResult, Method};
pub use self::search::{
    search_binary, search_binary_with, search_loglinear, search_loglinear_with, RefitStrategy,
    SearchOptions, DEFAULT_BINARY_ITERS, DEFAULT_LOGLINEAR_ITERS,
};
pub use self::select::{
    argmin_relative, relative_bit_distance, select_model_baseline, select_model_relative,
    BaselineSelection, CandidateOutcome, RelativeSelection,
};
use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::rate::{Probe, RateCurve};

pub const DEFAULT_TOLERANCE: f64 = 0.10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    bpp_target: f64,
    tolerance: f64,
}

impl TargetSpec {
    pub fn new(bpp_target: f64, tolerance: f64) -> Result<Self> {
        if !(bpp_target.is_finite() && bpp_target > 0.0) {
            return Err(Error::Domain(format!(
                "target bpp {bpp_target} must be positive"
            )));
        }
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::Domain(format!(
                "tolerance {tolerance} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            bpp_target,
            tolerance,
        })
    }

    /// A target with the default 10% tolerance.
    pub fn with_default_tolerance(bpp_target: f64) -> Result<Self> {
        Self::new(bpp_target, DEFAULT_TOLERANCE)
    }

    pub fn bpp(&self) -> f64 {
        self.bpp_target
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn relative_error(&self, bpp: f64) -> f64 {
        (bpp - self.bpp_target).abs() / self.bpp_target
    }

    pub fn is_matched(&self, bpp: f64) -> bool {
        self.relative_error(bpp) <= self.tolerance
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Matched,
    /// Iterations ran out; the best probe is reported.
    Exhausted,
    /// The target lies outside `[bpp(beta_min), bpp(beta_max)]`.
    Infeasible,
}

/// Every probe of one search on one model, in evaluation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub model_id: u32,
    pub probes: Vec<Probe>,
    pub cost: Cost,
    pub outcome: Outcome,
    /// Index into `probes` of the reported operating point.
    pub best: usize,
}

impl SearchTrace {
    pub fn best_probe(&self) -> &Probe {
        &self.probes[self.best]
    }

    pub fn evaluations(&self) -> usize {
        self.probes.len()
    }

    /// Probes after the two bracket endpoints.
    pub fn post_endpoint_probes(&self) -> usize {
        self.probes.len().saturating_sub(2)
    }

    pub fn matched(&self) -> bool {
        self.outcome == Outcome::Matched
    }
}

/// One validation of `beta`: always the rate, and the loss only when
/// `want_loss` is set and the rate is within tolerance. Skipping the decoder
/// when the rate misses is what ends a validation early.
pub fn validate_beta<C: RateCurve + ?Sized>(
    curve: &C,
    beta: f64,
    target: &TargetSpec,
    want_loss: bool,
) -> Result<Probe> {
    curve.eval_gated(beta, &|bpp| want_loss && target.is_matched(bpp))
}
