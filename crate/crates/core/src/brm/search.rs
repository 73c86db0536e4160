use serde::{Deserialize, Serialize};

use super::{validate_beta, Outcome, SearchTrace, TargetSpec};
use crate::cost::Cost;
use crate::error::Result;
use crate::rate::{Probe, RateCurve};

pub const DEFAULT_BINARY_ITERS: usize = 32;
pub const DEFAULT_LOGLINEAR_ITERS: usize = 10;

/// Below this fitted slope the log-log line is treated as flat.
const MIN_SLOPE: f64 = 1e-9;
/// A proposal this close (relative) to an earlier probe is a repeat.
const REPEAT_TOLERANCE: f64 = 1e-6;

/// Which two points the log-log line is refitted through after each probe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefitStrategy {
    /// The `beta_min` endpoint and the newest probe.
    #[default]
    Anchored,
    /// The two probes that currently bracket the target.
    Bracketing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub max_iters: usize,
    /// Decode and compute the loss on a validation that meets the tolerance.
    pub want_loss: bool,
    pub refit: RefitStrategy,
}

impl SearchOptions {
    pub fn binary() -> Self {
        Self {
            max_iters: DEFAULT_BINARY_ITERS,
            want_loss: false,
            refit: RefitStrategy::Anchored,
        }
    }

    pub fn loglinear() -> Self {
        Self {
            max_iters: DEFAULT_LOGLINEAR_ITERS,
            ..Self::binary()
        }
    }
}

/// Geometric bisection between `beta_min` and `beta_max`.
pub fn search_binary<C: RateCurve + ?Sized>(
    curve: &C,
    target: &TargetSpec,
    max_iters: usize,
) -> Result<SearchTrace> {
    search_binary_with(
        curve,
        target,
        &SearchOptions {
            max_iters,
            ..SearchOptions::binary()
        },
        None,
    )
}

/// Log-log linear search between `beta_min` and `beta_max`.
pub fn search_loglinear<C: RateCurve + ?Sized>(
    curve: &C,
    target: &TargetSpec,
    max_iters: usize,
) -> Result<SearchTrace> {
    search_loglinear_with(
        curve,
        target,
        &SearchOptions {
            max_iters,
            ..SearchOptions::loglinear()
        },
        None,
    )
}

/// Bisection with explicit options. `endpoints` are already-charged probes at
/// `beta_min` and `beta_max`; they are evaluated here when absent.
pub fn search_binary_with<C: RateCurve + ?Sized>(
    curve: &C,
    target: &TargetSpec,
    opts: &SearchOptions,
    endpoints: Option<(Probe, Probe)>,
) -> Result<SearchTrace> {
    let mut s = Search::start(curve, target, opts, endpoints)?;
    if let Some(outcome) = s.endpoint_verdict() {
        return Ok(s.finish(outcome));
    }
    for _ in 0..opts.max_iters.max(1) {
        let beta = s.midpoint();
        if s.probe(beta)? {
            return Ok(s.finish(Outcome::Matched));
        }
    }
    Ok(s.finish(Outcome::Exhausted))
}

/// Log-log linear search with explicit options; see [`search_binary_with`]
/// for `endpoints`.
///
/// The first proposal solves `log bpp = A log beta + B` through the two
/// endpoints for the target rate. Each later proposal refits the line per
/// `opts.refit`. A flat or undefined fit, a repeated proposal, or a proposal
/// outside the current bracket is replaced by one bisection step.
pub fn search_loglinear_with<C: RateCurve + ?Sized>(
    curve: &C,
    target: &TargetSpec,
    opts: &SearchOptions,
    endpoints: Option<(Probe, Probe)>,
) -> Result<SearchTrace> {
    let mut s = Search::start(curve, target, opts, endpoints)?;
    if let Some(outcome) = s.endpoint_verdict() {
        return Ok(s.finish(outcome));
    }
    let anchor = s.lo;
    let mut newest = s.hi;
    for _ in 0..opts.max_iters.max(1) {
        let (p1, p2) = match opts.refit {
            RefitStrategy::Anchored if anchor.bpp > 0.0 => (anchor, newest),
            // a zero-rate anchor has no logarithm; the lower bracket end stands in
            RefitStrategy::Anchored if s.lo.beta != newest.beta => (s.lo, newest),
            RefitStrategy::Anchored | RefitStrategy::Bracketing => (s.lo, s.hi),
        };
        let beta = match fit_proposal(&p1, &p2, target.bpp()) {
            Some(beta) if beta > s.lo.beta && beta < s.hi.beta && !s.repeats(beta) => {
                beta.clamp(curve.beta_min(), curve.beta_max())
            }
            _ => s.midpoint(),
        };
        if s.probe(beta)? {
            return Ok(s.finish(Outcome::Matched));
        }
        newest = *s.trace.last().expect("probe recorded");
    }
    Ok(s.finish(Outcome::Exhausted))
}

/// Solves the line through two `(log beta, log bpp)` points for the target.
fn fit_proposal(p1: &Probe, p2: &Probe, target_bpp: f64) -> Option<f64> {
    if p1.bpp <= 0.0 || p2.bpp <= 0.0 || p1.beta == p2.beta {
        return None;
    }
    let (x1, y1) = (p1.beta.ln(), p1.bpp.ln());
    let (x2, y2) = (p2.beta.ln(), p2.bpp.ln());
    let slope = (y2 - y1) / (x2 - x1);
    if !(slope.is_finite() && slope > MIN_SLOPE) {
        return None;
    }
    let intercept = y1 - slope * x1;
    let beta = ((target_bpp.ln() - intercept) / slope).exp();
    beta.is_finite().then_some(beta)
}

/// Shared bracket bookkeeping for both searches.
struct Search<'a, C: ?Sized> {
    curve: &'a C,
    target: &'a TargetSpec,
    want_loss: bool,
    trace: Vec<Probe>,
    cost: Cost,
    lo: Probe,
    hi: Probe,
}

impl<'a, C: RateCurve + ?Sized> Search<'a, C> {
    fn start(
        curve: &'a C,
        target: &'a TargetSpec,
        opts: &SearchOptions,
        endpoints: Option<(Probe, Probe)>,
    ) -> Result<Self> {
        let (lo, hi) = match endpoints {
            Some(pair) => pair,
            None => (
                validate_beta(curve, curve.beta_min(), target, opts.want_loss)?,
                validate_beta(curve, curve.beta_max(), target, opts.want_loss)?,
            ),
        };
        let mut s = Self {
            curve,
            target,
            want_loss: opts.want_loss,
            trace: Vec::new(),
            cost: Cost::ZERO,
            lo,
            hi,
        };
        s.record(lo);
        s.record(hi);
        Ok(s)
    }

    fn record(&mut self, p: Probe) {
        self.cost += p.cost;
        self.trace.push(p);
        log::debug!(
            target: "brm::trace",
            "model_id={} beta={:.9e} bpp={:.9} encoder_runs={} entropy_evals={} decoder_runs={}",
            self.curve.model_id(),
            p.beta,
            p.bpp,
            self.cost.encoder_runs,
            self.cost.entropy_evals,
            self.cost.decoder_runs
        );
    }

    /// Matched if an endpoint already meets the tolerance, infeasible if the
    /// target lies outside the endpoint rates.
    fn endpoint_verdict(&self) -> Option<Outcome> {
        let t = self.target;
        if t.is_matched(self.lo.bpp) || t.is_matched(self.hi.bpp) {
            Some(Outcome::Matched)
        } else if t.bpp() < self.lo.bpp || t.bpp() > self.hi.bpp {
            Some(Outcome::Infeasible)
        } else {
            None
        }
    }

    fn midpoint(&self) -> f64 {
        (self.lo.beta * self.hi.beta).sqrt()
    }

    fn repeats(&self, beta: f64) -> bool {
        self.trace
            .iter()
            .any(|p| (p.beta - beta).abs() <= REPEAT_TOLERANCE * p.beta)
    }

    /// Validates `beta`, tightens the bracket, and reports whether it matched.
    fn probe(&mut self, beta: f64) -> Result<bool> {
        let p = validate_beta(self.curve, beta, self.target, self.want_loss)?;
        self.record(p);
        if self.target.is_matched(p.bpp) {
            return Ok(true);
        }
        if p.bpp < self.target.bpp() {
            self.lo = p;
        } else {
            self.hi = p;
        }
        Ok(false)
    }

    fn finish(self, outcome: Outcome) -> SearchTrace {
        let t = self.target;
        let best = match outcome {
            Outcome::Matched | Outcome::Exhausted => self
                .trace
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    t.relative_error(a.bpp).total_cmp(&t.relative_error(b.bpp))
                })
                .map(|(i, _)| i)
                .unwrap_or(0),
            // the nearer endpoint: beta_min if the target is below the range
            Outcome::Infeasible => usize::from(t.bpp() > self.trace[0].bpp),
        };
        SearchTrace {
            model_id: self.curve.model_id(),
            probes: self.trace,
            cost: self.cost,
            outcome,
            best,
        }
    }
}
