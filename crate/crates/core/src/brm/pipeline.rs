use serde::{Deserialize, Serialize};

use super::search::{search_binary_with, search_loglinear_with, RefitStrategy, SearchOptions};
use super::select::{select_model_baseline, select_model_relative};
use super::{Outcome, SearchTrace, TargetSpec, DEFAULT_BINARY_ITERS, DEFAULT_LOGLINEAR_ITERS};
use crate::cost::Cost;
use crate::error::Result;
use crate::rate::{Probe, RateCurve};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Proposed,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Proposed => "proposed",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrmConfig {
    pub binary_max_iters: usize,
    pub loglinear_max_iters: usize,
    pub refit: RefitStrategy,
    /// Proposed pipeline: stop at the selected model's default operating point
    /// when it already meets the tolerance.
    pub accept_matching_default: bool,
}

impl Default for BrmConfig {
    fn default() -> Self {
        Self {
            binary_max_iters: DEFAULT_BINARY_ITERS,
            loglinear_max_iters: DEFAULT_LOGLINEAR_ITERS,
            refit: RefitStrategy::Anchored,
            accept_matching_default: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrmResult {
    pub method: Method,
    /// Position of the chosen curve in the family.
    pub model_index: usize,
    pub model_id: u32,
    pub beta_test: f64,
    pub delta_beta: f64,
    pub bpp_achieved: f64,
    pub matched: bool,
    /// Loss at the final operating point when the pipeline computed one.
    pub loss: Option<f64>,
    /// Evaluations made while selecting a model that are not part of any
    /// search: default-rate probes (proposed) or range probes (baseline).
    pub selection_probes: Vec<Probe>,
    /// One trace per searched model.
    pub traces: Vec<SearchTrace>,
    pub cost: Cost,
}

/// Runs one complete bit rate matching pass over a model family.
pub fn run_brm<C: RateCurve>(
    curves: &[C],
    target: &TargetSpec,
    method: Method,
    config: &BrmConfig,
) -> Result<BrmResult> {
    match method {
        Method::Baseline => run_baseline(curves, target, config),
        Method::Proposed => run_proposed(curves, target, config),
    }
}

fn run_baseline<C: RateCurve>(
    curves: &[C],
    target: &TargetSpec,
    config: &BrmConfig,
) -> Result<BrmResult> {
    let opts = SearchOptions {
        max_iters: config.binary_max_iters,
        want_loss: true,
        refit: config.refit,
    };
    let selection =
        select_model_baseline(curves, target, |c, t| search_binary_with(c, t, &opts, None))?;
    let chosen = selection.chosen_outcome();
    let best = *chosen.trace.best_probe();
    let curve = &curves[selection.chosen];
    let selection_probes: Vec<Probe> = selection
        .ranges
        .iter()
        .flat_map(|&(lo, hi)| [lo, hi])
        .collect();
    let traces: Vec<SearchTrace> = selection
        .candidates
        .iter()
        .map(|c| c.trace.clone())
        .collect();
    Ok(finish(
        Method::Baseline,
        curve,
        selection.chosen,
        target,
        best,
        selection_probes,
        traces,
    ))
}

fn run_proposed<C: RateCurve>(
    curves: &[C],
    target: &TargetSpec,
    config: &BrmConfig,
) -> Result<BrmResult> {
    let selection = select_model_relative(curves, target)?;
    let curve = &curves[selection.chosen];
    let default_probe = selection.defaults[selection.chosen];
    if config.accept_matching_default && target.is_matched(default_probe.bpp) {
        return Ok(finish(
            Method::Proposed,
            curve,
            selection.chosen,
            target,
            default_probe,
            selection.defaults,
            Vec::new(),
        ));
    }
    let opts = SearchOptions {
        max_iters: config.loglinear_max_iters,
        want_loss: false,
        refit: config.refit,
    };
    let trace = search_loglinear_with(curve, target, &opts, None)?;
    let best = *trace.best_probe();
    Ok(finish(
        Method::Proposed,
        curve,
        selection.chosen,
        target,
        best,
        selection.defaults,
        vec![trace],
    ))
}

fn finish<C: RateCurve>(
    method: Method,
    curve: &C,
    model_index: usize,
    target: &TargetSpec,
    best: Probe,
    selection_probes: Vec<Probe>,
    traces: Vec<SearchTrace>,
) -> BrmResult {
    let cost = selection_probes.iter().map(|p| p.cost).sum::<Cost>()
        + traces.iter().map(|t| t.cost).sum::<Cost>();
    let matched = target.is_matched(best.bpp);
    debug_assert!(
        !matched
            || traces.is_empty()
            || traces
                .iter()
                .any(|t| t.model_id == curve.model_id() && t.outcome == Outcome::Matched)
    );
    BrmResult {
        method,
        model_index,
        model_id: curve.model_id(),
        beta_test: best.beta,
        delta_beta: best.beta / curve.beta_train(),
        bpp_achieved: best.bpp,
        matched,
        loss: best.loss,
        selection_probes,
        traces,
        cost,
    }
}
