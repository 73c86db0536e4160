use serde::{Deserialize, Serialize};

use super::TargetSpec;
use crate::error::{Error, Result};
use crate::rate::{geometric_grid, RateCurve};

pub const DEFAULT_ORACLE_GRID: usize = 512;
pub const MIN_ORACLE_GRID: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub beta: f64,
    pub bpp: f64,
    pub relative_error: f64,
}

/// Brute-force reference: the point of a geometric `grid_size` grid over the
/// curve's bounds whose rate is relatively closest to the target.
pub fn oracle_best_beta<C: RateCurve + ?Sized>(
    curve: &C,
    target: &TargetSpec,
    grid_size: usize,
) -> Result<OracleResult> {
    let mut all = oracle_best_betas(curve, std::slice::from_ref(target), grid_size)?;
    Ok(all.remove(0))
}

/// [`oracle_best_beta`] for several targets, sampling the grid once.
pub fn oracle_best_betas<C: RateCurve + ?Sized>(
    curve: &C,
    targets: &[TargetSpec],
    grid_size: usize,
) -> Result<Vec<OracleResult>> {
    if grid_size < MIN_ORACLE_GRID {
        return Err(Error::Domain(format!(
            "oracle grid needs at least {MIN_ORACLE_GRID} points, got {grid_size}"
        )));
    }
    let samples = geometric_grid(curve.beta_min(), curve.beta_max(), grid_size)
        .into_iter()
        .map(|beta| Ok((beta, curve.eval(beta)?.bpp)))
        .collect::<Result<Vec<_>>>()?;
    Ok(targets
        .iter()
        .map(|target| {
            let mut best: Option<OracleResult> = None;
            for &(beta, bpp) in &samples {
                let relative_error = target.relative_error(bpp);
                if best.is_none_or(|b| relative_error < b.relative_error) {
                    best = Some(OracleResult {
                        beta,
                        bpp,
                        relative_error,
                    });
                }
            }
            best.expect("grid is non-empty")
        })
        .collect())
}
