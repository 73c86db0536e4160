use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{ResultRow, RowError, RowMethod, RunReport};
use crate::bd::{bd_rate, RdCurve, RdPoint};
use crate::cost::Cost;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub rows: usize,
    pub matched_fraction: f64,
    pub mean_bit_diff_percent: f64,
    pub encoder_runs: u64,
    pub entropy_evals: u64,
    pub decoder_runs: u64,
}

/// BD-rate of `test` against `anchor`. `mean_percent` averages the per-image
/// values; `pooled_percent` compares the per-target mean curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyBdRate {
    pub anchor: RowMethod,
    pub test: RowMethod,
    pub mean_percent: Option<f64>,
    pub pooled_percent: Option<f64>,
    pub per_image: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_version: u32,
    pub images: usize,
    pub rows: usize,
    pub methods: BTreeMap<RowMethod, MethodSummary>,
    pub totals: Cost,
    pub strategy_bd_rate: Option<StrategyBdRate>,
    /// Proposed over baseline total entropy evaluations.
    pub probe_ratio: Option<f64>,
    pub errors: Vec<RowError>,
}

fn summarize_method(rows: &[&ResultRow]) -> MethodSummary {
    let n = rows.len();
    let cost: Cost = rows.iter().map(|r| r.cost()).sum();
    let mean = |f: &dyn Fn(&ResultRow) -> f64| {
        if n == 0 {
            0.0
        } else {
            rows.iter().map(|r| f(r)).sum::<f64>() / n as f64
        }
    };
    MethodSummary {
        rows: n,
        matched_fraction: mean(&|r| if r.matched { 1.0 } else { 0.0 }),
        mean_bit_diff_percent: mean(&|r| r.bit_diff_percent),
        encoder_runs: cost.encoder_runs,
        entropy_evals: cost.entropy_evals,
        decoder_runs: cost.decoder_runs,
    }
}

/// RD curve of one method: the per-target means of achieved bpp and PSNR,
/// optionally restricted to one image.
pub fn method_curve(report: &RunReport, method: RowMethod, image: Option<&str>) -> Result<RdCurve> {
    let mut by_target: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in report
        .rows_for(method)
        .filter(|r| image.is_none_or(|i| r.image == i))
        .filter(|r| r.psnr_db.is_finite())
    {
        let e = by_target.entry(r.target_bpp.to_bits()).or_default();
        e.0 += r.bpp_achieved;
        e.1 += r.psnr_db;
        e.2 += 1;
    }
    RdCurve::from_points_lossy(by_target.values().map(|&(b, q, n)| RdPoint {
        bpp: b / n as f64,
        quality_db: q / n as f64,
    }))
}

fn strategy_bd_rate(report: &RunReport, anchor: RowMethod, test: RowMethod) -> StrategyBdRate {
    let mut per_image = BTreeMap::new();
    for image in &report.images {
        let pair = method_curve(report, anchor, Some(image))
            .and_then(|a| Ok((a, method_curve(report, test, Some(image))?)));
        match pair.and_then(|(a, t)| bd_rate(&a, &t)) {
            Ok(bd) => {
                per_image.insert(image.clone(), bd.bd_rate_percent);
            }
            Err(e) => log::warn!("{image}: no BD-rate for {test} vs {anchor}: {e}"),
        }
    }
    let mean_percent =
        (!per_image.is_empty()).then(|| per_image.values().sum::<f64>() / per_image.len() as f64);
    let pooled_percent = method_curve(report, anchor, None)
        .and_then(|a| bd_rate(&a, &method_curve(report, test, None)?))
        .map(|bd| bd.bd_rate_percent)
        .ok();
    StrategyBdRate {
        anchor,
        test,
        mean_percent,
        pooled_percent,
        per_image,
    }
}

pub fn summarize(report: &RunReport) -> Summary {
    let mut methods = BTreeMap::new();
    for m in [RowMethod::Baseline, RowMethod::Proposed, RowMethod::Anchor] {
        let rows: Vec<&ResultRow> = report.rows_for(m).collect();
        if !rows.is_empty() {
            methods.insert(m, summarize_method(&rows));
        }
    }
    let both =
        methods.contains_key(&RowMethod::Baseline) && methods.contains_key(&RowMethod::Proposed);
    let probe_ratio = both
        .then(|| {
            let base = methods[&RowMethod::Baseline].entropy_evals;
            (base > 0).then(|| methods[&RowMethod::Proposed].entropy_evals as f64 / base as f64)
        })
        .flatten();
    Summary {
        config_version: report.config.config_version,
        images: report.images.len(),
        rows: report.rows.len(),
        totals: report.rows.iter().map(ResultRow::cost).sum(),
        methods,
        strategy_bd_rate: both
            .then(|| strategy_bd_rate(report, RowMethod::Baseline, RowMethod::Proposed)),
        probe_ratio,
        errors: report.errors.clone(),
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes `results.csv`, `summary.json` and `curves/<method>.csv`.
pub fn emit_report(report: &RunReport, output_dir: &Path) -> Result<Summary> {
    create_dir(&output_dir.join("curves"))?;
    write_rows(&output_dir.join("results.csv"), &report.rows)?;
    let summary = summarize(report);
    write_json(&output_dir.join("summary.json"), &summary)?;
    for &m in summary.methods.keys() {
        match method_curve(report, m, None) {
            Ok(curve) => curve.write_csv(output_dir.join("curves").join(format!("{m}.csv")))?,
            Err(e) => log::warn!("no RD curve for {m}: {e}"),
        }
    }
    Ok(summary)
}
