use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{create_dir, write_json, write_rows};
use super::run::{codec_family, load_corpus, with_workers, RowError};
use crate::brm::{oracle_best_betas, search_binary, search_loglinear, OracleResult, TargetSpec};
use crate::codec::{self, CodecModel};
use crate::error::Result;
use crate::image::Image;
use crate::rate::{geometric_grid, SyntheticLogLinearCurve};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub image: String,
    pub model_id: u32,
    pub delta: f64,
    pub beta: f64,
    pub bpp: f64,
    pub mse: f64,
}

/// Grid indices `i` where step `i -> i + 1` broke monotonicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAudit {
    pub image: String,
    pub model_id: u32,
    /// Rate did not increase (ties at zero rate are allowed).
    pub rate_violations: Vec<usize>,
    /// Distortion increased.
    pub mse_violations: Vec<usize>,
}

impl SweepAudit {
    pub fn passed(&self) -> bool {
        self.rate_violations.is_empty() && self.mse_violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub audits: Vec<SweepAudit>,
    pub errors: Vec<RowError>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.audits.iter().all(SweepAudit::passed)
    }
}

/// Samples one model's `[delta_min, delta_max]` on a geometric grid, reusing
/// one latent for every point.
pub fn sweep_model(
    name: &str,
    image: &Image,
    model: &CodecModel,
    points: usize,
) -> Result<(Vec<SweepRow>, SweepAudit)> {
    let latent = Arc::new(codec::encode_latent(image, model)?);
    let rows = geometric_grid(model.delta_min(), model.delta_max(), points)
        .into_iter()
        .map(|delta| {
            let e = codec::evaluate(image, model, delta, Some(latent.clone()))?;
            Ok(SweepRow {
                image: name.to_string(),
                model_id: model.model_id(),
                delta,
                beta: model.beta_train() * delta,
                bpp: e.point.bpp,
                mse: e.point.mse,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = || rows.windows(2).enumerate();
    let audit = SweepAudit {
        image: name.to_string(),
        model_id: model.model_id(),
        rate_violations: steps()
            .filter(|(_, w)| w[1].bpp <= w[0].bpp && !(w[0].bpp == 0.0 && w[1].bpp == 0.0))
            .map(|(i, _)| i)
            .collect(),
        mse_violations: steps()
            .filter(|(_, w)| w[1].mse > w[0].mse)
            .map(|(i, _)| i)
            .collect(),
    };
    Ok((rows, audit))
}

/// Monotonicity audit of every corpus image and model.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    let models = config.codec_models()?;
    with_workers(config.workers, || {
        let corpus = load_corpus(&config.corpus_dir)?;
        let mut errors = Vec::new();
        let mut jobs = Vec::new();
        for (name, image) in &corpus {
            match image {
                Ok(img) => jobs.extend(models.iter().map(|m| (name, img, m))),
                Err(e) => errors.push(RowError {
                    image: name.clone(),
                    target_bpp: None,
                    method: None,
                    message: e.to_string(),
                }),
            }
        }
        let results: Vec<Result<(Vec<SweepRow>, SweepAudit)>> = jobs
            .par_iter()
            .map(|(name, img, m)| sweep_model(name, img, m, config.sweep_points))
            .collect();
        let mut report = SweepReport {
            rows: Vec::new(),
            audits: Vec::new(),
            errors,
        };
        for r in results {
            let (rows, audit) = r?;
            if !audit.passed() {
                log::warn!(
                    "{} model {}: rate violations {:?}, mse violations {:?}",
                    audit.image,
                    audit.model_id,
                    audit.rate_violations,
                    audit.mse_violations
                );
            }
            report.rows.extend(rows);
            report.audits.push(audit);
        }
        Ok(report)
    })?
}

/// Writes `sweep.csv` and `sweep_audit.json`.
pub fn emit_sweep(report: &SweepReport, output_dir: &Path) -> Result<()> {
    create_dir(output_dir)?;
    write_rows(&output_dir.join("sweep.csv"), &report.rows)?;
    write_json(&output_dir.join("sweep_audit.json"), &report.audits)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub image: String,
    pub target_bpp: f64,
    pub model_id: u32,
    pub beta: f64,
    pub delta: f64,
    pub bpp: f64,
    pub relative_error: f64,
    /// Smallest relative error over the family for this image and target.
    pub best_in_family: bool,
}

/// Grid-search reference for every corpus image, target and model.
pub fn run_oracle(config: &ExperimentConfig) -> Result<Vec<OracleRow>> {
    config.validate()?;
    let models = config.codec_models()?;
    let targets = config.target_specs()?;
    with_workers(config.workers, || {
        let corpus = load_corpus(&config.corpus_dir)?;
        let mut rows = Vec::new();
        for (name, image) in &corpus {
            let image = match image {
                Ok(img) => img,
                Err(e) => {
                    log::error!("{name}: {e}");
                    continue;
                }
            };
            let curves = codec_family(image, &models, true);
            let per_model: Vec<Vec<OracleResult>> = curves
                .par_iter()
                .map(|c| oracle_best_betas(c, &targets, config.oracle_grid))
                .collect::<Result<_>>()?;
            for (ti, target) in targets.iter().enumerate() {
                let mut block: Vec<OracleRow> = curves
                    .iter()
                    .zip(&per_model)
                    .map(|(c, results)| {
                        let r = results[ti];
                        OracleRow {
                            image: name.clone(),
                            target_bpp: target.bpp(),
                            model_id: c.model().model_id(),
                            beta: r.beta,
                            delta: c.model().delta_for(r.beta),
                            bpp: r.bpp,
                            relative_error: r.relative_error,
                            best_in_family: false,
                        }
                    })
                    .collect();
                if let Some(best) = (0..block.len())
                    .min_by(|&a, &b| block[a].relative_error.total_cmp(&block[b].relative_error))
                {
                    block[best].best_in_family = true;
                }
                rows.extend(block);
            }
        }
        Ok(rows)
    })?
}

/// Writes `oracle.csv`.
pub fn emit_oracle(rows: &[OracleRow], output_dir: &Path) -> Result<()> {
    create_dir(output_dir)?;
    write_rows(&output_dir.join("oracle.csv"), rows)
}

/// One instance of the seeded log-linear suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineInstance {
    pub slope: f64,
    pub intercept: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub target_bpp: f64,
    pub loglinear_evals: usize,
    pub loglinear_matched: bool,
    pub binary_evals: usize,
    pub binary_matched: bool,
}

/// Searches `count` random exact log-linear curves (`slope` in [0.5, 3],
/// `intercept` in [-4, 0], bounds [0.1, 10]) for a target drawn inside each
/// curve's range, with both searches at `tolerance`.
pub fn line_suite(seed: u64, count: usize, tolerance: f64) -> Result<Vec<LineInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let slope = rng.gen_range(0.5..=3.0);
            let intercept = rng.gen_range(-4.0..=0.0);
            let (beta_min, beta_max) = (0.1, 10.0);
            let curve = SyntheticLogLinearCurve::new(slope, intercept, beta_min, beta_max)?;
            // keep the target away from both endpoints' tolerance bands
            let lo = (intercept + slope * f64::ln(beta_min)).exp() / (1.0 - tolerance) * 1.01;
            let hi = (intercept + slope * f64::ln(beta_max)).exp() / (1.0 + tolerance) / 1.01;
            let target_bpp = (rng.gen_range(lo.ln()..=hi.ln())).exp();
            let t = TargetSpec::new(target_bpp, tolerance)?;
            let ll = search_loglinear(&curve, &t, crate::brm::DEFAULT_LOGLINEAR_ITERS)?;
            let bin = search_binary(&curve, &t, crate::brm::DEFAULT_BINARY_ITERS)?;
            Ok(LineInstance {
                slope,
                intercept,
                beta_min,
                beta_max,
                target_bpp,
                loglinear_evals: ll.evaluations(),
                loglinear_matched: ll.matched(),
                binary_evals: bin.evaluations(),
                binary_matched: bin.matched(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_of_a_smooth_image_is_monotone() {
        let img = Image::from_fn(32, 24, 1, |x, y, _| {
            (128.0 + 60.0 * (x as f64 * 0.3).sin() * (y as f64 * 0.2).cos()) as u8
        })
        .unwrap();
        let model = CodecModel::new(
            0,
            0.015,
            crate::codec::GainVector::jpeg_scaled(1.0 / 64.0).unwrap(),
            0.4,
            2.0,
        )
        .unwrap();
        let (rows, audit) = sweep_model("g", &img, &model, 8).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].delta, 0.4);
        assert_eq!(rows[7].delta, 2.0);
        assert!(audit.passed(), "{audit:?}");
    }

    #[test]
    fn line_suite_is_seeded() {
        let a = line_suite(3, 5, 0.01).unwrap();
        assert_eq!(a, line_suite(3, 5, 0.01).unwrap());
        assert_ne!(a, line_suite(4, 5, 0.01).unwrap());
        assert!(a
            .iter()
            .all(|i| i.loglinear_matched && i.loglinear_evals == 3));
    }
}
