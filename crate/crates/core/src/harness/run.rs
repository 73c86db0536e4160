use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::bd::{bit_difference, quality_psnr};
use crate::brm::{run_brm, Method, TargetSpec};
use crate::codec::{self, CodecModel};
use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rate::{make_codec_curve, CodecCurve, LatentCache};

/// How a row's operating point was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowMethod {
    Baseline,
    Proposed,
    /// A configured `(model, delta)` point; no search.
    Anchor,
}

impl RowMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RowMethod::Baseline => "baseline",
            RowMethod::Proposed => "proposed",
            RowMethod::Anchor => "anchor",
        }
    }
}

impl From<Method> for RowMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Baseline => RowMethod::Baseline,
            Method::Proposed => RowMethod::Proposed,
        }
    }
}

impl std::fmt::Display for RowMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One `(image, target, method)` outcome. Serializes to a `results.csv` row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub image: String,
    pub target_bpp: f64,
    pub method: RowMethod,
    pub model_id: u32,
    pub beta_test: f64,
    pub delta_beta: f64,
    pub bpp_achieved: f64,
    pub bit_diff_percent: f64,
    pub matched: bool,
    pub encoder_runs: u64,
    pub entropy_evals: u64,
    pub decoder_runs: u64,
    /// Quality at the reported point; measured outside the row's cost.
    #[serde(skip)]
    pub psnr_db: f64,
    /// Models searched by the pipeline.
    #[serde(skip)]
    pub candidates: usize,
    #[serde(skip)]
    pub matched_candidates: usize,
}

impl ResultRow {
    pub fn cost(&self) -> Cost {
        Cost {
            encoder_runs: self.encoder_runs,
            entropy_evals: self.entropy_evals,
            decoder_runs: self.decoder_runs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub image: String,
    pub target_bpp: Option<f64>,
    pub method: Option<RowMethod>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub images: Vec<String>,
    pub rows: Vec<ResultRow>,
    pub errors: Vec<RowError>,
}

impl RunReport {
    pub fn rows_for(&self, method: RowMethod) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn total_cost(&self, method: RowMethod) -> Cost {
        self.rows_for(method).map(ResultRow::cost).sum()
    }
}

/// A corpus entry: file stem and the decoded image, or why it failed.
pub type CorpusEntry = (String, Result<Arc<Image>>);

/// Netpbm files (`.pgm`, `.ppm`, `.pnm`) in `dir`, sorted by name.
pub fn list_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_pnm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "ppm" | "pnm"));
        if is_pnm && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Loads every corpus image. A missing or empty corpus is fatal; a file that
/// fails to decode is returned as an error entry.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let paths = list_corpus(dir)?;
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "corpus {} contains no .pgm/.ppm images",
            dir.display()
        )));
    }
    Ok(paths
        .par_iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (name, Image::read_pnm(p).map(Arc::new))
        })
        .collect())
}

/// Codec curves of every model for one image.
pub fn codec_family(image: &Arc<Image>, models: &[CodecModel], cached: bool) -> Vec<CodecCurve> {
    models
        .iter()
        .map(|m| {
            let cache = if cached {
                LatentCache::shared()
            } else {
                LatentCache::Disabled
            };
            make_codec_curve(image.clone(), m.clone(), cache)
        })
        .collect()
}

/// Runs `f` on a pool of `workers` threads (0 = rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

enum Task {
    Brm(Method),
    Anchor { model: usize, delta: f64 },
}

fn psnr_at(image: &Image, model: &CodecModel, delta: f64) -> Result<f64> {
    let eval = codec::evaluate(image, model, delta, None)?;
    quality_psnr(eval.point.mse)
}

fn run_row(
    name: &str,
    image: &Arc<Image>,
    models: &[CodecModel],
    target: &TargetSpec,
    task: &Task,
    config: &ExperimentConfig,
) -> Result<ResultRow> {
    match *task {
        Task::Brm(method) => {
            let curves = codec_family(image, models, method == Method::Proposed);
            let r = run_brm(&curves, target, method, &config.search.brm_config())?;
            let model = &models[r.model_index];
            let psnr_db = match r.loss {
                Some(mse) => quality_psnr(mse)?,
                None => psnr_at(image, model, r.delta_beta)?,
            };
            Ok(ResultRow {
                image: name.to_string(),
                target_bpp: target.bpp(),
                method: method.into(),
                model_id: r.model_id,
                beta_test: r.beta_test,
                delta_beta: r.delta_beta,
                bpp_achieved: r.bpp_achieved,
                bit_diff_percent: bit_difference(r.bpp_achieved, target.bpp()),
                matched: r.matched,
                encoder_runs: r.cost.encoder_runs,
                entropy_evals: r.cost.entropy_evals,
                decoder_runs: r.cost.decoder_runs,
                psnr_db,
                candidates: r.traces.len(),
                matched_candidates: r.traces.iter().filter(|t| t.matched()).count(),
            })
        }
        Task::Anchor { model, delta } => {
            let m = &models[model];
            let eval = codec::evaluate(image, m, delta, None)?;
            let bpp = eval.point.bpp;
            Ok(ResultRow {
                image: name.to_string(),
                target_bpp: target.bpp(),
                method: RowMethod::Anchor,
                model_id: m.model_id(),
                beta_test: m.beta_train() * delta,
                delta_beta: delta,
                bpp_achieved: bpp,
                bit_diff_percent: bit_difference(bpp, target.bpp()),
                matched: target.is_matched(bpp),
                encoder_runs: eval.cost.encoder_runs,
                entropy_evals: eval.cost.entropy_evals,
                decoder_runs: eval.cost.decoder_runs,
                psnr_db: quality_psnr(eval.point.mse)?,
                candidates: 0,
                matched_candidates: 0,
            })
        }
    }
}

/// Runs every `(image, target, method)` row of the experiment. Rows run in
/// parallel; the report keeps corpus, target and method order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let models = config.codec_models()?;
    let targets = config.target_specs()?;
    with_workers(config.workers, || {
        let corpus = load_corpus(&config.corpus_dir)?;
        let mut jobs = Vec::new();
        let mut errors = Vec::new();
        for (name, image) in &corpus {
            let image = match image {
                Ok(img) => img,
                Err(e) => {
                    log::error!("{name}: {e}");
                    errors.push(RowError {
                        image: name.clone(),
                        target_bpp: None,
                        method: None,
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            for target in &targets {
                for &m in config.methods.methods() {
                    jobs.push((name, image, target, Task::Brm(m)));
                }
                for a in config.anchors.iter().filter(|a| a.target == target.bpp()) {
                    let task = Task::Anchor {
                        model: a.model,
                        delta: a.delta,
                    };
                    jobs.push((name, image, target, task));
                }
            }
        }
        let outcomes: Vec<(RowError, Result<ResultRow>)> = jobs
            .par_iter()
            .map(|(name, image, target, task)| {
                let method = match task {
                    Task::Brm(m) => RowMethod::from(*m),
                    Task::Anchor { .. } => RowMethod::Anchor,
                };
                let ident = RowError {
                    image: name.to_string(),
                    target_bpp: Some(target.bpp()),
                    method: Some(method),
                    message: String::new(),
                };
                (ident, run_row(name, image, &models, target, task, config))
            })
            .collect();
        let mut rows = Vec::with_capacity(outcomes.len());
        for (mut ident, outcome) in outcomes {
            match outcome {
                Ok(row) => {
                    log::info!(
                        "{} {} @ {}: model {} bpp {:.5} ({:.2}%) cost {}/{}/{}",
                        row.image,
                        row.method,
                        row.target_bpp,
                        row.model_id,
                        row.bpp_achieved,
                        row.bit_diff_percent,
                        row.encoder_runs,
                        row.entropy_evals,
                        row.decoder_runs
                    );
                    rows.push(row);
                }
                Err(e) => {
                    log::error!(
                        "{} {:?} @ {:?}: {e}",
                        ident.image,
                        ident.method,
                        ident.target_bpp
                    );
                    ident.message = e.to_string();
                    errors.push(ident);
                }
            }
        }
        Ok(RunReport {
            config: config.clone(),
            images: corpus.into_iter().map(|(n, _)| n).collect(),
            rows,
            errors,
        })
    })?
}
