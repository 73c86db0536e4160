use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::brm::{BrmConfig, Method, RefitStrategy, TargetSpec, DEFAULT_ORACLE_GRID};
use crate::codec::{CodecModel, GainVector};
use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

pub const DEFAULT_TARGETS: [f64; 5] = [0.06, 0.12, 0.25, 0.5, 0.75];

/// `(beta_train, delta_min, delta_max, gain_scale)` of the default family.
pub const DEFAULT_MODELS: [(f64, f64, f64, f64); 4] = [
    (0.002, 0.1, 2.0, 1.0 / 256.0),
    (0.007, 0.3, 1.4, 1.0 / 128.0),
    (0.015, 0.4, 2.0, 1.0 / 64.0),
    (0.05, 0.6, 6.0, 1.0 / 32.0),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSet {
    Baseline,
    Proposed,
    Both,
}

impl MethodSet {
    pub fn methods(self) -> &'static [Method] {
        match self {
            MethodSet::Baseline => &[Method::Baseline],
            MethodSet::Proposed => &[Method::Proposed],
            MethodSet::Both => &[Method::Baseline, Method::Proposed],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub beta_train: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    /// Multiplier `s` of the gain vector `s * 16 / Q`.
    pub gain_scale: f64,
}

impl ModelSpec {
    pub fn build(&self, model_id: u32) -> Result<CodecModel> {
        CodecModel::new(
            model_id,
            self.beta_train,
            GainVector::jpeg_scaled(self.gain_scale)?,
            self.delta_min,
            self.delta_max,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpec {
    pub refit: RefitStrategy,
    pub binary_max_iters: usize,
    pub loglinear_max_iters: usize,
    pub accept_matching_default: bool,
}

impl Default for SearchSpec {
    fn default() -> Self {
        let c = BrmConfig::default();
        Self {
            refit: c.refit,
            binary_max_iters: c.binary_max_iters,
            loglinear_max_iters: c.loglinear_max_iters,
            accept_matching_default: c.accept_matching_default,
        }
    }
}

impl SearchSpec {
    pub fn brm_config(&self) -> BrmConfig {
        BrmConfig {
            binary_max_iters: self.binary_max_iters,
            loglinear_max_iters: self.loglinear_max_iters,
            refit: self.refit,
            accept_matching_default: self.accept_matching_default,
        }
    }
}

/// A fixed operating point reported next to the searched ones: `model` (an
/// index into `models`) at displacement `delta` for one target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorSpec {
    pub target: f64,
    pub model: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub config_version: u32,
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    pub targets: Vec<f64>,
    pub tolerance: f64,
    pub methods: MethodSet,
    pub models: Vec<ModelSpec>,
    pub search: SearchSpec,
    #[serde(rename = "anchor")]
    pub anchors: Vec<AnchorSpec>,
    pub oracle_grid: usize,
    pub sweep_points: usize,
    /// Seed of the synthetic-curve suites.
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            config_version: CONFIG_VERSION,
            corpus_dir: PathBuf::from("corpus"),
            output_dir: PathBuf::from("results"),
            targets: DEFAULT_TARGETS.to_vec(),
            tolerance: crate::brm::DEFAULT_TOLERANCE,
            methods: MethodSet::Both,
            models: DEFAULT_MODELS
                .iter()
                .map(
                    |&(beta_train, delta_min, delta_max, gain_scale)| ModelSpec {
                        beta_train,
                        delta_min,
                        delta_max,
                        gain_scale,
                    },
                )
                .collect(),
            search: SearchSpec::default(),
            anchors: Vec::new(),
            oracle_grid: DEFAULT_ORACLE_GRID,
            sweep_points: 32,
            seed: 0x5eed,
            workers: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.config_version != CONFIG_VERSION {
            return fail(format!(
                "config_version {} is not supported (expected {CONFIG_VERSION})",
                self.config_version
            ));
        }
        if self.models.is_empty() {
            return fail("models: at least one model is required".into());
        }
        if self.targets.is_empty() {
            return fail("targets: at least one target is required".into());
        }
        if let Some(t) = self.targets.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return fail(format!("targets: {t} is not a positive bpp"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return fail(format!("tolerance {} must lie in (0, 1)", self.tolerance));
        }
        for (i, m) in self.models.iter().enumerate() {
            m.build(i as u32)
                .map_err(|e| Error::Config(format!("models[{i}]: {e}")))?;
        }
        if self.search.binary_max_iters == 0 || self.search.loglinear_max_iters == 0 {
            return fail("search: max_iters must be at least 1".into());
        }
        if self.oracle_grid < crate::brm::MIN_ORACLE_GRID {
            return fail(format!(
                "oracle_grid {} is below the minimum of {}",
                self.oracle_grid,
                crate::brm::MIN_ORACLE_GRID
            ));
        }
        if self.sweep_points < 2 {
            return fail("sweep_points must be at least 2".into());
        }
        for (i, a) in self.anchors.iter().enumerate() {
            let Some(m) = self.models.get(a.model) else {
                return fail(format!("anchor[{i}]: model {} does not exist", a.model));
            };
            if !self.targets.contains(&a.target) {
                return fail(format!(
                    "anchor[{i}]: target {} is not in targets",
                    a.target
                ));
            }
            if !(a.delta >= m.delta_min && a.delta <= m.delta_max) {
                return fail(format!(
                    "anchor[{i}]: delta {} outside [{}, {}]",
                    a.delta, m.delta_min, m.delta_max
                ));
            }
        }
        Ok(())
    }

    pub fn codec_models(&self) -> Result<Vec<CodecModel>> {
        self.models
            .iter()
            .enumerate()
            .map(|(i, m)| m.build(i as u32))
            .collect()
    }

    pub fn target_specs(&self) -> Result<Vec<TargetSpec>> {
        self.targets
            .iter()
            .map(|&t| TargetSpec::new(t, self.tolerance))
            .collect()
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.corpus_dir, &mut self.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// Parses and validates a config document. Omitted fields take their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map_or(1, |s| text[..s.start].matches('\n').count() + 1);
        Error::Parse {
            line,
            message: e.message().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Reads a config file; relative paths inside it are taken relative to the
/// file's directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = parse_config(&text)?;
    config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.models.len(), 4);
        assert_eq!(c.targets, vec![0.06, 0.12, 0.25, 0.5, 0.75]);
        assert_eq!(c.tolerance, 0.10);
        let betas: Vec<f64> = c.models.iter().map(|m| m.beta_train).collect();
        assert_eq!(betas, vec![0.002, 0.007, 0.015, 0.05]);
        let ranges: Vec<(f64, f64)> = c
            .models
            .iter()
            .map(|m| (m.delta_min, m.delta_max))
            .collect();
        assert_eq!(ranges, vec![(0.1, 2.0), (0.3, 1.4), (0.4, 2.0), (0.6, 6.0)]);
    }

    #[test]
    fn tolerance_out_of_range_is_a_validation_error() {
        assert!(matches!(
            parse_config("tolerance = 1.5"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn minimal_config() {
        let c = parse_config(
            "config_version = 1\ntargets = [0.25]\nmethods = \"proposed\"\n\n\
             [[models]]\nbeta_train = 0.015\ndelta_min = 0.4\ndelta_max = 2.0\ngain_scale = 0.015625\n",
        )
        .unwrap();
        assert_eq!(c.models.len(), 1);
        assert_eq!(c.targets.len(), 1);
        assert_eq!(c.methods.methods(), &[Method::Proposed]);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        match parse_config("targets = [0.1]\ntolerance = = 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_config("\n\nbogus = 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invariants_are_named() {
        for (text, needle) in [
            ("targets = []", "targets"),
            ("targets = [-0.1]", "targets"),
            ("models = []", "models"),
            ("config_version = 2", "config_version"),
            ("[search]\nbinary_max_iters = 0", "max_iters"),
            (
                "[[anchor]]\ntarget = 0.75\nmodel = 9\ndelta = 2.0",
                "anchor[0]",
            ),
            (
                "[[anchor]]\ntarget = 0.75\nmodel = 3\ndelta = 7.0",
                "anchor[0]",
            ),
            (
                "[[anchor]]\ntarget = 0.8\nmodel = 3\ndelta = 2.0",
                "anchor[0]",
            ),
        ] {
            match parse_config(text) {
                Err(Error::Config(msg)) => assert!(msg.contains(needle), "{text}: {msg}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(parse_config("[[anchor]]\ntarget = 0.75\nmodel = 3\ndelta = 2.0").is_ok());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, "corpus_dir = \"imgs\"\n").unwrap();
        let c = load_config(&path).unwrap();
        assert_eq!(c.corpus_dir, dir.path().join("imgs"));
        assert_eq!(c.output_dir, dir.path().join("results"));
    }
}
