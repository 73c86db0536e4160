//! Experiment runner over a Netpbm corpus: runs both pipelines for every
//! image and target and writes CSV/JSON reports.
//!
//! Configuration is TOML. Every key is optional; omitted keys take the
//! defaults shown here.
//!
//! ```toml
//! config_version = 1
//! corpus_dir = "corpus"        # relative to the config file
//! output_dir = "results"
//! targets = [0.06, 0.12, 0.25, 0.5, 0.75]
//! tolerance = 0.10
//! methods = "both"             # "baseline" | "proposed" | "both"
//! oracle_grid = 512
//! sweep_points = 32
//! seed = 24301
//! workers = 0                  # 0 = one per core
//!
//! [search]
//! refit = "anchored"           # or "bracketing"
//! binary_max_iters = 32
//! loglinear_max_iters = 10
//! accept_matching_default = true
//!
//! [[models]]                   # repeated; four by default
//! beta_train = 0.002
//! delta_min = 0.1
//! delta_max = 2.0
//! gain_scale = 0.00390625
//!
//! [[anchor]]                   # optional fixed points, none by default
//! target = 0.75
//! model = 3                    # index into models
//! delta = 2.0
//! ```

mod audit;
mod config;
mod report;
mod run;

pub use self::audit::{
    emit_oracle, emit_sweep, line_suite, run_oracle, run_sweep, sweep_model, LineInstance,
    OracleRow, SweepAudit, SweepReport, SweepRow,
};
pub use self::config::{
    load_config, parse_config, AnchorSpec, ExperimentConfig, MethodSet, ModelSpec, SearchSpec,
    CONFIG_VERSION, DEFAULT_MODELS, DEFAULT_TARGETS,
};
pub use self::report::{
    emit_report, method_curve, summarize, MethodSummary, StrategyBdRate, Summary,
};
pub use self::run::{
    codec_family, list_corpus, load_corpus, run_experiment, with_workers, CorpusEntry, ResultRow,
    RowError, RowMethod, RunReport,
};
