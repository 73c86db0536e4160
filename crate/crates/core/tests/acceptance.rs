//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any failed.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use brm_core::bd::{bd_rate, RdCurve, RdPoint};
use brm_core::brm::{argmin_relative, DEFAULT_ORACLE_GRID};
use brm_core::codec::{self, CodecModel};
use brm_core::harness::{
    line_suite, load_corpus, run_experiment, run_oracle, run_sweep, summarize, ExperimentConfig,
    RowMethod, RunReport,
};
use brm_core::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

struct Verdicts {
    failed: Vec<String>,
}

impl Verdicts {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(name.to_string());
        }
    }
}

fn corpus_config() -> ExperimentConfig {
    ExperimentConfig {
        corpus_dir: PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus"),
        ..ExperimentConfig::default()
    }
}

fn exact_lines(v: &mut Verdicts) {
    let start = Instant::now();
    let suite = line_suite(SEED, 100, 0.01).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let ll_ok = suite
        .iter()
        .filter(|i| i.loglinear_matched && i.loglinear_evals == 3)
        .count();
    let bin_slow = suite.iter().filter(|i| i.binary_evals >= 4).count();
    v.record(
        "exact-line one-shot",
        ll_ok == suite.len() && bin_slow * 10 >= suite.len() * 9 && seconds < 1.0,
        format!(
            "loglinear matched in exactly 3 evals on {ll_ok}/{n}; binary needed >= 4 evals on {bin_slow}/{n}; {seconds:.3}s",
            n = suite.len()
        ),
    );
}

fn cost_and_runtime(v: &mut Verdicts, report: &RunReport, seconds: f64) {
    let base = report.total_cost(RowMethod::Baseline);
    let prop = report.total_cost(RowMethod::Proposed);
    let ratio = prop.entropy_evals as f64 / base.entropy_evals as f64;
    let short = report
        .rows_for(RowMethod::Baseline)
        .filter(|r| (r.decoder_runs as usize) < r.candidates)
        .count();
    let ok = ratio <= 0.6 && prop.decoder_runs == 0 && short == 0 && seconds < 120.0;
    v.record(
        "corpus cost",
        ok,
        format!(
            "entropy evals proposed {} / baseline {} = {ratio:.3}; proposed decoder runs {}; \
             baseline rows with fewer decodes than candidates {short}; wall {seconds:.1}s",
            prop.entropy_evals, base.entropy_evals, prop.decoder_runs
        ),
    );
}

fn oracle_agreement(v: &mut Verdicts, report: &RunReport) {
    let mut config = corpus_config();
    config.oracle_grid = DEFAULT_ORACLE_GRID;
    let oracle = run_oracle(&config).unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    for o in oracle
        .iter()
        .filter(|o| o.best_in_family && o.relative_error <= 0.05)
    {
        for method in [RowMethod::Baseline, RowMethod::Proposed] {
            let row = report
                .rows
                .iter()
                .find(|r| r.image == o.image && r.target_bpp == o.target_bpp && r.method == method)
                .unwrap();
            checked += 1;
            if !(row.matched && row.bit_diff_percent <= 10.0) {
                bad.push(format!("{} {} @ {}", row.image, method, row.target_bpp));
            }
        }
    }
    let summary = summarize(report);
    let mean = summary.methods[&RowMethod::Proposed].mean_bit_diff_percent;
    v.record(
        "oracle agreement",
        bad.is_empty() && checked > 0,
        format!(
            "{} of {checked} rows matched within 10% where the oracle reaches 5%; \
             proposed mean bit diff {mean:.3}%{}",
            checked - bad.len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; misses: {}", bad.join(", "))
            }
        ),
    );
}

fn cache_transparency(v: &mut Verdicts) {
    let config = corpus_config();
    let models = config.codec_models().unwrap();
    let images: Vec<Arc<Image>> = load_corpus(&config.corpus_dir)
        .unwrap()
        .into_iter()
        .map(|(_, img)| img.unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut bad = 0;
    for _ in 0..50 {
        let image = &images[rng.gen_range(0..images.len())];
        let model: &CodecModel = &models[rng.gen_range(0..models.len())];
        let delta = rng.gen_range(model.delta_min()..=model.delta_max());
        let fresh = codec::evaluate(image, model, delta, None).unwrap();
        let cached = codec::evaluate(image, model, delta, Some(fresh.latent.clone())).unwrap();
        let same = fresh.point.bpp.to_bits() == cached.point.bpp.to_bits()
            && fresh.point.mse.to_bits() == cached.point.mse.to_bits();
        if !same || fresh.cost.encoder_runs != cached.cost.encoder_runs + 1 {
            bad += 1;
        }
    }
    v.record(
        "cache transparency",
        bad == 0,
        format!("{} of 50 random (image, model, delta) triples bit-identical with one encoder run saved", 50 - bad),
    );
}

fn selection(v: &mut Verdicts) {
    let worked = argmin_relative(&[0.2, 0.4], 0.3) == Some(1);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let defaults: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..2.0)).collect();
        let target = rng.gen_range(0.01..2.0);
        let k: f64 = rng.gen_range(0.1..10.0);
        let scaled: Vec<f64> = defaults.iter().map(|d| d * k).collect();
        if argmin_relative(&defaults, target) != argmin_relative(&scaled, target * k) {
            bad += 1;
        }
    }
    v.record(
        "relative selection",
        worked && bad == 0,
        format!(
            "defaults {{0.2, 0.4}} at 0.3 pick 0.4: {worked}; scaling changed the argmin in {bad} of 100 families"
        ),
    );
}

fn bd_sanity(v: &mut Verdicts) {
    let anchor = RdCurve::new(
        [(0.1, 28.0), (0.25, 31.5), (0.5, 34.5), (1.0, 37.0)]
            .iter()
            .map(|&(bpp, quality_db)| RdPoint { bpp, quality_db })
            .collect(),
    )
    .unwrap();
    let scaled = |f: f64| {
        RdCurve::new(
            anchor
                .points()
                .iter()
                .map(|p| RdPoint {
                    bpp: p.bpp * f,
                    quality_db: p.quality_db,
                })
                .collect(),
        )
        .unwrap()
    };
    let same = bd_rate(&anchor, &anchor).unwrap().bd_rate_percent;
    let up = bd_rate(&anchor, &scaled(1.1)).unwrap().bd_rate_percent;
    let down = bd_rate(&anchor, &scaled(0.5)).unwrap().bd_rate_percent;
    v.record(
        "BD-rate sanity",
        same.abs() < 1e-6 && (up - 10.0).abs() <= 0.1 && (down + 50.0).abs() <= 0.1,
        format!("identical {same:.2e}%, x1.1 {up:.4}%, x0.5 {down:.4}%"),
    );
}

fn sweep(v: &mut Verdicts) {
    let report = run_sweep(&corpus_config()).unwrap();
    let failing: Vec<String> = report
        .audits
        .iter()
        .filter(|a| !a.passed())
        .map(|a| format!("{} model {}", a.image, a.model_id))
        .collect();
    v.record(
        "delta sweep monotone",
        report.passed() && report.errors.is_empty(),
        format!(
            "{} of {} image/model sweeps monotone over 32 points{}",
            report.audits.len() - failing.len(),
            report.audits.len(),
            if failing.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failing.join(", "))
            }
        ),
    );
}

fn rd_parity(v: &mut Verdicts, report: &RunReport) {
    let summary = summarize(report);
    let bd = summary.strategy_bd_rate.unwrap();
    let pooled = bd.pooled_percent.unwrap();
    v.record(
        "RD parity",
        pooled <= 0.5,
        format!(
            "proposed vs baseline BD-rate {pooled:+.3}% (per-image mean {:+.3}%)",
            bd.mean_percent.unwrap_or(f64::NAN)
        ),
    );
}

fn main() -> ExitCode {
    let mut v = Verdicts { failed: Vec::new() };
    exact_lines(&mut v);
    let start = Instant::now();
    let report = run_experiment(&corpus_config()).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    assert!(report.errors.is_empty(), "{:?}", report.errors);
    cost_and_runtime(&mut v, &report, seconds);
    oracle_agreement(&mut v, &report);
    cache_transparency(&mut v);
    selection(&mut v);
    bd_sanity(&mut v);
    sweep(&mut v);
    rd_parity(&mut v, &report);
    if v.failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", v.failed.join(", "));
        ExitCode::FAILURE
    }
}
