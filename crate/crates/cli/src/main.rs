use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use brm_core::bd::{bd_rate, RdCurve};
use brm_core::harness::{
    emit_oracle, emit_report, emit_sweep, load_config, run_experiment, run_oracle, run_sweep,
    ExperimentConfig, Summary,
};
use brm_core::Error;
use clap::{Parser, Subcommand};
use log::LevelFilter;

#[derive(Parser)]
#[command(
    name = "brm",
    version,
    about = "Bit rate matching experiments on a Netpbm corpus"
)]
struct Cli {
    /// Worker threads (overrides the config; 0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, default_value = "warn")]
    log_level: LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run both pipelines over the corpus and write results.csv, summary.json and curves/.
    Run { config: PathBuf },
    /// Sample every model on a delta grid and audit rate/distortion monotonicity.
    Sweep { config: PathBuf },
    /// BD-rate of a test RD curve against an anchor (CSV with bpp,quality_db).
    Bdrate { anchor: PathBuf, test: PathBuf },
    /// Grid-search reference betas for every image, target and model.
    Oracle { config: PathBuf },
}

enum Failure {
    Config(Error),
    Fatal(Error),
    Audit(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Fatal(e)
    }
}

fn config(cli: &Cli, path: &Path) -> Result<ExperimentConfig, Failure> {
    let mut c = load_config(path).map_err(|e| match e {
        Error::Config(_) | Error::Parse { .. } => Failure::Config(e),
        e => Failure::Fatal(e),
    })?;
    if let Some(w) = cli.workers {
        c.workers = w;
    }
    if let Some(o) = &cli.output {
        c.output_dir = o.clone();
    }
    Ok(c)
}

fn print_summary(s: &Summary) {
    println!(
        "{:<9} {:>5} {:>8} {:>11} {:>8} {:>8} {:>8}",
        "method", "rows", "matched", "bitdiff(%)", "encoder", "entropy", "decoder"
    );
    for (m, v) in &s.methods {
        println!(
            "{:<9} {:>5} {:>8.3} {:>11.3} {:>8} {:>8} {:>8}",
            m.as_str(),
            v.rows,
            v.matched_fraction,
            v.mean_bit_diff_percent,
            v.encoder_runs,
            v.entropy_evals,
            v.decoder_runs
        );
    }
    if let Some(r) = s.probe_ratio {
        println!("probe ratio (proposed/baseline entropy evals): {r:.3}");
    }
    if let Some(bd) = &s.strategy_bd_rate {
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:+.3}%"));
        println!(
            "BD-rate {} vs {}: mean over images {}, pooled {}",
            bd.test,
            bd.anchor,
            show(bd.mean_percent),
            show(bd.pooled_percent)
        );
    }
    if !s.errors.is_empty() {
        println!("{} row errors (see summary.json)", s.errors.len());
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match &cli.command {
        Command::Run { config: path } => {
            let c = config(cli, path)?;
            let report = run_experiment(&c)?;
            let summary = emit_report(&report, &c.output_dir)?;
            print_summary(&summary);
            println!(
                "wrote {} ({:.2?})",
                c.output_dir.display(),
                started.elapsed()
            );
        }
        Command::Sweep { config: path } => {
            let c = config(cli, path)?;
            let report = run_sweep(&c)?;
            emit_sweep(&report, &c.output_dir)?;
            let failed: Vec<_> = report.audits.iter().filter(|a| !a.passed()).collect();
            println!(
                "{} curves audited, {} with violations ({:.2?})",
                report.audits.len(),
                failed.len(),
                started.elapsed()
            );
            if !report.passed() {
                return Err(Failure::Audit(format!(
                    "monotonicity audit failed for {} curves and {} images",
                    failed.len(),
                    report.errors.len()
                )));
            }
        }
        Command::Bdrate { anchor, test } => {
            let a = RdCurve::read_csv(anchor)?;
            let t = RdCurve::read_csv(test)?;
            let bd = bd_rate(&a, &t)?;
            println!("{:.4}", bd.bd_rate_percent);
        }
        Command::Oracle { config: path } => {
            let c = config(cli, path)?;
            let rows = run_oracle(&c)?;
            emit_oracle(&rows, &c.output_dir)?;
            let best: Vec<_> = rows.iter().filter(|r| r.best_in_family).collect();
            let attainable = best
                .iter()
                .filter(|r| r.relative_error <= c.tolerance)
                .count();
            println!(
                "{} image/target pairs, {attainable} attainable within tolerance ({:.2?})",
                best.len(),
                started.elapsed()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Fatal(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Audit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
