//! `run` and `validate`: config resolution, data loading, runner dispatch,
//! artifact writing, and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use rebal_core::agent::write_qtable;
use rebal_core::error::{Error, Result};
use rebal_core::market::load_price_csv_pair;
use rebal_core::protocol::{
    base_case_of, case_behavior_log, parse_config, parse_synthetic_config, prepare_years,
    regime_variant_of, run_accuracy_sweep, run_constraint_case, run_oos_comparison, run_phase_accuracy,
    run_rebalance_sweep, train_in_sample, ConfigFile, FeatureParams, PreparedMarket, RunSpec, RunnerKind,
    YearContext,
};
use rebal_core::report::{
    box_stats, case_delta_table, sharpe_histogram, signal_behavior_diff, write_behavior_delta,
    write_histogram, write_sweep, write_year_results,
};

#[derive(Args)]
pub struct RunArgs {
    /// Experiment or suite config: a path or `preset:<name>` (presets:
    /// 001..007, oos_comparison, accuracy_sweep, rebalance_sweep,
    /// phase_accuracy, constraints_suite)
    #[arg(long)]
    pub config: String,

    /// Risky-asset CSV (`date,price`); requires --data-safe
    #[arg(long, requires = "data_safe", conflicts_with = "synthetic")]
    pub data_risky: Option<PathBuf>,

    /// Non-risky-asset CSV (`date,price`); requires --data-risky
    #[arg(long, requires = "data_risky")]
    pub data_safe: Option<PathBuf>,

    /// Synthetic-market TOML config
    #[arg(long)]
    pub synthetic: Option<PathBuf>,

    /// Output directory (created if missing)
    #[arg(long, env = "REBAL_OUT_DIR")]
    pub out: PathBuf,

    /// Master seed override; also overrides the synthetic generator seed
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker cap when running a suite (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
}

const PRESETS: &[(&str, &str)] = &[
    ("001", include_str!("../presets/001.toml")),
    ("002", include_str!("../presets/002.toml")),
    ("003", include_str!("../presets/003.toml")),
    ("004", include_str!("../presets/004.toml")),
    ("005", include_str!("../presets/005.toml")),
    ("006", include_str!("../presets/006.toml")),
    ("007", include_str!("../presets/007.toml")),
    ("oos_comparison", include_str!("../presets/oos_comparison.toml")),
    ("accuracy_sweep", include_str!("../presets/accuracy_sweep.toml")),
    ("rebalance_sweep", include_str!("../presets/rebalance_sweep.toml")),
    ("phase_accuracy", include_str!("../presets/phase_accuracy.toml")),
    ("constraints_suite", include_str!("../presets/constraints_suite.toml")),
];

/// Where a config came from: needed to resolve suite members relatively.
struct ResolvedConfig {
    text: String,
    base_dir: Option<PathBuf>,
    /// Short name used for per-member output directories.
    stem: String,
}

fn resolve_config(reference: &str) -> Result<ResolvedConfig> {
    if let Some(name) = reference.strip_prefix("preset:") {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown preset {name:?}; available: {}",
                    PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
                ))
            })?;
        return Ok(ResolvedConfig {
            text,
            base_dir: None,
            stem: name.to_string(),
        });
    }
    let path = Path::new(reference);
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    Ok(ResolvedConfig {
        text,
        base_dir: path.parent().map(Path::to_path_buf),
        stem: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into()),
    })
}

fn resolve_member(base_dir: Option<&Path>, member: &str) -> Result<ResolvedConfig> {
    if member.starts_with("preset:") {
        return resolve_config(member);
    }
    let joined = match base_dir {
        Some(dir) => dir.join(member),
        None => PathBuf::from(member),
    };
    resolve_config(&joined.to_string_lossy())
}

struct LoadedData {
    ctxs: Vec<YearContext>,
    digest: String,
}

fn hex_digest(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p);
    }
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn load_data(args: &RunArgs) -> Result<LoadedData> {
    match (&args.data_risky, &args.data_safe, &args.synthetic) {
        (Some(risky), Some(safe), None) => {
            let risky_bytes = fs::read(risky)?;
            let safe_bytes = fs::read(safe)?;
            let load = load_price_csv_pair(risky, safe)?;
            if load.dropped_rows > 0 {
                eprintln!("warning: dropped {} unusable csv row(s)", load.dropped_rows);
            }
            Ok(LoadedData {
                ctxs: prepare_years(&PreparedMarket::new(load.risky, load.safe)?, &FeatureParams::default())?,
                digest: hex_digest(&[&risky_bytes, &safe_bytes]),
            })
        }
        (None, None, Some(path)) => {
            let bytes = fs::read(path)?;
            let mut cfg = parse_synthetic_config(&String::from_utf8_lossy(&bytes))?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let market = PreparedMarket::from_synthetic(&cfg)?;
            Ok(LoadedData {
                ctxs: prepare_years(&market, &FeatureParams::default())?,
                digest: hex_digest(&[&bytes]),
            })
        }
        _ => Err(Error::Config(
            "provide either --data-risky with --data-safe, or --synthetic".into(),
        )),
    }
}

#[derive(Serialize)]
struct RunManifest {
    config: serde_json::Value,
    master_seed: u64,
    input_digest: String,
    outputs: Vec<String>,
    duration_secs: f64,
}

#[derive(Serialize)]
struct SuiteManifest {
    members: Vec<String>,
    input_digest: String,
    duration_secs: f64,
}

fn sanitize_id(id: &str) -> String {
    let cleaned: String = id.chars().filter(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
    if cleaned.is_empty() {
        "run".into()
    } else {
        cleaned
    }
}

fn create(outdir: &Path, name: &str, outputs: &mut Vec<String>) -> Result<BufWriter<File>> {
    outputs.push(name.to_string());
    Ok(BufWriter::new(File::create(outdir.join(name))?))
}

fn write_qtable_file(
    outdir: &Path,
    name: &str,
    q: &rebal_core::agent::QTable,
    outputs: &mut Vec<String>,
) -> Result<()> {
    let mut w = create(outdir, name, outputs)?;
    write_qtable(q, &mut w)?;
    w.flush()?;
    Ok(())
}

fn run_single(mut spec: RunSpec, args: &RunArgs, data: &LoadedData, outdir: &Path) -> Result<()> {
    let started = Instant::now();
    if let Some(seed) = args.seed {
        spec.experiment.seed = seed;
    }
    spec.validate()?;
    fs::create_dir_all(outdir)?;
    let ctxs = &data.ctxs;
    let sid = sanitize_id(&spec.experiment.id);
    let mut outputs: Vec<String> = Vec::new();

    match spec.runner {
        RunnerKind::Train => {
            let mut rows = Vec::new();
            for ctx in ctxs {
                let outcome = train_in_sample(ctx, &spec.experiment)?;
                let sharpe = rebal_core::report::annualized_sharpe(&outcome.trace.port_returns)?;
                rows.push((ctx.label, sharpe));
                write_qtable_file(outdir, &format!("qtable_{sid}_fy{}.csv", ctx.label), &outcome.q, &mut outputs)?;
            }
            let mut w = create(outdir, &format!("results_{sid}.csv"), &mut outputs)?;
            let rows: Vec<(i32, &str, f64)> =
                rows.iter().map(|(fy, s)| (*fy, spec.experiment.id.as_str(), *s)).collect();
            write_year_results(&mut w, &rows)?;
            w.flush()?;
        }
        RunnerKind::OosComparison => {
            let cfg_regime = regime_variant_of(&spec.experiment);
            let cmp = run_oos_comparison(ctxs, &spec.experiment, &cfg_regime, spec.n_random)?;
            let mut rows: Vec<(i32, &str, f64)> = Vec::new();
            for r in &cmp.rows {
                rows.push((r.fy, "base", r.base));
                rows.push((r.fy, "random_median", r.random_median));
                rows.push((r.fy, "regime_aware", r.regime_aware));
            }
            let mut w = create(outdir, &format!("results_{sid}.csv"), &mut outputs)?;
            write_year_results(&mut w, &rows)?;
            w.flush()?;
            for (fy, samples) in &cmp.random_samples {
                let hist = sharpe_histogram(samples, spec.histogram_bins)?;
                let mut w = create(outdir, &format!("hist_{sid}_fy{fy}.csv"), &mut outputs)?;
                write_histogram(&mut w, &hist)?;
                w.flush()?;
            }
            if spec.write_qtables {
                for (ctx, q) in ctxs.iter().zip(&cmp.base_tables) {
                    write_qtable_file(outdir, &format!("qtable_{sid}_base_fy{}.csv", ctx.label), q, &mut outputs)?;
                }
                for (ctx, q) in ctxs.iter().zip(&cmp.regime_tables) {
                    write_qtable_file(outdir, &format!("qtable_{sid}_regime_fy{}.csv", ctx.label), q, &mut outputs)?;
                }
            }
        }
        RunnerKind::ConstraintCase => {
            let case = run_constraint_case(ctxs, &spec.experiment)?;
            let mut w = create(outdir, &format!("results_{sid}.csv"), &mut outputs)?;
            let rows: Vec<(i32, &str, f64)> = case
                .years
                .iter()
                .map(|y| (y.label, spec.experiment.id.as_str(), y.sharpe_annual))
                .collect();
            write_year_results(&mut w, &rows)?;
            w.flush()?;

            let labeling = &spec.experiment.reward;
            let case_log = case_behavior_log(&case, ctxs, labeling)?;

            let mut sweep_rows = Vec::new();
            for quarter in 0..4 {
                if let Some(diff) = signal_behavior_diff(&case_log, quarter) {
                    sweep_rows.push((format!("q{}", quarter + 1), "diff_pp".to_string(), diff));
                }
            }
            let mut w = create(outdir, &format!("signal_behavior_{sid}.csv"), &mut outputs)?;
            write_sweep(&mut w, &sweep_rows)?;
            w.flush()?;

            let base_cfg = base_case_of(&spec.experiment);
            if base_cfg.state_space != spec.experiment.state_space || !spec.experiment.reward.is_empty() {
                let base = run_constraint_case(ctxs, &base_cfg)?;
                let base_log = case_behavior_log(&base, ctxs, labeling)?;
                let cells = case_delta_table(&case_log, &base_log, labeling);
                let mut w = create(outdir, &format!("behavior_delta_{sid}.csv"), &mut outputs)?;
                write_behavior_delta(&mut w, &spec.experiment.id, &cells)?;
                w.flush()?;
            }

            if spec.write_qtables {
                for y in &case.years {
                    write_qtable_file(outdir, &format!("qtable_{sid}_fy{}.csv", y.label), &y.q, &mut outputs)?;
                }
            }
        }
        RunnerKind::AccuracySweep => {
            let levels = run_accuracy_sweep(ctxs, &spec.accuracy_levels, &spec.experiment)?;
            let mut rows = Vec::new();
            for level in &levels {
                let sharpes: Vec<f64> = level.sharpes.iter().map(|(_, s)| *s).collect();
                if let Some(stats) = box_stats(&sharpes) {
                    for (stat, value) in stats {
                        rows.push((format!("{}", level.accuracy), stat, value));
                    }
                }
            }
            let mut w = create(outdir, &format!("sweep_accuracy_{sid}.csv"), &mut outputs)?;
            write_sweep(&mut w, &rows)?;
            w.flush()?;
        }
        RunnerKind::RebalanceSweep => {
            let levels = run_rebalance_sweep(ctxs, &spec.rebalance_freqs, &spec.experiment)?;
            let mut rows = Vec::new();
            for level in &levels {
                let sharpes: Vec<f64> = level.sharpes.iter().map(|(_, s)| *s).collect();
                if let Some(stats) = box_stats(&sharpes) {
                    for (stat, value) in stats {
                        rows.push((level.freq.name().to_string(), stat, value));
                    }
                }
            }
            let mut w = create(outdir, &format!("sweep_rebalance_{sid}.csv"), &mut outputs)?;
            write_sweep(&mut w, &rows)?;
            w.flush()?;
        }
        RunnerKind::PhaseAccuracy => {
            let points = run_phase_accuracy(ctxs, spec.phase_acc_a, &spec.phase_acc_b_levels, &spec.experiment)?;
            let mut rows = Vec::new();
            for p in &points {
                let level = format!("{}", p.acc_diff);
                rows.push((level.clone(), "follow_a".to_string(), p.follow_a));
                rows.push((level.clone(), "follow_b".to_string(), p.follow_b));
                rows.push((level, "diff_pp".to_string(), p.diff_pp));
            }
            let mut w = create(outdir, &format!("sweep_phase_{sid}.csv"), &mut outputs)?;
            write_sweep(&mut w, &rows)?;
            w.flush()?;
        }
    }

    let manifest = RunManifest {
        config: serde_json::to_value(&spec).map_err(|e| Error::Internal(e.to_string()))?,
        master_seed: spec.experiment.seed,
        input_digest: data.digest.clone(),
        outputs,
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let mut w = BufWriter::new(File::create(outdir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| Error::Internal(e.to_string()))?;
    w.flush()?;
    Ok(())
}

fn run_suite(
    suite_members: &[String],
    base_dir: Option<&Path>,
    args: &RunArgs,
    data: &LoadedData,
) -> Result<()> {
    let started = Instant::now();
    fs::create_dir_all(&args.out)?;

    // resolve and parse every member up front so config errors surface
    // before any work runs
    let mut members = Vec::new();
    for member in suite_members {
        let resolved = resolve_member(base_dir, member)?;
        match parse_config(&resolved.text)? {
            ConfigFile::Run(spec) => members.push((resolved.stem, *spec)),
            ConfigFile::Suite(_) => {
                return Err(Error::Config(format!("suite member {member:?} is itself a suite")))
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let results: Vec<(String, Result<()>)> = pool.install(|| {
        members
            .par_iter()
            .map(|(stem, spec)| {
                let outdir = args.out.join(stem);
                (stem.clone(), run_single(spec.clone(), args, data, &outdir))
            })
            .collect()
    });

    let mut first_err = None;
    for (stem, result) in results {
        if let Err(err) = result {
            eprintln!("member {stem}: {err}");
            if first_err.is_none() {
                first_err = Some(err);
            }
        }
    }
    if let Some(err) = first_err {
        return Err(err);
    }

    let manifest = SuiteManifest {
        members: members.iter().map(|(stem, _)| stem.clone()).collect(),
        input_digest: data.digest.clone(),
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let mut w = BufWriter::new(File::create(args.out.join("suite_manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| Error::Internal(e.to_string()))?;
    w.flush()?;
    Ok(())
}

pub fn cmd_run(args: RunArgs) -> Result<()> {
    let resolved = resolve_config(&args.config)?;
    let parsed = parse_config(&resolved.text)?;
    let data = load_data(&args)?;
    match parsed {
        ConfigFile::Run(spec) => run_single(*spec, &args, &data, &args.out),
        ConfigFile::Suite(suite) => run_suite(&suite.members, resolved.base_dir.as_deref(), &args, &data),
    }
}

pub fn cmd_validate(config: &str) -> Result<()> {
    let resolved = resolve_config(config)?;
    match parse_config(&resolved.text)? {
        ConfigFile::Run(spec) => spec.validate(),
        ConfigFile::Suite(suite) => {
            for member in &suite.members {
                let m = resolve_member(resolved.base_dir.as_deref(), member)?;
                match parse_config(&m.text)? {
                    ConfigFile::Run(spec) => spec.validate()?,
                    ConfigFile::Suite(_) => {
                        return Err(Error::Config(format!("suite member {member:?} is itself a suite")))
                    }
                }
            }
            Ok(())
        }
    }
}
