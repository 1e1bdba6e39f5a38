//! Experiment orchestration.
//!
//! Prepares market data into per-fiscal-year contexts (features, signals,
//! benchmark), trains per-year tables, runs the walk-forward out-of-sample
//! comparison against a random-table baseline, and drives the constraint,
//! accuracy, rebalance-frequency and phase-accuracy studies.
//!
//! Every runner is deterministic given its configuration: a master seed
//! fans out into named child streams (see [`crate::seeds`]), keyed so that
//! changing one knob (accuracy level, rebalance frequency, case id) leaves
//! the other consumers' draws intact.

use serde::{Deserialize, Serialize};

use crate::agent::{
    average_q_tables, random_q_table, run_episode, Algo, AgentParams, EpisodeInputs, EpisodeTrace, QTable,
};
use crate::env::{RebalanceFreq, StateSpaceConfig};
use crate::error::{Error, Result};
use crate::features::{
    self, corrupt_signal, CorrBin, MomentumSign, PhaseId, QuarterIdx, Signal,
    DEFAULT_CORR_THRESHOLD, DEFAULT_CORR_WINDOW, DEFAULT_MOMENTUM_LOOKBACK, DEFAULT_SIGNAL_HORIZON,
};
use crate::market::{
    compute_returns, generate_synthetic_market, partition_fiscal_years, FiscalYearSlice, PriceSeries,
    ReturnSeries, SyntheticMarketConfig,
};
use crate::report::{self, build_behavior_log, BehaviorLog, TraceBundle};
use crate::reward::{benchmark_best_fixed_weight, BenchmarkSpec, RewardConfig};
use crate::seeds;

/// Rolling-window parameters for feature construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureParams {
    pub momentum_lookback: usize,
    pub corr_window: usize,
    pub corr_threshold: f64,
    pub signal_horizon: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            momentum_lookback: DEFAULT_MOMENTUM_LOOKBACK,
            corr_window: DEFAULT_CORR_WINDOW,
            corr_threshold: DEFAULT_CORR_THRESHOLD,
            signal_horizon: DEFAULT_SIGNAL_HORIZON,
        }
    }
}

/// Aligned two-asset market with its fiscal-year partition.
#[derive(Debug, Clone)]
pub struct PreparedMarket {
    pub prices_risky: PriceSeries,
    pub prices_safe: PriceSeries,
    pub returns_risky: ReturnSeries,
    pub returns_safe: ReturnSeries,
    pub years: Vec<FiscalYearSlice>,
}

impl PreparedMarket {
    pub fn new(prices_risky: PriceSeries, prices_safe: PriceSeries) -> Result<Self> {
        if prices_risky.dates() != prices_safe.dates() {
            return Err(Error::ShapeMismatch(
                "risky and safe price series must share their dates".into(),
            ));
        }
        let returns_risky = compute_returns(&prices_risky);
        let returns_safe = compute_returns(&prices_safe);
        let partition = partition_fiscal_years(&returns_risky)?;
        Ok(PreparedMarket {
            prices_risky,
            prices_safe,
            returns_risky,
            returns_safe,
            years: partition.years,
        })
    }

    pub fn from_synthetic(cfg: &SyntheticMarketConfig) -> Result<Self> {
        let (risky, safe) = generate_synthetic_market(cfg)?;
        Self::new(risky, safe)
    }
}

/// One fiscal year with every per-day observation precomputed.
///
/// Day `t` (local) corresponds to global return index `start + t`. Momentum
/// and correlation windows look back only (truncated near the head of the
/// whole series so the first year stays usable); the oracle looks forward
/// within the year, truncating to the remaining days near the year end.
#[derive(Debug, Clone)]
pub struct YearContext {
    pub label: i32,
    pub start: usize,
    pub end: usize,
    pub r_risky: Vec<f64>,
    pub r_safe: Vec<f64>,
    pub momentum_risky: Vec<MomentumSign>,
    pub momentum_safe: Vec<MomentumSign>,
    pub correlation: Vec<CorrBin>,
    pub quarters: Vec<QuarterIdx>,
    pub phases: Vec<PhaseId>,
    /// Uncorrupted look-ahead signals.
    pub oracle: Vec<Signal>,
    pub benchmark: BenchmarkSpec,
}

impl YearContext {
    pub fn n_days(&self) -> usize {
        self.end - self.start
    }
}

/// Builds the per-year contexts for a prepared market.
pub fn prepare_years(market: &PreparedMarket, fp: &FeatureParams) -> Result<Vec<YearContext>> {
    if fp.signal_horizon == 0 {
        return Err(Error::Config("signal_horizon must be >= 1".into()));
    }
    let ra = &market.returns_risky;
    let rb = &market.returns_safe;
    let mut out = Vec::with_capacity(market.years.len());
    for fy in &market.years {
        let n = fy.len();
        let mut ctx = YearContext {
            label: fy.label,
            start: fy.start,
            end: fy.end,
            r_risky: ra.returns()[fy.range()].to_vec(),
            r_safe: rb.returns()[fy.range()].to_vec(),
            momentum_risky: Vec::with_capacity(n),
            momentum_safe: Vec::with_capacity(n),
            correlation: Vec::with_capacity(n),
            quarters: Vec::with_capacity(n),
            phases: Vec::with_capacity(n),
            oracle: Vec::with_capacity(n),
            benchmark: benchmark_best_fixed_weight(
                &ra.returns()[fy.range()],
                &rb.returns()[fy.range()],
            )?,
        };
        for g in fy.range() {
            // decision day g knows prices up to index g
            let lookback = fp.momentum_lookback.min(g);
            ctx.momentum_risky
                .push(features::momentum_sign(&market.prices_risky, g, lookback)?);
            ctx.momentum_safe
                .push(features::momentum_sign(&market.prices_safe, g, lookback)?);
            let window = fp.corr_window.min(g);
            ctx.correlation.push(if window < 2 {
                CorrBin::None
            } else {
                features::correlation_bin(ra, rb, g, window, fp.corr_threshold)?
            });
            ctx.quarters.push(features::quarter_index(g, fy)?);
            ctx.phases.push(features::phase_id(&market.prices_safe, g, lookback)?);
            let horizon = fp.signal_horizon.min(fy.end - g);
            ctx.oracle.push(features::oracle_signal(ra, rb, g, horizon)?);
        }
        out.push(ctx);
    }
    Ok(out)
}

/// Signal accuracy: one rate for the whole year, or one per phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalAccuracy {
    Uniform(f64),
    PerPhase { phase_a: f64, phase_b: f64 },
}

impl SignalAccuracy {
    fn flip_rates(&self) -> (f64, f64) {
        match *self {
            SignalAccuracy::Uniform(a) => (1.0 - a, 1.0 - a),
            SignalAccuracy::PerPhase { phase_a, phase_b } => (1.0 - phase_a, 1.0 - phase_b),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = match *self {
            SignalAccuracy::Uniform(a) => (a, a),
            SignalAccuracy::PerPhase { phase_a, phase_b } => (phase_a, phase_b),
        };
        for v in [a, b] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("signal_accuracy must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Whether a year's signal corruption is drawn once or redrawn per episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionMode {
    #[default]
    PerYear,
    PerEpisode,
}

/// Training versus walk-forward evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    InSample,
    OutOfSample,
}

/// A fully specified experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub algo: Algo,
    pub mode: Mode,
    pub state_space: StateSpaceConfig,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub signal_accuracy: Option<SignalAccuracy>,
    #[serde(default)]
    pub signal_corruption: CorruptionMode,
    pub rebalance_freq: RebalanceFreq,
    #[serde(default)]
    pub agent: AgentParams,
    /// Master seed; every stream this experiment consumes derives from it.
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Config("id must be non-empty".into()));
        }
        self.state_space.validate()?;
        self.reward.validate()?;
        self.agent.validate()?;
        match (&self.signal_accuracy, self.state_space.use_signal) {
            (None, true) => {
                return Err(Error::Config(
                    "signal_accuracy is required when state_space.use_signal is set".into(),
                ))
            }
            (Some(_), false) => {
                return Err(Error::Config(
                    "signal_accuracy set but state_space.use_signal is disabled".into(),
                ))
            }
            (Some(acc), true) => {
                acc.validate()?;
                if matches!(acc, SignalAccuracy::PerPhase { .. }) && !self.state_space.use_phase {
                    return Err(Error::Config(
                        "per-phase signal_accuracy requires state_space.use_phase".into(),
                    ));
                }
            }
            (None, false) => {}
        }
        if self.state_space.target_status_values > 0
            && self.reward.target_levels.len() != self.state_space.target_status_values - 1
        {
            return Err(Error::Config(format!(
                "target_status_values = {} needs exactly {} reward target_levels, got {}",
                self.state_space.target_status_values,
                self.state_space.target_status_values - 1,
                self.reward.target_levels.len()
            )));
        }
        if self.state_space.dd_status_values > 0
            && self.reward.dd_levels.len() != self.state_space.dd_status_values - 1
        {
            return Err(Error::Config(format!(
                "dd_status_values = {} needs exactly {} reward dd_levels, got {}",
                self.state_space.dd_status_values,
                self.state_space.dd_status_values - 1,
                self.reward.dd_levels.len()
            )));
        }
        Ok(())
    }
}

/// The matching base case for a constraint experiment: same data, signal,
/// agent and seed, but the plain signal/position/quarter state space and an
/// unshaped reward.
pub fn base_case_of(cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        id: "#001".into(),
        state_space: StateSpaceConfig::constraint_case(0, 0),
        reward: RewardConfig::default(),
        ..cfg.clone()
    }
}

/// Corrupts one year's oracle signals at the configured accuracy, drawing
/// exactly one uniform per day so different accuracy levels share flips.
pub fn corrupt_year_signals<R: rand::Rng>(
    ctx: &YearContext,
    accuracy: &SignalAccuracy,
    rng: &mut R,
) -> Vec<Signal> {
    let (flip_a, flip_b) = accuracy.flip_rates();
    ctx.oracle
        .iter()
        .zip(&ctx.phases)
        .map(|(&s, &ph)| {
            let rate = match ph {
                PhaseId::PhaseA => flip_a,
                PhaseId::PhaseB => flip_b,
            };
            corrupt_signal(s, rate, rng)
        })
        .collect()
}

fn episode_inputs<'a>(
    ctx: &'a YearContext,
    cfg: &'a ExperimentConfig,
    signals: Option<&'a [Signal]>,
) -> EpisodeInputs<'a> {
    EpisodeInputs {
        r_risky: &ctx.r_risky,
        r_safe: &ctx.r_safe,
        momentum_risky: Some(&ctx.momentum_risky),
        momentum_safe: Some(&ctx.momentum_safe),
        correlation: Some(&ctx.correlation),
        signals,
        quarters: Some(&ctx.quarters),
        phases: Some(&ctx.phases),
        benchmark: &ctx.benchmark,
        space: &cfg.state_space,
        reward: &cfg.reward,
        freq: cfg.rebalance_freq,
    }
}

/// A learned table plus the final greedy rollout over its training year.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub q: QTable,
    pub trace: EpisodeTrace,
    /// The (corrupted) signal sequence the greedy rollout saw, when the
    /// state space uses signals.
    pub signals: Option<Vec<Signal>>,
}

/// Runs `cfg.agent.episodes` learning episodes over one year, then a single
/// greedy (ε = 0, no-learn) rollout.
pub fn train_in_sample(ctx: &YearContext, cfg: &ExperimentConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut q = QTable::for_space(&cfg.state_space);
    let mut explore_rng = seeds::stream(
        cfg.seed,
        &format!("explore/{}/fy{}/{}", cfg.id, ctx.label, cfg.agent.seed),
    );
    let mut signal_rng = seeds::stream(cfg.seed, &format!("signal/fy{}", ctx.label));

    let needs_signal = cfg.state_space.use_signal;
    let accuracy = cfg.signal_accuracy.as_ref();
    let mut signals: Option<Vec<Signal>> = None;
    if needs_signal && cfg.signal_corruption == CorruptionMode::PerYear {
        signals = Some(corrupt_year_signals(ctx, accuracy.unwrap(), &mut signal_rng));
    }

    for _ in 0..cfg.agent.episodes {
        if needs_signal && cfg.signal_corruption == CorruptionMode::PerEpisode {
            signals = Some(corrupt_year_signals(ctx, accuracy.unwrap(), &mut signal_rng));
        }
        let inputs = episode_inputs(ctx, cfg, signals.as_deref());
        run_episode(&inputs, &mut q, &cfg.agent, cfg.algo, true, &mut explore_rng)?;
    }

    if needs_signal && cfg.signal_corruption == CorruptionMode::PerEpisode {
        signals = Some(corrupt_year_signals(ctx, accuracy.unwrap(), &mut signal_rng));
    }
    let mut rollout_rng = seeds::stream(cfg.seed, &format!("rollout/{}/fy{}", cfg.id, ctx.label));
    let inputs = episode_inputs(ctx, cfg, signals.as_deref());
    let trace = run_episode(&inputs, &mut q, &cfg.agent, cfg.algo, false, &mut rollout_rng)?;
    Ok(TrainOutcome { q, trace, signals })
}

/// One validation year's out-of-sample result.
#[derive(Debug, Clone)]
pub struct YearResult {
    pub label: i32,
    pub sharpe_annual: f64,
    pub trace: EpisodeTrace,
}

/// Averages the past years' tables and rolls the mean table greedily over
/// the validation year. Errors when no past tables exist (the first year
/// has no out-of-sample result).
pub fn backtest_out_of_sample(
    ctx: &YearContext,
    past_tables: &[QTable],
    cfg: &ExperimentConfig,
) -> Result<YearResult> {
    if past_tables.is_empty() {
        return Err(Error::Config(format!(
            "validation year {} has no past tables to average",
            ctx.label
        )));
    }
    let mut avg = average_q_tables(past_tables)?;
    let signals = if cfg.state_space.use_signal {
        let mut signal_rng = seeds::stream(cfg.seed, &format!("signal/fy{}", ctx.label));
        Some(corrupt_year_signals(
            ctx,
            cfg.signal_accuracy.as_ref().ok_or_else(|| {
                Error::Config("signal_accuracy required for a signal-bearing state space".into())
            })?,
            &mut signal_rng,
        ))
    } else {
        None
    };
    let mut rng = seeds::stream(cfg.seed, &format!("oos/{}/fy{}", cfg.id, ctx.label));
    let inputs = episode_inputs(ctx, cfg, signals.as_deref());
    let trace = run_episode(&inputs, &mut avg, &cfg.agent, cfg.algo, false, &mut rng)?;
    let sharpe_annual = report::annualized_sharpe(&trace.port_returns)?;
    Ok(YearResult {
        label: ctx.label,
        sharpe_annual,
        trace,
    })
}

/// Per-validation-year comparison row.
#[derive(Debug, Clone, Copy)]
pub struct OosRow {
    pub fy: i32,
    pub base: f64,
    pub random_median: f64,
    pub regime_aware: f64,
}

/// Walk-forward comparison output.
#[derive(Debug, Clone)]
pub struct OosComparison {
    pub rows: Vec<OosRow>,
    /// Full random-model Sharpe sample per validation year (for histograms).
    pub random_samples: Vec<(i32, Vec<f64>)>,
    pub base_tables: Vec<QTable>,
    pub regime_tables: Vec<QTable>,
}

/// Evaluates pre-trained per-year tables walk-forward: validation year `i`
/// sees the averaged tables of years `0..i` only. The random baseline draws
/// `n_random` fresh tables per validation year on `cfg_base`'s state space.
pub fn oos_rows_from_tables(
    ctxs: &[YearContext],
    base_tables: &[QTable],
    regime_tables: &[QTable],
    cfg_base: &ExperimentConfig,
    cfg_regime: &ExperimentConfig,
    n_random: usize,
) -> Result<(Vec<OosRow>, Vec<(i32, Vec<f64>)>)> {
    if ctxs.len() < 2 {
        return Err(Error::InsufficientData(
            "walk-forward comparison needs at least two complete fiscal years".into(),
        ));
    }
    if base_tables.len() != ctxs.len() || regime_tables.len() != ctxs.len() {
        return Err(Error::ShapeMismatch("one table per year is required".into()));
    }
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for i in 1..ctxs.len() {
        let ctx = &ctxs[i];
        let base = backtest_out_of_sample(ctx, &base_tables[..i], cfg_base)?;
        let regime = backtest_out_of_sample(ctx, &regime_tables[..i], cfg_regime)?;

        let mut rng = seeds::stream(cfg_base.seed, &format!("randomq/fy{}", ctx.label));
        let mut year_samples = Vec::with_capacity(n_random);
        for _ in 0..n_random {
            let mut table = random_q_table(&cfg_base.state_space, &mut rng);
            let inputs = episode_inputs(ctx, cfg_base, None);
            let trace = run_episode(&inputs, &mut table, &cfg_base.agent, cfg_base.algo, false, &mut rng)?;
            year_samples.push(report::annualized_sharpe(&trace.port_returns)?);
        }
        let random_median = report::median(&year_samples)
            .ok_or_else(|| Error::Internal("median of empty random sample".into()))?;
        rows.push(OosRow {
            fy: ctx.label,
            base: base.sharpe_annual,
            random_median,
            regime_aware: regime.sharpe_annual,
        });
        samples.push((ctx.label, year_samples));
    }
    Ok((rows, samples))
}

/// Full walk-forward study: trains both models on every year, then compares
/// them (and the random baseline) on each validation year from the second
/// year on.
pub fn run_oos_comparison(
    ctxs: &[YearContext],
    cfg_base: &ExperimentConfig,
    cfg_regime: &ExperimentConfig,
    n_random: usize,
) -> Result<OosComparison> {
    for cfg in [cfg_base, cfg_regime] {
        cfg.validate()?;
        if cfg.mode != Mode::OutOfSample {
            return Err(Error::Config(format!(
                "walk-forward comparison requires mode = out_of_sample (config {})",
                cfg.id
            )));
        }
    }
    let base_tables: Vec<QTable> = ctxs
        .iter()
        .map(|ctx| train_in_sample(ctx, cfg_base).map(|o| o.q))
        .collect::<Result<_>>()?;
    let regime_tables: Vec<QTable> = ctxs
        .iter()
        .map(|ctx| train_in_sample(ctx, cfg_regime).map(|o| o.q))
        .collect::<Result<_>>()?;
    let (rows, random_samples) =
        oos_rows_from_tables(ctxs, &base_tables, &regime_tables, cfg_base, cfg_regime, n_random)?;
    Ok(OosComparison {
        rows,
        random_samples,
        base_tables,
        regime_tables,
    })
}

/// One trained year of a constraint case.
#[derive(Debug, Clone)]
pub struct CaseYear {
    pub label: i32,
    pub sharpe_annual: f64,
    pub trace: EpisodeTrace,
    pub signals: Option<Vec<Signal>>,
    pub q: QTable,
}

/// In-sample constraint study over all years.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub id: String,
    pub years: Vec<CaseYear>,
}

/// Trains one constraint case in-sample on every year. Requires Q-learning
/// and in-sample mode.
pub fn run_constraint_case(ctxs: &[YearContext], cfg: &ExperimentConfig) -> Result<CaseResult> {
    cfg.validate()?;
    if cfg.algo != Algo::QLearning {
        return Err(Error::Config(format!(
            "constraint case {} requires algo = q_learning",
            cfg.id
        )));
    }
    if cfg.mode != Mode::InSample {
        return Err(Error::Config(format!("constraint case {} requires mode = in_sample", cfg.id)));
    }
    let mut years = Vec::with_capacity(ctxs.len());
    for ctx in ctxs {
        let outcome = train_in_sample(ctx, cfg)?;
        years.push(CaseYear {
            label: ctx.label,
            sharpe_annual: report::annualized_sharpe(&outcome.trace.port_returns)?,
            trace: outcome.trace,
            signals: outcome.signals,
            q: outcome.q,
        });
    }
    Ok(CaseResult {
        id: cfg.id.clone(),
        years,
    })
}

/// Pools a case's greedy traces into one behavior log, labelling shaping
/// status with `labeling` (normally the analysed case's reward config).
pub fn case_behavior_log(
    case: &CaseResult,
    ctxs: &[YearContext],
    labeling: &RewardConfig,
) -> Result<BehaviorLog> {
    if case.years.len() != ctxs.len() {
        return Err(Error::ShapeMismatch("case years do not match contexts".into()));
    }
    let bundles: Vec<TraceBundle> = case
        .years
        .iter()
        .zip(ctxs)
        .map(|(y, ctx)| TraceBundle {
            trace: &y.trace,
            quarters: &ctx.quarters,
            signals: y.signals.as_deref(),
            phases: Some(&ctx.phases),
        })
        .collect();
    build_behavior_log(&bundles, labeling)
}

/// Per-accuracy-level results of the signal-accuracy sweep.
#[derive(Debug, Clone)]
pub struct AccuracyLevel {
    pub accuracy: f64,
    /// `(fiscal year, annual Sharpe)` of the final greedy rollout.
    pub sharpes: Vec<(i32, f64)>,
}

/// Trains the experiment at each signal-accuracy level; flip rate is
/// `1 - accuracy`. Levels must lie in `[0.5, 1.0]`.
pub fn run_accuracy_sweep(
    ctxs: &[YearContext],
    levels: &[f64],
    cfg: &ExperimentConfig,
) -> Result<Vec<AccuracyLevel>> {
    cfg.validate()?;
    if !cfg.state_space.use_signal {
        return Err(Error::Config("accuracy sweep requires state_space.use_signal".into()));
    }
    if levels.is_empty() {
        return Err(Error::Config("accuracy sweep needs at least one level".into()));
    }
    for &l in levels {
        if !(0.5..=1.0).contains(&l) {
            return Err(Error::Config(format!("accuracy levels must be in [0.5, 1.0], got {l}")));
        }
    }
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let level_cfg = ExperimentConfig {
            signal_accuracy: Some(SignalAccuracy::Uniform(level)),
            ..cfg.clone()
        };
        let mut sharpes = Vec::with_capacity(ctxs.len());
        for ctx in ctxs {
            let outcome = train_in_sample(ctx, &level_cfg)?;
            sharpes.push((ctx.label, report::annualized_sharpe(&outcome.trace.port_returns)?));
        }
        out.push(AccuracyLevel { accuracy: level, sharpes });
    }
    Ok(out)
}

/// Per-frequency results of the rebalance sweep.
#[derive(Debug, Clone)]
pub struct FreqLevel {
    pub freq: RebalanceFreq,
    pub sharpes: Vec<(i32, f64)>,
}

/// Trains the experiment under each rebalance-frequency constraint.
pub fn run_rebalance_sweep(
    ctxs: &[YearContext],
    freqs: &[RebalanceFreq],
    cfg: &ExperimentConfig,
) -> Result<Vec<FreqLevel>> {
    cfg.validate()?;
    if freqs.is_empty() {
        return Err(Error::Config("rebalance sweep needs at least one frequency".into()));
    }
    let mut out = Vec::with_capacity(freqs.len());
    for &freq in freqs {
        let freq_cfg = ExperimentConfig {
            rebalance_freq: freq,
            ..cfg.clone()
        };
        let mut sharpes = Vec::with_capacity(ctxs.len());
        for ctx in ctxs {
            let outcome = train_in_sample(ctx, &freq_cfg)?;
            sharpes.push((ctx.label, report::annualized_sharpe(&outcome.trace.port_returns)?));
        }
        out.push(FreqLevel { freq, sharpes });
    }
    Ok(out)
}

/// One point of the phase-accuracy study.
#[derive(Debug, Clone, Copy)]
pub struct PhaseAccuracyPoint {
    pub acc_a: f64,
    pub acc_b: f64,
    /// `acc_b - acc_a`, the study's horizontal axis.
    pub acc_diff: f64,
    /// Signal-following rate of counted decisions in each phase.
    pub follow_a: f64,
    pub follow_b: f64,
    /// `(follow_b - follow_a)` in percentage points.
    pub diff_pp: f64,
}

/// Trains with phase-dependent accuracy (phase A fixed at `acc_a`, phase B
/// swept over `acc_b_levels`) and reports the per-phase signal-following
/// rates of the final greedy policies, pooled over years.
pub fn run_phase_accuracy(
    ctxs: &[YearContext],
    acc_a: f64,
    acc_b_levels: &[f64],
    cfg: &ExperimentConfig,
) -> Result<Vec<PhaseAccuracyPoint>> {
    if !cfg.state_space.use_phase || !cfg.state_space.use_signal {
        return Err(Error::Config(
            "phase-accuracy study requires use_phase and use_signal".into(),
        ));
    }
    for &l in acc_b_levels.iter().chain(std::iter::once(&acc_a)) {
        if !(0.5..=1.0).contains(&l) {
            return Err(Error::Config(format!("phase accuracies must be in [0.5, 1.0], got {l}")));
        }
    }
    let mut out = Vec::with_capacity(acc_b_levels.len());
    for &acc_b in acc_b_levels {
        let level_cfg = ExperimentConfig {
            signal_accuracy: Some(SignalAccuracy::PerPhase { phase_a: acc_a, phase_b: acc_b }),
            ..cfg.clone()
        };
        level_cfg.validate()?;
        let case = run_constraint_case_unchecked(ctxs, &level_cfg)?;
        let log = case_behavior_log(&case, ctxs, &level_cfg.reward)?;
        let follow_a = report::signal_follow_rate(&log, Some(PhaseId::PhaseA));
        let follow_b = report::signal_follow_rate(&log, Some(PhaseId::PhaseB));
        let (follow_a, follow_b) = match (follow_a, follow_b) {
            (Some(a), Some(b)) => (a.value, b.value),
            _ => {
                return Err(Error::InsufficientData(format!(
                    "phase-accuracy study at acc_b {acc_b}: a phase has no counted decisions"
                )))
            }
        };
        out.push(PhaseAccuracyPoint {
            acc_a,
            acc_b,
            acc_diff: acc_b - acc_a,
            follow_a,
            follow_b,
            diff_pp: (follow_b - follow_a) * 100.0,
        });
    }
    Ok(out)
}

/// The regime-aware variant of a walk-forward base model: the same
/// experiment with the correlation bin added to the state space.
pub fn regime_variant_of(cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        id: format!("{}-regime", cfg.id),
        state_space: StateSpaceConfig {
            use_correlation: true,
            ..cfg.state_space.clone()
        },
        ..cfg.clone()
    }
}

/// Which study a run-spec file drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunnerKind {
    /// Per-year in-sample training; writes per-year tables.
    Train,
    /// Walk-forward base vs regime-aware vs random comparison.
    OosComparison,
    /// One Table-style constraint case with behavior deltas vs its base.
    ConstraintCase,
    /// Signal-accuracy sweep.
    AccuracySweep,
    /// Rebalance-frequency sweep.
    RebalanceSweep,
    /// Phase-dependent accuracy study.
    PhaseAccuracy,
}

fn default_accuracy_levels() -> Vec<f64> {
    vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5]
}

fn default_freqs() -> Vec<RebalanceFreq> {
    vec![
        RebalanceFreq::Daily,
        RebalanceFreq::Weekly,
        RebalanceFreq::Biweekly,
        RebalanceFreq::Monthly,
    ]
}

fn default_phase_acc_a() -> f64 {
    0.6
}

fn default_n_random() -> usize {
    1000
}

fn default_histogram_bins() -> usize {
    30
}

/// One experiment file: the experiment plus runner selection and
/// runner-specific knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub runner: RunnerKind,
    pub experiment: ExperimentConfig,
    #[serde(default = "default_accuracy_levels")]
    pub accuracy_levels: Vec<f64>,
    #[serde(default = "default_freqs")]
    pub rebalance_freqs: Vec<RebalanceFreq>,
    #[serde(default = "default_phase_acc_a")]
    pub phase_acc_a: f64,
    #[serde(default = "default_accuracy_levels")]
    pub phase_acc_b_levels: Vec<f64>,
    #[serde(default = "default_n_random")]
    pub n_random: usize,
    #[serde(default = "default_histogram_bins")]
    pub histogram_bins: usize,
    #[serde(default)]
    pub write_qtables: bool,
}

impl RunSpec {
    /// Full parse-time consistency check; `run` refuses exactly what this
    /// refuses.
    pub fn validate(&self) -> Result<()> {
        self.experiment.validate()?;
        match self.runner {
            RunnerKind::Train => {}
            RunnerKind::OosComparison => {
                if self.experiment.mode != Mode::OutOfSample {
                    return Err(Error::Config(
                        "oos_comparison requires experiment.mode = out_of_sample".into(),
                    ));
                }
                if self.experiment.state_space.use_correlation {
                    return Err(Error::Config(
                        "oos_comparison derives the regime-aware model itself; \
                         disable state_space.use_correlation in the base model"
                            .into(),
                    ));
                }
                if self.n_random == 0 {
                    return Err(Error::Config("n_random must be >= 1".into()));
                }
            }
            RunnerKind::ConstraintCase => {
                if self.experiment.algo != Algo::QLearning {
                    return Err(Error::Config("constraint_case requires experiment.algo = q_learning".into()));
                }
                if self.experiment.mode != Mode::InSample {
                    return Err(Error::Config("constraint_case requires experiment.mode = in_sample".into()));
                }
            }
            RunnerKind::AccuracySweep => {
                if !self.experiment.state_space.use_signal {
                    return Err(Error::Config(
                        "accuracy_sweep requires experiment.state_space.use_signal".into(),
                    ));
                }
                if self.accuracy_levels.is_empty() {
                    return Err(Error::Config("accuracy_levels must be non-empty".into()));
                }
                for &l in &self.accuracy_levels {
                    if !(0.5..=1.0).contains(&l) {
                        return Err(Error::Config(format!(
                            "accuracy_levels entries must be in [0.5, 1.0], got {l}"
                        )));
                    }
                }
            }
            RunnerKind::RebalanceSweep => {
                if self.rebalance_freqs.is_empty() {
                    return Err(Error::Config("rebalance_freqs must be non-empty".into()));
                }
            }
            RunnerKind::PhaseAccuracy => {
                if !self.experiment.state_space.use_phase || !self.experiment.state_space.use_signal {
                    return Err(Error::Config(
                        "phase_accuracy requires experiment.state_space.use_phase and use_signal".into(),
                    ));
                }
                for &l in self.phase_acc_b_levels.iter().chain(std::iter::once(&self.phase_acc_a)) {
                    if !(0.5..=1.0).contains(&l) {
                        return Err(Error::Config(format!(
                            "phase accuracies must be in [0.5, 1.0], got {l}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A suite file: paths of member run-spec files, relative to the suite
/// file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub members: Vec<String>,
}

/// Parsed content of an experiment/suite config file.
#[derive(Debug, Clone)]
pub enum ConfigFile {
    Run(Box<RunSpec>),
    Suite(SuiteSpec),
}

/// Parses a config document: a table with a `members` key is a suite,
/// anything else must be a run spec. Parse errors name the offending field.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(format!("config parse error: {e}")))?;
    if table.contains_key("members") {
        let suite: SuiteSpec =
            toml::from_str(text).map_err(|e| Error::Config(format!("suite config: {e}")))?;
        Ok(ConfigFile::Suite(suite))
    } else {
        let spec: RunSpec = toml::from_str(text).map_err(|e| Error::Config(format!("run config: {e}")))?;
        Ok(ConfigFile::Run(Box::new(spec)))
    }
}

/// Parses a synthetic-market TOML document.
pub fn parse_synthetic_config(text: &str) -> Result<SyntheticMarketConfig> {
    let cfg: SyntheticMarketConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("synthetic config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

// Same as run_constraint_case but without the algo/mode gate, for internal
// sweeps that inherit whatever the config says.
fn run_constraint_case_unchecked(ctxs: &[YearContext], cfg: &ExperimentConfig) -> Result<CaseResult> {
    let mut years = Vec::with_capacity(ctxs.len());
    for ctx in ctxs {
        let outcome = train_in_sample(ctx, cfg)?;
        years.push(CaseYear {
            label: ctx.label,
            sharpe_annual: report::annualized_sharpe(&outcome.trace.port_returns)?,
            trace: outcome.trace,
            signals: outcome.signals,
            q: outcome.q,
        });
    }
    Ok(CaseResult {
        id: cfg.id.clone(),
        years,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Action, StateKey};
    use crate::market::RegimeSpec;

    pub(crate) fn small_market(seed: u64, years: usize, days_per_year: usize) -> PreparedMarket {
        let cfg = SyntheticMarketConfig {
            n_days_per_year: days_per_year,
            start_year: 2000,
            regimes: vec![RegimeSpec {
                days: years * days_per_year,
                drift_risky: 0.0004,
                vol_risky: 0.012,
                drift_safe: 0.0001,
                vol_safe: 0.002,
                correlation: 0.1,
            }],
            seed,
        };
        PreparedMarket::from_synthetic(&cfg).unwrap()
    }

    fn case_cfg(id: &str, episodes: usize) -> ExperimentConfig {
        ExperimentConfig {
            id: id.into(),
            algo: Algo::QLearning,
            mode: Mode::InSample,
            state_space: StateSpaceConfig::constraint_case(0, 0),
            reward: RewardConfig::default(),
            signal_accuracy: Some(SignalAccuracy::Uniform(0.6)),
            signal_corruption: CorruptionMode::PerYear,
            rebalance_freq: RebalanceFreq::Daily,
            agent: AgentParams { episodes, ..AgentParams::default() },
            seed: 7,
        }
    }

    fn oos_cfg(id: &str, space: StateSpaceConfig, episodes: usize) -> ExperimentConfig {
        ExperimentConfig {
            id: id.into(),
            algo: Algo::Sarsa,
            mode: Mode::OutOfSample,
            state_space: space,
            reward: RewardConfig::default(),
            signal_accuracy: None,
            signal_corruption: CorruptionMode::PerYear,
            rebalance_freq: RebalanceFreq::Daily,
            agent: AgentParams { episodes, ..AgentParams::default() },
            seed: 7,
        }
    }

    #[test]
    fn prepare_years_shapes_and_oracle_truncation() {
        let market = small_market(1, 2, 80);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        assert_eq!(ctxs.len(), 2);
        for ctx in &ctxs {
            assert_eq!(ctx.n_days(), 80);
            assert_eq!(ctx.oracle.len(), 80);
            assert_eq!(ctx.quarters.len(), 80);
            assert_eq!(ctx.benchmark.sr_by_day.len(), 80);
        }
        // last day's oracle window is a single day and still defined
        assert!(ctxs[1].oracle.last().is_some());
    }

    #[test]
    fn train_zero_alpha_single_episode_stays_zero() {
        let market = small_market(2, 1, 60);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        let mut cfg = case_cfg("#001", 1);
        cfg.agent.alpha = 0.0;
        let outcome = train_in_sample(&ctxs[0], &cfg).unwrap();
        assert!(outcome.q.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn train_is_deterministic() {
        let market = small_market(3, 1, 60);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        let cfg = case_cfg("#001", 40);
        let a = train_in_sample(&ctxs[0], &cfg).unwrap();
        let b = train_in_sample(&ctxs[0], &cfg).unwrap();
        assert_eq!(a.q.values(), b.q.values());
        assert_eq!(a.trace.actions, b.trace.actions);
        assert_eq!(a.trace.rewards, b.trace.rewards);
        assert_eq!(a.signals, b.signals);
    }

    #[test]
    fn greedy_rollout_reaches_dominant_weight() {
        // deterministic toy year where adding risky weight strictly
        // dominates the Sharpe-gap reward: the safe asset tracks the risky
        // one minus a constant spread (so weight timing cannot exploit the
        // wiggle) and the mean sits near zero (so variance shaving never
        // pays for the mean it costs)
        let n = 12usize;
        let pat = [0.013, -0.011, 0.007, -0.015, 0.01, -0.006, 0.014, -0.009, 0.012, -0.013, 0.008, -0.01];
        let rr: Vec<f64> = (0..n).map(|i| 0.002 + pat[i]).collect();
        let rs: Vec<f64> = rr.iter().map(|r| r - 0.004).collect();
        let bm = benchmark_best_fixed_weight(&rr, &rs).unwrap();
        assert_eq!(bm.w_star_tenths, 10);

        // exhaustive enumeration over all 3^12 action sequences confirms the
        // all-IncRisky sequence maximizes the summed per-day reward
        let space = StateSpaceConfig { use_position: true, use_quarter: true, ..StateSpaceConfig::empty() };
        let reward_cfg = RewardConfig::default();
        let mut best_total = f64::NEG_INFINITY;
        let mut best_seq = 0usize;
        for seq in 0..3usize.pow(n as u32) {
            let mut s = crate::env::PortfolioState::initial();
            let mut port = Vec::with_capacity(n);
            let mut total = 0.0;
            let mut code = seq;
            for t in 0..n {
                let a = Action::from_index(code % 3).unwrap();
                code /= 3;
                let (next, ret) = crate::env::step(&s, a, rr[t], rs[t]).unwrap();
                port.push(ret);
                total += crate::reward::basic_reward(&port, &bm).unwrap();
                s = next;
            }
            if total > best_total {
                best_total = total;
                best_seq = seq;
            }
        }
        let mut code = best_seq;
        for _ in 0..n {
            assert_eq!(code % 3, Action::IncRisky.index(), "enumeration oracle");
            code /= 3;
        }

        // the trained greedy policy should ramp to all-risky and stay
        // there; step sizes anneal so the table settles despite aliased
        // early states
        let fy = FiscalYearSlice { label: 2000, start: 0, end: n };
        let quarters: Vec<QuarterIdx> = (0..n).map(|t| features::quarter_index(t, &fy).unwrap()).collect();
        let mut q = QTable::for_space(&space);
        let inputs = EpisodeInputs {
            r_risky: &rr,
            r_safe: &rs,
            momentum_risky: None,
            momentum_safe: None,
            correlation: None,
            signals: None,
            quarters: Some(&quarters),
            phases: None,
            benchmark: &bm,
            space: &space,
            reward: &reward_cfg,
            freq: RebalanceFreq::Daily,
        };
        let mut rng = seeds::stream(0, "toy-train");
        for (alpha, episodes) in [(0.1, 1500), (0.03, 1500), (0.01, 1000), (0.003, 800)] {
            let params = AgentParams { alpha, gamma: 0.5, epsilon: 0.4, episodes, seed: 0 };
            for _ in 0..episodes {
                run_episode(&inputs, &mut q, &params, Algo::QLearning, true, &mut rng).unwrap();
            }
        }
        let params = AgentParams { alpha: 0.0, gamma: 0.5, epsilon: 0.0, episodes: 1, seed: 0 };
        let trace = run_episode(&inputs, &mut q, &params, Algo::QLearning, false, &mut seeds::stream(0, "toy-eval"))
            .unwrap();
        // climbs a weight step per day and never leaves the top (IncRisky
        // and Hold are indistinguishable once the weight is saturated)
        let expect: Vec<u8> = (0..n).map(|t| (6 + t).min(10) as u8).collect();
        assert_eq!(trace.weights_after, expect, "greedy actions {:?}", trace.actions);
    }

    #[test]
    fn oos_requires_past_tables_and_prefers_hold_table() {
        let market = small_market(4, 2, 80);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        let cfg = oos_cfg("base", StateSpaceConfig::momentum_pair(), 5);

        assert!(backtest_out_of_sample(&ctxs[1], &[], &cfg).is_err());

        // a table preferring Hold everywhere keeps the 50/50 mix all year
        let mut table = QTable::for_space(&cfg.state_space);
        for s in 0..cfg.state_space.n_states() {
            table.set(StateKey(s), Action::Hold.index(), 1.0);
        }
        let result = backtest_out_of_sample(&ctxs[1], &[table], &cfg).unwrap();
        assert!(result.trace.actions.iter().all(|&a| a == Action::Hold));
        let fixed: Vec<f64> = ctxs[1]
            .r_risky
            .iter()
            .zip(&ctxs[1].r_safe)
            .map(|(&a, &b)| crate::env::mix_return(5, a, b))
            .collect();
        let expect = report::annualized_sharpe(&fixed).unwrap();
        assert!((result.sharpe_annual - expect).abs() < 1e-12);
    }

    #[test]
    fn averaging_identical_tables_equals_single_rollout() {
        let market = small_market(5, 2, 80);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        let cfg = oos_cfg("base", StateSpaceConfig::momentum_pair(), 10);
        let trained = train_in_sample(&ctxs[0], &cfg).unwrap();
        let single = backtest_out_of_sample(&ctxs[1], std::slice::from_ref(&trained.q), &cfg).unwrap();
        let many = backtest_out_of_sample(&ctxs[1], &vec![trained.q; 18], &cfg).unwrap();
        assert_eq!(single.trace.actions, many.trace.actions);
        assert_eq!(single.sharpe_annual, many.sharpe_annual);
    }

    #[test]
    fn oos_comparison_counts_and_determinism() {
        let market = small_market(6, 3, 60);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        let cfg_base = oos_cfg("base", StateSpaceConfig::momentum_pair(), 15);
        let cfg_regime = oos_cfg("regime", StateSpaceConfig::regime_aware(), 15);
        let n_random = 25;
        let a = run_oos_comparison(&ctxs, &cfg_base, &cfg_regime, n_random).unwrap();
        assert_eq!(a.rows.len(), ctxs.len() - 1);
        assert_eq!(a.rows[0].fy, ctxs[1].label);
        for (_, s) in &a.random_samples {
            assert_eq!(s.len(), n_random);
        }
        // the median sits within its own sample's quartiles
        for ((_, s), row) in a.random_samples.iter().zip(&a.rows) {
            let stats = report::box_stats(s).unwrap();
            assert!(row.random_median >= stats[1].1 && row.random_median <= stats[3].1);
        }
        let b = run_oos_comparison(&ctxs, &cfg_base, &cfg_regime, n_random).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.base.to_bits(), y.base.to_bits());
            assert_eq!(x.random_median.to_bits(), y.random_median.to_bits());
            assert_eq!(x.regime_aware.to_bits(), y.regime_aware.to_bits());
        }
    }

    #[test]
    fn constraint_case_validation_gates() {
        let market = small_market(7, 1, 60);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        let mut cfg = case_cfg("#001", 5);
        cfg.algo = Algo::Sarsa;
        assert!(run_constraint_case(&ctxs, &cfg).is_err());
        let mut cfg = case_cfg("#001", 5);
        cfg.mode = Mode::OutOfSample;
        assert!(run_constraint_case(&ctxs, &cfg).is_err());
    }

    #[test]
    fn experiment_config_cross_checks() {
        let mut cfg = case_cfg("#002", 5);
        cfg.state_space = StateSpaceConfig::constraint_case(2, 0);
        // missing target level for the enabled status component
        assert!(cfg.validate().is_err());
        cfg.reward.target_levels = vec![0.05];
        cfg.reward.target_bonuses = vec![1.0];
        assert!(cfg.validate().is_ok());

        // per-phase accuracy without phase in the state space
        let mut cfg = case_cfg("#001", 5);
        cfg.signal_accuracy = Some(SignalAccuracy::PerPhase { phase_a: 0.6, phase_b: 0.9 });
        assert!(cfg.validate().is_err());
        cfg.state_space.use_phase = true;
        assert!(cfg.validate().is_ok());

        // signal accuracy requires the signal component and vice versa
        let mut cfg = case_cfg("#001", 5);
        cfg.signal_accuracy = None;
        assert!(cfg.validate().is_err());
        let mut cfg = oos_cfg("base", StateSpaceConfig::momentum_pair(), 5);
        cfg.signal_accuracy = Some(SignalAccuracy::Uniform(0.8));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn accuracy_sweep_interface() {
        let market = small_market(8, 1, 60);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        let cfg = case_cfg("sweep", 10);
        assert!(run_accuracy_sweep(&ctxs, &[0.4], &cfg).is_err());

        // accuracy 1.0 corrupts nothing: the rollout signals equal the oracle
        let levels = run_accuracy_sweep(&ctxs, &[1.0], &cfg).unwrap();
        assert_eq!(levels.len(), 1);
        let full_cfg = ExperimentConfig {
            signal_accuracy: Some(SignalAccuracy::Uniform(1.0)),
            ..cfg.clone()
        };
        let outcome = train_in_sample(&ctxs[0], &full_cfg).unwrap();
        assert_eq!(outcome.signals.as_deref().unwrap(), &ctxs[0].oracle[..]);
    }

    #[test]
    fn rebalance_sweep_matches_direct_run_and_monthly_budget() {
        let market = small_market(9, 1, 100);
        let ctxs = prepare_years(&market, &FeatureParams::default()).unwrap();
        let cfg = case_cfg("freq", 30);

        let sweep = run_rebalance_sweep(&ctxs, &[RebalanceFreq::Daily, RebalanceFreq::Monthly], &cfg).unwrap();
        let direct = run_constraint_case(&ctxs, &cfg).unwrap();
        assert_eq!(sweep[0].sharpes[0].1.to_bits(), direct.years[0].sharpe_annual.to_bits());

        let monthly_cfg = ExperimentConfig { rebalance_freq: RebalanceFreq::Monthly, ..cfg.clone() };
        let monthly = train_in_sample(&ctxs[0], &monthly_cfg).unwrap();
        let non_hold = monthly.trace.actions.iter().filter(|&&a| a != Action::Hold).count();
        assert!(non_hold <= ctxs[0].n_days().div_ceil(RebalanceFreq::Monthly.period()));
    }

    #[test]
    fn run_spec_toml_roundtrip_and_validation() {
        let text = r##"
runner = "constraint_case"

[experiment]
id = "#002"
algo = "q_learning"
mode = "in_sample"
rebalance_freq = "daily"
signal_accuracy = 0.6
seed = 3

[experiment.state_space]
use_signal = true
use_position = true
use_quarter = true
target_status_values = 2

[experiment.reward]
target_levels = [0.05]
target_bonuses = [1.0]

[experiment.agent]
alpha = 0.1
gamma = 0.99
epsilon = 0.1
episodes = 50
"##;
        let parsed = parse_config(text).unwrap();
        let spec = match parsed {
            ConfigFile::Run(spec) => spec,
            ConfigFile::Suite(_) => panic!("expected run spec"),
        };
        spec.validate().unwrap();
        assert_eq!(spec.experiment.id, "#002");
        assert_eq!(spec.experiment.state_space.n_states(), 2 * 3 * 4 * 2);
        assert_eq!(spec.accuracy_levels, vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5]);

        // unknown fields are parse errors that name the field
        let bad = text.replace("[experiment.agent]", "[experiment.agent]\ntypo_field = 1\n");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("typo_field"), "{err}");

        // a members key makes it a suite
        let suite = parse_config("members = [\"a.toml\", \"b.toml\"]").unwrap();
        assert!(matches!(suite, ConfigFile::Suite(s) if s.members.len() == 2));
    }

    #[test]
    fn per_phase_accuracy_toml_form() {
        let text = r#"
runner = "phase_accuracy"

[experiment]
id = "phase"
algo = "q_learning"
mode = "in_sample"
rebalance_freq = "daily"
signal_accuracy = { phase_a = 0.6, phase_b = 0.9 }

[experiment.state_space]
use_signal = true
use_position = true
use_phase = true
"#;
        let ConfigFile::Run(spec) = parse_config(text).unwrap() else {
            panic!("expected run spec");
        };
        spec.validate().unwrap();
        assert_eq!(
            spec.experiment.signal_accuracy,
            Some(SignalAccuracy::PerPhase { phase_a: 0.6, phase_b: 0.9 })
        );
    }

    #[test]
    fn base_case_strips_shaping() {
        let mut cfg = case_cfg("#005", 5);
        cfg.state_space = StateSpaceConfig::constraint_case(0, 3);
        cfg.reward.dd_levels = vec![0.05, 0.10];
        cfg.reward.dd_penalties = vec![-1.0, -2.0];
        let base = base_case_of(&cfg);
        assert_eq!(base.id, "#001");
        assert!(base.reward.is_empty());
        assert_eq!(base.state_space, StateSpaceConfig::constraint_case(0, 0));
        assert_eq!(base.seed, cfg.seed);
        assert!(base.validate().is_ok());
    }
}
