//! Rewards: Sharpe ratios, the hindsight fixed-weight benchmark, the basic
//! Sharpe-difference reward, and target/drawdown shaping.

use serde::{Deserialize, Serialize};

use crate::env::mix_return;
use crate::error::{Error, Result};

/// Cap applied to the Sharpe ratio of a zero-variance window with non-zero
/// mean; keeps rewards (and Q updates) bounded.
pub const SHARPE_CAP: f64 = 100.0;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_stdev(xs: &[f64], m: f64) -> f64 {
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

// A window counts as zero-variance when all values are equal; summation
// rounding must not turn a constant window into a huge finite ratio.
pub(crate) fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x == xs[0])
}

pub(crate) fn capped_ratio(m: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        if m == 0.0 {
            0.0
        } else {
            m.signum() * SHARPE_CAP
        }
    } else {
        m / sd
    }
}

/// Sharpe ratio of a window of daily returns: mean over population standard
/// deviation, risk-free rate zero, unannualized.
///
/// Degenerate windows (zero variance) map to 0 when the mean is zero and to
/// `±SHARPE_CAP` otherwise.
pub fn sharpe(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::InsufficientData("sharpe of empty window".into()));
    }
    if is_constant(returns) {
        return Ok(capped_ratio(returns[0], 0.0));
    }
    let m = mean(returns);
    Ok(capped_ratio(m, population_stdev(returns, m)))
}

fn trailing_sharpe(ytd: &[f64], window: usize) -> Result<f64> {
    let k = ytd.len().min(window);
    sharpe(&ytd[ytd.len() - k..])
}

/// Hindsight benchmark for one fiscal year: the fixed grid weight whose
/// daily-rebalanced mix has the highest full-year Sharpe ratio, along with
/// that mix's per-day year-to-date and trailing-10-day Sharpe paths.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub w_star_tenths: u8,
    /// Year-to-date Sharpe of the benchmark mix through each day.
    pub sr_by_day: Vec<f64>,
    /// Trailing-10-day Sharpe of the benchmark mix through each day.
    pub sr10_by_day: Vec<f64>,
    /// The benchmark mix's daily returns.
    pub returns: Vec<f64>,
}

/// Scans all eleven grid weights for the best full-year Sharpe; ties break
/// toward the lowest weight.
pub fn benchmark_best_fixed_weight(r_risky: &[f64], r_safe: &[f64]) -> Result<BenchmarkSpec> {
    if r_risky.is_empty() || r_risky.len() != r_safe.len() {
        return Err(Error::ShapeMismatch(format!(
            "benchmark needs equal non-empty return slices, got {} and {}",
            r_risky.len(),
            r_safe.len()
        )));
    }
    let mut w_star = 0u8;
    let mut best = f64::NEG_INFINITY;
    for w in 0u8..=10 {
        let series: Vec<f64> = r_risky
            .iter()
            .zip(r_safe)
            .map(|(&rr, &rs)| mix_return(w, rr, rs))
            .collect();
        let sr = sharpe(&series)?;
        if sr > best {
            best = sr;
            w_star = w;
        }
    }
    let returns: Vec<f64> = r_risky
        .iter()
        .zip(r_safe)
        .map(|(&rr, &rs)| mix_return(w_star, rr, rs))
        .collect();
    let mut sr_by_day = Vec::with_capacity(returns.len());
    let mut sr10_by_day = Vec::with_capacity(returns.len());
    for t in 0..returns.len() {
        sr_by_day.push(sharpe(&returns[..=t])?);
        sr10_by_day.push(trailing_sharpe(&returns[..=t], 10)?);
    }
    Ok(BenchmarkSpec {
        w_star_tenths: w_star,
        sr_by_day,
        sr10_by_day,
        returns,
    })
}

/// Basic reward on the last day of `ytd` (the portfolio's year-to-date daily
/// returns): the year-to-date and trailing-10-day Sharpe gaps to the
/// benchmark, summed. Windows shorter than 10 days use all available days.
pub fn basic_reward(ytd: &[f64], bm: &BenchmarkSpec) -> Result<f64> {
    if ytd.is_empty() {
        return Err(Error::InsufficientData("reward of empty window".into()));
    }
    let t = ytd.len() - 1;
    if t >= bm.sr_by_day.len() {
        return Err(Error::OutOfRange(format!(
            "day {t} beyond benchmark horizon {}",
            bm.sr_by_day.len()
        )));
    }
    let sr = sharpe(ytd)?;
    let sr10 = trailing_sharpe(ytd, 10)?;
    Ok((sr - bm.sr_by_day[t]) + (sr10 - bm.sr10_by_day[t]))
}

/// Whether drawdown is measured from the running wealth peak or from the
/// year's starting wealth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DrawdownMode {
    #[default]
    FromPeak,
    FromStart,
}

/// Shaping definition: cumulative-return targets with per-step bonuses and
/// drawdown thresholds with per-step penalties. Empty lists disable the
/// corresponding term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    #[serde(default)]
    pub target_levels: Vec<f64>,
    #[serde(default)]
    pub target_bonuses: Vec<f64>,
    #[serde(default)]
    pub dd_levels: Vec<f64>,
    #[serde(default)]
    pub dd_penalties: Vec<f64>,
    #[serde(default)]
    pub dd_mode: DrawdownMode,
    /// When true a breached drawdown level never de-escalates within the
    /// year; when false the level tracks the current drawdown.
    #[serde(default = "default_dd_sticky")]
    pub dd_sticky: bool,
}

fn default_dd_sticky() -> bool {
    true
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            target_levels: Vec::new(),
            target_bonuses: Vec::new(),
            dd_levels: Vec::new(),
            dd_penalties: Vec::new(),
            dd_mode: DrawdownMode::FromPeak,
            dd_sticky: true,
        }
    }
}

impl RewardConfig {
    pub fn is_empty(&self) -> bool {
        self.target_levels.is_empty() && self.dd_levels.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_levels.len() != self.target_bonuses.len() {
            return Err(Error::Config(format!(
                "target_bonuses length {} must match target_levels length {}",
                self.target_bonuses.len(),
                self.target_levels.len()
            )));
        }
        if self.dd_levels.len() != self.dd_penalties.len() {
            return Err(Error::Config(format!(
                "dd_penalties length {} must match dd_levels length {}",
                self.dd_penalties.len(),
                self.dd_levels.len()
            )));
        }
        for (name, levels) in [("target_levels", &self.target_levels), ("dd_levels", &self.dd_levels)] {
            for w in levels.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::Config(format!("{name} must be strictly increasing")));
                }
            }
            if levels.iter().any(|l| !l.is_finite() || *l <= 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }
}

/// Per-episode shaping status.
///
/// The target level is instantaneous (it de-escalates if cumulative return
/// falls back below a threshold); the drawdown level is sticky when the
/// config says so.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStatus {
    pub cum_return: f64,
    pub drawdown: f64,
    pub target_level: usize,
    pub dd_level: usize,
}

impl EpisodeStatus {
    pub fn initial() -> Self {
        EpisodeStatus {
            cum_return: 0.0,
            drawdown: 0.0,
            target_level: 0,
            dd_level: 0,
        }
    }
}

fn count_levels(levels: &[f64], value: f64) -> usize {
    levels.iter().filter(|&&l| value >= l).count()
}

/// Recomputes the status after a day closed at `wealth` with running peak
/// `peak_wealth` (both relative to a starting wealth of 1).
pub fn update_episode_status(
    prev: &EpisodeStatus,
    wealth: f64,
    peak_wealth: f64,
    cfg: &RewardConfig,
) -> EpisodeStatus {
    let cum_return = wealth - 1.0;
    let drawdown = match cfg.dd_mode {
        DrawdownMode::FromPeak => 1.0 - wealth / peak_wealth,
        DrawdownMode::FromStart => (1.0 - wealth).max(0.0),
    };
    let target_level = count_levels(&cfg.target_levels, cum_return);
    let instantaneous = count_levels(&cfg.dd_levels, drawdown);
    let dd_level = if cfg.dd_sticky {
        prev.dd_level.max(instantaneous)
    } else {
        instantaneous
    };
    EpisodeStatus {
        cum_return,
        drawdown,
        target_level,
        dd_level,
    }
}

/// Base reward plus the currently held target bonus and drawdown penalty.
/// Applied every step while the level holds. With empty shaping lists this
/// returns `base` unchanged.
pub fn shaped_reward(base: f64, status: &EpisodeStatus, cfg: &RewardConfig) -> f64 {
    let mut r = base;
    if status.target_level > 0 {
        r += cfg.target_bonuses[status.target_level - 1];
    }
    if status.dd_level > 0 {
        r += cfg.dd_penalties[status.dd_level - 1];
    }
    r
}
