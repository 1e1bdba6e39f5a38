//! Performance and behavior statistics plus plot-ready CSV emission.
//!
//! Behavior analysis follows one convention throughout: a `Hold` decision
//! counts as preferring the currently overweight asset, and `Hold` at the
//! equal weight is excluded from rate denominators. Cells with no
//! observations are reported as absent, never as zero.

use std::io::Write;

use crate::agent::EpisodeTrace;
use crate::env::{Action, PositionBucket};
use crate::error::{Error, Result};
use crate::features::{PhaseId, QuarterIdx, Signal};
use crate::reward::{update_episode_status, EpisodeStatus, RewardConfig, SHARPE_CAP};

/// Annual Sharpe ratio of one fiscal year of daily returns:
/// `(mean * N) / (stdev * sqrt(N))` with the year's own day count `N` and
/// population stdev. Zero-variance years map to 0 / ±cap like the daily
/// Sharpe.
pub fn annualized_sharpe(daily: &[f64]) -> Result<f64> {
    if daily.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "annualized sharpe needs >= 2 days, got {}",
            daily.len()
        )));
    }
    let n = daily.len() as f64;
    if crate::reward::is_constant(daily) {
        return Ok(crate::reward::capped_ratio(daily[0], 0.0));
    }
    let mean = daily.iter().sum::<f64>() / n;
    let sd = (daily.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        if mean == 0.0 {
            Ok(0.0)
        } else {
            Ok(mean.signum() * SHARPE_CAP)
        }
    } else {
        Ok((mean * n) / (sd * n.sqrt()))
    }
}

/// One decision in a behavior log.
#[derive(Debug, Clone, Copy)]
pub struct BehaviorRecord {
    pub quarter: QuarterIdx,
    pub signal: Option<Signal>,
    pub phase: Option<PhaseId>,
    pub action: Action,
    pub position: PositionBucket,
    /// Shaping status at decision time, labelled with the analysis config.
    pub target_level: usize,
    pub dd_level: usize,
}

impl BehaviorRecord {
    /// Hold-at-equal observations carry no preference and are excluded.
    pub fn is_counted(&self) -> bool {
        !(self.action == Action::Hold && self.position == PositionBucket::Equal)
    }

    pub fn prefers_risky(&self) -> bool {
        match self.action {
            Action::IncRisky => true,
            Action::DecRisky => false,
            Action::Hold => self.position == PositionBucket::RiskyHeavy,
        }
    }

    /// Whether the decision selected the asset the signal indicated.
    pub fn follows_signal(&self) -> Option<bool> {
        let signal = self.signal?;
        if !self.is_counted() {
            return None;
        }
        Some(match signal {
            Signal::RiskyBetter => self.prefers_risky(),
            Signal::SafeBetter => !self.prefers_risky(),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct BehaviorLog {
    pub records: Vec<BehaviorRecord>,
}

/// A greedy trace with the per-day features it was produced under.
#[derive(Debug, Clone, Copy)]
pub struct TraceBundle<'a> {
    pub trace: &'a EpisodeTrace,
    pub quarters: &'a [QuarterIdx],
    pub signals: Option<&'a [Signal]>,
    pub phases: Option<&'a [PhaseId]>,
}

/// Recomputes the decision-time (target, drawdown) status levels of a trace
/// under an arbitrary labelling config, from its wealth path alone. This
/// lets a run without status in its own state (the base case) be labelled
/// with another case's thresholds.
pub fn relabel_status_levels(trace: &EpisodeTrace, labeling: &RewardConfig) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(trace.n_days());
    let mut status = EpisodeStatus::initial();
    let mut peak = 1.0f64;
    for t in 0..trace.n_days() {
        out.push((status.target_level, status.dd_level));
        let wealth = trace.wealth[t];
        peak = peak.max(wealth);
        status = update_episode_status(&status, wealth, peak, labeling);
    }
    out
}

/// Pools traces into one behavior log, labelling every decision's status
/// with `labeling`.
pub fn build_behavior_log(bundles: &[TraceBundle], labeling: &RewardConfig) -> Result<BehaviorLog> {
    let mut records = Vec::new();
    for b in bundles {
        let n = b.trace.n_days();
        if b.quarters.len() != n {
            return Err(Error::ShapeMismatch("quarters not aligned with trace".into()));
        }
        if let Some(s) = b.signals {
            if s.len() != n {
                return Err(Error::ShapeMismatch("signals not aligned with trace".into()));
            }
        }
        if let Some(p) = b.phases {
            if p.len() != n {
                return Err(Error::ShapeMismatch("phases not aligned with trace".into()));
            }
        }
        let levels = relabel_status_levels(b.trace, labeling);
        for t in 0..n {
            records.push(BehaviorRecord {
                quarter: b.quarters[t],
                signal: b.signals.map(|s| s[t]),
                phase: b.phases.map(|p| p[t]),
                action: b.trace.actions[t],
                position: PositionBucket::from_tenths(b.trace.weights_before[t]),
                target_level: levels[t].0,
                dd_level: levels[t].1,
            });
        }
    }
    Ok(BehaviorLog { records })
}

/// Mutually exclusive shaping-status cell, mirroring the behavior-table
/// column layout. Drawdown takes precedence when both statuses are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatusCell {
    Otherwise,
    Target(usize),
    Drawdown(usize),
}

impl StatusCell {
    pub fn classify(target_level: usize, dd_level: usize) -> StatusCell {
        if dd_level > 0 {
            StatusCell::Drawdown(dd_level)
        } else if target_level > 0 {
            StatusCell::Target(target_level)
        } else {
            StatusCell::Otherwise
        }
    }

    pub fn name(&self) -> String {
        match self {
            StatusCell::Otherwise => "otherwise".into(),
            StatusCell::Target(l) => format!("target{l}"),
            StatusCell::Drawdown(l) => format!("dd{l}"),
        }
    }

    /// The status grid implied by a labelling config.
    pub fn grid(labeling: &RewardConfig) -> Vec<StatusCell> {
        let mut cells = vec![StatusCell::Otherwise];
        for l in 1..=labeling.target_levels.len() {
            cells.push(StatusCell::Target(l));
        }
        for l in 1..=labeling.dd_levels.len() {
            cells.push(StatusCell::Drawdown(l));
        }
        cells
    }
}

/// Filter over the behavior condition grid; `None` fields match anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct CellFilter {
    pub quarter: Option<usize>,
    pub signal: Option<Signal>,
    pub status: Option<StatusCell>,
    pub phase: Option<PhaseId>,
}

impl CellFilter {
    fn matches(&self, r: &BehaviorRecord) -> bool {
        if let Some(q) = self.quarter {
            if r.quarter.index() != q {
                return false;
            }
        }
        if let Some(s) = self.signal {
            if r.signal != Some(s) {
                return false;
            }
        }
        if let Some(c) = self.status {
            if StatusCell::classify(r.target_level, r.dd_level) != c {
                return false;
            }
        }
        if let Some(p) = self.phase {
            if r.phase != Some(p) {
                return false;
            }
        }
        true
    }
}

/// A preference or follow rate with its observation count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub count: usize,
}

/// Fraction of counted decisions in a cell that prefer the risky asset.
/// Returns `None` when the cell has no counted observations.
pub fn preference_rate(log: &BehaviorLog, filter: &CellFilter) -> Option<Rate> {
    let mut count = 0usize;
    let mut risky = 0usize;
    for r in log.records.iter().filter(|r| filter.matches(r)) {
        if !r.is_counted() {
            continue;
        }
        count += 1;
        if r.prefers_risky() {
            risky += 1;
        }
    }
    if count == 0 {
        None
    } else {
        Some(Rate {
            value: risky as f64 / count as f64,
            count,
        })
    }
}

/// Fraction of counted decisions (in an optional phase) that follow the
/// signal's indicated asset.
pub fn signal_follow_rate(log: &BehaviorLog, phase: Option<PhaseId>) -> Option<Rate> {
    let mut count = 0usize;
    let mut followed = 0usize;
    for r in &log.records {
        if phase.is_some() && r.phase != phase {
            continue;
        }
        if let Some(f) = r.follows_signal() {
            count += 1;
            if f {
                followed += 1;
            }
        }
    }
    if count == 0 {
        None
    } else {
        Some(Rate {
            value: followed as f64 / count as f64,
            count,
        })
    }
}

/// Risky-preference gap between the two signal directions for one quarter,
/// in percentage points. Absent when either direction has no observations.
pub fn signal_behavior_diff(log: &BehaviorLog, quarter: usize) -> Option<f64> {
    let risky = preference_rate(
        log,
        &CellFilter { quarter: Some(quarter), signal: Some(Signal::RiskyBetter), ..Default::default() },
    )?;
    let safe = preference_rate(
        log,
        &CellFilter { quarter: Some(quarter), signal: Some(Signal::SafeBetter), ..Default::default() },
    )?;
    Some((risky.value - safe.value) * 100.0)
}

/// One cell of a case-vs-base behavior delta table.
#[derive(Debug, Clone)]
pub struct DeltaCell {
    pub quarter: usize,
    pub signal: Signal,
    pub status: StatusCell,
    /// Case rate minus base rate, in percentage points; absent when either
    /// side has no observations.
    pub delta_pp: Option<f64>,
    pub case_count: usize,
    pub base_count: usize,
}

/// Per-cell risky-preference difference between a case log and the base
/// log over the `(quarter, signal, status)` grid implied by `labeling`.
/// Both logs must have been labelled with the same config.
pub fn case_delta_table(case: &BehaviorLog, base: &BehaviorLog, labeling: &RewardConfig) -> Vec<DeltaCell> {
    let mut out = Vec::new();
    for status in StatusCell::grid(labeling) {
        for signal in [Signal::RiskyBetter, Signal::SafeBetter] {
            for quarter in 0..4 {
                let filter = CellFilter {
                    quarter: Some(quarter),
                    signal: Some(signal),
                    status: Some(status),
                    phase: None,
                };
                let c = preference_rate(case, &filter);
                let b = preference_rate(base, &filter);
                out.push(DeltaCell {
                    quarter,
                    signal,
                    status,
                    delta_pp: match (&c, &b) {
                        (Some(c), Some(b)) => Some((c.value - b.value) * 100.0),
                        _ => None,
                    },
                    case_count: c.map_or(0, |r| r.count),
                    base_count: b.map_or(0, |r| r.count),
                });
            }
        }
    }
    out
}

/// Equal-width histogram over `[min, max]` of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` strictly increasing edges (degenerate samples
    /// collapse to a single bin).
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn sharpe_histogram(samples: &[f64], bins: usize) -> Result<Histogram> {
    if samples.is_empty() || bins == 0 {
        return Err(Error::InsufficientData("histogram needs samples and bins".into()));
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(Histogram {
            edges: vec![min, max],
            counts: vec![samples.len()],
        });
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let mut b = ((x - min) / width) as usize;
        if b >= bins {
            b = bins - 1; // the max lands in the top bin
        }
        counts[b] += 1;
    }
    let edges = (0..=bins)
        .map(|i| if i == bins { max } else { min + width * i as f64 })
        .collect();
    Ok(Histogram { edges, counts })
}

// ---------------------------------------------------------------------------
// CSV / plot-data emission
// ---------------------------------------------------------------------------

fn signal_name(s: Signal) -> &'static str {
    match s {
        Signal::RiskyBetter => "risky",
        Signal::SafeBetter => "safe",
    }
}

/// `fy,model,sharpe` rows.
pub fn write_year_results<W: Write>(out: &mut W, rows: &[(i32, &str, f64)]) -> Result<()> {
    writeln!(out, "fy,model,sharpe")?;
    for (fy, model, sharpe) in rows {
        writeln!(out, "{fy},{model},{sharpe}")?;
    }
    Ok(())
}

/// `case,quarter,signal,status,delta_pp,count` rows; absent deltas are
/// written as the sentinel `NA`.
pub fn write_behavior_delta<W: Write>(out: &mut W, case_id: &str, cells: &[DeltaCell]) -> Result<()> {
    writeln!(out, "case,quarter,signal,status,delta_pp,count")?;
    for c in cells {
        let delta = c.delta_pp.map_or_else(|| "NA".to_string(), |d| d.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{}",
            case_id,
            c.quarter + 1,
            signal_name(c.signal),
            c.status.name(),
            delta,
            c.case_count
        )?;
    }
    Ok(())
}

/// `bin_left,bin_right,count` rows.
pub fn write_histogram<W: Write>(out: &mut W, hist: &Histogram) -> Result<()> {
    writeln!(out, "bin_left,bin_right,count")?;
    for (i, &c) in hist.counts.iter().enumerate() {
        writeln!(out, "{},{},{}", hist.edges[i], hist.edges[i + 1], c)?;
    }
    Ok(())
}

/// Generic sweep output: `level,stat,value` rows.
pub fn write_sweep<W: Write>(out: &mut W, rows: &[(String, String, f64)]) -> Result<()> {
    writeln!(out, "level,stat,value")?;
    for (level, stat, value) in rows {
        writeln!(out, "{level},{stat},{value}")?;
    }
    Ok(())
}

/// min / q25 / median / q75 / max of a sample, for box-plot style sweeps.
pub fn box_stats(samples: &[f64]) -> Option<[(String, f64); 5]> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        // linear interpolation between closest ranks
        let h = p * (sorted.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    Some([
        ("min".into(), sorted[0]),
        ("q25".into(), q(0.25)),
        ("median".into(), q(0.5)),
        ("q75".into(), q(0.75)),
        ("max".into(), *sorted.last().unwrap()),
    ])
}

/// Median of a sample (averaging the middle pair for even sizes).
pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn annualized_sharpe_examples() {
        assert_eq!(annualized_sharpe(&[0.0; 30]).unwrap(), 0.0);
        assert_eq!(annualized_sharpe(&[0.001; 252]).unwrap(), SHARPE_CAP);
        assert!(annualized_sharpe(&[0.01]).is_err());
    }

    #[test]
    fn annualized_sharpe_constructed_year() {
        // mean 0.0004, population stdev 0.01, N = 252 -> about 0.635
        let mut xs = Vec::new();
        for _ in 0..126 {
            xs.push(0.0004 + 0.01);
            xs.push(0.0004 - 0.01);
        }
        let sr = annualized_sharpe(&xs).unwrap();
        assert!((sr - 0.0004 * 252.0 / (0.01 * (252.0f64).sqrt())).abs() < 1e-9);
        assert!((sr - 0.635).abs() < 0.001);
    }

    #[test]
    fn annualized_sharpe_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..100).map(|_| rng.gen_range(-0.02..0.02)).collect();
        let a = annualized_sharpe(&xs).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| x * 3.5).collect();
        let b = annualized_sharpe(&scaled).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    fn record(action: Action, position: PositionBucket, quarter: usize, signal: Option<Signal>) -> BehaviorRecord {
        BehaviorRecord {
            quarter: QuarterIdx::new(quarter).unwrap(),
            signal,
            phase: None,
            action,
            position,
            target_level: 0,
            dd_level: 0,
        }
    }

    #[test]
    fn preference_rate_counting() {
        let log = BehaviorLog {
            records: vec![
                record(Action::IncRisky, PositionBucket::Equal, 0, None),
                record(Action::IncRisky, PositionBucket::SafeHeavy, 0, None),
                record(Action::IncRisky, PositionBucket::RiskyHeavy, 0, None),
                record(Action::DecRisky, PositionBucket::RiskyHeavy, 0, None),
            ],
        };
        let r = preference_rate(&log, &CellFilter::default()).unwrap();
        assert_eq!(r.value, 0.75);
        assert_eq!(r.count, 4);

        let unanimous = BehaviorLog {
            records: vec![record(Action::IncRisky, PositionBucket::Equal, 1, None); 5],
        };
        assert_eq!(preference_rate(&unanimous, &CellFilter::default()).unwrap().value, 1.0);
    }

    #[test]
    fn hold_at_equal_is_excluded() {
        let log = BehaviorLog {
            records: vec![record(Action::Hold, PositionBucket::Equal, 0, None); 10],
        };
        assert!(preference_rate(&log, &CellFilter::default()).is_none());
    }

    #[test]
    fn hold_attributes_to_overweight_side() {
        let log = BehaviorLog {
            records: vec![
                record(Action::Hold, PositionBucket::RiskyHeavy, 0, None),
                record(Action::Hold, PositionBucket::SafeHeavy, 0, None),
            ],
        };
        let r = preference_rate(&log, &CellFilter::default()).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.count, 2);
    }

    #[test]
    fn signal_diff_perfect_following_and_blind() {
        let follow = BehaviorLog {
            records: vec![
                record(Action::IncRisky, PositionBucket::Equal, 2, Some(Signal::RiskyBetter)),
                record(Action::DecRisky, PositionBucket::Equal, 2, Some(Signal::SafeBetter)),
            ],
        };
        assert_eq!(signal_behavior_diff(&follow, 2).unwrap(), 100.0);

        let always_risky = BehaviorLog {
            records: vec![
                record(Action::IncRisky, PositionBucket::Equal, 2, Some(Signal::RiskyBetter)),
                record(Action::IncRisky, PositionBucket::Equal, 2, Some(Signal::SafeBetter)),
            ],
        };
        assert_eq!(signal_behavior_diff(&always_risky, 2).unwrap(), 0.0);
    }

    #[test]
    fn signal_diff_random_policy_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut records = Vec::new();
        for _ in 0..10_000 {
            let action = [Action::IncRisky, Action::Hold, Action::DecRisky][rng.gen_range(0..3)];
            let position = [PositionBucket::RiskyHeavy, PositionBucket::Equal, PositionBucket::SafeHeavy]
                [rng.gen_range(0..3)];
            let signal = if rng.gen::<bool>() { Signal::RiskyBetter } else { Signal::SafeBetter };
            records.push(record(action, position, 1, Some(signal)));
        }
        let log = BehaviorLog { records };
        let diff = signal_behavior_diff(&log, 1).unwrap();
        assert!(diff.abs() < 5.0, "diff {diff}pp");
    }

    #[test]
    fn delta_table_of_log_with_itself_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let labeling = RewardConfig {
            target_levels: vec![0.05],
            target_bonuses: vec![1.0],
            ..RewardConfig::default()
        };
        let mut records = Vec::new();
        for _ in 0..500 {
            let mut r = record(
                [Action::IncRisky, Action::Hold, Action::DecRisky][rng.gen_range(0..3)],
                [PositionBucket::RiskyHeavy, PositionBucket::Equal, PositionBucket::SafeHeavy][rng.gen_range(0..3)],
                rng.gen_range(0..4),
                Some(if rng.gen::<bool>() { Signal::RiskyBetter } else { Signal::SafeBetter }),
            );
            r.target_level = usize::from(rng.gen::<bool>());
            records.push(r);
        }
        let log = BehaviorLog { records };
        for cell in case_delta_table(&log, &log, &labeling) {
            if let Some(d) = cell.delta_pp {
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn histogram_point_mass_and_conservation() {
        let h = sharpe_histogram(&vec![1.5; 1000], 20).unwrap();
        assert_eq!(h.counts, vec![1000]);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples: Vec<f64> = (0..1000).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let h = sharpe_histogram(&samples, 17).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 1000);
        assert_eq!(h.counts.len(), 17);
        assert!(h.edges.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn histogram_bimodal_sample_has_two_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut samples = Vec::new();
        for _ in 0..2000 {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            samples.push(-3.0 + 0.4 * z);
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            samples.push(3.0 + 0.4 * z);
        }
        let h = sharpe_histogram(&samples, 30).unwrap();
        // local maxima in the counts
        let peaks = (1..h.counts.len() - 1)
            .filter(|&i| h.counts[i] > h.counts[i - 1] && h.counts[i] >= h.counts[i + 1])
            .filter(|&i| h.counts[i] > 50)
            .count();
        assert!(peaks >= 2, "expected a bimodal histogram, counts {:?}", h.counts);
    }

    #[test]
    fn csv_writers_shapes() {
        let mut buf = Vec::new();
        write_year_results(&mut buf, &[(2001, "base", 0.42), (2001, "random_median", 0.16)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("fy,model,sharpe\n"));
        assert!(text.contains("2001,base,0.42"));

        let mut buf = Vec::new();
        let cells = vec![DeltaCell {
            quarter: 0,
            signal: Signal::RiskyBetter,
            status: StatusCell::Otherwise,
            delta_pp: None,
            case_count: 0,
            base_count: 3,
        }];
        write_behavior_delta(&mut buf, "#002", &cells).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("#002,1,risky,otherwise,NA,0"));
    }

    #[test]
    fn box_stats_and_median() {
        let s = [3.0, 1.0, 2.0, 4.0];
        let stats = box_stats(&s).unwrap();
        assert_eq!(stats[0], ("min".into(), 1.0));
        assert_eq!(stats[4], ("max".into(), 4.0));
        assert_eq!(median(&s).unwrap(), 2.5);
        assert_eq!(median(&[5.0, 1.0, 3.0]).unwrap(), 3.0);
        assert!(median(&[]).is_none());
    }
}
