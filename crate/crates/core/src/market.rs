//! Two-asset market data.
//!
//! CSV ingestion, daily simple returns, fiscal-year (April–March)
//! partitioning, and a seeded regime-switching generator that produces
//! synthetic markets for experiments and tests.

use std::ops::Range;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dated price levels for one asset.
///
/// Invariants (enforced on construction): strictly increasing dates, all
/// prices strictly positive and finite, at least two observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} dates vs {} prices",
                dates.len(),
                prices.len()
            )));
        }
        if dates.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "need at least 2 price rows, have {}",
                dates.len()
            )));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::DateOrder(format!("{} does not follow {}", w[1], w[0])));
            }
        }
        for (d, &p) in dates.iter().zip(&prices) {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InsufficientData(format!("non-positive price {p} on {d}")));
            }
        }
        Ok(Self { dates, prices })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn price(&self, i: usize) -> f64 {
        self.prices[i]
    }
}

/// Dated simple daily returns; entry `i` is the return earned over
/// `prices[i] -> prices[i+1]` and is dated at the later day.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }
}

/// `r_t = p_t / p_{t-1} - 1` for every consecutive pair.
pub fn compute_returns(p: &PriceSeries) -> ReturnSeries {
    let returns = p
        .prices
        .windows(2)
        .map(|w| w[1] / w[0] - 1.0)
        .collect::<Vec<_>>();
    ReturnSeries {
        dates: p.dates[1..].to_vec(),
        returns,
    }
}

/// One complete April-to-March fiscal year inside a [`ReturnSeries`].
///
/// `start..end` is a half-open index range into the return series; `label`
/// is the calendar year containing the April start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiscalYearSlice {
    pub label: i32,
    pub start: usize,
    pub end: usize,
}

impl FiscalYearSlice {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Result of fiscal-year partitioning. Partial leading/trailing years are
/// excluded from `years` and only reported by their day counts.
#[derive(Debug, Clone)]
pub struct FiscalPartition {
    pub years: Vec<FiscalYearSlice>,
    pub skipped_leading: usize,
    pub skipped_trailing: usize,
}

/// Fiscal year containing `d`: April through March, labelled by the April
/// calendar year.
pub fn fiscal_year_label(d: NaiveDate) -> i32 {
    if d.month() >= 4 {
        d.year()
    } else {
        d.year() - 1
    }
}

// A leading run counts as a complete year only when it starts within the
// first week of April (covers weekend/holiday-shifted first trading days);
// a trailing run must likewise end within the last week of March.
fn starts_at_fiscal_open(d: NaiveDate, label: i32) -> bool {
    d.month() == 4 && d.year() == label && d.day() <= 7
}

fn ends_at_fiscal_close(d: NaiveDate, label: i32) -> bool {
    d.month() == 3 && d.year() == label + 1 && d.day() >= 25
}

/// Splits a return series into complete April–March fiscal years.
///
/// Every in-range date lands in exactly one slice. Partial leading and
/// trailing years are dropped (and counted); interior years are complete by
/// construction. Errors if no complete fiscal year remains.
pub fn partition_fiscal_years(r: &ReturnSeries) -> Result<FiscalPartition> {
    if r.is_empty() {
        return Err(Error::InsufficientData("empty return series".into()));
    }
    let dates = r.dates();

    // Consecutive runs of equal fiscal-year label.
    let mut runs: Vec<FiscalYearSlice> = Vec::new();
    let mut start = 0usize;
    let mut label = fiscal_year_label(dates[0]);
    for (i, &d) in dates.iter().enumerate().skip(1) {
        let l = fiscal_year_label(d);
        if l != label {
            runs.push(FiscalYearSlice { label, start, end: i });
            start = i;
            label = l;
        }
    }
    runs.push(FiscalYearSlice {
        label,
        start,
        end: dates.len(),
    });

    let n_runs = runs.len();
    let mut skipped_leading = 0;
    let mut skipped_trailing = 0;
    let mut years = Vec::with_capacity(n_runs);
    for (i, run) in runs.into_iter().enumerate() {
        let first_ok = i > 0 || starts_at_fiscal_open(dates[run.start], run.label);
        let last_ok = i + 1 < n_runs || ends_at_fiscal_close(dates[run.end - 1], run.label);
        if first_ok && last_ok {
            years.push(run);
        } else if i == 0 && !first_ok {
            skipped_leading = run.len();
        } else {
            skipped_trailing += run.len();
        }
    }

    if years.is_empty() {
        return Err(Error::InsufficientData(
            "series contains no complete April-to-March fiscal year".into(),
        ));
    }
    Ok(FiscalPartition {
        years,
        skipped_leading,
        skipped_trailing,
    })
}

/// One block of a synthetic market with locally constant dynamics.
///
/// `days` counts daily returns. Drifts are expected simple daily returns,
/// vols are daily lognormal sigmas, `correlation` couples the two assets'
/// shocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeSpec {
    pub days: usize,
    pub drift_risky: f64,
    pub vol_risky: f64,
    pub drift_safe: f64,
    pub vol_safe: f64,
    pub correlation: f64,
}

/// Configuration for the synthetic regime-switching market generator.
///
/// Generated dates are laid out so each block of `n_days_per_year` return
/// days spans exactly one April-to-March fiscal year starting at
/// `start_year`; a trailing partial year is allowed and excluded by the
/// fiscal partitioner.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticMarketConfig {
    pub n_days_per_year: usize,
    #[serde(default = "default_start_year")]
    pub start_year: i32,
    pub regimes: Vec<RegimeSpec>,
    #[serde(default)]
    pub seed: u64,
}

fn default_start_year() -> i32 {
    2000
}

impl SyntheticMarketConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=365).contains(&self.n_days_per_year) {
            return Err(Error::Config(format!(
                "n_days_per_year must be in 2..=365, got {}",
                self.n_days_per_year
            )));
        }
        if self.regimes.is_empty() {
            return Err(Error::Config("regimes must be non-empty".into()));
        }
        for (i, r) in self.regimes.iter().enumerate() {
            if r.days == 0 {
                return Err(Error::Config(format!("regimes[{i}].days must be >= 1")));
            }
            if r.vol_risky < 0.0 || r.vol_safe < 0.0 {
                return Err(Error::Config(format!("regimes[{i}] has a negative vol")));
            }
            if r.correlation.abs() > 1.0 {
                return Err(Error::Config(format!(
                    "regimes[{i}].correlation must be in [-1, 1], got {}",
                    r.correlation
                )));
            }
        }
        Ok(())
    }

    pub fn total_days(&self) -> usize {
        self.regimes.iter().map(|r| r.days).sum()
    }
}

fn fiscal_open(year: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, 4, 1).expect("april 1 exists")
}

// Return day i (0-based, global) maps into its fiscal year so that day 0
// falls on April 1 and the year's last day on the following March 31.
fn synthetic_date(cfg: &SyntheticMarketConfig, i: usize) -> NaiveDate {
    let n = cfg.n_days_per_year;
    let year = cfg.start_year + (i / n) as i32;
    let j = (i % n) as i64;
    let offset = if n == 1 { 0 } else { j * 364 / (n as i64 - 1) };
    fiscal_open(year) + Duration::days(offset)
}

/// Generates a correlated two-asset market from regime-blocked lognormal
/// daily returns. Deterministic given the config (including its seed).
///
/// Per day, gross returns are `(1 + drift) * exp(vol * z - vol^2/2)` with
/// standard-normal shocks correlated across the two assets, so the expected
/// simple return equals the configured drift exactly.
pub fn generate_synthetic_market(cfg: &SyntheticMarketConfig) -> Result<(PriceSeries, PriceSeries)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    generate_synthetic_market_with(cfg, &mut rng)
}

/// As [`generate_synthetic_market`] but drawing from a caller-owned stream
/// (ignores `cfg.seed`).
pub fn generate_synthetic_market_with(
    cfg: &SyntheticMarketConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(PriceSeries, PriceSeries)> {
    cfg.validate()?;
    let n_total = cfg.total_days();

    let mut dates = Vec::with_capacity(n_total + 1);
    // The initial price sits one day before the first fiscal year opens, so
    // each block of n_days_per_year returns fills a fiscal year exactly.
    dates.push(fiscal_open(cfg.start_year) - Duration::days(1));
    for i in 0..n_total {
        dates.push(synthetic_date(cfg, i));
    }

    let mut p_risky = Vec::with_capacity(n_total + 1);
    let mut p_safe = Vec::with_capacity(n_total + 1);
    p_risky.push(100.0);
    p_safe.push(100.0);

    for regime in &cfg.regimes {
        let rho = regime.correlation;
        let ortho = (1.0 - rho * rho).max(0.0).sqrt();
        for _ in 0..regime.days {
            let z1: f64 = rng.sample(StandardNormal);
            let z2_ind: f64 = rng.sample(StandardNormal);
            let z2 = rho * z1 + ortho * z2_ind;
            let gross_r =
                (1.0 + regime.drift_risky) * (regime.vol_risky * z1 - 0.5 * regime.vol_risky * regime.vol_risky).exp();
            let gross_s =
                (1.0 + regime.drift_safe) * (regime.vol_safe * z2 - 0.5 * regime.vol_safe * regime.vol_safe).exp();
            p_risky.push(p_risky.last().unwrap() * gross_r);
            p_safe.push(p_safe.last().unwrap() * gross_s);
        }
    }

    Ok((
        PriceSeries::new(dates.clone(), p_risky)?,
        PriceSeries::new(dates, p_safe)?,
    ))
}

use rand::SeedableRng;

/// Loaded and aligned two-asset price data plus a dropped-row count.
#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub risky: PriceSeries,
    pub safe: PriceSeries,
    pub dropped_rows: usize,
}

#[derive(Debug)]
struct ParsedRows {
    rows: Vec<(NaiveDate, Vec<f64>)>,
    dropped: usize,
}

// Rows whose price cells fail to parse (or are non-positive / non-finite)
// are dropped and counted; a malformed date or wrong arity is a hard error.
fn parse_rows(path: &Path, expected_header: &[&str]) -> Result<ParsedRows> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::InsufficientData(format!("{}: {e}", path.display())),
            _ => Error::Parse { line: 1, msg: e.to_string() },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if got != expected_header {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header {expected_header:?}, got {got:?}"),
        });
    }

    let n_prices = expected_header.len() - 1;
    let mut rows = Vec::new();
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse { line, msg: e.to_string() }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| Error::Parse { line, msg: format!("bad date {:?}: {e}", &record[0]) })?;
        let mut prices = Vec::with_capacity(n_prices);
        let mut ok = true;
        for i in 0..n_prices {
            match record[i + 1].parse::<f64>() {
                Ok(v) if v.is_finite() && v > 0.0 => prices.push(v),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            rows.push((date, prices));
        } else {
            dropped += 1;
        }
    }
    Ok(ParsedRows { rows, dropped })
}

fn check_increasing(rows: &[(NaiveDate, Vec<f64>)]) -> Result<()> {
    for w in rows.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::DateOrder(format!("{} does not follow {}", w[1].0, w[0].0)));
        }
    }
    Ok(())
}

/// Loads a combined two-asset CSV with header `date,risky,safe`.
///
/// Rows with an unparseable or non-positive price in either column are
/// dropped from both series and counted in `dropped_rows`.
pub fn load_price_csv(path: &Path) -> Result<CsvLoad> {
    let parsed = parse_rows(path, &["date", "risky", "safe"])?;
    check_increasing(&parsed.rows)?;
    if parsed.rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{}: fewer than 2 usable rows",
            path.display()
        )));
    }
    let dates: Vec<NaiveDate> = parsed.rows.iter().map(|r| r.0).collect();
    let risky: Vec<f64> = parsed.rows.iter().map(|r| r.1[0]).collect();
    let safe: Vec<f64> = parsed.rows.iter().map(|r| r.1[1]).collect();
    Ok(CsvLoad {
        risky: PriceSeries::new(dates.clone(), risky)?,
        safe: PriceSeries::new(dates, safe)?,
        dropped_rows: parsed.dropped,
    })
}

/// Loads two single-asset CSVs (header `date,price`) and aligns them on the
/// intersection of their dates. Dates present in only one file are silently
/// excluded by the intersection; unusable rows are dropped and counted.
pub fn load_price_csv_pair(risky_path: &Path, safe_path: &Path) -> Result<CsvLoad> {
    let a = parse_rows(risky_path, &["date", "price"])?;
    let b = parse_rows(safe_path, &["date", "price"])?;
    check_increasing(&a.rows)?;
    check_increasing(&b.rows)?;

    let mut dates = Vec::new();
    let mut risky = Vec::new();
    let mut safe = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.rows.len() && j < b.rows.len() {
        match a.rows[i].0.cmp(&b.rows[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dates.push(a.rows[i].0);
                risky.push(a.rows[i].1[0]);
                safe.push(b.rows[j].1[0]);
                i += 1;
                j += 1;
            }
        }
    }
    if dates.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "fewer than 2 aligned rows between {} and {}",
            risky_path.display(),
            safe_path.display()
        )));
    }
    Ok(CsvLoad {
        risky: PriceSeries::new(dates.clone(), risky)?,
        safe: PriceSeries::new(dates, safe)?,
        dropped_rows: a.dropped + b.dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    pub(crate) fn business_days(from: NaiveDate, n: usize) -> Vec<NaiveDate> {
        let mut out = Vec::with_capacity(n);
        let mut d = from;
        while out.len() < n {
            if d.weekday().number_from_monday() <= 5 {
                out.push(d);
            }
            d += Duration::days(1);
        }
        out
    }

    fn series(dates: Vec<NaiveDate>, prices: Vec<f64>) -> PriceSeries {
        PriceSeries::new(dates, prices).unwrap()
    }

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn returns_match_definition() {
        let dates = business_days(d("2000-04-03"), 3);
        let p = series(dates, vec![100.0, 110.0, 99.0]);
        let r = compute_returns(&p);
        assert!((r.returns()[0] - 0.10).abs() < 1e-15);
        assert!((r.returns()[1] - (99.0 / 110.0 - 1.0)).abs() < 1e-15);
        assert_eq!(r.dates(), &p.dates()[1..]);
    }

    #[test]
    fn returns_constant_series_are_zero() {
        let p = series(business_days(d("2000-04-03"), 3), vec![100.0, 100.0, 100.0]);
        assert_eq!(compute_returns(&p).returns(), &[0.0, 0.0]);
    }

    #[test]
    fn returns_down_then_up() {
        let p = series(business_days(d("2000-04-03"), 3), vec![100.0, 90.0, 99.0]);
        let r = compute_returns(&p);
        assert!((r.returns()[0] + 0.10).abs() < 1e-15);
        assert!((r.returns()[1] - 0.10).abs() < 1e-15);
    }

    #[test]
    fn new_rejects_unordered_dates() {
        let mut dates = business_days(d("2000-04-03"), 3);
        dates.swap(1, 2);
        let err = PriceSeries::new(dates, vec![1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::DateOrder(_)));
    }

    #[test]
    fn partition_single_full_year() {
        // 2000-04-03 (first business day of FY2000) through 2001-03-30.
        let mut dates = Vec::new();
        let mut day = d("2000-04-03");
        while day <= d("2001-03-30") {
            if day.weekday().number_from_monday() <= 5 {
                dates.push(day);
            }
            day += Duration::days(1);
        }
        let n = dates.len();
        let prices = vec![100.0; n + 1];
        let mut full_dates = vec![d("2000-03-31")];
        full_dates.extend(dates);
        let p = series(full_dates, prices);
        let r = compute_returns(&p);
        let part = partition_fiscal_years(&r).unwrap();
        assert_eq!(part.years.len(), 1);
        assert_eq!(part.years[0].label, 2000);
        assert_eq!(part.years[0].len(), n);
    }

    #[test]
    fn partition_two_years_and_completeness() {
        let mut dates = vec![d("2000-03-31")];
        let mut day = d("2000-04-03");
        while day <= d("2002-03-29") {
            if day.weekday().number_from_monday() <= 5 {
                dates.push(day);
            }
            day += Duration::days(1);
        }
        let n = dates.len();
        let p = series(dates, vec![100.0; n]);
        let r = compute_returns(&p);
        let part = partition_fiscal_years(&r).unwrap();
        assert_eq!(part.years.iter().map(|y| y.label).collect::<Vec<_>>(), vec![2000, 2001]);
        // union of slices covers every in-range index exactly once
        let mut covered = vec![0u8; r.len()];
        for y in &part.years {
            for i in y.range() {
                covered[i] += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
        assert_eq!(part.skipped_leading + part.skipped_trailing, 0);
    }

    #[test]
    fn partition_partial_year_is_an_error() {
        let mut dates = Vec::new();
        let mut day = d("2000-06-01");
        while day <= d("2001-03-30") {
            if day.weekday().number_from_monday() <= 5 {
                dates.push(day);
            }
            day += Duration::days(1);
        }
        let n = dates.len();
        let p = series(dates, vec![100.0; n]);
        let r = compute_returns(&p);
        let err = partition_fiscal_years(&r).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn partition_trailing_partial_excluded() {
        let mut dates = vec![d("2000-03-31")];
        let mut day = d("2000-04-03");
        while day <= d("2001-07-14") {
            if day.weekday().number_from_monday() <= 5 {
                dates.push(day);
            }
            day += Duration::days(1);
        }
        let n = dates.len();
        let p = series(dates, vec![100.0; n]);
        let r = compute_returns(&p);
        let part = partition_fiscal_years(&r).unwrap();
        assert_eq!(part.years.len(), 1);
        assert!(part.skipped_trailing > 0);
    }

    fn one_regime(days: usize, seed: u64) -> SyntheticMarketConfig {
        SyntheticMarketConfig {
            n_days_per_year: 250,
            start_year: 2000,
            regimes: vec![RegimeSpec {
                days,
                drift_risky: 0.0005,
                vol_risky: 0.01,
                drift_safe: 0.0001,
                vol_safe: 0.003,
                correlation: 0.3,
            }],
            seed,
        }
    }

    #[test]
    fn synthetic_zero_noise_returns_equal_drift() {
        let cfg = SyntheticMarketConfig {
            n_days_per_year: 250,
            start_year: 2000,
            regimes: vec![RegimeSpec {
                days: 10,
                drift_risky: 0.001,
                vol_risky: 0.0,
                drift_safe: 0.0005,
                vol_safe: 0.0,
                correlation: 0.0,
            }],
            seed: 1,
        };
        let (pr, ps) = generate_synthetic_market(&cfg).unwrap();
        for r in compute_returns(&pr).returns() {
            assert!((r - 0.001).abs() < 1e-12);
        }
        for r in compute_returns(&ps).returns() {
            assert!((r - 0.0005).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let cfg = one_regime(300, 42);
        let a = generate_synthetic_market(&cfg).unwrap();
        let b = generate_synthetic_market(&cfg).unwrap();
        assert_eq!(a.0.prices(), b.0.prices());
        assert_eq!(a.1.prices(), b.1.prices());
        assert_eq!(a.0.dates(), b.0.dates());
    }

    #[test]
    fn synthetic_sample_correlation_tracks_config() {
        let mut cfg = one_regime(10_000, 7);
        cfg.regimes[0].correlation = 0.9;
        let (pr, ps) = generate_synthetic_market(&cfg).unwrap();
        let ra = compute_returns(&pr);
        let rb = compute_returns(&ps);
        let corr = sample_corr(ra.returns(), rb.returns());
        assert!((corr - 0.9).abs() < 0.03, "sample corr {corr}");
    }

    #[test]
    fn synthetic_moments_within_five_standard_errors() {
        let cfg = one_regime(12_000, 11);
        let (pr, _) = generate_synthetic_market(&cfg).unwrap();
        let r = compute_returns(&pr);
        let n = r.len() as f64;
        let mean = r.returns().iter().sum::<f64>() / n;
        let var = r.returns().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        let se_mean = 0.01 / n.sqrt();
        let se_sd = 0.01 / (2.0 * n).sqrt();
        assert!((mean - 0.0005).abs() < 5.0 * se_mean, "mean {mean}");
        assert!((sd - 0.01).abs() < 5.0 * se_sd, "sd {sd}");
    }

    #[test]
    fn synthetic_years_partition_exactly() {
        let mut cfg = one_regime(250 * 3 + 17, 3);
        cfg.n_days_per_year = 250;
        let (pr, _) = generate_synthetic_market(&cfg).unwrap();
        let r = compute_returns(&pr);
        let part = partition_fiscal_years(&r).unwrap();
        assert_eq!(part.years.len(), 3);
        for (i, y) in part.years.iter().enumerate() {
            assert_eq!(y.label, 2000 + i as i32);
            assert_eq!(y.len(), 250);
        }
        assert_eq!(part.skipped_trailing, 17);
        assert_eq!(part.skipped_leading, 0);
    }

    fn sample_corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>();
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>();
        let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>();
        cov / (va.sqrt() * vb.sqrt())
    }

    #[test]
    fn csv_wellformed_three_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,risky,safe").unwrap();
        writeln!(f, "2020-04-01,100.0,50.0").unwrap();
        writeln!(f, "2020-04-02,101.0,50.1").unwrap();
        writeln!(f, "2020-04-03,102.0,50.2").unwrap();
        let load = load_price_csv(f.path()).unwrap();
        assert_eq!(load.risky.len(), 3);
        assert_eq!(load.safe.len(), 3);
        assert_eq!(load.dropped_rows, 0);
        assert_eq!(load.safe.prices(), &[50.0, 50.1, 50.2]);
    }

    #[test]
    fn csv_unparseable_cell_drops_row_from_both() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,risky,safe").unwrap();
        writeln!(f, "2020-04-01,100.0,50.0").unwrap();
        writeln!(f, "2020-04-02,oops,50.1").unwrap();
        writeln!(f, "2020-04-03,102.0,50.2").unwrap();
        let load = load_price_csv(f.path()).unwrap();
        assert_eq!(load.dropped_rows, 1);
        assert_eq!(load.risky.len(), 2);
        assert_eq!(load.safe.len(), 2);
    }

    #[test]
    fn csv_out_of_order_dates_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,risky,safe").unwrap();
        writeln!(f, "2020-04-02,100.0,50.0").unwrap();
        writeln!(f, "2020-04-01,101.0,50.1").unwrap();
        writeln!(f, "2020-04-03,102.0,50.2").unwrap();
        let err = load_price_csv(f.path()).unwrap_err();
        assert!(matches!(err, Error::DateOrder(_)));
    }

    #[test]
    fn csv_bad_date_reports_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "date,risky,safe").unwrap();
        writeln!(f, "2020-04-01,100.0,50.0").unwrap();
        writeln!(f, "not-a-date,101.0,50.1").unwrap();
        let err = load_price_csv(f.path()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_pair_aligns_on_intersection() {
        let mut fa = tempfile::NamedTempFile::new().unwrap();
        writeln!(fa, "date,price").unwrap();
        writeln!(fa, "2020-04-01,100.0").unwrap();
        writeln!(fa, "2020-04-02,101.0").unwrap();
        writeln!(fa, "2020-04-06,103.0").unwrap();
        let mut fb = tempfile::NamedTempFile::new().unwrap();
        writeln!(fb, "date,price").unwrap();
        writeln!(fb, "2020-04-01,50.0").unwrap();
        writeln!(fb, "2020-04-03,50.5").unwrap();
        writeln!(fb, "2020-04-06,51.0").unwrap();
        let load = load_price_csv_pair(fa.path(), fb.path()).unwrap();
        assert_eq!(load.risky.len(), 2);
        assert_eq!(load.risky.prices(), &[100.0, 103.0]);
        assert_eq!(load.safe.prices(), &[50.0, 51.0]);
    }

    proptest! {
        // reconstructing prices from p0 and the returns reproduces the series
        #[test]
        fn prices_roundtrip_through_returns(prices in proptest::collection::vec(1.0f64..1000.0, 2..60)) {
            let dates = business_days(d("2010-04-01"), prices.len());
            let p = series(dates, prices.clone());
            let r = compute_returns(&p);
            let mut level = prices[0];
            for (i, ret) in r.returns().iter().enumerate() {
                level *= 1.0 + ret;
                prop_assert!((level - prices[i + 1]).abs() <= 1e-12 * prices[i + 1].abs());
            }
        }
    }
}
