//! Discrete observation variables: momentum sign, correlation bin,
//! look-ahead signal with optional corruption, quarter index, and phase id.

use rand::Rng;

use crate::error::{Error, Result};
use crate::market::{FiscalYearSlice, PriceSeries, ReturnSeries};
use crate::reward::sharpe;

pub const DEFAULT_MOMENTUM_LOOKBACK: usize = 60;
pub const DEFAULT_CORR_WINDOW: usize = 60;
pub const DEFAULT_CORR_THRESHOLD: f64 = 0.2;
pub const DEFAULT_SIGNAL_HORIZON: usize = 5;

/// Sign of the price change over the momentum lookback. An exact zero
/// difference counts as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentumSign {
    Positive,
    Negative,
}

impl MomentumSign {
    pub fn index(self) -> usize {
        match self {
            MomentumSign::Positive => 0,
            MomentumSign::Negative => 1,
        }
    }
}

/// Trailing-correlation bucket with a symmetric threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrBin {
    Positive,
    None,
    Negative,
}

impl CorrBin {
    pub fn index(self) -> usize {
        match self {
            CorrBin::Positive => 0,
            CorrBin::None => 1,
            CorrBin::Negative => 2,
        }
    }
}

/// Which asset the (possibly corrupted) look-ahead signal favors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    RiskyBetter,
    SafeBetter,
}

impl Signal {
    pub fn opposite(self) -> Signal {
        match self {
            Signal::RiskyBetter => Signal::SafeBetter,
            Signal::SafeBetter => Signal::RiskyBetter,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Signal::RiskyBetter => 0,
            Signal::SafeBetter => 1,
        }
    }
}

/// Position within the fiscal year, split into four near-equal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuarterIdx(u8);

impl QuarterIdx {
    pub fn new(q: usize) -> Result<Self> {
        if q < 4 {
            Ok(QuarterIdx(q as u8))
        } else {
            Err(Error::OutOfRange(format!("quarter {q} not in 0..4")))
        }
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

/// Binary regime label derived from the non-risky asset's momentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseId {
    PhaseA,
    PhaseB,
}

impl PhaseId {
    pub fn index(self) -> usize {
        match self {
            PhaseId::PhaseA => 0,
            PhaseId::PhaseB => 1,
        }
    }
}

/// Momentum sign at price index `t`: positive iff `p[t] - p[t-lookback] >= 0`.
pub fn momentum_sign(p: &PriceSeries, t: usize, lookback: usize) -> Result<MomentumSign> {
    if t >= p.len() {
        return Err(Error::OutOfRange(format!("price index {t} beyond series of {}", p.len())));
    }
    if t < lookback {
        return Err(Error::InsufficientHistory { needed: lookback, have: t });
    }
    if p.price(t) - p.price(t - lookback) >= 0.0 {
        Ok(MomentumSign::Positive)
    } else {
        Ok(MomentumSign::Negative)
    }
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let ma = a.iter().sum::<f64>() / nf;
    let mb = b.iter().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        None
    } else {
        Some(cov / (va.sqrt() * vb.sqrt()))
    }
}

/// Correlation bin of the trailing `window` returns ending just before
/// index `t` (indices `t-window..t`). A zero-variance window bins to
/// `CorrBin::None`.
pub fn correlation_bin(
    ra: &ReturnSeries,
    rb: &ReturnSeries,
    t: usize,
    window: usize,
    threshold: f64,
) -> Result<CorrBin> {
    if ra.len() != rb.len() {
        return Err(Error::ShapeMismatch(format!(
            "return series lengths differ: {} vs {}",
            ra.len(),
            rb.len()
        )));
    }
    if t > ra.len() {
        return Err(Error::OutOfRange(format!("index {t} beyond series of {}", ra.len())));
    }
    if t < window {
        return Err(Error::InsufficientHistory { needed: window, have: t });
    }
    let a = &ra.returns()[t - window..t];
    let b = &rb.returns()[t - window..t];
    Ok(match pearson(a, b) {
        Some(rho) if rho > threshold => CorrBin::Positive,
        Some(rho) if rho < -threshold => CorrBin::Negative,
        _ => CorrBin::None,
    })
}

/// Look-ahead oracle at return index `t`: compares the Sharpe ratios of the
/// next `horizon` daily returns (indices `t..t+horizon`) of the two assets.
/// Ties favor the non-risky asset.
pub fn oracle_signal(ra: &ReturnSeries, rb: &ReturnSeries, t: usize, horizon: usize) -> Result<Signal> {
    if ra.len() != rb.len() {
        return Err(Error::ShapeMismatch(format!(
            "return series lengths differ: {} vs {}",
            ra.len(),
            rb.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::Config("signal horizon must be >= 1".into()));
    }
    if t + horizon > ra.len() {
        return Err(Error::InsufficientHistory {
            needed: t + horizon,
            have: ra.len(),
        });
    }
    let sr_a = sharpe(&ra.returns()[t..t + horizon])?;
    let sr_b = sharpe(&rb.returns()[t..t + horizon])?;
    if sr_a > sr_b {
        Ok(Signal::RiskyBetter)
    } else {
        Ok(Signal::SafeBetter)
    }
}

/// Flips the signal with probability `flip_rate`, consuming exactly one
/// uniform draw from the caller's stream per call.
pub fn corrupt_signal<R: Rng>(s: Signal, flip_rate: f64, rng: &mut R) -> Signal {
    let u: f64 = rng.gen();
    if u < flip_rate {
        s.opposite()
    } else {
        s
    }
}

/// Quarter of global return index `t` within a fiscal year. The year's days
/// are split into four contiguous blocks of near-equal length, remainder
/// days going to the earlier blocks.
pub fn quarter_index(t: usize, fy: &FiscalYearSlice) -> Result<QuarterIdx> {
    if t < fy.start || t >= fy.end {
        return Err(Error::OutOfRange(format!(
            "index {t} outside fiscal year {} ({}..{})",
            fy.label, fy.start, fy.end
        )));
    }
    let local = t - fy.start;
    let n = fy.len();
    let base = n / 4;
    let rem = n % 4;
    let mut boundary = 0usize;
    for q in 0..4 {
        boundary += base + usize::from(q < rem);
        if local < boundary {
            return QuarterIdx::new(q);
        }
    }
    QuarterIdx::new(3)
}

/// Phase label at price index `t`: `PhaseA` iff the non-risky asset's
/// momentum is positive.
pub fn phase_id(p_safe: &PriceSeries, t: usize, lookback: usize) -> Result<PhaseId> {
    Ok(match momentum_sign(p_safe, t, lookback)? {
        MomentumSign::Positive => PhaseId::PhaseA,
        MomentumSign::Negative => PhaseId::PhaseB,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dates(n: usize) -> Vec<NaiveDate> {
        let start = NaiveDate::from_ymd_opt(2015, 4, 1).unwrap();
        (0..n).map(|i| start + chrono::Duration::days(i as i64)).collect()
    }

    fn prices(levels: Vec<f64>) -> PriceSeries {
        PriceSeries::new(dates(levels.len()), levels).unwrap()
    }

    fn rets(values: Vec<f64>) -> ReturnSeries {
        // synthesize a price path realizing the given returns
        let mut levels = vec![100.0];
        for r in &values {
            levels.push(levels.last().unwrap() * (1.0 + r));
        }
        crate::market::compute_returns(&prices(levels))
    }

    #[test]
    fn momentum_sign_basic_and_tie() {
        let mut levels = vec![100.0; 61];
        levels[60] = 110.0;
        assert_eq!(momentum_sign(&prices(levels.clone()), 60, 60).unwrap(), MomentumSign::Positive);
        levels[60] = 95.0;
        assert_eq!(momentum_sign(&prices(levels.clone()), 60, 60).unwrap(), MomentumSign::Negative);
        levels[60] = 100.0;
        assert_eq!(momentum_sign(&prices(levels), 60, 60).unwrap(), MomentumSign::Positive);
    }

    #[test]
    fn momentum_sign_needs_history() {
        let p = prices(vec![100.0; 30]);
        assert!(matches!(
            momentum_sign(&p, 10, 60),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    // two small-scale patterns with sample correlation exactly `rho`
    // (zero-mean orthogonal bases; n must be a multiple of 4)
    fn correlated_windows(rho: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        assert!(n >= 4 && n % 4 == 0);
        let u: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let v: Vec<f64> = (0..n).map(|i| if (i / 2) % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let b: Vec<f64> = u
            .iter()
            .zip(&v)
            .map(|(x, y)| rho * x + (1.0 - rho * rho).sqrt() * y)
            .collect();
        (u, b)
    }

    #[test]
    fn correlation_bin_thresholds() {
        let (a, b) = correlated_windows(0.25, 60);
        assert_eq!(correlation_bin(&rets(a), &rets(b), 60, 60, 0.2).unwrap(), CorrBin::Positive);

        let (a, b) = correlated_windows(0.0, 60);
        assert_eq!(correlation_bin(&rets(a), &rets(b), 60, 60, 0.2).unwrap(), CorrBin::None);

        let (a, b) = correlated_windows(-0.5, 60);
        assert_eq!(correlation_bin(&rets(a), &rets(b), 60, 60, 0.2).unwrap(), CorrBin::Negative);

        // inside the dead zone on the positive side
        let (a, b) = correlated_windows(0.19, 60);
        assert_eq!(correlation_bin(&rets(a), &rets(b), 60, 60, 0.2).unwrap(), CorrBin::None);
    }

    #[test]
    fn correlation_bin_self_is_positive() {
        let (a, _) = correlated_windows(0.0, 60);
        let ra = rets(a);
        assert_eq!(correlation_bin(&ra, &ra, 60, 60, 0.2).unwrap(), CorrBin::Positive);
    }

    #[test]
    fn correlation_bin_degenerate_window_is_none() {
        let flat = rets(vec![0.0; 60]);
        let (a, _) = correlated_windows(0.0, 60);
        assert_eq!(correlation_bin(&flat, &rets(a), 60, 60, 0.2).unwrap(), CorrBin::None);
    }

    #[test]
    fn oracle_signal_dominance_and_tie() {
        let risky_up = rets([vec![0.0; 10], vec![0.01; 5]].concat());
        let risky_down = rets([vec![0.0; 10], vec![-0.01; 5]].concat());
        let flat = rets(vec![0.0; 15]);
        assert_eq!(oracle_signal(&risky_up, &flat, 10, 5).unwrap(), Signal::RiskyBetter);
        assert_eq!(oracle_signal(&risky_down, &flat, 10, 5).unwrap(), Signal::SafeBetter);
        // identical over the horizon: tie goes to the non-risky asset
        assert_eq!(oracle_signal(&risky_up, &risky_up, 10, 5).unwrap(), Signal::SafeBetter);
    }

    #[test]
    fn oracle_signal_exhausted_lookahead_errors() {
        let flat = rets(vec![0.0; 15]);
        assert!(matches!(
            oracle_signal(&flat, &flat, 12, 5),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn corrupt_signal_identity_and_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in [Signal::RiskyBetter, Signal::SafeBetter] {
            for _ in 0..50 {
                assert_eq!(corrupt_signal(s, 0.0, &mut rng), s);
                assert_eq!(corrupt_signal(s, 1.0, &mut rng), s.opposite());
            }
        }
    }

    #[test]
    fn corrupt_signal_half_rate_concentration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 10_000;
        let flips = (0..n)
            .filter(|_| corrupt_signal(Signal::RiskyBetter, 0.5, &mut rng) == Signal::SafeBetter)
            .count();
        let frac = flips as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "flip fraction {frac}");
    }

    fn fy(start: usize, len: usize) -> FiscalYearSlice {
        FiscalYearSlice { label: 2000, start, end: start + len }
    }

    #[test]
    fn quarter_index_endpoints_and_remainder() {
        let y = fy(0, 252);
        assert_eq!(quarter_index(0, &y).unwrap().index(), 0);
        assert_eq!(quarter_index(251, &y).unwrap().index(), 3);
        assert_eq!(quarter_index(126, &y).unwrap().index(), 2);

        // 250 days -> blocks 63,63,62,62; day 63 opens the second quarter
        let y250 = fy(0, 250);
        assert_eq!(quarter_index(62, &y250).unwrap().index(), 0);
        assert_eq!(quarter_index(63, &y250).unwrap().index(), 1);
    }

    #[test]
    fn quarter_index_out_of_range() {
        let y = fy(10, 100);
        assert!(quarter_index(5, &y).is_err());
        assert!(quarter_index(110, &y).is_err());
    }

    #[test]
    fn quarter_index_monotone_and_onto() {
        for n in [8usize, 100, 251, 252, 253] {
            let y = fy(0, n);
            let mut seen = [false; 4];
            let mut prev = 0usize;
            for t in 0..n {
                let q = quarter_index(t, &y).unwrap().index();
                assert!(q >= prev);
                seen[q] = true;
                prev = q;
            }
            assert!(seen.iter().all(|&s| s), "n={n}");
        }
    }

    #[test]
    fn phase_follows_safe_momentum() {
        let mut rising = vec![100.0; 61];
        for (i, p) in rising.iter_mut().enumerate() {
            *p += i as f64;
        }
        assert_eq!(phase_id(&prices(rising), 60, 60).unwrap(), PhaseId::PhaseA);

        let falling: Vec<f64> = (0..61).map(|i| 200.0 - i as f64).collect();
        assert_eq!(phase_id(&prices(falling), 60, 60).unwrap(), PhaseId::PhaseB);

        let flat = vec![100.0; 61];
        assert_eq!(phase_id(&prices(flat), 60, 60).unwrap(), PhaseId::PhaseA);
    }

    proptest! {
        // flip_rate 0 is the identity, 1 is the involution, for any state
        #[test]
        fn corruption_edge_rates(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for s in [Signal::RiskyBetter, Signal::SafeBetter] {
                prop_assert_eq!(corrupt_signal(s, 0.0, &mut rng), s);
                prop_assert_eq!(corrupt_signal(s, 1.0, &mut rng), s.opposite());
            }
        }

        // correlation binning is symmetric in its two arguments
        #[test]
        fn correlation_is_symmetric(
            a in proptest::collection::vec(-0.02f64..0.02, 30),
            b in proptest::collection::vec(-0.02f64..0.02, 30),
        ) {
            let ra = rets(a);
            let rb = rets(b);
            let x = correlation_bin(&ra, &rb, 30, 30, 0.2).unwrap();
            let y = correlation_bin(&rb, &ra, 30, 30, 0.2).unwrap();
            prop_assert_eq!(x, y);
        }

        // momentum is invariant under positive scaling of the price series
        #[test]
        fn momentum_scale_invariant(
            levels in proptest::collection::vec(50.0f64..150.0, 20),
            scale in 0.1f64..10.0,
        ) {
            let p1 = prices(levels.clone());
            let p2 = prices(levels.iter().map(|x| x * scale).collect());
            let m1 = momentum_sign(&p1, 19, 19).unwrap();
            let m2 = momentum_sign(&p2, 19, 19).unwrap();
            prop_assert_eq!(m1, m2);
        }
    }
}
