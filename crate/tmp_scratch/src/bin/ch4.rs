use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{RebalanceFreq, StateSpaceConfig};
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::reward::RewardConfig;
use std::time::Instant;

// years alternate between a high-correlation regime (risky is the
// high-vol asset) and a negative-correlation regime (safe is), with equal
// drifts so momentum carries no allocation information
fn corr_regime_market(seed: u64, years: usize, n: usize, null: bool) -> Vec<YearContext> {
    let mut regimes = Vec::new();
    for y in 0..years {
        if null {
            regimes.push(RegimeSpec { days: n, drift_risky: 0.0, vol_risky: 0.012, drift_safe: 0.0, vol_safe: 0.012, correlation: 0.3 });
        } else if y % 2 == 0 {
            regimes.push(RegimeSpec { days: n, drift_risky: 0.0007, vol_risky: 0.012, drift_safe: -0.0007, vol_safe: 0.012, correlation: 0.9 });
        } else {
            regimes.push(RegimeSpec { days: n, drift_risky: -0.0007, vol_risky: 0.012, drift_safe: 0.0007, vol_safe: 0.012, correlation: -0.9 });
        }
    }
    let cfg = SyntheticMarketConfig { n_days_per_year: n, start_year: 2000, regimes, seed };
    prepare_years(&PreparedMarket::from_synthetic(&cfg).unwrap(), &FeatureParams::default()).unwrap()
}

fn paired_t(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = d.iter().sum::<f64>() / n;
    let v = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    m / (v / n).sqrt()
}

fn mean_oos(ctxs: &[YearContext], cfg: &ExperimentConfig) -> f64 {
    let tables: Vec<_> = ctxs.iter().map(|c| train_in_sample(c, cfg).unwrap().q).collect();
    let mut sharpes = Vec::new();
    for i in 1..ctxs.len() {
        let r = backtest_out_of_sample(&ctxs[i], &tables[..i], cfg).unwrap();
        sharpes.push(r.sharpe_annual);
    }
    sharpes.iter().sum::<f64>() / sharpes.len() as f64
}

const GAMMA: f64 = 0.4;
fn main() {
    for null in [false, true] {
        for off in [1000u64, 42] {
            let t0 = Instant::now();
            let n_seeds = 32u64;
            let mut base_means = Vec::new();
            let mut regime_means = Vec::new();
            for s_i in 0..n_seeds {
                let seed = off + s_i;
                let ctxs = corr_regime_market(seed, 4, 200, null);
                let mk = |id: &str, space: StateSpaceConfig| ExperimentConfig {
                    id: id.into(), algo: Algo::Sarsa, mode: Mode::OutOfSample,
                    state_space: space, reward: RewardConfig::default(),
                    signal_accuracy: None, signal_corruption: CorruptionMode::PerYear,
                    rebalance_freq: RebalanceFreq::Daily,
                    agent: AgentParams { episodes: 1200, alpha: 0.025, gamma: GAMMA, epsilon: 0.25, ..AgentParams::default() },
                    seed,
                };
                base_means.push(mean_oos(&ctxs, &mk("base", StateSpaceConfig::momentum_pair())));
                regime_means.push(mean_oos(&ctxs, &mk("regime", StateSpaceConfig::regime_aware())));
            }
            let mb = base_means.iter().sum::<f64>() / base_means.len() as f64;
            let mr = regime_means.iter().sum::<f64>() / regime_means.len() as f64;
            let t = paired_t(&regime_means, &base_means);
            println!("null={null} off{off}: base {mb:.3} regime {mr:.3} t {t:.2} ({:.0}s)", t0.elapsed().as_secs_f64());
        }
    }
}
