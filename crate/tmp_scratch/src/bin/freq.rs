use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{RebalanceFreq, StateSpaceConfig};
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::reward::RewardConfig;
use std::time::Instant;

fn block_market(seed: u64, total_days: usize, block: usize, gap: f64, vol: f64) -> Vec<YearContext> {
    let mut regimes = Vec::new();
    let mut remaining = total_days;
    let mut up = true;
    while remaining > 0 {
        let days = block.min(remaining);
        let (dr, ds) = if up { (gap / 2.0, -gap / 2.0) } else { (-gap / 2.0, gap / 2.0) };
        regimes.push(RegimeSpec { days, drift_risky: dr, vol_risky: vol, drift_safe: ds, vol_safe: vol, correlation: 0.0 });
        up = !up;
        remaining -= days;
    }
    let cfg = SyntheticMarketConfig { n_days_per_year: 120, start_year: 2000, regimes, seed };
    prepare_years(&PreparedMarket::from_synthetic(&cfg).unwrap(), &FeatureParams::default()).unwrap()
}

// paired t statistic
fn paired_t(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = d.iter().sum::<f64>() / n;
    let v = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    m / (v / n).sqrt()
}

fn main() {
    let freqs = [RebalanceFreq::Daily, RebalanceFreq::Weekly, RebalanceFreq::Biweekly, RebalanceFreq::Monthly];
    for off in [1000u64, 5000, 42] {
        let t0 = Instant::now();
        let n_seeds = 32u64;
        let mut per_freq: Vec<Vec<f64>> = vec![Vec::new(); 4];
        for s_i in 0..n_seeds {
            let seed = off + s_i;
            let ctxs = block_market(seed, 360, 60, 0.004, 0.004);
            let cfg = ExperimentConfig {
                id: "freq".into(), algo: Algo::QLearning, mode: Mode::InSample,
                state_space: StateSpaceConfig { use_signal: true, ..StateSpaceConfig::empty() },
                reward: RewardConfig::default(),
                signal_accuracy: Some(SignalAccuracy::Uniform(0.9)),
                signal_corruption: CorruptionMode::PerYear,
                rebalance_freq: RebalanceFreq::Daily,
                agent: AgentParams { episodes: 800, alpha: 0.03, gamma: 0.2, epsilon: 0.2, ..AgentParams::default() },
                seed,
            };
            let res = run_rebalance_sweep(&ctxs, &freqs, &cfg).unwrap();
            for (i, f) in res.iter().enumerate() {
                // mean over years per seed so pairs are seed-level
                let m = f.sharpes.iter().map(|(_, s)| s).sum::<f64>() / f.sharpes.len() as f64;
                per_freq[i].push(m);
            }
        }
        let means: Vec<f64> = per_freq.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
        let t = paired_t(&per_freq[0], &per_freq[3]);
        println!("off{off}: means {:?} t(daily-monthly) {t:.2} ({:.0}s)",
            means.iter().map(|m| (m * 100.0).round() / 100.0).collect::<Vec<_>>(),
            t0.elapsed().as_secs_f64());
    }
}
