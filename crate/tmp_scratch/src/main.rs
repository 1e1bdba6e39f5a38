use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{RebalanceFreq, StateSpaceConfig};
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::report::median;
use rebal_core::reward::RewardConfig;
use std::time::Instant;

fn block_market(seed: u64, total_days: usize, block: usize, drift_gap: f64, vol: f64) -> Vec<YearContext> {
    let mut regimes = Vec::new();
    let mut remaining = total_days;
    let mut risky_up = true;
    while remaining > 0 {
        let days = block.min(remaining);
        let (dr, ds) = if risky_up { (drift_gap / 2.0, -drift_gap / 2.0) } else { (-drift_gap / 2.0, drift_gap / 2.0) };
        regimes.push(RegimeSpec {
            days,
            drift_risky: dr,
            vol_risky: vol,
            drift_safe: ds,
            vol_safe: vol,
            correlation: 0.0,
        });
        risky_up = !risky_up;
        remaining -= days;
    }
    let cfg = SyntheticMarketConfig { n_days_per_year: 120, start_year: 2000, regimes, seed };
    let m = PreparedMarket::from_synthetic(&cfg).unwrap();
    prepare_years(&m, &FeatureParams::default()).unwrap()
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() { r[i] = pos as f64; }
        r
    };
    let rx = rank(xs); let ry = rank(ys);
    let n = xs.len() as f64;
    let m = rx.iter().sum::<f64>() / n;
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) { cov += (a-m)*(b-m); vx += (a-m)*(a-m); vy += (b-m)*(b-m); }
    cov / (vx.sqrt() * vy.sqrt())
}

fn main() {
    let levels = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    for (label, block, gap, vol, episodes, n_seeds) in [
        ("U sigonly blk40 gap.004 vol.004 g.2 ep800 s40", 40usize, 0.004, 0.004, 800usize, 40u64),
    ] {
        for off in [1000u64, 5000, 9000, 42] {
            let t0 = Instant::now();
            let mut per_level: Vec<Vec<f64>> = vec![Vec::new(); levels.len()];
            for s_i in 0..n_seeds {
                let seed = off + s_i;
                let ctxs = block_market(seed, 3 * 120, block, gap, vol);
                let c = ExperimentConfig {
                    id: "acc".into(),
                    algo: Algo::QLearning,
                    mode: Mode::InSample,
                    state_space: StateSpaceConfig { use_signal: true, ..StateSpaceConfig::empty() },
                    reward: RewardConfig::default(),
                    signal_accuracy: Some(SignalAccuracy::Uniform(0.6)),
                    signal_corruption: CorruptionMode::PerYear,
                    rebalance_freq: RebalanceFreq::Daily,
                    agent: AgentParams { episodes, alpha: 0.03, gamma: 0.2, epsilon: 0.2, ..AgentParams::default() },
                    seed,
                };
                let res = run_accuracy_sweep(&ctxs, &levels, &c).unwrap();
                for (i, level) in res.iter().enumerate() {
                    for (_, s) in &level.sharpes { per_level[i].push(*s); }
                }
            }
            let medians: Vec<f64> = per_level.iter().map(|v| median(v).unwrap()).collect();
            let rho = spearman(&levels.to_vec(), &medians);
            println!("{label} off{off}: medians {:?} spearman {rho:.3} ({:.0}s)",
                medians.iter().map(|m| (m * 100.0).round() / 100.0).collect::<Vec<_>>(),
                t0.elapsed().as_secs_f64());
        }
    }
}
