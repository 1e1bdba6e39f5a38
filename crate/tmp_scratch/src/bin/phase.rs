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
    let acc_b_levels = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    for off in [1000u64, 5000, 42] {
        let t0 = Instant::now();
        let n_seeds = 32u64;
        let mut diffs = vec![Vec::new(); acc_b_levels.len()];
        for s_i in 0..n_seeds {
            let seed = off + s_i;
            let ctxs = block_market(seed, 360, 40, 0.004, 0.004);
            let cfg = ExperimentConfig {
                id: "phase".into(), algo: Algo::QLearning, mode: Mode::InSample,
                state_space: StateSpaceConfig { use_signal: true, use_phase: true, ..StateSpaceConfig::empty() },
                reward: RewardConfig::default(),
                signal_accuracy: Some(SignalAccuracy::PerPhase { phase_a: 0.6, phase_b: 0.6 }),
                signal_corruption: CorruptionMode::PerYear,
                rebalance_freq: RebalanceFreq::Daily,
                agent: AgentParams { episodes: 800, alpha: 0.03, gamma: 0.2, epsilon: 0.2, ..AgentParams::default() },
                seed,
            };
            let points = run_phase_accuracy(&ctxs, 0.6, &acc_b_levels, &cfg).unwrap();
            for (i, p) in points.iter().enumerate() {
                diffs[i].push(p.diff_pp);
            }
        }
        let means: Vec<f64> = diffs.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
        let rho = spearman(&acc_b_levels.to_vec(), &means);
        println!("off{off}: mean diff_pp {:?} spearman {rho:.3} ({:.0}s)",
            means.iter().map(|m| m.round()).collect::<Vec<_>>(), t0.elapsed().as_secs_f64());
    }
}
