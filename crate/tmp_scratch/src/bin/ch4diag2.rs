use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{RebalanceFreq, StateKey, StateSpaceConfig};
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::reward::RewardConfig;

fn corr_regime_market(seed: u64, years: usize, n: usize) -> Vec<YearContext> {
    let mut regimes = Vec::new();
    for y in 0..years {
        let (dr, ds, rho) = if y % 2 == 0 { (0.0007, -0.0007, 0.9) } else { (-0.0007, 0.0007, -0.9) };
        regimes.push(RegimeSpec { days: n, drift_risky: dr, vol_risky: 0.012, drift_safe: ds, vol_safe: 0.012, correlation: rho });
    }
    let cfg = SyntheticMarketConfig { n_days_per_year: n, start_year: 2000, regimes, seed };
    prepare_years(&PreparedMarket::from_synthetic(&cfg).unwrap(), &FeatureParams::default()).unwrap()
}

fn main() {
    let space = StateSpaceConfig::regime_aware();
    let mut right = 0usize;
    let mut wrong = 0usize;
    let mut hold = 0usize;
    for seed in 1000..1012u64 {
        let ctxs = corr_regime_market(seed, 4, 200);
        let cfg = ExperimentConfig {
            id: "regime".into(), algo: Algo::Sarsa, mode: Mode::OutOfSample,
            state_space: space.clone(), reward: RewardConfig::default(),
            signal_accuracy: None, signal_corruption: CorruptionMode::PerYear,
            rebalance_freq: RebalanceFreq::Daily,
            agent: AgentParams { episodes: 1200, alpha: 0.025, gamma: 0.4, epsilon: 0.25, ..AgentParams::default() },
            seed,
        };
        for (yi, ctx) in ctxs.iter().enumerate() {
            let q = train_in_sample(ctx, &cfg).unwrap().q;
            // dominant corr bin for this regime year: + for even, - for odd
            let bin = if yi % 2 == 0 { 0 } else { 2 };
            // the right action rides the positive-drift asset
            let ideal = if yi % 2 == 0 { 0usize } else { 2usize }; // inc for A, dec for B
            for s in 0..space.n_states() {
                let vals = space.decode_state(StateKey(s));
                if vals[2] != bin { continue; }
                let row = q.row(StateKey(s));
                let arg = (0..3).max_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap()).unwrap();
                if arg == ideal { right += 1; } else if arg == 1 { hold += 1; } else { wrong += 1; }
            }
        }
    }
    println!("dominant-bin cells: right {right} hold {hold} wrong {wrong}");
}
