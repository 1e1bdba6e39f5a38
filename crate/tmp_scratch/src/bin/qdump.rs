use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{RebalanceFreq, StateKey, StateSpaceConfig};
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::reward::RewardConfig;

fn main() {
    let cfg_m = SyntheticMarketConfig {
        n_days_per_year: 150, start_year: 2000,
        regimes: vec![RegimeSpec { days: 150, drift_risky: 0.0007, vol_risky: 0.015, drift_safe: 0.0001, vol_safe: 0.002, correlation: 0.0 }],
        seed: 1001,
    };
    let ctxs = prepare_years(&PreparedMarket::from_synthetic(&cfg_m).unwrap(), &FeatureParams::default()).unwrap();
    let space = StateSpaceConfig::constraint_case(2, 0);
    let cfg = ExperimentConfig {
        id: "#002".into(), algo: Algo::QLearning, mode: Mode::InSample,
        state_space: space.clone(),
        reward: RewardConfig { target_levels: vec![0.05], target_bonuses: vec![1.0], ..RewardConfig::default() },
        signal_accuracy: Some(SignalAccuracy::Uniform(0.6)),
        signal_corruption: CorruptionMode::PerYear,
        rebalance_freq: RebalanceFreq::Daily,
        agent: AgentParams { episodes: 5000, alpha: 0.01, gamma: 0.99, epsilon: 0.2, ..AgentParams::default() },
        seed: 7,
    };
    let out = train_in_sample(&ctxs[0], &cfg).unwrap();
    // dump achieved-state rows for Q3/Q4, signal = SafeBetter
    println!("rows: [inc, hold, dec] per (quarter, position), achieved, safe-signal");
    for q in [2usize, 3] {
        for pos in 0..3 {
            // order: signal, position, quarter, target
            let idx = ((1 * 3 + pos) * 4 + q) * 2 + 1;
            let row = out.q.row(StateKey(idx));
            println!("Q{} pos{}: {:?}", q + 1, pos, row.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());
        }
    }
    println!("not-achieved, safe-signal:");
    for q in [2usize, 3] {
        for pos in 0..3 {
            let idx = ((1 * 3 + pos) * 4 + q) * 2;
            let row = out.q.row(StateKey(idx));
            println!("Q{} pos{}: {:?}", q + 1, pos, row.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());
        }
    }
}
