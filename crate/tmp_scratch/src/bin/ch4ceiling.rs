use rebal_core::agent::{Algo, AgentParams, QTable};
use rebal_core::env::{Action, RebalanceFreq, StateKey, StateSpaceConfig};
use rebal_core::features::CorrBin;
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::reward::RewardConfig;

fn corr_regime_market(seed: u64, years: usize, n: usize) -> Vec<YearContext> {
    let mut regimes = Vec::new();
    for y in 0..years {
        if y % 2 == 0 {
            regimes.push(RegimeSpec { days: n, drift_risky: 0.0007, vol_risky: 0.012, drift_safe: -0.0007, vol_safe: 0.012, correlation: 0.9 });
        } else {
            regimes.push(RegimeSpec { days: n, drift_risky: -0.0007, vol_risky: 0.012, drift_safe: 0.0007, vol_safe: 0.012, correlation: -0.9 });
        }
    }
    let cfg = SyntheticMarketConfig { n_days_per_year: n, start_year: 2000, regimes, seed };
    prepare_years(&PreparedMarket::from_synthetic(&cfg).unwrap(), &FeatureParams::default()).unwrap()
}

fn main() {
    let space = StateSpaceConfig::regime_aware();
    let mut hand = QTable::for_space(&space);
    for s in 0..space.n_states() {
        let vals = space.decode_state(StateKey(s));
        let action = match vals[2] {
            0 => Action::IncRisky, // corr positive marks the risky-up regime
            2 => Action::DecRisky, // corr negative marks the safe-up regime
            _ => Action::Hold,
        };
        hand.set(StateKey(s), action.index(), 1.0);
    }
    let cfg = ExperimentConfig {
        id: "hand".into(), algo: Algo::Sarsa, mode: Mode::OutOfSample,
        state_space: space, reward: RewardConfig::default(),
        signal_accuracy: None, signal_corruption: CorruptionMode::PerYear,
        rebalance_freq: RebalanceFreq::Daily,
        agent: AgentParams::default(),
        seed: 0,
    };
    let mut hand_mean = 0.0;
    let mut base_mean = 0.0;
    let n_seeds = 16;
    for seed in 1000..(1000 + n_seeds) {
        let ctxs = corr_regime_market(seed, 4, 200);
        for i in 1..ctxs.len() {
            let r = backtest_out_of_sample(&ctxs[i], std::slice::from_ref(&hand), &cfg).unwrap();
            hand_mean += r.sharpe_annual;
            // naive 50/50 hold for reference
            let fixed: Vec<f64> = ctxs[i].r_risky.iter().zip(&ctxs[i].r_safe).map(|(&a, &b)| rebal_core::env::mix_return(5, a, b)).collect();
            base_mean += rebal_core::report::annualized_sharpe(&fixed).unwrap();
        }
    }
    let n = (n_seeds * 3) as f64;
    println!("hand-policy OOS mean sharpe: {:.3}", hand_mean / n);
    println!("50/50 mean sharpe:           {:.3}", base_mean / n);
}
