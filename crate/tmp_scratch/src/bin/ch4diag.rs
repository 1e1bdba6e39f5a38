use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{RebalanceFreq, StateKey, StateSpaceConfig};
use rebal_core::features::CorrBin;
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::reward::RewardConfig;

fn corr_regime_market(seed: u64, years: usize, n: usize) -> Vec<YearContext> {
    let mut regimes = Vec::new();
    for y in 0..years {
        if y % 2 == 0 {
            regimes.push(RegimeSpec { days: n, drift_risky: 0.0005, vol_risky: 0.02, drift_safe: 0.0005, vol_safe: 0.005, correlation: 0.9 });
        } else {
            regimes.push(RegimeSpec { days: n, drift_risky: 0.0005, vol_risky: 0.005, drift_safe: 0.0005, vol_safe: 0.02, correlation: -0.9 });
        }
    }
    let cfg = SyntheticMarketConfig { n_days_per_year: n, start_year: 2000, regimes, seed };
    prepare_years(&PreparedMarket::from_synthetic(&cfg).unwrap(), &FeatureParams::default()).unwrap()
}

fn main() {
    let seed = 1003u64;
    let ctxs = corr_regime_market(seed, 4, 150);
    // how well does the corr bin track the regime?
    for (i, ctx) in ctxs.iter().enumerate() {
        let mut counts = [0usize; 3];
        for c in &ctx.correlation {
            counts[c.index()] += 1;
        }
        println!("year {i} (regime {}): corr bins +/none/- = {:?}", if i % 2 == 0 { "A" } else { "B" }, counts);
    }
    let cfg = ExperimentConfig {
        id: "regime".into(), algo: Algo::Sarsa, mode: Mode::OutOfSample,
        state_space: StateSpaceConfig::regime_aware(), reward: RewardConfig::default(),
        signal_accuracy: None, signal_corruption: CorruptionMode::PerYear,
        rebalance_freq: RebalanceFreq::Daily,
        agent: AgentParams { episodes: 300, alpha: 0.05, gamma: 0.2, epsilon: 0.2, ..AgentParams::default() },
        seed,
    };
    let space = cfg.state_space.clone();
    let tables: Vec<_> = ctxs.iter().map(|c| train_in_sample(c, &cfg).unwrap().q).collect();
    // aggregate Q by corr bin (average over momentum cells)
    for (yi, q) in tables.iter().enumerate() {
        for bin in [CorrBin::Positive, CorrBin::None, CorrBin::Negative] {
            let mut sums = [0.0f64; 3];
            let mut n = 0.0;
            for s in 0..space.n_states() {
                let vals = space.decode_state(StateKey(s));
                if vals[2] == bin.index() {
                    for a in 0..3 { sums[a] += q.get(StateKey(s), a); }
                    n += 1.0;
                }
            }
            println!("year {yi} corr {:?}: inc {:.2} hold {:.2} dec {:.2}", bin, sums[0]/n, sums[1]/n, sums[2]/n);
        }
        if yi == 1 { break; }
    }
    // validation rollout on year 1 using year 0's table
    let r = backtest_out_of_sample(&ctxs[1], &tables[..1], &cfg).unwrap();
    println!("validation year 1 weights: {:?}", &r.trace.weights_after[..40]);
    println!("sharpe {:.3}", r.sharpe_annual);
    let r = backtest_out_of_sample(&ctxs[2], &tables[..2], &cfg).unwrap();
    println!("validation year 2 weights: {:?}", &r.trace.weights_after[..40]);
    println!("sharpe {:.3}", r.sharpe_annual);
}
