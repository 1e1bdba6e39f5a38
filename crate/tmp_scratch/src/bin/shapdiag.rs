use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{Action, PositionBucket, RebalanceFreq, StateSpaceConfig};
use rebal_core::features::Signal;
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::report::{StatusCell};
use rebal_core::reward::RewardConfig;

fn market(seed: u64, years: usize, n: usize) -> Vec<YearContext> {
    let cfg = SyntheticMarketConfig {
        n_days_per_year: n, start_year: 2000,
        regimes: vec![RegimeSpec { days: years * n, drift_risky: 0.0004, vol_risky: 0.03, drift_safe: 0.0001, vol_safe: 0.002, correlation: 0.0 }],
        seed,
    };
    prepare_years(&PreparedMarket::from_synthetic(&cfg).unwrap(), &FeatureParams::default()).unwrap()
}

fn main() {
    for seed in 1000..1003u64 {
        let ctxs = market(seed, 4, 150);
        let c002 = ExperimentConfig {
            id: "#002".into(), algo: Algo::QLearning, mode: Mode::InSample,
            state_space: StateSpaceConfig::constraint_case(2, 0),
            reward: RewardConfig { target_levels: vec![0.05], target_bonuses: vec![1.0], ..RewardConfig::default() },
            signal_accuracy: Some(SignalAccuracy::Uniform(0.6)),
            signal_corruption: CorruptionMode::PerYear,
            rebalance_freq: RebalanceFreq::Daily,
            agent: AgentParams { episodes: 1000, alpha: 0.03, gamma: 0.99, epsilon: 0.15, ..AgentParams::default() },
            seed,
        };
        let case = run_constraint_case(&ctxs, &c002).unwrap();
        let base = run_constraint_case(&ctxs, &base_case_of(&c002)).unwrap();
        for (label, result) in [("case", &case), ("base", &base)] {
            let log = case_behavior_log(result, &ctxs, &c002.reward).unwrap();
            let mut table = std::collections::BTreeMap::new();
            for r in &log.records {
                if r.quarter.index() >= 2
                    && r.signal == Some(Signal::SafeBetter)
                    && StatusCell::classify(r.target_level, r.dd_level) == StatusCell::Target(1)
                {
                    let pos = match r.position { PositionBucket::RiskyHeavy => "RH", PositionBucket::Equal => "EQ", PositionBucket::SafeHeavy => "SH" };
                    let act = match r.action { Action::IncRisky => "inc", Action::Hold => "hold", Action::DecRisky => "dec" };
                    *table.entry(format!("{pos}/{act}")).or_insert(0usize) += 1;
                }
            }
            println!("seed {seed} {label}: {table:?}");
        }
    }
}
