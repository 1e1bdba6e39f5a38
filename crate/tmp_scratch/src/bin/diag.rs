use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{step, Action, PortfolioState, RebalanceFreq, StateSpaceConfig};
use rebal_core::features::Signal;
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::report::annualized_sharpe;
use rebal_core::reward::RewardConfig;

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

fn follow_sharpe(ctx: &YearContext, signals: &[Signal]) -> f64 {
    let mut s = PortfolioState::initial();
    let mut port = Vec::new();
    for t in 0..ctx.n_days() {
        let a = match signals[t] { Signal::RiskyBetter => Action::IncRisky, Signal::SafeBetter => Action::DecRisky };
        let (next, ret) = step(&s, a, ctx.r_risky[t], ctx.r_safe[t]).unwrap();
        port.push(ret);
        s = next;
    }
    annualized_sharpe(&port).unwrap()
}

fn main() {
    let space = StateSpaceConfig { use_signal: true, ..StateSpaceConfig::empty() };
    for seed in 5000..5008u64 {
        let ctxs = block_market(seed, 360, 50, 0.003, 0.005);
        let cfg = ExperimentConfig {
            id: "acc".into(), algo: Algo::QLearning, mode: Mode::InSample,
            state_space: space.clone(), reward: RewardConfig::default(),
            signal_accuracy: Some(SignalAccuracy::Uniform(1.0)),
            signal_corruption: CorruptionMode::PerYear,
            rebalance_freq: RebalanceFreq::Daily,
            agent: AgentParams { episodes: 200, ..AgentParams::default() },
            seed,
        };
        for ctx in &ctxs {
            let out = train_in_sample(ctx, &cfg).unwrap();
            let learned = annualized_sharpe(&out.trace.port_returns).unwrap();
            let forced = follow_sharpe(ctx, out.signals.as_deref().unwrap());
            let q = &out.q;
            let rows: Vec<Vec<f64>> = (0..2).map(|s| q.row(rebal_core::env::StateKey(s)).to_vec()).collect();
            println!("seed {seed} fy{}: learned {learned:.2} follow {forced:.2}  q_risky {:?} q_safe {:?}",
                ctx.label,
                rows[0].iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>(),
                rows[1].iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>());
        }
    }
}
