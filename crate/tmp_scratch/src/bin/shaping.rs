use rebal_core::agent::{Algo, AgentParams};
use rebal_core::env::{RebalanceFreq, StateSpaceConfig};
use rebal_core::features::Signal;
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::report::{preference_rate, BehaviorLog, CellFilter, StatusCell};
use rebal_core::reward::{DrawdownMode, RewardConfig};
use std::time::Instant;

fn market(seed: u64, years: usize, n: usize) -> Vec<YearContext> {
    let cfg = SyntheticMarketConfig {
        n_days_per_year: n,
        start_year: 2000,
        regimes: vec![RegimeSpec {
            days: years * n,
            drift_risky: 0.0,
            vol_risky: 0.02,
            drift_safe: 0.0,
            vol_safe: 0.001,
            correlation: 0.0,
        }],
        seed,
    };
    prepare_years(&PreparedMarket::from_synthetic(&cfg).unwrap(), &FeatureParams::default()).unwrap()
}

fn cfg(id: &str, seed: u64, space: StateSpaceConfig, reward: RewardConfig, episodes: usize) -> ExperimentConfig {
    ExperimentConfig {
        id: id.into(), algo: Algo::QLearning, mode: Mode::InSample,
        state_space: space, reward,
        signal_accuracy: Some(SignalAccuracy::Uniform(0.6)),
        signal_corruption: CorruptionMode::PerYear,
        rebalance_freq: RebalanceFreq::Daily,
        agent: AgentParams { episodes, alpha: 0.03, gamma: 0.99, epsilon: 0.15, ..AgentParams::default() },
        seed,
    }
}

fn rate(log: &BehaviorLog, f: &CellFilter) -> Option<f64> {
    preference_rate(log, f).map(|r| r.value)
}

fn main() {
    let t0 = Instant::now();
    let n_seeds = 36u64;
    let episodes = 1000;
    let (mut da, mut db, mut dc) = (Vec::new(), Vec::new(), Vec::new());
    for s_i in 0..n_seeds {
        let seed = 1000 + s_i;
        let ctxs = market(seed, 4, 150);

        let c002 = cfg("#002", seed, StateSpaceConfig::constraint_case(2, 0), RewardConfig {
            target_levels: vec![0.05], target_bonuses: vec![1.0], ..RewardConfig::default()
        }, episodes);
        let c005 = cfg("#005", seed, StateSpaceConfig::constraint_case(0, 3), RewardConfig {
            dd_levels: vec![0.05, 0.10], dd_penalties: vec![-1.0, -2.0],
            dd_mode: DrawdownMode::FromPeak, dd_sticky: false, ..RewardConfig::default()
        }, episodes);

        let r002 = run_constraint_case(&ctxs, &c002).unwrap();
        let r005 = run_constraint_case(&ctxs, &c005).unwrap();
        let base = run_constraint_case(&ctxs, &base_case_of(&c002)).unwrap();

        // (a) #002 Q3+Q4 target-achieved, signal safe-better
        let log002 = case_behavior_log(&r002, &ctxs, &c002.reward).unwrap();
        let logb_t = case_behavior_log(&base, &ctxs, &c002.reward).unwrap();
        let pool = |log: &BehaviorLog, quarters: &[usize], status: StatusCell, signal: Option<Signal>| -> Option<f64> {
            // pooled over the quarter set: aggregate counts
            let mut num = 0.0; let mut den = 0.0;
            for &q in quarters {
                if let Some(r) = preference_rate(log, &CellFilter { quarter: Some(q), signal, status: Some(status), phase: None }) {
                    num += r.value * r.count as f64;
                    den += r.count as f64;
                }
            }
            if den > 0.0 { Some(num / den) } else { None }
        };
        if let (Some(c), Some(b)) = (
            pool(&log002, &[2, 3], StatusCell::Target(1), Some(Signal::SafeBetter)),
            pool(&logb_t, &[2, 3], StatusCell::Target(1), Some(Signal::SafeBetter)),
        ) { if s_i < 6 { eprintln!("seed {s_i} (a): case {c:.2} base {b:.2}"); } da.push(c - b); }
        if let (Some(c), Some(b)) = (
            pool(&log002, &[3], StatusCell::Otherwise, None),
            pool(&logb_t, &[3], StatusCell::Otherwise, None),
        ) { db.push(c - b); }

        // (c) #005 second-level drawdown cells
        let log005 = case_behavior_log(&r005, &ctxs, &c005.reward).unwrap();
        let logb_d = case_behavior_log(&base, &ctxs, &c005.reward).unwrap();
        if let (Some(c), Some(b)) = (
            pool(&log005, &[0, 1, 2, 3], StatusCell::Drawdown(2), None),
            pool(&logb_d, &[0, 1, 2, 3], StatusCell::Drawdown(2), None),
        ) { dc.push(c - b); }
    }
    let stats = |v: &
Vec<f64>| {
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let frac = v.iter().filter(|&&x| x != 0.0).count(); let _ = frac;
        (n, mean)
    };
    let neg = |v: &Vec<f64>| v.iter().filter(|&&x| x < 0.0).count();
    let pos = |v: &Vec<f64>| v.iter().filter(|&&x| x > 0.0).count();
    let (na, ma) = stats(&da);
    let (nb, mb) = stats(&db);
    let (nc, mc) = stats(&dc);
    println!("(a) defined {na}/36 mean {ma:+.3} neg {}/{na}", neg(&da));
    println!("(b) defined {nb}/36 mean {mb:+.3} pos {}/{nb}", pos(&db));
    println!("(c) defined {nc}/36 mean {mc:+.3} pos {}/{nc}", pos(&dc));
    println!("elapsed {:.0}s", t0.elapsed().as_secs_f64());
}
