use rebal_core::agent::{Algo, AgentParams, QTable};
use rebal_core::env::{Action, RebalanceFreq, StateKey, StateSpaceConfig};
use rebal_core::market::{RegimeSpec, SyntheticMarketConfig};
use rebal_core::protocol::*;
use rebal_core::reward::RewardConfig;
use std::time::Instant;

// regime years (correlation +/-0.9 with relative drift gap +/-g) overlaid
// with a common slow drift wiggle m that owns the momentum signal
fn market(seed: u64, years: usize, n: usize, g: f64, vol: f64, m_amp: f64, m_block: usize, null: bool) -> Vec<YearContext> {
    let mut regimes = Vec::new();
    let total = years * n;
    let mut day = 0usize;
    let mut m_up = true;
    while day < total {
        let take = m_block.min(total - day);
        // which regime-year this block starts in (blocks never straddle years when n % m_block aligns; allow straddle by splitting at year edge)
        let year = day / n;
        let split = ((year + 1) * n - day).min(take);
        for (len, y) in [(split, year), (take - split, year + 1)] {
            if len == 0 { continue; }
            let m = if m_up { m_amp } else { -m_amp };
            let (dr, ds, rho) = if null {
                (m, m, 0.3)
            } else if y % 2 == 0 {
                (m + g, m - g, 0.9)
            } else {
                (m - g, m + g, -0.9)
            };
            regimes.push(RegimeSpec { days: len, drift_risky: dr, vol_risky: vol, drift_safe: ds, vol_safe: vol, correlation: rho });
        }
        day += take;
        m_up = !m_up;
    }
    let cfg = SyntheticMarketConfig { n_days_per_year: n, start_year: 2000, regimes, seed };
    prepare_years(&PreparedMarket::from_synthetic(&cfg).unwrap(), &FeatureParams::default()).unwrap()
}

fn paired_t(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = d.iter().sum::<f64>() / n;
    let v = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    m / (v / n).sqrt()
}

fn mean_oos(ctxs: &[YearContext], cfg: &ExperimentConfig) -> f64 {
    let tables: Vec<_> = ctxs.iter().map(|c| train_in_sample(c, cfg).unwrap().q).collect();
    let mut sharpes = Vec::new();
    for i in 1..ctxs.len() {
        sharpes.push(backtest_out_of_sample(&ctxs[i], &tables[..i], cfg).unwrap().sharpe_annual);
    }
    sharpes.iter().sum::<f64>() / sharpes.len() as f64
}

fn main() {
    let (g, vol, m_amp, m_block) = (0.0012, 0.008, 0.003, 50usize);
    // ceiling: hand table on the regime-aware space
    let space = StateSpaceConfig::regime_aware();
    let mut hand = QTable::for_space(&space);
    for s in 0..space.n_states() {
        let vals = space.decode_state(StateKey(s));
        let a = match vals[2] { 0 => Action::IncRisky, 2 => Action::DecRisky, _ => Action::Hold };
        hand.set(StateKey(s), a.index(), 1.0);
    }
    let cfg0 = ExperimentConfig {
        id: "hand".into(), algo: Algo::Sarsa, mode: Mode::OutOfSample,
        state_space: space, reward: RewardConfig::default(),
        signal_accuracy: None, signal_corruption: CorruptionMode::PerYear,
        rebalance_freq: RebalanceFreq::Daily, agent: AgentParams::default(), seed: 0,
    };
    let mut hand_sum = 0.0; let mut n_hand = 0.0;
    for seed in 1000..1010u64 {
        let ctxs = market(seed, 4, 200, g, vol, m_amp, m_block, false);
        for i in 1..ctxs.len() {
            hand_sum += backtest_out_of_sample(&ctxs[i], std::slice::from_ref(&hand), &cfg0).unwrap().sharpe_annual;
            n_hand += 1.0;
        }
    }
    println!("hand ceiling: {:.3}", hand_sum / n_hand);

    for null in [false, true] {
        for off in [1000u64, 42] {
            let t0 = Instant::now();
            let n_seeds = 32u64;
            let (mut bm, mut rm) = (Vec::new(), Vec::new());
            for s_i in 0..n_seeds {
                let seed = off + s_i;
                let ctxs = market(seed, 4, 200, g, vol, m_amp, m_block, null);
                let mk = |id: &str, space: StateSpaceConfig| ExperimentConfig {
                    id: id.into(), algo: Algo::Sarsa, mode: Mode::OutOfSample,
                    state_space: space, reward: RewardConfig::default(),
                    signal_accuracy: None, signal_corruption: CorruptionMode::PerYear,
                    rebalance_freq: RebalanceFreq::Daily,
                    agent: AgentParams { episodes: 800, alpha: 0.025, gamma: 0.4, epsilon: 0.25, ..AgentParams::default() },
                    seed,
                };
                bm.push(mean_oos(&ctxs, &mk("base", StateSpaceConfig::momentum_pair())));
                rm.push(mean_oos(&ctxs, &mk("regime", StateSpaceConfig::regime_aware())));
            }
            let mbase = bm.iter().sum::<f64>() / bm.len() as f64;
            let mreg = rm.iter().sum::<f64>() / rm.len() as f64;
            println!("null={null} off{off}: base {mbase:.3} regime {mreg:.3} t {:.2} ({:.0}s)", paired_t(&rm, &bm), t0.elapsed().as_secs_f64());
        }
    }
}
