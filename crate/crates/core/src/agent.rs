//! Tabular agent: Q-table storage, SARSA / Q-learning updates, ε-greedy
//! selection, random baseline tables, equal-weight table averaging, the
//! fiscal-year episode runner, and Q-table (de)serialization.

use std::io::{BufRead, BufReader, Read, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{
    allowed_actions, step, Action, Observation, PortfolioState, RebalanceFreq, StateKey, StateSpaceConfig,
};
use crate::error::{Error, Result};
use crate::features::{CorrBin, MomentumSign, PhaseId, QuarterIdx, Signal};
use crate::reward::{basic_reward, shaped_reward, update_episode_status, BenchmarkSpec, EpisodeStatus, RewardConfig};

/// Learning hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub episodes: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for AgentParams {
    fn default() -> Self {
        AgentParams {
            alpha: 0.1,
            gamma: 0.99,
            epsilon: 0.1,
            episodes: 1000,
            seed: 0,
        }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) && self.alpha != 0.0 {
            return Err(Error::Config(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must be in [0, 1], got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must be in [0, 1], got {}", self.epsilon)));
        }
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which temporal-difference update rule an experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Sarsa,
    QLearning,
}

/// Dense action-value table over `n_states x n_actions` cells.
///
/// When built for a [`StateSpaceConfig`] the config is carried along for
/// averaging-shape checks and serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
    space: Option<StateSpaceConfig>,
}

impl QTable {
    pub fn zeroed(n_states: usize, n_actions: usize) -> Self {
        QTable {
            n_states,
            n_actions,
            values: vec![0.0; n_states * n_actions],
            space: None,
        }
    }

    /// Zero-initialized table for a portfolio state space (three actions).
    pub fn for_space(space: &StateSpaceConfig) -> Self {
        QTable {
            n_states: space.n_states(),
            n_actions: Action::COUNT,
            values: vec![0.0; space.n_states() * Action::COUNT],
            space: Some(space.clone()),
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn space(&self) -> Option<&StateSpaceConfig> {
        self.space.as_ref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn cell(&self, s: StateKey, a: usize) -> usize {
        debug_assert!(s.0 < self.n_states && a < self.n_actions);
        s.0 * self.n_actions + a
    }

    #[inline]
    pub fn get(&self, s: StateKey, a: usize) -> f64 {
        self.values[self.cell(s, a)]
    }

    pub fn set(&mut self, s: StateKey, a: usize, v: f64) {
        let c = self.cell(s, a);
        self.values[c] = v;
    }

    pub fn row(&self, s: StateKey) -> &[f64] {
        &self.values[s.0 * self.n_actions..(s.0 + 1) * self.n_actions]
    }

    pub fn max_action_value(&self, s: StateKey) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// SARSA: `Q(s,a) += alpha * (r + gamma * Q(s',a') - Q(s,a))`, with a
    /// zero bootstrap on the terminal step. Returns the updated cell value;
    /// no other cell is touched.
    pub fn sarsa_update(
        &mut self,
        s: StateKey,
        a: usize,
        r: f64,
        next: Option<(StateKey, usize)>,
        alpha: f64,
        gamma: f64,
    ) -> f64 {
        let bootstrap = next.map_or(0.0, |(s2, a2)| self.get(s2, a2));
        let c = self.cell(s, a);
        let q = self.values[c];
        let updated = q + alpha * (r + gamma * bootstrap - q);
        self.values[c] = updated;
        updated
    }

    /// Q-learning: `Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))`,
    /// with a zero bootstrap on the terminal step.
    pub fn q_learning_update(
        &mut self,
        s: StateKey,
        a: usize,
        r: f64,
        next: Option<StateKey>,
        alpha: f64,
        gamma: f64,
    ) -> f64 {
        let bootstrap = next.map_or(0.0, |s2| self.max_action_value(s2));
        let c = self.cell(s, a);
        let q = self.values[c];
        let updated = q + alpha * (r + gamma * bootstrap - q);
        self.values[c] = updated;
        updated
    }
}

/// ε-greedy over a feasible action subset: explore uniformly with
/// probability `eps`, otherwise take the feasible argmax with ties broken
/// uniformly from the caller's stream.
pub fn epsilon_greedy<R: Rng>(q: &QTable, s: StateKey, feasible: &[usize], eps: f64, rng: &mut R) -> usize {
    assert!(!feasible.is_empty(), "feasible action set must be non-empty");
    if feasible.len() == 1 {
        return feasible[0];
    }
    let u: f64 = rng.gen();
    if u < eps {
        return feasible[rng.gen_range(0..feasible.len())];
    }
    let mut best = f64::NEG_INFINITY;
    let mut ties: Vec<usize> = Vec::with_capacity(feasible.len());
    for &a in feasible {
        let v = q.get(s, a);
        if v > best {
            best = v;
            ties.clear();
            ties.push(a);
        } else if v == best {
            ties.push(a);
        }
    }
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.gen_range(0..ties.len())]
    }
}

/// Baseline table with every cell drawn i.i.d. uniform on `[0, 1)`.
pub fn random_q_table<R: Rng>(space: &StateSpaceConfig, rng: &mut R) -> QTable {
    let mut q = QTable::for_space(space);
    for v in &mut q.values {
        *v = rng.gen::<f64>();
    }
    q
}

/// Cellwise arithmetic mean of tables sharing one state space.
pub fn average_q_tables(tables: &[QTable]) -> Result<QTable> {
    let first = tables
        .first()
        .ok_or_else(|| Error::Config("cannot average an empty table list".into()))?;
    for t in tables {
        if t.n_states != first.n_states || t.n_actions != first.n_actions || t.space != first.space {
            return Err(Error::ShapeMismatch("q-tables built for different state spaces".into()));
        }
    }
    let mut avg = first.clone();
    let n = tables.len() as f64;
    for (i, v) in avg.values.iter_mut().enumerate() {
        *v = tables.iter().map(|t| t.values[i]).sum::<f64>() / n;
    }
    Ok(avg)
}

/// Precomputed per-day inputs for one fiscal-year episode. Feature slices
/// are optional; each must be present when the state space enables the
/// corresponding component, and all present slices share the year's length.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeInputs<'a> {
    pub r_risky: &'a [f64],
    pub r_safe: &'a [f64],
    pub momentum_risky: Option<&'a [MomentumSign]>,
    pub momentum_safe: Option<&'a [MomentumSign]>,
    pub correlation: Option<&'a [CorrBin]>,
    pub signals: Option<&'a [Signal]>,
    pub quarters: Option<&'a [QuarterIdx]>,
    pub phases: Option<&'a [PhaseId]>,
    pub benchmark: &'a BenchmarkSpec,
    pub space: &'a StateSpaceConfig,
    pub reward: &'a RewardConfig,
    pub freq: RebalanceFreq,
}

impl<'a> EpisodeInputs<'a> {
    fn n_days(&self) -> usize {
        self.r_risky.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_days();
        if n == 0 {
            return Err(Error::InsufficientData("episode over an empty year".into()));
        }
        if self.r_safe.len() != n {
            return Err(Error::ShapeMismatch("risky/safe return lengths differ".into()));
        }
        for (name, len) in [
            ("momentum_risky", self.momentum_risky.map(<[_]>::len)),
            ("momentum_safe", self.momentum_safe.map(<[_]>::len)),
            ("correlation", self.correlation.map(<[_]>::len)),
            ("signals", self.signals.map(<[_]>::len)),
            ("quarters", self.quarters.map(<[_]>::len)),
            ("phases", self.phases.map(<[_]>::len)),
        ] {
            if let Some(len) = len {
                if len != n {
                    return Err(Error::ShapeMismatch(format!("{name} length {len} != {n} days")));
                }
            }
        }
        if self.benchmark.sr_by_day.len() != n {
            return Err(Error::ShapeMismatch("benchmark not aligned with the year".into()));
        }
        Ok(())
    }

    fn observation(&self, t: usize, s: &PortfolioState, status: &EpisodeStatus) -> Observation {
        Observation {
            momentum_risky: self.momentum_risky.map(|m| m[t]),
            momentum_safe: self.momentum_safe.map(|m| m[t]),
            correlation: self.correlation.map(|c| c[t]),
            signal: self.signals.map(|s| s[t]),
            position: Some(crate::env::PositionBucket::from_tenths(s.w_tenths)),
            quarter: self.quarters.map(|q| q[t]),
            target_level: Some(status.target_level),
            dd_level: Some(status.dd_level),
            phase: self.phases.map(|p| p[t]),
        }
    }
}

/// Per-day record of one episode, kept for evaluation and behavior analysis.
#[derive(Debug, Clone, Default)]
pub struct EpisodeTrace {
    pub states: Vec<StateKey>,
    pub actions: Vec<Action>,
    /// Risky weight (tenths) at decision time, before the action applies.
    pub weights_before: Vec<u8>,
    pub weights_after: Vec<u8>,
    pub port_returns: Vec<f64>,
    pub rewards: Vec<f64>,
    /// Wealth after each day (growth factor from 1.0).
    pub wealth: Vec<f64>,
    /// Shaping status visible in the state at decision time.
    pub target_levels: Vec<usize>,
    pub dd_levels: Vec<usize>,
}

impl EpisodeTrace {
    fn with_capacity(n: usize) -> Self {
        EpisodeTrace {
            states: Vec::with_capacity(n),
            actions: Vec::with_capacity(n),
            weights_before: Vec::with_capacity(n),
            weights_after: Vec::with_capacity(n),
            port_returns: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            wealth: Vec::with_capacity(n),
            target_levels: Vec::with_capacity(n),
            dd_levels: Vec::with_capacity(n),
        }
    }

    pub fn n_days(&self) -> usize {
        self.actions.len()
    }
}

fn feasible_indices(day: usize, freq: RebalanceFreq) -> Vec<usize> {
    allowed_actions(day, freq).iter().map(|a| a.index()).collect()
}

/// Runs one episode over a fiscal year.
///
/// Each day: encode the state, pick an ε-greedy action among the feasible
/// set, advance the portfolio, compute the shaped reward, and (when
/// `learn`) apply the update rule. SARSA picks the successor action before
/// updating; Q-learning picks it after. The terminal day bootstraps with
/// zero.
pub fn run_episode(
    inputs: &EpisodeInputs,
    q: &mut QTable,
    params: &AgentParams,
    algo: Algo,
    learn: bool,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeTrace> {
    inputs.validate()?;
    if let Some(space) = &q.space {
        if space != inputs.space {
            return Err(Error::ShapeMismatch("q-table space differs from episode space".into()));
        }
    }
    let n = inputs.n_days();
    let eps = if learn { params.epsilon } else { 0.0 };
    let mut trace = EpisodeTrace::with_capacity(n);

    let mut state = PortfolioState::initial();
    let mut status = EpisodeStatus::initial();
    let mut key = inputs.space.encode_state(&inputs.observation(0, &state, &status))?;
    let mut action_idx = epsilon_greedy(q, key, &feasible_indices(0, inputs.freq), eps, rng);

    for t in 0..n {
        let action = Action::from_index(action_idx).expect("valid action index");
        trace.states.push(key);
        trace.actions.push(action);
        trace.weights_before.push(state.w_tenths);
        trace.target_levels.push(status.target_level);
        trace.dd_levels.push(status.dd_level);

        let (next_state, day_return) = step(&state, action, inputs.r_risky[t], inputs.r_safe[t])?;
        let next_status = update_episode_status(&status, next_state.wealth, next_state.peak_wealth, inputs.reward);
        trace.weights_after.push(next_state.w_tenths);
        trace.port_returns.push(day_return);
        trace.wealth.push(next_state.wealth);

        let base = basic_reward(&trace.port_returns, inputs.benchmark)?;
        let reward = shaped_reward(base, &next_status, inputs.reward);
        trace.rewards.push(reward);

        let next_key = if t + 1 < n {
            Some(
                inputs
                    .space
                    .encode_state(&inputs.observation(t + 1, &next_state, &next_status))?,
            )
        } else {
            None
        };

        let next_action_idx = match algo {
            Algo::Sarsa => {
                // on-policy: the successor action is chosen before the update
                // and is the action actually taken next
                let chosen = next_key
                    .map(|k| epsilon_greedy(q, k, &feasible_indices(t + 1, inputs.freq), eps, rng));
                if learn {
                    q.sarsa_update(
                        key,
                        action_idx,
                        reward,
                        next_key.zip(chosen),
                        params.alpha,
                        params.gamma,
                    );
                }
                chosen
            }
            Algo::QLearning => {
                if learn {
                    q.q_learning_update(key, action_idx, reward, next_key, params.alpha, params.gamma);
                }
                next_key.map(|k| epsilon_greedy(q, k, &feasible_indices(t + 1, inputs.freq), eps, rng))
            }
        };

        state = next_state;
        status = next_status;
        if let (Some(k), Some(a)) = (next_key, next_action_idx) {
            key = k;
            action_idx = a;
        }
    }
    Ok(trace)
}

// ---------------------------------------------------------------------------
// Serialization: one CSV row per (state, action) cell, preceded by a JSON
// header comment describing the state space. Values are written with 17
// significant digits so the round trip is lossless.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct QTableHeader {
    state_space: StateSpaceConfig,
    n_actions: usize,
}

/// Writes a table (built for a state space) in the portable CSV format.
pub fn write_qtable<W: Write>(q: &QTable, out: &mut W) -> Result<()> {
    let space = q
        .space
        .as_ref()
        .ok_or_else(|| Error::Config("only state-space tables can be serialized".into()))?;
    let header = QTableHeader {
        state_space: space.clone(),
        n_actions: q.n_actions,
    };
    writeln!(
        out,
        "# {}",
        serde_json::to_string(&header).map_err(|e| Error::Internal(e.to_string()))?
    )?;
    let comps = space.components();
    let mut cols: Vec<String> = (0..comps.len()).map(|i| format!("state_component_{i}")).collect();
    cols.push("action".into());
    cols.push("value".into());
    writeln!(out, "{}", cols.join(","))?;
    for s in 0..q.n_states {
        let values = space.decode_state(StateKey(s));
        let prefix = values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        for a in 0..q.n_actions {
            writeln!(out, "{},{},{:.16e}", prefix, a, q.get(StateKey(s), a))?;
        }
    }
    Ok(())
}

/// Reads a table written by [`write_qtable`]; every cell must be present
/// exactly once and finite.
pub fn read_qtable<R: Read>(input: &mut R) -> Result<QTable> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let json = first
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing '# {json}' header".into() })?
        .trim();
    let header: QTableHeader =
        serde_json::from_str(json).map_err(|e| Error::Parse { line: 1, msg: format!("bad header: {e}") })?;
    header.state_space.validate()?;

    let n_states = header.state_space.n_states();
    let comps = header.state_space.components();
    let mut q = QTable::for_space(&header.state_space);
    if header.n_actions != q.n_actions {
        return Err(Error::ShapeMismatch(format!(
            "expected {} actions, header says {}",
            q.n_actions, header.n_actions
        )));
    }
    for v in &mut q.values {
        *v = f64::NAN; // sentinel marking unseen cells
    }

    let mut lines = reader.lines().enumerate();
    let (_, col_line) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 2, msg: "missing column header".into() })?;
    let col_line = col_line?;
    let expected_cols = comps.len() + 2;
    if col_line.split(',').count() != expected_cols {
        return Err(Error::Parse { line: 2, msg: format!("expected {expected_cols} columns") });
    }

    for (i, line) in lines {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::Parse { line: line_no, msg: format!("expected {expected_cols} fields") });
        }
        let mut idx = 0usize;
        for (j, (_, card)) in comps.iter().enumerate() {
            let v: usize = fields[j]
                .parse()
                .map_err(|e| Error::Parse { line: line_no, msg: format!("bad component: {e}") })?;
            if v >= *card {
                return Err(Error::Parse { line: line_no, msg: format!("component value {v} >= {card}") });
            }
            idx = idx * card + v;
        }
        let a: usize = fields[comps.len()]
            .parse()
            .map_err(|e| Error::Parse { line: line_no, msg: format!("bad action: {e}") })?;
        if a >= q.n_actions {
            return Err(Error::Parse { line: line_no, msg: format!("action {a} out of range") });
        }
        let val: f64 = fields[comps.len() + 1]
            .parse()
            .map_err(|e| Error::Parse { line: line_no, msg: format!("bad value: {e}") })?;
        let cell = idx * q.n_actions + a;
        if !q.values[cell].is_nan() {
            return Err(Error::Parse { line: line_no, msg: "duplicate cell".into() });
        }
        q.values[cell] = val;
        let _ = n_states;
    }
    if q.values.iter().any(|v| v.is_nan()) {
        return Err(Error::Parse { line: 0, msg: "missing cells in q-table file".into() });
    }
    Ok(q)
}
