//! Two-asset portfolio environment.
//!
//! Weight dynamics on an 11-point grid under a three-action set, rebalance
//! frequency constraints, and deterministic packing of the configured
//! observation variables into a dense state index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{CorrBin, MomentumSign, PhaseId, QuarterIdx, Signal};

/// The three portfolio actions, in fixed order for table indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    /// Risky +10%, non-risky -10% (clipped at 100%).
    IncRisky,
    /// No weight change.
    Hold,
    /// Risky -10%, non-risky +10% (clipped at 0%).
    DecRisky,
}

impl Action {
    pub const COUNT: usize = 3;
    pub const ALL: [Action; 3] = [Action::IncRisky, Action::Hold, Action::DecRisky];

    pub fn index(self) -> usize {
        match self {
            Action::IncRisky => 0,
            Action::Hold => 1,
            Action::DecRisky => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::IncRisky => "inc_risky",
            Action::Hold => "hold",
            Action::DecRisky => "dec_risky",
        }
    }
}

/// Portfolio state within one fiscal-year episode.
///
/// The risky weight is stored in integer tenths so the grid stays exact
/// under any action sequence. Wealth is the cumulative growth factor since
/// the year start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioState {
    pub w_tenths: u8,
    pub day_index: usize,
    pub wealth: f64,
    pub peak_wealth: f64,
}

impl PortfolioState {
    /// Year start: 50/50 split, unit wealth.
    pub fn initial() -> Self {
        PortfolioState {
            w_tenths: 5,
            day_index: 0,
            wealth: 1.0,
            peak_wealth: 1.0,
        }
    }

    pub fn w_risky(&self) -> f64 {
        f64::from(self.w_tenths) / 10.0
    }
}

/// Applies an action to a grid weight, clipping at the grid ends.
pub fn apply_action(w_tenths: u8, a: Action) -> u8 {
    match a {
        Action::IncRisky => (w_tenths + 1).min(10),
        Action::Hold => w_tenths,
        Action::DecRisky => w_tenths.saturating_sub(1),
    }
}

/// Portfolio daily return at a given grid weight: `w*r_risky + (1-w)*r_safe`.
///
/// Shared by the environment step and the fixed-weight benchmark so both
/// produce bit-identical mixes. Computed as `r_safe + w*(r_risky - r_safe)`
/// so identical assets mix to exactly the same return at every weight
/// (keeping benchmark tie-breaks exact), with the grid ends returned
/// verbatim.
pub fn mix_return(w_tenths: u8, r_risky: f64, r_safe: f64) -> f64 {
    match w_tenths {
        0 => r_safe,
        10 => r_risky,
        w => r_safe + f64::from(w) / 10.0 * (r_risky - r_safe),
    }
}

/// Advances one day: the action is applied first and the post-action weight
/// earns that same day's return.
pub fn step(s: &PortfolioState, a: Action, r_risky: f64, r_safe: f64) -> Result<(PortfolioState, f64)> {
    let w_new = apply_action(s.w_tenths, a);
    let day_return = mix_return(w_new, r_risky, r_safe);
    if 1.0 + day_return <= 0.0 {
        return Err(Error::WealthWipeout {
            day: s.day_index,
            ret: day_return,
        });
    }
    let wealth = s.wealth * (1.0 + day_return);
    Ok((
        PortfolioState {
            w_tenths: w_new,
            day_index: s.day_index + 1,
            wealth,
            peak_wealth: s.peak_wealth.max(wealth),
        },
        day_return,
    ))
}

/// How often the full action set is available; off-schedule days allow only
/// `Hold`. Periods are trading-day counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RebalanceFreq {
    Daily,
    Weekly,
    Biweekly,
    Monthly,
}

impl RebalanceFreq {
    pub fn period(self) -> usize {
        match self {
            RebalanceFreq::Daily => 1,
            RebalanceFreq::Weekly => 5,
            RebalanceFreq::Biweekly => 10,
            RebalanceFreq::Monthly => 21,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RebalanceFreq::Daily => "daily",
            RebalanceFreq::Weekly => "weekly",
            RebalanceFreq::Biweekly => "biweekly",
            RebalanceFreq::Monthly => "monthly",
        }
    }
}

const FULL_ACTIONS: [Action; 3] = Action::ALL;
const HOLD_ONLY: [Action; 1] = [Action::Hold];

/// Feasible actions on a given day under a rebalance-frequency constraint.
pub fn allowed_actions(day_index: usize, freq: RebalanceFreq) -> &'static [Action] {
    if day_index % freq.period() == 0 {
        &FULL_ACTIONS
    } else {
        &HOLD_ONLY
    }
}

/// Current-holding bucket relative to the 50/50 split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PositionBucket {
    RiskyHeavy,
    Equal,
    SafeHeavy,
}

impl PositionBucket {
    pub fn from_tenths(w_tenths: u8) -> Self {
        match w_tenths.cmp(&5) {
            std::cmp::Ordering::Greater => PositionBucket::RiskyHeavy,
            std::cmp::Ordering::Equal => PositionBucket::Equal,
            std::cmp::Ordering::Less => PositionBucket::SafeHeavy,
        }
    }

    pub fn index(self) -> usize {
        match self {
            PositionBucket::RiskyHeavy => 0,
            PositionBucket::Equal => 1,
            PositionBucket::SafeHeavy => 2,
        }
    }
}

/// Dense state index; encoding/decoding is owned by [`StateSpaceConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(pub usize);

/// One observation variable that can enter the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateComponent {
    MomentumRisky,
    MomentumSafe,
    Correlation,
    Signal,
    Position,
    Quarter,
    TargetStatus,
    DrawdownStatus,
    Phase,
}

impl StateComponent {
    pub fn name(self) -> &'static str {
        match self {
            StateComponent::MomentumRisky => "momentum_risky",
            StateComponent::MomentumSafe => "momentum_safe",
            StateComponent::Correlation => "correlation",
            StateComponent::Signal => "signal",
            StateComponent::Position => "position",
            StateComponent::Quarter => "quarter",
            StateComponent::TargetStatus => "target_status",
            StateComponent::DrawdownStatus => "drawdown_status",
            StateComponent::Phase => "phase",
        }
    }
}

/// Which observation variables make up the state space.
///
/// `target_status_values` / `dd_status_values` are the cardinalities of the
/// corresponding status components: 0 disables the component, 2 tracks one
/// threshold, 3 tracks two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpaceConfig {
    #[serde(default)]
    pub use_momentum_pair: bool,
    #[serde(default)]
    pub use_correlation: bool,
    #[serde(default)]
    pub use_signal: bool,
    #[serde(default)]
    pub use_position: bool,
    #[serde(default)]
    pub use_quarter: bool,
    #[serde(default)]
    pub target_status_values: usize,
    #[serde(default)]
    pub dd_status_values: usize,
    #[serde(default)]
    pub use_phase: bool,
}

impl StateSpaceConfig {
    pub fn empty() -> Self {
        StateSpaceConfig {
            use_momentum_pair: false,
            use_correlation: false,
            use_signal: false,
            use_position: false,
            use_quarter: false,
            target_status_values: 0,
            dd_status_values: 0,
            use_phase: false,
        }
    }

    /// Momentum signs of both assets only (2x2 = 4 states).
    pub fn momentum_pair() -> Self {
        StateSpaceConfig {
            use_momentum_pair: true,
            ..Self::empty()
        }
    }

    /// Momentum pair plus the correlation bin (2x2x3 = 12 states).
    pub fn regime_aware() -> Self {
        StateSpaceConfig {
            use_momentum_pair: true,
            use_correlation: true,
            ..Self::empty()
        }
    }

    /// Signal, position and quarter, optionally extended with target and
    /// drawdown status components of the given cardinalities.
    pub fn constraint_case(target_status_values: usize, dd_status_values: usize) -> Self {
        StateSpaceConfig {
            use_signal: true,
            use_position: true,
            use_quarter: true,
            target_status_values,
            dd_status_values,
            ..Self::empty()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("target_status_values", self.target_status_values),
            ("dd_status_values", self.dd_status_values),
        ] {
            if !matches!(v, 0 | 2 | 3) {
                return Err(Error::Config(format!("{field} must be 0, 2 or 3, got {v}")));
            }
        }
        if self.components().is_empty() {
            return Err(Error::Config("state space has no enabled components".into()));
        }
        Ok(())
    }

    /// Enabled components with their cardinalities, in the fixed declaration
    /// order that also fixes the packing order.
    pub fn components(&self) -> Vec<(StateComponent, usize)> {
        let mut out = Vec::new();
        if self.use_momentum_pair {
            out.push((StateComponent::MomentumRisky, 2));
            out.push((StateComponent::MomentumSafe, 2));
        }
        if self.use_correlation {
            out.push((StateComponent::Correlation, 3));
        }
        if self.use_signal {
            out.push((StateComponent::Signal, 2));
        }
        if self.use_position {
            out.push((StateComponent::Position, 3));
        }
        if self.use_quarter {
            out.push((StateComponent::Quarter, 4));
        }
        if self.target_status_values > 0 {
            out.push((StateComponent::TargetStatus, self.target_status_values));
        }
        if self.dd_status_values > 0 {
            out.push((StateComponent::DrawdownStatus, self.dd_status_values));
        }
        if self.use_phase {
            out.push((StateComponent::Phase, 2));
        }
        out
    }

    pub fn n_states(&self) -> usize {
        self.components().iter().map(|(_, card)| card).product()
    }

    /// Packs an observation into a dense state index (mixed radix over the
    /// enabled components). Errors if an enabled component is missing from
    /// the observation or out of its range.
    pub fn encode_state(&self, obs: &Observation) -> Result<StateKey> {
        let mut idx = 0usize;
        for (comp, card) in self.components() {
            let v = obs.component_value(comp).ok_or_else(|| {
                Error::Config(format!("state component {} enabled but not observed", comp.name()))
            })?;
            if v >= card {
                return Err(Error::Config(format!(
                    "state component {} value {v} outside 0..{card}",
                    comp.name()
                )));
            }
            idx = idx * card + v;
        }
        Ok(StateKey(idx))
    }

    /// Unpacks a state index into per-component values (same order as
    /// [`Self::components`]).
    pub fn decode_state(&self, key: StateKey) -> Vec<usize> {
        let comps = self.components();
        let mut values = vec![0usize; comps.len()];
        let mut rest = key.0;
        for (slot, (_, card)) in comps.iter().enumerate().rev() {
            values[slot] = rest % card;
            rest /= card;
        }
        values
    }
}

/// Everything the encoder may need for one decision day. Components not in
/// the configured state space may be left `None`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Observation {
    pub momentum_risky: Option<MomentumSign>,
    pub momentum_safe: Option<MomentumSign>,
    pub correlation: Option<CorrBin>,
    pub signal: Option<Signal>,
    pub position: Option<PositionBucket>,
    pub quarter: Option<QuarterIdx>,
    pub target_level: Option<usize>,
    pub dd_level: Option<usize>,
    pub phase: Option<PhaseId>,
}

impl Observation {
    fn component_value(&self, comp: StateComponent) -> Option<usize> {
        match comp {
            StateComponent::MomentumRisky => self.momentum_risky.map(|m| m.index()),
            StateComponent::MomentumSafe => self.momentum_safe.map(|m| m.index()),
            StateComponent::Correlation => self.correlation.map(|c| c.index()),
            StateComponent::Signal => self.signal.map(|s| s.index()),
            StateComponent::Position => self.position.map(|p| p.index()),
            StateComponent::Quarter => self.quarter.map(|q| q.index()),
            StateComponent::TargetStatus => self.target_level,
            StateComponent::DrawdownStatus => self.dd_level,
            StateComponent::Phase => self.phase.map(|p| p.index()),
        }
    }
}
