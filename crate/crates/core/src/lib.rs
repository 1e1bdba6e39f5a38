//! Deterministic backtesting engine for dynamic two-asset allocation with
//! tabular reinforcement learning.
//!
//! The crate is organized around the study pipeline:
//!
//! - [`market`] — price ingestion, daily returns, fiscal-year partitioning,
//!   and a seeded regime-switching market generator
//! - [`features`] — discrete observation variables (momentum sign,
//!   correlation bin, look-ahead signal with corruption, quarter, phase)
//! - [`env`] — the portfolio environment: 11-point weight grid, three
//!   actions, rebalance-frequency constraints, state encoding
//! - [`reward`] — Sharpe ratios, the hindsight fixed-weight benchmark, the
//!   basic Sharpe-gap reward and target/drawdown shaping
//! - [`agent`] — Q-tables, SARSA / Q-learning updates, ε-greedy selection,
//!   the episode runner, and Q-table serialization
//! - [`protocol`] — experiment orchestration: per-year training,
//!   walk-forward evaluation with Q-table averaging, random baselines, and
//!   the constraint / accuracy / frequency / phase studies
//! - [`report`] — annual Sharpe, behavior-preference statistics, histograms,
//!   and plot-ready CSV emission

pub mod agent;
pub mod env;
pub mod error;
pub mod features;
pub mod market;
pub mod protocol;
pub mod report;
pub mod reward;
pub mod seeds;

pub use error::{Error, ErrorClass, Result};
