//! `inspect-qtable`: human-readable summary of a serialized Q-table.

use std::fs::File;
use std::path::Path;

use rebal_core::agent::{read_qtable, QTable};
use rebal_core::env::{Action, StateKey};
use rebal_core::error::{Error, Result};

// Greedy shares split ties fractionally, so an all-zero table reports a
// uniform third per action.
fn greedy_shares<F: Fn(usize) -> bool>(q: &QTable, filter: F) -> ([f64; 3], usize) {
    let mut shares = [0.0f64; 3];
    let mut states = 0usize;
    for s in 0..q.n_states() {
        if !filter(s) {
            continue;
        }
        states += 1;
        let row = q.row(StateKey(s));
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..q.n_actions()).filter(|&a| row[a] == best).collect();
        for &a in &ties {
            shares[a] += 1.0 / ties.len() as f64;
        }
    }
    (shares, states)
}

pub fn cmd_inspect(path: &Path) -> Result<()> {
    let mut file = File::open(path)
        .map_err(|e| Error::InsufficientData(format!("{}: {e}", path.display())))?;
    let q = read_qtable(&mut file)?;
    let space = q
        .space()
        .ok_or_else(|| Error::Internal("deserialized table lost its state space".into()))?;

    let comps = space.components();
    let shape: Vec<String> = comps
        .iter()
        .map(|(c, card)| format!("{}({card})", c.name()))
        .collect();
    println!("state space: {}", shape.join(" x "));
    println!(
        "{} states x {} actions = {} cells",
        q.n_states(),
        q.n_actions(),
        q.n_states() * q.n_actions()
    );

    println!("per-action values:");
    for action in Action::ALL {
        let a = action.index();
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for s in 0..q.n_states() {
            let v = q.get(StateKey(s), a);
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        println!(
            "  {:<9} min {:>12.6} mean {:>12.6} max {:>12.6}",
            action.name(),
            min,
            sum / q.n_states() as f64,
            max
        );
    }

    let (shares, states) = greedy_shares(&q, |_| true);
    println!("greedy action share over {states} states (ties split evenly):");
    for action in Action::ALL {
        println!(
            "  {:<9} {:>6.1}%",
            action.name(),
            100.0 * shares[action.index()] / states as f64
        );
    }

    println!("greedy share by state component:");
    for (slot, (comp, card)) in comps.iter().enumerate() {
        for value in 0..*card {
            let (shares, states) =
                greedy_shares(&q, |s| space.decode_state(StateKey(s))[slot] == value);
            if states == 0 {
                continue;
            }
            let line: Vec<String> = Action::ALL
                .iter()
                .map(|a| format!("{} {:>5.1}%", a.name(), 100.0 * shares[a.index()] / states as f64))
                .collect();
            println!("  {}={value}: {}", comp.name(), line.join("  "));
        }
    }
    Ok(())
}
