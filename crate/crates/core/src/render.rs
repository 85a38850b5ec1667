//! Text rendering of witnesses and decompositions, shared by the CLI and
//! golden tests. Agents print 1-based, objects by name; output is fully
//! determined by its inputs.

use crate::instance::{Decomposition, DeterministicAssignment, PreferenceProfile};
use crate::pareto::TradingCycle;
use crate::sdeff::ConsistentTradingCycle;

pub fn render_assignment(d: &DeterministicAssignment, profile: &PreferenceProfile) -> String {
    d.pairs()
        .map(|(agent, obj)| format!("{}->{}", agent + 1, profile.object_name(obj)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// One line per term: "coefficient: agent->object, ...".
pub fn render_decomposition(dec: &Decomposition, profile: &PreferenceProfile) -> String {
    dec.terms()
        .iter()
        .map(|(coeff, d)| format!("{}: {}", coeff, render_assignment(d, profile)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// "1 -holds o2, wants o1-> 3 -holds o1, wants o2-> (back to 1)"
pub fn render_trading_cycle(cycle: &TradingCycle, profile: &PreferenceProfile) -> String {
    let entries = cycle.entries();
    let m = entries.len();
    let mut out = String::new();
    for (j, &(agent, held)) in entries.iter().enumerate() {
        let (_, next_held) = entries[(j + 1) % m];
        out.push_str(&format!(
            "{} -holds {}, wants {}-> ",
            agent + 1,
            profile.object_name(held),
            profile.object_name(next_held)
        ));
    }
    out.push_str(&format!("(back to {})", entries[0].0 + 1));
    out
}

pub fn render_consistent_cycle(
    cycle: &ConsistentTradingCycle,
    profile: &PreferenceProfile,
) -> String {
    let entries = cycle.entries();
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!(
            "{} -holds {}, wants {}-> ",
            e.agent + 1,
            profile.object_name(e.held),
            profile.object_name(e.desired)
        ));
    }
    out.push_str(&format!("(back to {})", entries[0].agent + 1));
    out
}
