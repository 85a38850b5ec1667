//! SD-efficiency testing.
//!
//! A random assignment is SD-efficient iff no trading cycle is consistent
//! with it: a cycle of agents and objects where every object points to an
//! agent holding it with positive probability and every agent points to an
//! object he strictly prefers to the one pointing at him.
//!
//! Existence depends only on the support, so the fast path checks the
//! object-pointing digraph for a cycle; a witness is then extracted from
//! the (agent, held object) state graph and reduced to a simple cycle.

use crate::error::{Error, Result};
use crate::instance::{support, PreferenceProfile, RandomAssignment, SupportMask};
use crate::rational::Rational;
use num::Zero;

/// A trading cycle consistent with a random assignment. Entry `j` says
/// `agent` holds `held` (with positive probability) and points at
/// `desired`, which is the next entry's held object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistentTradingCycle {
    entries: Vec<CycleEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleEntry {
    pub agent: usize,
    pub held: usize,
    pub desired: usize,
}

impl ConsistentTradingCycle {
    /// Builds a cycle from explicit entries, checking the structural
    /// invariants (chaining, distinct agents and objects, length >= 2).
    /// Profile and probability constraints are checked by [`Self::validate`].
    pub fn from_entries(entries: Vec<CycleEntry>) -> Result<Self> {
        let m = entries.len();
        if m < 2 {
            return Err(Error::Invalid("consistent cycle needs at least 2 entries".into()));
        }
        for (j, e) in entries.iter().enumerate() {
            if e.desired != entries[(j + 1) % m].held {
                return Err(Error::Invalid("cycle entries do not chain".into()));
            }
            for other in &entries[j + 1..] {
                if e.agent == other.agent || e.held == other.held {
                    return Err(Error::Invalid("cycle repeats an agent or object".into()));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CycleEntry] {
        &self.entries
    }

    pub fn agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.agent)
    }

    pub fn held_objects(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.held)
    }

    pub fn validate(&self, profile: &PreferenceProfile, p: &RandomAssignment) -> Result<()> {
        let m = self.entries.len();
        if m < 2 {
            return Err(Error::Invalid("consistent cycle needs at least 2 entries".into()));
        }
        for (j, e) in self.entries.iter().enumerate() {
            if p.entry(e.agent, e.held).is_zero() {
                return Err(Error::Invalid(format!(
                    "agent {} holds object {} with probability 0",
                    e.agent + 1,
                    e.held + 1
                )));
            }
            if !profile.prefers(e.agent, e.desired, e.held) {
                return Err(Error::Invalid(format!(
                    "agent {} does not strictly prefer his desired object",
                    e.agent + 1
                )));
            }
            let next = &self.entries[(j + 1) % m];
            if e.desired != next.held {
                return Err(Error::Invalid("cycle entries do not chain".into()));
            }
        }
        for (j, e) in self.entries.iter().enumerate() {
            for other in &self.entries[j + 1..] {
                if e.agent == other.agent {
                    return Err(Error::Invalid("cycle repeats an agent".into()));
                }
                if e.held == other.held {
                    return Err(Error::Invalid("cycle repeats an object".into()));
                }
            }
        }
        Ok(())
    }
}

/// Digraph on objects: o -> o' iff some agent holds o with positive
/// probability and strictly prefers o'. SD-efficiency is equivalent to
/// this digraph being acyclic, which is why the notion is combinatorial.
fn object_digraph(profile: &PreferenceProfile, mask: &SupportMask) -> Vec<Vec<bool>> {
    let n = profile.n();
    let mut edge = vec![vec![false; n]; n];
    for agent in 0..n {
        for held in mask.candidates(agent) {
            for &better in profile.order(agent) {
                if better == held {
                    break;
                }
                edge[held][better] = true;
            }
        }
    }
    edge
}

fn digraph_has_cycle(edge: &[Vec<bool>]) -> bool {
    let n = edge.len();
    // iterative three-color DFS
    let mut color = vec![0u8; n]; // 0 unseen, 1 on stack, 2 done
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (node, next) = stack[top];
            if next == n {
                color[node] = 2;
                stack.pop();
                continue;
            }
            stack[top].1 += 1;
            if !edge[node][next] {
                continue;
            }
            match color[next] {
                1 => return true,
                0 => {
                    color[next] = 1;
                    stack.push((next, 0));
                }
                _ => {}
            }
        }
    }
    false
}

/// States of the witness search: (agent, held object) with positive
/// probability. Successors follow the agent's preference order, then
/// ascending next agent, so witnesses are deterministic.
struct StateGraph<'a> {
    profile: &'a PreferenceProfile,
    mask: &'a SupportMask,
}

impl StateGraph<'_> {
    fn successors(&self, agent: usize, held: usize) -> Vec<(usize, usize)> {
        let n = self.profile.n();
        let mut out = Vec::new();
        for &desired in self.profile.order(agent) {
            if desired == held {
                break;
            }
            for next_agent in 0..n {
                if self.mask.positive(next_agent, desired) {
                    out.push((next_agent, desired));
                }
            }
        }
        out
    }
}

/// Finds a trading cycle consistent with `p` if one exists. The witness is
/// deterministic: start states are scanned by ascending agent and the
/// agent's preference order over held objects, and the first cycle found by
/// depth-first search is reduced to a simple cycle and rotated so the
/// smallest agent leads.
pub fn find_consistent_cycle(
    profile: &PreferenceProfile,
    p: &RandomAssignment,
) -> Option<ConsistentTradingCycle> {
    let mask = support(p);
    find_consistent_cycle_in_support(profile, &mask, p)
}

fn find_consistent_cycle_in_support(
    profile: &PreferenceProfile,
    mask: &SupportMask,
    p: &RandomAssignment,
) -> Option<ConsistentTradingCycle> {
    let n = profile.n();
    let objects = object_digraph(profile, mask);
    if !digraph_has_cycle(&objects) {
        return None;
    }
    // Only objects lying on a cycle of the object digraph can appear as a
    // held object of a consistent cycle.
    let on_cycle: Vec<bool> = (0..n).map(|o| object_reaches_itself(&objects, o)).collect();

    let graph = StateGraph { profile, mask };
    for start_agent in 0..n {
        for &start_held in profile.order(start_agent) {
            if !mask.positive(start_agent, start_held) || !on_cycle[start_held] {
                continue;
            }
            if let Some(walk) = closed_walk_from(&graph, n, (start_agent, start_held)) {
                let entries = reduce_to_simple_cycle(profile, walk);
                let cycle = ConsistentTradingCycle {
                    entries: canonical_rotation(entries),
                };
                debug_assert!(cycle.validate(profile, p).is_ok());
                return Some(cycle);
            }
        }
    }
    None
}

fn object_reaches_itself(edge: &[Vec<bool>], obj: usize) -> bool {
    let n = edge.len();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&m| edge[obj][m]).collect();
    while let Some(o) = stack.pop() {
        if o == obj {
            return true;
        }
        if seen[o] {
            continue;
        }
        seen[o] = true;
        stack.extend((0..n).filter(|&m| edge[o][m]));
    }
    false
}

/// Depth-first search from `start` over the state graph, recording tree
/// parents; the first edge back to `start` closes a walk.
fn closed_walk_from(
    graph: &StateGraph,
    n: usize,
    start: (usize, usize),
) -> Option<Vec<(usize, usize)>> {
    let idx = |(a, o): (usize, usize)| a * n + o;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n * n];
    let mut seen = vec![false; n * n];
    seen[idx(start)] = true;
    let mut stack = vec![start];
    while let Some(state) = stack.pop() {
        let succs = graph.successors(state.0, state.1);
        for &succ in &succs {
            if succ == start {
                // reconstruct walk start -> ... -> state
                let mut walk = vec![state];
                let mut cursor = state;
                while let Some(prev) = parent[idx(cursor)] {
                    walk.push(prev);
                    cursor = prev;
                }
                walk.reverse();
                return Some(walk);
            }
        }
        // reversed so the most preferred successor is explored first
        for &succ in succs.iter().rev() {
            if !seen[idx(succ)] {
                seen[idx(succ)] = true;
                parent[idx(succ)] = Some(state);
                stack.push(succ);
            }
        }
    }
    None
}

/// Collapses repeated agents and objects out of a closed walk, preserving
/// the chaining and strict-preference constraints.
fn reduce_to_simple_cycle(
    profile: &PreferenceProfile,
    walk: Vec<(usize, usize)>,
) -> Vec<CycleEntry> {
    let mut entries: Vec<CycleEntry> = {
        let m = walk.len();
        (0..m)
            .map(|j| CycleEntry {
                agent: walk[j].0,
                held: walk[j].1,
                desired: walk[(j + 1) % m].1,
            })
            .collect()
    };
    loop {
        let m = entries.len();
        // repeated agent: keep the occurrence holding the least preferred
        // object and jump straight to where the other occurrence pointed
        let mut dup_agent = None;
        'agents: for a in 0..m {
            for b in 0..m {
                if a != b && entries[a].agent == entries[b].agent {
                    dup_agent = Some((a, b));
                    break 'agents;
                }
            }
        }
        if let Some((a, b)) = dup_agent {
            let agent = entries[a].agent;
            let (keep, other) =
                if profile.prefers(agent, entries[b].held, entries[a].held) {
                    (a, b)
                } else {
                    (b, a)
                };
            let spliced_desired = entries[other].desired;
            let mut new_entries = Vec::with_capacity(m);
            new_entries.push(CycleEntry {
                desired: spliced_desired,
                ..entries[keep]
            });
            // keep entries strictly after `other`, wrapping, up to `keep`
            let mut j = (other + 1) % m;
            while j != keep {
                new_entries.push(entries[j]);
                j = (j + 1) % m;
            }
            entries = new_entries;
            continue;
        }
        // repeated held object: keep the inner subcycle between occurrences
        let mut dup_obj = None;
        'objects: for a in 0..m {
            for b in a + 1..m {
                if entries[a].held == entries[b].held {
                    dup_obj = Some((a, b));
                    break 'objects;
                }
            }
        }
        if let Some((a, b)) = dup_obj {
            entries = entries[a..b].to_vec();
            continue;
        }
        break;
    }
    entries
}

fn canonical_rotation(entries: Vec<CycleEntry>) -> Vec<CycleEntry> {
    let lead = entries
        .iter()
        .enumerate()
        .min_by_key(|(_, e)| e.agent)
        .map(|(j, _)| j)
        .unwrap_or(0);
    let mut rotated = entries;
    rotated.rotate_left(lead);
    rotated
}

/// True iff no trading cycle is consistent with `p`.
pub fn is_sd_efficient(profile: &PreferenceProfile, p: &RandomAssignment) -> bool {
    find_consistent_cycle(profile, p).is_none()
}

/// Shifts probability `epsilon = min p(agent)(held)` around the cycle:
/// every cycle agent gets that much less of his held object and more of
/// his desired one. The result SD-dominates `p`, strictly for cycle agents.
pub fn execute_cycle(p: &RandomAssignment, cycle: &ConsistentTradingCycle) -> RandomAssignment {
    let epsilon = cycle
        .entries()
        .iter()
        .map(|e| p.entry(e.agent, e.held).clone())
        .min()
        .expect("cycle is nonempty");
    let mut rows: Vec<Vec<Rational>> = p.rows().to_vec();
    for e in cycle.entries() {
        rows[e.agent][e.held] -= &epsilon;
        rows[e.agent][e.desired] += &epsilon;
    }
    RandomAssignment::new(rows).expect("cycle shift preserves bistochasticity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;
    use crate::instance::{sd_prefers, DeterministicAssignment, SdComparison};
    use crate::pareto::{serial_dictatorship, AgentPermutation};

    fn example1_with_p() -> (PreferenceProfile, RandomAssignment) {
        let text = "\
agents: 4
objects: o1 o2 o3 o4
prefs:
1: o1 o2 o3 o4
2: o1 o2 o3 o4
3: o2 o1 o4 o3
4: o2 o1 o4 o3
assignment:
5/12 1/12 5/12 1/12
5/12 1/12 5/12 1/12
1/12 5/12 1/12 5/12
1/12 5/12 1/12 5/12
";
        let (profile, p) = parse_instance(text).unwrap();
        (profile, p.unwrap())
    }

    #[test]
    fn rsd_matrix_admits_consistent_cycle() {
        let (profile, p) = example1_with_p();
        let cycle = find_consistent_cycle(&profile, &p).expect("p is not SD-efficient");
        cycle.validate(&profile, &p).unwrap();
        assert!(!is_sd_efficient(&profile, &p));
    }

    #[test]
    fn pareto_optimal_deterministic_is_sd_efficient() {
        let (profile, _) = example1_with_p();
        let pi = AgentPermutation::new(vec![2, 0, 3, 1]).unwrap();
        let d = serial_dictatorship(&profile, &pi);
        let p = RandomAssignment::from_deterministic(&d);
        assert!(is_sd_efficient(&profile, &p));
    }

    #[test]
    fn opposed_tops_make_uniform_inefficient_with_short_cycle() {
        let text = "agents: 2\nobjects: a b\nprefs:\n1: a b\n2: b a\n";
        let (profile, _) = parse_instance(text).unwrap();
        let p = crate::pareto::uniform_assignment(2);
        let cycle = find_consistent_cycle(&profile, &p).expect("uniform not SD-efficient here");
        assert_eq!(cycle.entries().len(), 2);
        cycle.validate(&profile, &p).unwrap();
        // agent 1 holds b and wants a; agent 2 holds a and wants b
        assert_eq!(cycle.entries()[0].agent, 0);
        assert_eq!(cycle.entries()[0].held, 1);
        assert_eq!(cycle.entries()[0].desired, 0);
    }

    #[test]
    fn singleton_is_sd_efficient() {
        let (profile, p) = parse_instance("agents: 1\nobjects: o1\nprefs:\n1: o1\nassignment:\n1\n")
            .map(|(pr, p)| (pr, p.unwrap()))
            .unwrap();
        assert!(is_sd_efficient(&profile, &p));
    }

    #[test]
    fn executing_the_cycle_sd_improves() {
        let (profile, p) = example1_with_p();
        let cycle = find_consistent_cycle(&profile, &p).unwrap();
        let q = execute_cycle(&p, &cycle);
        let cycle_agents: Vec<usize> = cycle.agents().collect();
        for agent in 0..profile.n() {
            let cmp = sd_prefers(&profile, agent, q.row(agent), p.row(agent)).unwrap();
            assert!(cmp.weakly_dominates(), "agent {agent}: {cmp:?}");
            if cycle_agents.contains(&agent) {
                assert_eq!(cmp, SdComparison::StrictlyPrefers);
            }
        }
    }

    #[test]
    fn witness_is_deterministic() {
        let (profile, p) = example1_with_p();
        let a = find_consistent_cycle(&profile, &p).unwrap();
        let b = find_consistent_cycle(&profile, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_dominated_assignment_has_cycle() {
        let (profile, _) = example1_with_p();
        let d = DeterministicAssignment::new(vec![1, 3, 0, 2]).unwrap();
        let p = RandomAssignment::from_deterministic(&d);
        assert!(!is_sd_efficient(&profile, &p));
    }
}
