//! Deterministic Pareto optimality.
//!
//! An assignment is Pareto optimal iff its corresponding graph — objects
//! point to their holders, agents point to every object they strictly
//! prefer to their own — has no cycle. Cycle witnesses are produced
//! deterministically so they can be pinned in golden tests.

use crate::error::{Error, Result};
use crate::instance::{DeterministicAssignment, PreferenceProfile, RandomAssignment};
use crate::rational::Rational;
use itertools::Itertools;
use num::BigInt;

/// Full permutation enumeration makes RSD cost n! serial dictatorships.
pub const RSD_MAX_AGENTS: usize = 9;

/// A permutation of the agents used as a serial dictatorship order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentPermutation {
    order: Vec<usize>,
}

impl AgentPermutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &a in &order {
            if a >= n || seen[a] {
                return Err(Error::Invalid(
                    "agent order is not a permutation of all agents".into(),
                ));
            }
            seen[a] = true;
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// A cycle in the corresponding graph: each entry is an (agent, held
/// object) pair and every agent strictly prefers the next pair's object
/// to his own. Executing the trade Pareto-improves the assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingCycle {
    entries: Vec<(usize, usize)>,
}

impl TradingCycle {
    /// Builds a cycle from (agent, held object) pairs; use
    /// [`Self::validate`] to check it against a profile and assignment.
    pub fn from_entries(entries: Vec<(usize, usize)>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Invalid("trading cycle needs at least 2 pairs".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(a, _)| a)
    }

    /// Checks the cycle against a profile and assignment: held objects
    /// match, agents and objects are distinct, and every hop is a strict
    /// improvement.
    pub fn validate(&self, profile: &PreferenceProfile, d: &DeterministicAssignment) -> Result<()> {
        let m = self.entries.len();
        if m < 2 {
            return Err(Error::Invalid("trading cycle needs at least 2 pairs".into()));
        }
        for (i, &(agent, obj)) in self.entries.iter().enumerate() {
            if d.object_of(agent) != obj {
                return Err(Error::Invalid(format!(
                    "cycle lists agent {} holding object {} but the assignment disagrees",
                    agent + 1,
                    obj + 1
                )));
            }
            let (_, next_obj) = self.entries[(i + 1) % m];
            if !profile.prefers(agent, next_obj, obj) {
                return Err(Error::Invalid(format!(
                    "agent {} does not strictly prefer the next object in the cycle",
                    agent + 1
                )));
            }
        }
        let distinct_agents = self.agents().unique().count();
        if distinct_agents != m {
            return Err(Error::Invalid("cycle repeats an agent".into()));
        }
        Ok(())
    }
}

/// Agents in `pi` order each take their most preferred unallocated object.
pub fn serial_dictatorship(
    profile: &PreferenceProfile,
    pi: &AgentPermutation,
) -> DeterministicAssignment {
    let n = profile.n();
    assert_eq!(pi.order().len(), n, "permutation size mismatch");
    let mut taken = vec![false; n];
    let mut object_of = vec![usize::MAX; n];
    for &agent in pi.order() {
        let pick = profile
            .order(agent)
            .iter()
            .copied()
            .find(|&o| !taken[o])
            .expect("some object is always free");
        taken[pick] = true;
        object_of[agent] = pick;
    }
    DeterministicAssignment::new(object_of).expect("serial dictatorship yields a bijection")
}

/// The corresponding graph of a deterministic assignment: an edge (o, i)
/// iff agent i holds o, and an edge (i, o) iff i strictly prefers o to
/// his held object.
#[derive(Debug, Clone)]
pub struct CorrespondingGraph {
    /// holder_of[o] = the agent holding object o.
    holder_of: Vec<usize>,
    /// wants[i] = objects agent i strictly prefers to his own, in his
    /// preference order.
    wants: Vec<Vec<usize>>,
}

impl CorrespondingGraph {
    pub fn holder_of(&self, obj: usize) -> usize {
        self.holder_of[obj]
    }

    /// Out-edges of an agent, in preference order.
    pub fn wants(&self, agent: usize) -> &[usize] {
        &self.wants[agent]
    }
}

pub fn corresponding_graph(
    profile: &PreferenceProfile,
    d: &DeterministicAssignment,
) -> CorrespondingGraph {
    let n = profile.n();
    let mut holder_of = vec![0; n];
    for (agent, obj) in d.pairs() {
        holder_of[obj] = agent;
    }
    let wants = (0..n)
        .map(|agent| {
            let held = d.object_of(agent);
            profile
                .order(agent)
                .iter()
                .copied()
                .take_while(|&o| o != held)
                .collect()
        })
        .collect();
    CorrespondingGraph { holder_of, wants }
}

/// True iff the corresponding graph is acyclic, checked by repeatedly
/// retiring agents who hold their most preferred remaining object.
pub fn is_pareto_optimal(profile: &PreferenceProfile, d: &DeterministicAssignment) -> bool {
    let n = profile.n();
    let mut holder_of = vec![0; n];
    for (agent, obj) in d.pairs() {
        holder_of[obj] = agent;
    }
    let mut alive = vec![true; n];
    let mut alive_count = n;
    loop {
        let mut retired_any = false;
        for agent in 0..n {
            if !alive[agent] {
                continue;
            }
            let held = d.object_of(agent);
            // Is any remaining object strictly better for this agent?
            let happy = profile
                .order(agent)
                .iter()
                .take_while(|&&o| o != held)
                .all(|&o| !alive[holder_of[o]]);
            if happy {
                alive[agent] = false;
                alive_count -= 1;
                retired_any = true;
            }
        }
        if alive_count == 0 {
            return true;
        }
        if !retired_any {
            return false;
        }
    }
}

/// Finds a cycle in the corresponding graph if one exists.
///
/// Start agents are tried in ascending order and each agent's out-edges in
/// his preference order, so the witness is reproducible. The first start
/// agent on any cycle is the smallest agent of the returned cycle.
pub fn find_trading_cycle(
    profile: &PreferenceProfile,
    d: &DeterministicAssignment,
) -> Option<TradingCycle> {
    let n = profile.n();
    let graph = corresponding_graph(profile, d);
    // successors[i] = agents whose held object i wants, in preference order
    let successors: Vec<Vec<usize>> = (0..n)
        .map(|i| graph.wants(i).iter().map(|&o| graph.holder_of(o)).collect())
        .collect();

    let reaches = |target: usize, from: usize, banned: &[bool]| -> bool {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        while let Some(i) = stack.pop() {
            if i == target {
                return true;
            }
            if seen[i] || banned[i] {
                continue;
            }
            seen[i] = true;
            stack.extend(successors[i].iter().copied());
        }
        false
    };

    for start in 0..n {
        let none_banned = vec![false; n];
        let on_cycle = successors[start]
            .iter()
            .any(|&next| reaches(start, next, &none_banned));
        if !on_cycle {
            continue;
        }
        // Greedily walk the first completable out-edge at each step; this
        // is the path depth-first search would commit to.
        let mut entries = vec![(start, d.object_of(start))];
        let mut banned = vec![false; n];
        let mut current = start;
        loop {
            banned[current] = true;
            let mut advanced = false;
            for &next in &successors[current] {
                if next == start {
                    let cycle = TradingCycle { entries };
                    debug_assert!(cycle.validate(profile, d).is_ok());
                    return Some(cycle);
                }
                if !banned[next] && reaches(start, next, &banned) {
                    entries.push((next, d.object_of(next)));
                    current = next;
                    advanced = true;
                    break;
                }
            }
            assert!(advanced, "cycle completion vanished mid-walk");
        }
    }
    None
}

/// Exact average of serial dictatorship over all n! agent orders.
pub fn rsd_assignment(profile: &PreferenceProfile) -> Result<RandomAssignment> {
    let n = profile.n();
    if n > RSD_MAX_AGENTS {
        return Err(Error::GuardExceeded {
            what: "RSD permutation enumeration",
            limit: RSD_MAX_AGENTS as u128,
            estimate: n as u128,
        });
    }
    let mut counts = vec![vec![0u64; n]; n];
    let mut total = 0u64;
    for order in (0..n).permutations(n) {
        let pi = AgentPermutation { order };
        let d = serial_dictatorship(profile, &pi);
        for (agent, obj) in d.pairs() {
            counts[agent][obj] += 1;
        }
        total += 1;
    }
    let denom = BigInt::from(total);
    let entries = counts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| Rational::new(BigInt::from(c), denom.clone()))
                .collect()
        })
        .collect();
    RandomAssignment::new(entries)
}

/// Every agent gets every object with probability 1/n.
pub fn uniform_assignment(n: usize) -> RandomAssignment {
    let cell = Rational::new(BigInt::from(1), BigInt::from(n as u64));
    RandomAssignment::new(vec![vec![cell; n]; n]).expect("uniform matrix is bistochastic")
}
