//! Robust ex post efficiency.
//!
//! A random assignment is robust ex post efficient iff every decomposition
//! of it uses only Pareto optimal matrices — equivalently, iff no
//! non-Pareto-optimal deterministic assignment is consistent with it. The
//! notion is combinatorial: it depends only on the support.
//!
//! Two deciders are provided: an exhaustive scan of the consistent
//! assignments, and the polynomial algorithm for a bounded number of agent
//! types, which looks for a short consistent trading cycle with at most
//! one agent per type whose leftover agents still match up inside the
//! support.

use crate::birkhoff::find_consistent_matching;
use crate::error::Result;
use crate::expost::enumerate_consistent_assignments;
use crate::instance::{
    support, DeterministicAssignment, PreferenceProfile, RandomAssignment, SupportMask,
};
use crate::pareto::is_pareto_optimal;
use crate::sdeff::{ConsistentTradingCycle, CycleEntry};

/// CLI auto mode runs the type-bounded algorithm up to this many types.
pub const DEFAULT_TYPE_THRESHOLD: usize = 4;

/// Agents grouped by identical preference lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentTypePartition {
    /// type_of[agent] = type id, ids ordered by first appearance.
    type_of: Vec<usize>,
    /// agents of each type, ascending.
    members: Vec<Vec<usize>>,
}

impl AgentTypePartition {
    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn type_of(&self, agent: usize) -> usize {
        self.type_of[agent]
    }

    pub fn members(&self, type_id: usize) -> &[usize] {
        &self.members[type_id]
    }
}

/// Canonical partition of agents into preference types; k <= n.
pub fn compute_agent_types(profile: &PreferenceProfile) -> AgentTypePartition {
    let n = profile.n();
    let mut type_of = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    for agent in 0..n {
        let found = reps
            .iter()
            .position(|&rep| profile.order(rep) == profile.order(agent));
        match found {
            Some(t) => {
                type_of[agent] = t;
                members[t].push(agent);
            }
            None => {
                type_of[agent] = reps.len();
                reps.push(agent);
                members.push(vec![agent]);
            }
        }
    }
    AgentTypePartition { type_of, members }
}

/// Exhaustive decider: scans consistent assignments in enumeration order
/// and reports the first non-Pareto-optimal one as a witness.
///
/// Errors when the support admits more consistent assignments than
/// `guard`; callers may fall back to [`is_robust_by_types`].
pub fn is_robust_ex_post_efficient(
    profile: &PreferenceProfile,
    p: &RandomAssignment,
    guard: u128,
) -> Result<(bool, Option<DeterministicAssignment>)> {
    let mask = support(p);
    for d in enumerate_consistent_assignments(&mask, guard)? {
        if !is_pareto_optimal(profile, &d) {
            return Ok((false, Some(d)));
        }
    }
    Ok((true, None))
}

/// A witness is any consistent, non-Pareto-optimal deterministic
/// assignment; both checks are polynomial.
pub fn verify_non_robust_witness(
    profile: &PreferenceProfile,
    p: &RandomAssignment,
    d: &DeterministicAssignment,
) -> bool {
    d.n() == p.n() && d.consistent_with(&support(p)) && !is_pareto_optimal(profile, d)
}

/// Polynomial decider for a bounded number of agent types.
///
/// If any consistent trading cycle extends to a full consistent
/// assignment, one does with at most one agent per type: drop the
/// same-type agent holding the least preferred object and point it at the
/// next agent's target instead. So it suffices to scan ordered type
/// subsets (deduplicated by rotation: the smallest type leads), agents per
/// slot, and held objects per slot, checking that the remaining agents
/// still admit a perfect matching inside the support. Cost is O(n^(2k)).
pub fn is_robust_by_types(
    profile: &PreferenceProfile,
    p: &RandomAssignment,
) -> (bool, Option<ConsistentTradingCycle>) {
    let mask = support(p);
    let partition = compute_agent_types(profile);
    let k = partition.k();
    for tuple_len in 2..=k.max(1) {
        if tuple_len > k {
            break;
        }
        let mut types_in_tuple = Vec::with_capacity(tuple_len);
        let mut entries: Vec<CycleEntry> = Vec::with_capacity(tuple_len);
        if let Some(cycle) = search_type_tuples(
            profile,
            &mask,
            &partition,
            tuple_len,
            &mut types_in_tuple,
            &mut entries,
        ) {
            return (false, Some(cycle));
        }
    }
    (true, None)
}

/// Depth-first search over ordered type tuples and per-slot (agent, held
/// object) choices. Slot 0 fixes the smallest type in the tuple, killing
/// rotated duplicates of the same cycle.
fn search_type_tuples(
    profile: &PreferenceProfile,
    mask: &SupportMask,
    partition: &AgentTypePartition,
    tuple_len: usize,
    types_in_tuple: &mut Vec<usize>,
    entries: &mut Vec<CycleEntry>,
) -> Option<ConsistentTradingCycle> {
    let slot = entries.len();
    if slot == tuple_len {
        return None; // closed elsewhere
    }
    for type_id in 0..partition.k() {
        if types_in_tuple.contains(&type_id) {
            continue;
        }
        // canonical rotation: the lead slot carries the smallest type
        if slot > 0 && type_id < types_in_tuple[0] {
            continue;
        }
        types_in_tuple.push(type_id);
        for &agent in partition.members(type_id) {
            for held in mask.candidates(agent) {
                if entries.iter().any(|e| e.held == held) {
                    continue;
                }
                // chain constraint: the previous agent must strictly
                // prefer this held object to his own
                if let Some(prev) = entries.last() {
                    if !profile.prefers(prev.agent, held, prev.held) {
                        continue;
                    }
                }
                entries.push(CycleEntry {
                    agent,
                    held,
                    desired: usize::MAX, // fixed when the cycle closes
                });
                if entries.len() == tuple_len {
                    if let Some(cycle) = try_close(profile, mask, entries) {
                        return Some(cycle);
                    }
                } else if let Some(cycle) = search_type_tuples(
                    profile,
                    mask,
                    partition,
                    tuple_len,
                    types_in_tuple,
                    entries,
                ) {
                    return Some(cycle);
                }
                entries.pop();
            }
        }
        types_in_tuple.pop();
    }
    None
}

/// Closes the candidate cycle (last agent must strictly prefer the first
/// held object) and checks the agents outside it still match up.
fn try_close(
    profile: &PreferenceProfile,
    mask: &SupportMask,
    entries: &[CycleEntry],
) -> Option<ConsistentTradingCycle> {
    let first_held = entries[0].held;
    let last = entries.last().expect("nonempty");
    if !profile.prefers(last.agent, first_held, last.held) {
        return None;
    }
    let cycle_agents: Vec<usize> = entries.iter().map(|e| e.agent).collect();
    let cycle_objects: Vec<usize> = entries.iter().map(|e| e.held).collect();
    if !remainder_matchable(mask, &cycle_agents, &cycle_objects) {
        return None;
    }
    let m = entries.len();
    let closed: Vec<CycleEntry> = (0..m)
        .map(|j| CycleEntry {
            agent: entries[j].agent,
            held: entries[j].held,
            desired: entries[(j + 1) % m].held,
        })
        .collect();
    ConsistentTradingCycle::from_entries(closed).ok()
}

/// Perfect matching feasibility for the agents outside the cycle over the
/// objects outside the cycle, within the support.
fn remainder_matchable(mask: &SupportMask, agents_out: &[usize], objects_out: &[usize]) -> bool {
    let n = mask.n();
    let rest_agents: Vec<usize> = (0..n).filter(|a| !agents_out.contains(a)).collect();
    let rest_objects: Vec<usize> = (0..n).filter(|o| !objects_out.contains(o)).collect();
    let m = rest_agents.len();
    let grid: Vec<Vec<bool>> = rest_agents
        .iter()
        .map(|&a| {
            rest_objects
                .iter()
                .map(|&o| mask.positive(a, o))
                .collect()
        })
        .collect();
    if m == 0 {
        return true;
    }
    let sub = SupportMask::from_grid(grid).expect("square grid");
    find_consistent_matching(&sub).is_some()
}

/// The uniform assignment is robust ex post efficient iff preferences are
/// unanimous.
pub fn uniform_is_robust(profile: &PreferenceProfile) -> bool {
    profile.is_unanimous()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expost::DEFAULT_ENUMERATION_GUARD;
    use crate::format::parse_instance;
    use crate::pareto::{serial_dictatorship, uniform_assignment, AgentPermutation};

    fn example1_instance() -> (PreferenceProfile, RandomAssignment) {
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
    fn rsd_matrix_is_not_robust() {
        let (profile, p) = example1_instance();
        let (robust, witness) =
            is_robust_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        assert!(!robust);
        let witness = witness.unwrap();
        assert!(verify_non_robust_witness(&profile, &p, &witness));
    }

    #[test]
    fn unanimous_uniform_is_robust() {
        let profile = PreferenceProfile::new(
            (1..=3).map(|i| format!("o{i}")).collect(),
            vec![vec![0, 1, 2]; 3],
        )
        .unwrap();
        let p = uniform_assignment(3);
        let (robust, witness) =
            is_robust_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        assert!(robust && witness.is_none());
        assert!(uniform_is_robust(&profile));
    }

    #[test]
    fn deterministic_pareto_optimal_is_robust() {
        let (profile, _) = example1_instance();
        let pi = AgentPermutation::new(vec![3, 2, 1, 0]).unwrap();
        let d = serial_dictatorship(&profile, &pi);
        let p = RandomAssignment::from_deterministic(&d);
        let (robust, _) =
            is_robust_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        assert!(robust);
    }

    #[test]
    fn witness_verification_rejects_pareto_optimal_and_inconsistent() {
        let (profile, p) = example1_instance();
        // serial dictatorship outcome: consistent (full support) but PO
        let pi = AgentPermutation::new(vec![0, 1, 2, 3]).unwrap();
        let po = serial_dictatorship(&profile, &pi);
        assert!(!verify_non_robust_witness(&profile, &p, &po));

        // non-PO assignment on a zero cell: inconsistent
        let d0 = DeterministicAssignment::new(vec![1, 3, 0, 2]).unwrap();
        let sparse = RandomAssignment::from_deterministic(&serial_dictatorship(
            &profile,
            &AgentPermutation::new(vec![0, 1, 2, 3]).unwrap(),
        ));
        assert!(!verify_non_robust_witness(&profile, &sparse, &d0));
    }

    #[test]
    fn agent_types_of_example1() {
        let (profile, _) = example1_instance();
        let partition = compute_agent_types(&profile);
        assert_eq!(partition.k(), 2);
        assert_eq!(partition.members(0), &[0, 1]);
        assert_eq!(partition.members(1), &[2, 3]);
        assert_eq!(partition.type_of(3), 1);
    }

    #[test]
    fn agent_types_distinct_and_unanimous() {
        let distinct = PreferenceProfile::new(
            (1..=3).map(|i| format!("o{i}")).collect(),
            vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
        )
        .unwrap();
        assert_eq!(compute_agent_types(&distinct).k(), 3);
        let unanimous = PreferenceProfile::new(
            (1..=4).map(|i| format!("o{i}")).collect(),
            vec![vec![3, 2, 1, 0]; 4],
        )
        .unwrap();
        assert_eq!(compute_agent_types(&unanimous).k(), 1);
    }

    #[test]
    fn type_bounded_decider_agrees_on_example1() {
        let (profile, p) = example1_instance();
        let (robust, cycle) = is_robust_by_types(&profile, &p);
        assert!(!robust);
        let cycle = cycle.unwrap();
        cycle.validate(&profile, &p).unwrap();
    }

    #[test]
    fn type_bounded_decider_on_unanimous_profiles() {
        let profile = PreferenceProfile::new(
            (1..=4).map(|i| format!("o{i}")).collect(),
            vec![vec![0, 1, 2, 3]; 4],
        )
        .unwrap();
        let p = uniform_assignment(4);
        let (robust, cycle) = is_robust_by_types(&profile, &p);
        assert!(robust && cycle.is_none());
    }

    #[test]
    fn uniform_is_robust_examples() {
        let (profile, _) = example1_instance();
        assert!(!uniform_is_robust(&profile));
        let single = PreferenceProfile::new(vec!["o1".into()], vec![vec![0]]).unwrap();
        assert!(uniform_is_robust(&single));
    }
}
