//! Ex post efficiency as exact convex-hull membership.
//!
//! A random assignment is ex post efficient iff it is a convex combination
//! of Pareto optimal permutation matrices. Every matrix in any
//! decomposition must be consistent with the support, so the test
//! enumerates the consistent assignments, keeps the Pareto optimal ones,
//! and asks the exact LP kernel whether the given matrix lies in their
//! convex hull. Membership comes with a decomposition that can be
//! re-verified independently of the LP.

use crate::birkhoff::find_consistent_matching;
use crate::error::{Error, Result};
use crate::instance::{
    support, Decomposition, DeterministicAssignment, PreferenceProfile, RandomAssignment,
    SupportMask,
};
use crate::pareto::is_pareto_optimal;
use crate::rational::Rational;
use crate::simplex::solve_with_deadline;
use num::{One, Zero};
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

/// Cap on the number of consistent assignments the plain test will
/// enumerate before refusing.
pub const DEFAULT_ENUMERATION_GUARD: u128 = 1 << 20;

/// Verdict of the hull-membership test.
#[derive(Debug, Clone)]
pub enum HullMembershipResult {
    Member {
        /// Pareto optimal decomposition reconstructing the input exactly.
        decomposition: Decomposition,
        /// Pareto optimal generators that entered the LP.
        generators_enumerated: usize,
    },
    NotMember {
        reason: NotMemberReason,
        generators_enumerated: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotMemberReason {
    /// No Pareto optimal assignment is consistent with the support at all.
    NoParetoOptimalGenerators,
    /// The exact LP over every Pareto optimal generator is infeasible.
    LpInfeasible,
}

impl HullMembershipResult {
    pub fn is_member(&self) -> bool {
        matches!(self, HullMembershipResult::Member { .. })
    }

    pub fn decomposition(&self) -> Option<&Decomposition> {
        match self {
            HullMembershipResult::Member { decomposition, .. } => Some(decomposition),
            HullMembershipResult::NotMember { .. } => None,
        }
    }

    pub fn generators_enumerated(&self) -> usize {
        match self {
            HullMembershipResult::Member {
                generators_enumerated,
                ..
            }
            | HullMembershipResult::NotMember {
                generators_enumerated,
                ..
            } => *generators_enumerated,
        }
    }
}

/// Walks every perfect matching inside the mask in lexicographic
/// agent-by-agent order, with object indices ascending per agent.
fn for_each_consistent<F>(mask: &SupportMask, mut visit: F)
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let n = mask.n();
    let mut object_of = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let _ = descend(mask, n, &mut object_of, &mut used, &mut visit);
}

fn descend<F>(
    mask: &SupportMask,
    n: usize,
    object_of: &mut Vec<usize>,
    used: &mut Vec<bool>,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let agent = object_of.len();
    if agent == n {
        return visit(object_of);
    }
    // dead-subtree cut: every later agent must still have a free candidate
    for later in agent + 1..n {
        if !mask.candidates(later).any(|o| !used[o]) {
            return ControlFlow::Continue(());
        }
    }
    for obj in mask.candidates(agent) {
        if used[obj] {
            continue;
        }
        used[obj] = true;
        object_of.push(obj);
        let flow = descend(mask, n, object_of, used, visit);
        object_of.pop();
        used[obj] = false;
        flow?;
    }
    ControlFlow::Continue(())
}

/// Cheap exact upper bound on the number of perfect matchings: the
/// product of row degrees (saturating).
fn matching_count_bound(mask: &SupportMask) -> u128 {
    let mut bound: u128 = 1;
    for agent in 0..mask.n() {
        let degree = mask.candidates(agent).count() as u128;
        bound = bound.saturating_mul(degree.max(1));
        if degree == 0 {
            return 0;
        }
    }
    bound
}

/// Refuses enumeration unless the number of consistent assignments is at
/// most `guard`: first by the product bound, then by counting up to the
/// cap. Cost is bounded by the guard either way.
fn ensure_enumeration_guard(mask: &SupportMask, guard: u128) -> Result<u128> {
    let bound = matching_count_bound(mask);
    if bound <= guard {
        return Ok(bound);
    }
    let mut count: u128 = 0;
    let mut exceeded = false;
    for_each_consistent(mask, |_| {
        count += 1;
        if count > guard {
            exceeded = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if exceeded {
        Err(Error::GuardExceeded {
            what: "consistent assignment enumeration",
            limit: guard,
            estimate: count,
        })
    } else {
        Ok(count)
    }
}

/// Every perfect matching contained in the mask, exactly once, in
/// lexicographic agent-by-agent order. Errors if the count exceeds `guard`.
pub fn enumerate_consistent_assignments(
    mask: &SupportMask,
    guard: u128,
) -> Result<Vec<DeterministicAssignment>> {
    ensure_enumeration_guard(mask, guard)?;
    let mut out = Vec::new();
    for_each_consistent(mask, |objects| {
        out.push(
            DeterministicAssignment::new(objects.to_vec()).expect("enumerated bijection"),
        );
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// First consistent assignment in enumeration order with no trading
/// cycle, if any. This is the search problem whose decision version is
/// NP-complete, so the guard is essential.
pub fn has_consistent_pareto_optimal(
    profile: &PreferenceProfile,
    p: &RandomAssignment,
    guard: u128,
) -> Result<Option<DeterministicAssignment>> {
    let mask = support(p);
    ensure_enumeration_guard(&mask, guard)?;
    let mut found = None;
    for_each_consistent(&mask, |objects| {
        let d = DeterministicAssignment::new(objects.to_vec()).expect("bijection");
        if is_pareto_optimal(profile, &d) {
            found = Some(d);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(found)
}

/// Exact coefficients expressing `target` as a convex combination of the
/// generators, or `None` when no such combination exists.
///
/// The solution is basic, so at most rank-of-system many coefficients are
/// nonzero; for n-by-n assignment matrices that is at most n^2 - 2n + 2.
pub fn lp_membership(
    target: &[Rational],
    generators: &[DeterministicAssignment],
) -> Option<Vec<Rational>> {
    lp_membership_with_deadline(target, generators, None).expect("no deadline given")
}

fn lp_membership_with_deadline(
    target: &[Rational],
    generators: &[DeterministicAssignment],
    deadline: Option<Instant>,
) -> Result<Option<Vec<Rational>>> {
    assert!(!generators.is_empty(), "lp_membership needs generators");
    let n = generators[0].n();
    assert_eq!(target.len(), n * n, "target must be a flattened n-by-n matrix");
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for cell in 0..n * n {
        let (agent, obj) = (cell / n, cell % n);
        let coeffs: Vec<Rational> = generators
            .iter()
            .map(|g| {
                if g.object_of(agent) == obj {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        if coeffs.iter().all(Zero::is_zero) {
            if !target[cell].is_zero() {
                return Ok(None); // no generator can cover this cell
            }
            continue;
        }
        rows.push(coeffs);
        rhs.push(target[cell].clone());
    }
    rows.push(vec![Rational::one(); generators.len()]);
    rhs.push(Rational::one());
    solve_with_deadline(rows, rhs, deadline)
}

fn flatten(p: &RandomAssignment) -> Vec<Rational> {
    p.rows().iter().flatten().cloned().collect()
}

fn membership_from_lambda(
    p: &RandomAssignment,
    generators: Vec<DeterministicAssignment>,
    lambda: Option<Vec<Rational>>,
) -> HullMembershipResult {
    let generators_enumerated = generators.len();
    match lambda {
        None => HullMembershipResult::NotMember {
            reason: NotMemberReason::LpInfeasible,
            generators_enumerated,
        },
        Some(lambda) => {
            let terms: Vec<(Rational, DeterministicAssignment)> = lambda
                .into_iter()
                .zip(generators)
                .filter(|(coeff, _)| !coeff.is_zero())
                .collect();
            let decomposition =
                Decomposition::new(terms).expect("basic feasible solution is convex");
            debug_assert!(decomposition.verify_against(p).is_ok());
            HullMembershipResult::Member {
                decomposition,
                generators_enumerated,
            }
        }
    }
}

/// Decides ex post efficiency by enumerating consistent assignments,
/// filtering to Pareto optimal ones, and testing hull membership exactly.
pub fn is_ex_post_efficient(
    profile: &PreferenceProfile,
    p: &RandomAssignment,
    guard: u128,
) -> Result<HullMembershipResult> {
    let mask = support(p);
    ensure_enumeration_guard(&mask, guard)?;
    let mut generators = Vec::new();
    for_each_consistent(&mask, |objects| {
        let d = DeterministicAssignment::new(objects.to_vec()).expect("bijection");
        if is_pareto_optimal(profile, &d) {
            generators.push(d);
        }
        ControlFlow::Continue(())
    });
    if generators.is_empty() {
        return Ok(HullMembershipResult::NotMember {
            reason: NotMemberReason::NoParetoOptimalGenerators,
            generators_enumerated: 0,
        });
    }
    let lambda = lp_membership(&flatten(p), &generators);
    Ok(membership_from_lambda(p, generators, lambda))
}

/// Budgeted variant for supports too rich to enumerate outright: a
/// depth-first search over partial matchings prunes any branch already
/// containing a trading cycle among the decided agents, so only Pareto
/// optimal assignments reach the leaves. Exceeding the generator cap or
/// the time budget aborts with an error, never a wrong verdict.
pub fn is_ex_post_efficient_pruned(
    profile: &PreferenceProfile,
    p: &RandomAssignment,
    generator_cap: usize,
    budget: Duration,
) -> Result<HullMembershipResult> {
    let deadline = Instant::now() + budget;
    let budget_ms = budget.as_millis() as u64;
    let mask = support(p);
    let n = mask.n();
    let mut generators: Vec<DeterministicAssignment> = Vec::new();
    let mut object_of: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut nodes: u64 = 0;
    prune_collect(
        profile,
        &mask,
        n,
        &mut object_of,
        &mut used,
        &mut generators,
        generator_cap,
        deadline,
        budget_ms,
        &mut nodes,
    )?;
    if generators.is_empty() {
        return Ok(HullMembershipResult::NotMember {
            reason: NotMemberReason::NoParetoOptimalGenerators,
            generators_enumerated: 0,
        });
    }
    let lambda =
        lp_membership_with_deadline(&flatten(p), &generators, Some(deadline)).map_err(|_| {
            Error::BudgetExhausted {
                budget_ms,
                context: format!(
                    "hull membership LP over {} Pareto optimal generators",
                    generators.len()
                ),
            }
        })?;
    Ok(membership_from_lambda(p, generators, lambda))
}

#[allow(clippy::too_many_arguments)]
fn prune_collect(
    profile: &PreferenceProfile,
    mask: &SupportMask,
    n: usize,
    object_of: &mut Vec<usize>,
    used: &mut Vec<bool>,
    generators: &mut Vec<DeterministicAssignment>,
    generator_cap: usize,
    deadline: Instant,
    budget_ms: u64,
    nodes: &mut u64,
) -> Result<()> {
    *nodes += 1;
    if *nodes % 1024 == 0 && Instant::now() >= deadline {
        return Err(Error::BudgetExhausted {
            budget_ms,
            context: format!(
                "pruned search over consistent assignments ({} Pareto optimal so far)",
                generators.len()
            ),
        });
    }
    let agent = object_of.len();
    if agent == n {
        // no cycle ever appeared among decided agents, so this is Pareto optimal
        if generators.len() >= generator_cap {
            return Err(Error::GuardExceeded {
                what: "Pareto optimal generator collection",
                limit: generator_cap as u128,
                estimate: generators.len() as u128 + 1,
            });
        }
        generators
            .push(DeterministicAssignment::new(object_of.clone()).expect("bijection"));
        return Ok(());
    }
    for later in agent + 1..n {
        if !mask.candidates(later).any(|o| !used[o]) {
            return Ok(());
        }
    }
    for obj in mask.candidates(agent) {
        if used[obj] {
            continue;
        }
        object_of.push(obj);
        if !partial_cycle_through_newest(profile, object_of) {
            used[obj] = true;
            let result = prune_collect(
                profile,
                mask,
                n,
                object_of,
                used,
                generators,
                generator_cap,
                deadline,
                budget_ms,
                nodes,
            );
            used[obj] = false;
            if let Err(e) = result {
                object_of.pop();
                return Err(e);
            }
        }
        object_of.pop();
    }
    Ok(())
}

/// Any trading cycle introduced by the latest decision must pass through
/// the newest agent: search the decided demand graph for a path from one
/// of his targets back to him.
fn partial_cycle_through_newest(profile: &PreferenceProfile, object_of: &[usize]) -> bool {
    let k = object_of.len();
    let newest = k - 1;
    let mut seen = vec![false; k];
    let mut stack: Vec<usize> = (0..k)
        .filter(|&j| j != newest && profile.prefers(newest, object_of[j], object_of[newest]))
        .collect();
    while let Some(i) = stack.pop() {
        if i == newest {
            return true;
        }
        if seen[i] {
            continue;
        }
        seen[i] = true;
        for j in 0..k {
            if j != i && !seen[j] && profile.prefers(i, object_of[j], object_of[i]) {
                stack.push(j);
            }
        }
    }
    false
}

/// A consistent assignment in which no agent receives his top object, if
/// one exists. Such an assignment cannot be an outcome of serial
/// dictatorship, so it is not Pareto optimal and certifies that the
/// random assignment is not robust ex post efficient.
pub fn no_top_object_certificate(
    profile: &PreferenceProfile,
    p: &RandomAssignment,
) -> Option<DeterministicAssignment> {
    let mask = support(p);
    let n = mask.n();
    let grid: Vec<Vec<bool>> = (0..n)
        .map(|agent| {
            (0..n)
                .map(|obj| mask.positive(agent, obj) && obj != profile.top(agent))
                .collect()
        })
        .collect();
    let trimmed = SupportMask::from_grid(grid).expect("square grid");
    find_consistent_matching(&trimmed)
}
