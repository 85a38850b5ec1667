//! Birkhoff decomposition of bistochastic matrices.
//!
//! Any bistochastic matrix is a convex combination of at most n^2 - n + 1
//! permutation matrices: repeatedly find a perfect matching inside the
//! support, subtract as much of it as possible, and recurse on the rest.

use crate::error::{Error, Result};
use crate::instance::{
    support, Decomposition, DeterministicAssignment, RandomAssignment, SupportMask,
};
use crate::rational::Rational;
use num::Zero;

/// A perfect matching inside the support graph, if one exists.
///
/// Augmenting-path search seeded greedily, rows processed ascending, so the
/// returned matching is deterministic. For a mask taken from a valid
/// bistochastic matrix a matching always exists.
pub fn find_consistent_matching(mask: &SupportMask) -> Option<DeterministicAssignment> {
    let n = mask.n();
    // owner_of[obj] = agent currently matched to obj
    let mut owner_of: Vec<Option<usize>> = vec![None; n];
    for agent in 0..n {
        let mut visited = vec![false; n];
        if !augment(mask, agent, &mut owner_of, &mut visited) {
            return None;
        }
    }
    let mut object_of = vec![usize::MAX; n];
    for (obj, owner) in owner_of.iter().enumerate() {
        object_of[owner.expect("complete matching")] = obj;
    }
    Some(DeterministicAssignment::new(object_of).expect("matching is a bijection"))
}

fn augment(
    mask: &SupportMask,
    agent: usize,
    owner_of: &mut Vec<Option<usize>>,
    visited: &mut Vec<bool>,
) -> bool {
    for obj in mask.candidates(agent) {
        if visited[obj] {
            continue;
        }
        visited[obj] = true;
        let free = match owner_of[obj] {
            None => true,
            Some(owner) => augment(mask, owner, owner_of, visited),
        };
        if free {
            owner_of[obj] = Some(agent);
            return true;
        }
    }
    false
}

/// Subtracts as much of permutation `d` from `p` as possible.
///
/// Returns the peeled coefficient (the minimum of the matched entries) and
/// the raw remainder `p - lambda * P`, which is nonnegative, has at least
/// one more zero than `p`, and is bistochastic after renormalizing by
/// `1 - lambda` when `lambda < 1`.
pub fn peel(
    p: &RandomAssignment,
    d: &DeterministicAssignment,
) -> Result<(Rational, Vec<Vec<Rational>>)> {
    if !d.consistent_with(&support(p)) {
        return Err(Error::Precondition(
            "permutation uses a zero cell of the matrix".into(),
        ));
    }
    let lambda = d
        .pairs()
        .map(|(i, o)| p.entry(i, o).clone())
        .min()
        .expect("nonempty assignment");
    let mut remainder: Vec<Vec<Rational>> = p.rows().to_vec();
    for (i, o) in d.pairs() {
        remainder[i][o] -= &lambda;
    }
    Ok((lambda, remainder))
}

/// Decomposes a bistochastic matrix into a convex combination of
/// permutation matrices via Birkhoff's algorithm.
pub fn birkhoff_decompose(p: &RandomAssignment) -> Decomposition {
    let n = p.n();
    let mut rows: Vec<Vec<Rational>> = p.rows().to_vec();
    let mut budget = Rational::from_integer(1.into());
    let mut terms = Vec::new();
    while !budget.is_zero() {
        let mask = SupportMask::from_grid(
            rows.iter()
                .map(|row| row.iter().map(|v| !v.is_zero()).collect())
                .collect(),
        )
        .expect("square grid");
        let d = find_consistent_matching(&mask)
            .expect("a bistochastic remainder always contains a matching");
        let lambda = d
            .pairs()
            .map(|(i, o)| rows[i][o].clone())
            .min()
            .expect("nonempty");
        for (i, o) in d.pairs() {
            rows[i][o] -= &lambda;
        }
        budget -= &lambda;
        terms.push((lambda, d));
        debug_assert!(terms.len() <= n * n - n + 1, "term bound exceeded");
    }
    debug_assert!(rows.iter().flatten().all(Zero::is_zero));
    Decomposition::new(terms).expect("peeled coefficients sum to 1")
}
