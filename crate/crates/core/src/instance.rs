//! Domain types: preference profiles, random and deterministic assignments,
//! decompositions, support masks, and the stochastic-dominance relation.
//!
//! All types are immutable after construction and validated eagerly, so the
//! rest of the library can rely on their invariants.

use crate::error::{Error, Result};
use crate::rational::{in_unit_interval, Rational};
use num::{One, Zero};

/// Largest instance size accepted by constructors and the parser.
/// Enumeration-based operations have separate, much tighter guards.
pub const MAX_AGENTS: usize = 64;

/// Strict preference orders of `n` agents over `n` objects.
///
/// Objects are identified by strings externally and dense indices
/// internally; the mapping is fixed by declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    object_names: Vec<String>,
    /// prefs[agent][rank] = object index, most preferred first.
    prefs: Vec<Vec<usize>>,
    /// ranks[agent][object] = rank of the object in the agent's order.
    ranks: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    pub fn new(object_names: Vec<String>, prefs: Vec<Vec<usize>>) -> Result<Self> {
        let n = object_names.len();
        if n == 0 {
            return Err(Error::Invalid("empty instance".into()));
        }
        if n > MAX_AGENTS {
            return Err(Error::GuardExceeded {
                what: "agent count",
                limit: MAX_AGENTS as u128,
                estimate: n as u128,
            });
        }
        if prefs.len() != n {
            return Err(Error::Invalid(format!(
                "{} agents but {} objects: instance must be square",
                prefs.len(),
                n
            )));
        }
        for (i, name) in object_names.iter().enumerate() {
            if object_names[..i].contains(name) {
                return Err(Error::Invalid(format!("duplicate object name '{name}'")));
            }
        }
        let mut ranks = vec![vec![usize::MAX; n]; n];
        for (agent, order) in prefs.iter().enumerate() {
            if order.len() != n {
                return Err(Error::Invalid(format!(
                    "agent {} ranks {} objects, expected {}",
                    agent + 1,
                    order.len(),
                    n
                )));
            }
            for (rank, &obj) in order.iter().enumerate() {
                if obj >= n {
                    return Err(Error::Invalid(format!(
                        "agent {} ranks unknown object index {}",
                        agent + 1,
                        obj
                    )));
                }
                if ranks[agent][obj] != usize::MAX {
                    return Err(Error::Invalid(format!(
                        "agent {} lists object '{}' twice",
                        agent + 1,
                        object_names[obj]
                    )));
                }
                ranks[agent][obj] = rank;
            }
        }
        Ok(Self {
            object_names,
            prefs,
            ranks,
        })
    }

    pub fn n(&self) -> usize {
        self.object_names.len()
    }

    pub fn object_names(&self) -> &[String] {
        &self.object_names
    }

    pub fn object_name(&self, obj: usize) -> &str {
        &self.object_names[obj]
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.object_names.iter().position(|x| x == name)
    }

    /// The agent's preference order, most preferred first.
    pub fn order(&self, agent: usize) -> &[usize] {
        &self.prefs[agent]
    }

    pub fn rank(&self, agent: usize, obj: usize) -> usize {
        self.ranks[agent][obj]
    }

    /// True iff `agent` strictly prefers `a` to `b`.
    pub fn prefers(&self, agent: usize, a: usize, b: usize) -> bool {
        self.ranks[agent][a] < self.ranks[agent][b]
    }

    pub fn top(&self, agent: usize) -> usize {
        self.prefs[agent][0]
    }

    /// True iff all agents share one preference list.
    pub fn is_unanimous(&self) -> bool {
        self.prefs.iter().all(|p| *p == self.prefs[0])
    }
}

/// A bijection from agents to objects (a permutation matrix).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicAssignment {
    object_of: Vec<usize>,
}

impl DeterministicAssignment {
    pub fn new(object_of: Vec<usize>) -> Result<Self> {
        let n = object_of.len();
        let mut seen = vec![false; n];
        for &obj in &object_of {
            if obj >= n || seen[obj] {
                return Err(Error::Invalid(
                    "assignment is not a bijection between agents and objects".into(),
                ));
            }
            seen[obj] = true;
        }
        Ok(Self { object_of })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            object_of: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.object_of.len()
    }

    /// Object allocated to `agent`.
    pub fn object_of(&self, agent: usize) -> usize {
        self.object_of[agent]
    }

    /// Agent holding `obj`.
    pub fn agent_of(&self, obj: usize) -> usize {
        self.object_of.iter().position(|&o| o == obj).unwrap()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.object_of.iter().copied().enumerate()
    }

    /// True iff every cell used by this assignment is positive in `mask`.
    pub fn consistent_with(&self, mask: &SupportMask) -> bool {
        self.pairs().all(|(i, o)| mask.positive(i, o))
    }
}

/// An n-by-n bistochastic matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomAssignment {
    entries: Vec<Vec<Rational>>,
}

impl RandomAssignment {
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Invalid("empty assignment matrix".into()));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Invalid(format!(
                    "assignment row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !in_unit_interval(v) {
                    return Err(Error::Invalid(format!(
                        "assignment entry ({}, {}) = {} outside [0, 1]",
                        i + 1,
                        j + 1,
                        v
                    )));
                }
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(Error::Invalid(format!(
                    "assignment row {} sums to {}, expected 1",
                    i + 1,
                    sum
                )));
            }
        }
        for j in 0..n {
            let sum: Rational = entries.iter().map(|row| row[j].clone()).sum();
            if !sum.is_one() {
                return Err(Error::Invalid(format!(
                    "assignment column {} sums to {}, expected 1",
                    j + 1,
                    sum
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_deterministic(d: &DeterministicAssignment) -> Self {
        let n = d.n();
        let mut entries = vec![vec![Rational::zero(); n]; n];
        for (i, o) in d.pairs() {
            entries[i][o] = Rational::one();
        }
        Self { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, agent: usize, obj: usize) -> &Rational {
        &self.entries[agent][obj]
    }

    /// The allocation row of `agent`.
    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.entries[agent]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    /// Returns the permutation this matrix encodes, if it is 0/1.
    pub fn as_deterministic(&self) -> Option<DeterministicAssignment> {
        let mut object_of = Vec::with_capacity(self.n());
        for row in &self.entries {
            let mut hit = None;
            for (j, v) in row.iter().enumerate() {
                if v.is_one() {
                    hit = Some(j);
                } else if !v.is_zero() {
                    return None;
                }
            }
            object_of.push(hit?);
        }
        DeterministicAssignment::new(object_of).ok()
    }
}

/// The zero/nonzero pattern of a random assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask {
    positive: Vec<Vec<bool>>,
}

impl SupportMask {
    /// Builds a mask from an explicit grid. Masks straight from a valid
    /// bistochastic matrix always have a positive cell in every row and
    /// column; grids built by hand need not.
    pub fn from_grid(positive: Vec<Vec<bool>>) -> Result<Self> {
        let n = positive.len();
        if positive.iter().any(|row| row.len() != n) {
            return Err(Error::Invalid("support mask must be square".into()));
        }
        Ok(Self { positive })
    }

    pub fn n(&self) -> usize {
        self.positive.len()
    }

    pub fn positive(&self, agent: usize, obj: usize) -> bool {
        self.positive[agent][obj]
    }

    pub fn count_positive(&self) -> usize {
        self.positive
            .iter()
            .map(|row| row.iter().filter(|&&b| b).count())
            .sum()
    }

    /// Row-wise candidate objects, ascending.
    pub fn candidates(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.positive[agent]
            .iter()
            .enumerate()
            .filter_map(|(o, &b)| b.then_some(o))
    }

    /// Same mask with the given rows and columns removed from play.
    pub fn without(&self, rows: &[usize], cols: &[usize]) -> SupportMask {
        let mut positive = self.positive.clone();
        for &r in rows {
            positive[r].iter_mut().for_each(|b| *b = false);
        }
        for row in positive.iter_mut() {
            for &c in cols {
                row[c] = false;
            }
        }
        SupportMask { positive }
    }
}

/// positive[i][o] iff p(i)(o) > 0.
pub fn support(p: &RandomAssignment) -> SupportMask {
    SupportMask {
        positive: p
            .rows()
            .iter()
            .map(|row| row.iter().map(|v| !v.is_zero()).collect())
            .collect(),
    }
}

/// A convex combination of permutation matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    terms: Vec<(Rational, DeterministicAssignment)>,
}

impl Decomposition {
    pub fn new(terms: Vec<(Rational, DeterministicAssignment)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("decomposition has no terms".into()));
        }
        let mut sum = Rational::zero();
        for (coeff, _) in &terms {
            if coeff.is_zero() || !in_unit_interval(coeff) {
                return Err(Error::Invalid(format!(
                    "decomposition coefficient {coeff} outside (0, 1]"
                )));
            }
            sum += coeff;
        }
        if !sum.is_one() {
            return Err(Error::Invalid(format!(
                "decomposition coefficients sum to {sum}, expected 1"
            )));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(Rational, DeterministicAssignment)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient-weighted sum of the permutation matrices.
    pub fn reconstruct(&self) -> RandomAssignment {
        let n = self.terms[0].1.n();
        let mut entries = vec![vec![Rational::zero(); n]; n];
        for (coeff, d) in &self.terms {
            for (i, o) in d.pairs() {
                entries[i][o] += coeff;
            }
        }
        RandomAssignment { entries }
    }

    /// Checks the full decomposition contract against its source: exact
    /// reconstruction and support consistency of every term.
    pub fn verify_against(&self, p: &RandomAssignment) -> Result<()> {
        let mask = support(p);
        for (_, d) in &self.terms {
            if d.n() != p.n() {
                return Err(Error::Invalid("decomposition term dimension mismatch".into()));
            }
            if !d.consistent_with(&mask) {
                return Err(Error::Invalid(
                    "decomposition term uses a zero cell of the source".into(),
                ));
            }
        }
        if &self.reconstruct() != p {
            return Err(Error::Invalid(
                "decomposition does not reconstruct the source matrix".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of comparing two allocation rows under stochastic dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdComparison {
    /// Every upper-contour cumulative probability of `a` is at least that
    /// of `b`, and at least one is strictly greater.
    StrictlyPrefers,
    /// Every cumulative probability of `a` is at least that of `b`.
    /// With exact rows both summing to one this cannot hold without either
    /// equality or strictness, so the variant is never produced; it exists
    /// so the result type mirrors the relation it reports.
    WeaklyPrefers,
    /// The rows induce identical cumulative probabilities.
    Equal,
    /// `a` does not weakly dominate `b`.
    Incomparable,
}

impl SdComparison {
    /// True iff `a` weakly SD-dominates `b` under this outcome.
    pub fn weakly_dominates(self) -> bool {
        matches!(
            self,
            SdComparison::StrictlyPrefers | SdComparison::WeaklyPrefers | SdComparison::Equal
        )
    }
}

/// Compares allocation rows `a` and `b` for `agent` under the SD relation:
/// `a` weakly dominates `b` iff for every object the probability of getting
/// that object or better is at least as large under `a`.
pub fn sd_prefers(
    profile: &PreferenceProfile,
    agent: usize,
    a: &[Rational],
    b: &[Rational],
) -> Result<SdComparison> {
    check_probability_row(a, profile.n())?;
    check_probability_row(b, profile.n())?;
    let mut cum_a = Rational::zero();
    let mut cum_b = Rational::zero();
    let mut some_greater = false;
    let mut some_less = false;
    for &obj in profile.order(agent) {
        cum_a += &a[obj];
        cum_b += &b[obj];
        match cum_a.cmp(&cum_b) {
            std::cmp::Ordering::Greater => some_greater = true,
            std::cmp::Ordering::Less => some_less = true,
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(match (some_greater, some_less) {
        (false, false) => SdComparison::Equal,
        (true, false) => SdComparison::StrictlyPrefers,
        _ => SdComparison::Incomparable,
    })
}

fn check_probability_row(row: &[Rational], n: usize) -> Result<()> {
    if row.len() != n {
        return Err(Error::Invalid(format!(
            "allocation row has {} entries, expected {}",
            row.len(),
            n
        )));
    }
    for v in row {
        if !in_unit_interval(v) {
            return Err(Error::Invalid(format!(
                "allocation entry {v} outside [0, 1]"
            )));
        }
    }
    let sum: Rational = row.iter().sum();
    if !sum.is_one() {
        return Err(Error::Invalid(format!(
            "allocation row sums to {sum}, expected 1"
        )));
    }
    Ok(())
}
