//! Instance generation from 3-CNF formulas.
//!
//! A 3-SAT formula is turned into an assignment instance whose matrix is
//! ex post efficient iff the formula is satisfiable. Every agent of the
//! base set owns a +/- object pair shared only with its dummy, so a
//! consistent assignment is a choice of signs; preferences are arranged so
//! that misaligned copies trade, and so that an unsatisfied clause opens a
//! trading cycle through the clause agents.
//!
//! For a satisfying valuation, two sign-aligned Pareto optimal matrices
//! average exactly to the instance matrix, certifying membership without
//! any enumeration.

use crate::error::{Error, Result};
use crate::instance::{
    DeterministicAssignment, PreferenceProfile, RandomAssignment,
};
use crate::rational::{rat, Rational};
use num::Zero;

/// Brute-force enumeration is capped at this many variables.
pub const BRUTE_FORCE_MAX_VARS: usize = 24;

/// A literal over a 0-based variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn positive(var: usize) -> Self {
        Self { var, negated: false }
    }

    pub fn negative(var: usize) -> Self {
        Self { var, negated: true }
    }
}

/// A 3-CNF formula whose clauses each hold three literals over strictly
/// increasing variable indices. The ordering is load-bearing for the
/// reduction, so it is validated at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatInstance {
    var_count: usize,
    clauses: Vec<[Literal; 3]>,
}

impl SatInstance {
    pub fn new(var_count: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        for (j, clause) in clauses.iter().enumerate() {
            for lit in clause {
                if lit.var >= var_count {
                    return Err(Error::Invalid(format!(
                        "clause {} uses variable x{} beyond the declared {}",
                        j + 1,
                        lit.var + 1,
                        var_count
                    )));
                }
            }
            if !(clause[0].var < clause[1].var && clause[1].var < clause[2].var) {
                return Err(Error::Invalid(format!(
                    "clause {} must list three distinct variables in ascending order",
                    j + 1
                )));
            }
        }
        Ok(Self { var_count, clauses })
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    pub fn satisfies(&self, valuation: &[bool]) -> bool {
        assert_eq!(valuation.len(), self.var_count);
        self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|lit| valuation[lit.var] != lit.negated)
        })
    }
}

/// Parses DIMACS-style CNF text: `c` comment lines, a `p cnf <vars>
/// <clauses>` header, then one zero-terminated clause per line. Clauses
/// must hold exactly three literals over distinct ascending variables.
pub fn parse_dimacs(text: &str) -> Result<SatInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let ln = idx + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            if header.is_some() {
                return Err(Error::Parse {
                    line: ln,
                    reason: "duplicate header".into(),
                });
            }
            let mut parts = rest.split_whitespace();
            let vars = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: ln,
                    reason: "invalid variable count in header".into(),
                })?;
            let count = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: ln,
                    reason: "invalid clause count in header".into(),
                })?;
            header = Some((vars, count));
            continue;
        }
        let (vars, _) = header.ok_or_else(|| Error::Parse {
            line: ln,
            reason: "clause before 'p cnf' header".into(),
        })?;
        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| Error::Parse {
                line: ln,
                reason: format!("invalid literal '{tok}'"),
            })?;
            if v == 0 {
                terminated = true;
                break;
            }
            let var = v.unsigned_abs() as usize;
            if var == 0 || var > vars {
                return Err(Error::Parse {
                    line: ln,
                    reason: format!("variable {var} out of range 1..={vars}"),
                });
            }
            lits.push(Literal {
                var: var - 1,
                negated: v < 0,
            });
        }
        if !terminated {
            return Err(Error::Parse {
                line: ln,
                reason: "clause must end with 0".into(),
            });
        }
        if lits.len() != 3 {
            return Err(Error::Parse {
                line: ln,
                reason: format!("clause has {} literals, expected exactly 3", lits.len()),
            });
        }
        if !(lits[0].var < lits[1].var && lits[1].var < lits[2].var) {
            return Err(Error::Parse {
                line: ln,
                reason: "clause variables must be distinct and ascending".into(),
            });
        }
        clauses.push([lits[0], lits[1], lits[2]]);
    }
    let (vars, count) = header.ok_or_else(|| Error::Parse {
        line: 1,
        reason: "missing 'p cnf' header".into(),
    })?;
    if clauses.len() != count {
        return Err(Error::Invalid(format!(
            "header declares {count} clauses but {} were given",
            clauses.len()
        )));
    }
    SatInstance::new(vars, clauses)
}

/// Lexicographically smallest satisfying valuation (false before true,
/// first variable most significant), if any.
pub fn brute_force_sat(f: &SatInstance) -> Result<Option<Vec<bool>>> {
    let k = f.var_count();
    if k > BRUTE_FORCE_MAX_VARS {
        return Err(Error::GuardExceeded {
            what: "brute-force SAT variable count",
            limit: BRUTE_FORCE_MAX_VARS as u128,
            estimate: k as u128,
        });
    }
    for m in 0u64..(1u64 << k) {
        let valuation: Vec<bool> = (0..k).map(|i| (m >> (k - 1 - i)) & 1 == 1).collect();
        if f.satisfies(&valuation) {
            return Ok(Some(valuation));
        }
    }
    Ok(None)
}

/// The assignment instance built from a 3-CNF formula, with the
/// bookkeeping used by the construction.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    formula: SatInstance,
    profile: PreferenceProfile,
    assignment: RandomAssignment,
    agent_names: Vec<String>,
    /// head of agent c's list: one object per clause, in clause order.
    s_head: Vec<usize>,
    /// s_sets[var][clause] = the object of the singleton S set, if defined.
    s_sets: Vec<Vec<Option<usize>>>,
    n1_count: usize,
}

impl ReducedInstance {
    pub fn formula(&self) -> &SatInstance {
        &self.formula
    }

    pub fn profile(&self) -> &PreferenceProfile {
        &self.profile
    }

    pub fn assignment(&self) -> &RandomAssignment {
        &self.assignment
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agent_names
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agent_names.iter().position(|x| x == name)
    }

    /// Objects heading agent c's preference list, as names, clause order.
    pub fn s_head_names(&self) -> Vec<&str> {
        self.s_head
            .iter()
            .map(|&o| self.profile.object_name(o))
            .collect()
    }

    /// The singleton S set of copy agent x_{var}^{clause}, as a name
    /// (1-based arguments), if defined.
    pub fn s_set_name(&self, var: usize, clause: usize) -> Option<&str> {
        self.s_sets[var - 1][clause - 1].map(|o| self.profile.object_name(o))
    }

    /// Number of base (non-dummy) agents.
    pub fn n1_count(&self) -> usize {
        self.n1_count
    }

    /// Deterministic assignment from a sign per base agent: a true sign
    /// gives the agent his + object and his dummy the - object.
    pub fn assignment_from_signs(&self, signs: &[bool]) -> DeterministicAssignment {
        assert_eq!(signs.len(), self.n1_count);
        let mut object_of = vec![usize::MAX; 2 * self.n1_count];
        for (a, &positive) in signs.iter().enumerate() {
            let plus = 2 * a;
            let minus = 2 * a + 1;
            if positive {
                object_of[a] = plus;
                object_of[self.n1_count + a] = minus;
            } else {
                object_of[a] = minus;
                object_of[self.n1_count + a] = plus;
            }
        }
        DeterministicAssignment::new(object_of).expect("signs give a bijection")
    }
}

/// Index bookkeeping for the agent layout:
/// base agents are x_1, x_1^1..x_1^t, ..., x_k^t, c, c_1..c_t; dummies
/// follow in the same order. Objects are the +/- pair of each base agent,
/// pair a at columns 2a and 2a+1.
struct Layout {
    k: usize,
    t: usize,
}

impl Layout {
    fn base_x(&self, var: usize) -> usize {
        var * (self.t + 1)
    }

    fn copy_x(&self, var: usize, clause: usize) -> usize {
        var * (self.t + 1) + 1 + clause
    }

    fn c(&self) -> usize {
        self.k * (self.t + 1)
    }

    fn c_j(&self, clause: usize) -> usize {
        self.c() + 1 + clause
    }

    fn n1(&self) -> usize {
        self.k * (self.t + 1) + self.t + 1
    }

    fn plus(&self, base_agent: usize) -> usize {
        2 * base_agent
    }

    fn minus(&self, base_agent: usize) -> usize {
        2 * base_agent + 1
    }
}

/// The object encoding the variable value that falsifies the literal, as
/// the +/- object of the clause copy of that variable.
fn failing_object(layout: &Layout, lit: Literal, clause: usize) -> usize {
    let copy = layout.copy_x(lit.var, clause);
    if lit.negated {
        layout.plus(copy)
    } else {
        layout.minus(copy)
    }
}

/// Builds the full reduction: agents, objects, preferences per the
/// construction tables, and the half/half pair matrix.
pub fn build_reduction(f: &SatInstance) -> Result<ReducedInstance> {
    let k = f.var_count();
    let t = f.clauses().len();
    let layout = Layout { k, t };
    let n1 = layout.n1();
    let n = 2 * n1;

    // names
    let mut base_names = Vec::with_capacity(n1);
    for i in 0..k {
        base_names.push(format!("x{}", i + 1));
        for j in 0..t {
            base_names.push(format!("x{}_{}", i + 1, j + 1));
        }
    }
    base_names.push("c".to_string());
    for j in 0..t {
        base_names.push(format!("c_{}", j + 1));
    }
    debug_assert_eq!(base_names.len(), n1);
    let mut agent_names = base_names.clone();
    agent_names.extend(base_names.iter().map(|b| format!("d_{b}")));
    let mut object_names = Vec::with_capacity(n);
    for b in &base_names {
        object_names.push(format!("+{b}"));
        object_names.push(format!("-{b}"));
    }

    // S sets and the head of c's list
    let mut s_sets: Vec<Vec<Option<usize>>> = vec![vec![None; t]; k];
    let mut s_head = Vec::with_capacity(t);
    for (j, clause) in f.clauses().iter().enumerate() {
        s_sets[clause[0].var][j] = Some(failing_object(&layout, clause[1], j));
        s_sets[clause[1].var][j] = Some(failing_object(&layout, clause[2], j));
        s_sets[clause[2].var][j] = Some(layout.plus(layout.c_j(j)));
        s_head.push(failing_object(&layout, clause[0], j));
    }
    // positive_in_clause[var][clause]: the positive literal x_var is in C_j
    let mut positive_in_clause = vec![vec![false; t]; k];
    for (j, clause) in f.clauses().iter().enumerate() {
        for lit in clause {
            if !lit.negated {
                positive_in_clause[lit.var][j] = true;
            }
        }
    }

    // canonical tail: remaining objects by (base name, + before -)
    let tail_order: Vec<usize> = {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (base_a, sign_a) = (a / 2, a % 2);
            let (base_b, sign_b) = (b / 2, b % 2);
            base_names[base_a]
                .cmp(&base_names[base_b])
                .then(sign_a.cmp(&sign_b))
        });
        order
    };
    let with_tail = |head: Vec<usize>| -> Vec<usize> {
        let mut seen = vec![false; n];
        for &o in &head {
            debug_assert!(!seen[o], "duplicate object in preference head");
            seen[o] = true;
        }
        let mut full = head;
        full.extend(tail_order.iter().copied().filter(|&o| !seen[o]));
        full
    };

    let mut prefs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..k {
        let base = layout.base_x(i);
        // x_i: +x_i, +x_i^1..+x_i^t, -x_i, others
        let mut head = vec![layout.plus(base)];
        for j in 0..t {
            head.push(layout.plus(layout.copy_x(i, j)));
        }
        head.push(layout.minus(base));
        prefs[base] = with_tail(head);
        // d_{x_i}: +x_i, -x_i, others
        prefs[n1 + base] = with_tail(vec![layout.plus(base), layout.minus(base)]);
        for j in 0..t {
            let copy = layout.copy_x(i, j);
            let head = if positive_in_clause[i][j] {
                // S_i^j, -x_i^j, -x_i, +x_i^j, others
                let s = s_sets[i][j].expect("positive literal implies S is defined");
                vec![s, layout.minus(copy), layout.minus(base), layout.plus(copy)]
            } else {
                // -x_i^j, -x_i, S_i^j, +x_i^j, others
                let mut h = vec![layout.minus(copy), layout.minus(base)];
                if let Some(s) = s_sets[i][j] {
                    h.push(s);
                }
                h.push(layout.plus(copy));
                h
            };
            prefs[copy] = with_tail(head);
            // d_{x_i^j}: -x_i^j, +x_i^j, others
            prefs[n1 + copy] = with_tail(vec![layout.minus(copy), layout.plus(copy)]);
        }
    }
    {
        let c = layout.c();
        // c: S, +c, +c_1..+c_t, -c, others
        let mut head = s_head.clone();
        head.push(layout.plus(c));
        for j in 0..t {
            head.push(layout.plus(layout.c_j(j)));
        }
        head.push(layout.minus(c));
        prefs[c] = with_tail(head);
        // d_c: +c, -c, others
        prefs[n1 + c] = with_tail(vec![layout.plus(c), layout.minus(c)]);
        for j in 0..t {
            let cj = layout.c_j(j);
            // c_j: -c_j, -c, +c_j, others
            prefs[cj] = with_tail(vec![
                layout.minus(cj),
                layout.minus(c),
                layout.plus(cj),
            ]);
            // d_{c_j}: -c_j, +c_j, others
            prefs[n1 + cj] = with_tail(vec![layout.minus(cj), layout.plus(cj)]);
        }
    }

    let profile = PreferenceProfile::new(object_names, prefs)?;

    let half = rat(1, 2);
    let mut entries = vec![vec![Rational::zero(); n]; n];
    for a in 0..n1 {
        for agent in [a, n1 + a] {
            entries[agent][layout.plus(a)] = half.clone();
            entries[agent][layout.minus(a)] = half.clone();
        }
    }
    let assignment = RandomAssignment::new(entries)?;

    Ok(ReducedInstance {
        formula: f.clone(),
        profile,
        assignment,
        agent_names,
        s_head,
        s_sets,
        n1_count: n1,
    })
}

/// The two sign-aligned matrices of the satisfiable direction: the c group
/// goes positive (negative in the mirror), every variable group follows
/// the valuation, dummies take the leftover signs. Both are Pareto optimal
/// and average exactly to the instance matrix.
pub fn build_m1_m2(
    r: &ReducedInstance,
    valuation: &[bool],
) -> Result<(DeterministicAssignment, DeterministicAssignment)> {
    let f = r.formula();
    if valuation.len() != f.var_count() {
        return Err(Error::Precondition(format!(
            "valuation has {} entries, formula has {} variables",
            valuation.len(),
            f.var_count()
        )));
    }
    if !f.satisfies(valuation) {
        return Err(Error::Precondition(
            "valuation does not satisfy the formula".into(),
        ));
    }
    let k = f.var_count();
    let t = f.clauses().len();
    let layout = Layout { k, t };
    let mut signs = vec![false; r.n1_count()];
    for i in 0..k {
        signs[layout.base_x(i)] = valuation[i];
        for j in 0..t {
            signs[layout.copy_x(i, j)] = valuation[i];
        }
    }
    signs[layout.c()] = true;
    for j in 0..t {
        signs[layout.c_j(j)] = true;
    }
    let m1 = r.assignment_from_signs(&signs);
    let negated: Vec<bool> = signs.iter().map(|s| !s).collect();
    let m2 = r.assignment_from_signs(&negated);
    Ok((m1, m2))
}
