//! Exact rational feasibility kernel: find x >= 0 with A x = b.
//!
//! The system is first row-reduced (dropping redundant rows and detecting
//! outright inconsistency), then solved with a phase-I simplex that
//! minimizes the sum of artificial variables. Bland's pivot rule makes
//! termination unconditional; there are no tolerances anywhere.

use crate::error::{Error, Result};
use crate::rational::Rational;
use num::{One, Signed, Zero};
use std::time::Instant;

/// How often the pivot loop polls the deadline.
const DEADLINE_POLL_INTERVAL: u32 = 16;

/// Finds a basic solution x >= 0 of A x = b, or `None` if infeasible.
///
/// When the system is feasible the returned solution is basic, so its
/// support has at most rank(A) nonzero entries.
pub fn solve_equality_feasibility(
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
) -> Option<Vec<Rational>> {
    solve_with_deadline(a, b, None).expect("no deadline given")
}

/// Deadline-aware variant; `Err(BudgetExhausted)` when time runs out.
pub fn solve_with_deadline(
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    deadline: Option<Instant>,
) -> Result<Option<Vec<Rational>>> {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let cols = a.first().map_or(0, Vec::len);
    let reduced = match row_reduce(a, b, cols) {
        Reduced::Inconsistent => return Ok(None),
        Reduced::Rows(rows) => rows,
    };
    phase_one(reduced, cols, deadline)
}

enum Reduced {
    Inconsistent,
    /// Independent rows of the augmented system [A | b].
    Rows(Vec<Vec<Rational>>),
}

/// Gauss-Jordan elimination over the rationals. Returns the independent
/// augmented rows, or inconsistency if a zero row has nonzero rhs.
fn row_reduce(a: Vec<Vec<Rational>>, b: Vec<Rational>, cols: usize) -> Reduced {
    let mut rows: Vec<Vec<Rational>> = a
        .into_iter()
        .zip(b)
        .map(|(mut row, rhs)| {
            row.push(rhs);
            row
        })
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let scale = rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v /= &scale;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in 0..=cols {
                    let delta = &factor * &rows[rank][c];
                    rows[r][c] -= delta;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    for row in &rows[rank..] {
        if !row[cols].is_zero() {
            return Reduced::Inconsistent;
        }
    }
    rows.truncate(rank);
    Reduced::Rows(rows)
}

/// Phase-I simplex on the reduced system. Columns `0..cols` are the
/// original variables; one artificial per row completes the start basis.
fn phase_one(
    mut rows: Vec<Vec<Rational>>,
    cols: usize,
    deadline: Option<Instant>,
) -> Result<Option<Vec<Rational>>> {
    let m = rows.len();
    if m == 0 {
        return Ok(Some(vec![Rational::zero(); cols]));
    }
    // make every rhs nonnegative so artificials start feasible
    for row in rows.iter_mut() {
        if row[cols].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
    }
    // tableau layout: original columns, artificial columns, rhs
    let total = cols + m;
    let mut t: Vec<Vec<Rational>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut full = vec![Rational::zero(); total + 1];
            full[..cols].clone_from_slice(&row[..cols]);
            full[cols + i] = Rational::one();
            full[total] = row[cols].clone();
            full
        })
        .collect();
    let mut basis: Vec<usize> = (cols..cols + m).collect();
    // objective: minimize the sum of artificials, expressed over nonbasic
    // columns; w = w_value - sum_j w[j] x_j
    let mut w = vec![Rational::zero(); total + 1];
    for row in &t {
        for (j, v) in row.iter().enumerate() {
            if j < cols || j == total {
                w[j] += v;
            }
        }
    }
    let mut retired = vec![false; total]; // artificials never re-enter
    let mut polls = 0u32;
    loop {
        polls += 1;
        if polls % DEADLINE_POLL_INTERVAL == 0 {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    return Err(Error::BudgetExhausted {
                        budget_ms: 0,
                        context: "simplex pivoting".into(),
                    });
                }
            }
        }
        // Bland: smallest column that still reduces w
        let Some(entering) = (0..total).find(|&j| !retired[j] && w[j].is_positive()) else {
            break;
        };
        // ratio test; Bland ties broken by the smallest basis variable
        let mut leaving: Option<(usize, Rational)> = None;
        for (i, row) in t.iter().enumerate() {
            if !row[entering].is_positive() {
                continue;
            }
            let ratio = &row[total] / &row[entering];
            let better = match &leaving {
                None => true,
                Some((best_i, best)) => {
                    ratio < *best || (ratio == *best && basis[i] < basis[*best_i])
                }
            };
            if better {
                leaving = Some((i, ratio));
            }
        }
        let Some((pivot_row, _)) = leaving else {
            // w unbounded below cannot happen: w >= 0 by construction
            unreachable!("phase-I objective is bounded");
        };
        pivot(&mut t, &mut w, pivot_row, entering, total);
        if basis[pivot_row] >= cols {
            retired[basis[pivot_row]] = true;
        }
        basis[pivot_row] = entering;
    }
    if !w[total].is_zero() {
        return Ok(None); // artificials cannot all reach zero
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &var) in basis.iter().enumerate() {
        if var < cols {
            x[var] = t[i][total].clone();
        }
        // artificial still basic: its value is zero, the row is redundant
    }
    Ok(Some(x))
}

fn pivot(
    t: &mut [Vec<Rational>],
    w: &mut [Rational],
    pivot_row: usize,
    entering: usize,
    total: usize,
) {
    let scale = t[pivot_row][entering].clone();
    for v in t[pivot_row].iter_mut() {
        *v /= &scale;
    }
    let prow = t[pivot_row].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == pivot_row || row[entering].is_zero() {
            continue;
        }
        let factor = row[entering].clone();
        for c in 0..=total {
            let delta = &factor * &prow[c];
            row[c] -= delta;
        }
    }
    if !w[entering].is_zero() {
        let factor = w[entering].clone();
        for c in 0..=total {
            let delta = &factor * &prow[c];
            w[c] -= delta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn r(n: i64, d: i64) -> Rational {
        rat(n, d)
    }

    #[test]
    fn solves_simple_feasible_system() {
        // x0 + x1 = 1, x0 - x1 = 0 -> x = (1/2, 1/2)
        let a = vec![
            vec![r(1, 1), r(1, 1)],
            vec![r(1, 1), r(-1, 1)],
        ];
        let b = vec![r(1, 1), r(0, 1)];
        let x = solve_equality_feasibility(a, b).unwrap();
        assert_eq!(x, vec![r(1, 2), r(1, 2)]);
    }

    #[test]
    fn detects_sign_infeasibility() {
        // x0 + x1 = -1 has no nonnegative solution
        let a = vec![vec![r(1, 1), r(1, 1)]];
        let b = vec![r(-1, 1)];
        assert!(solve_equality_feasibility(a, b).is_none());
    }

    #[test]
    fn detects_inconsistent_rows() {
        let a = vec![
            vec![r(1, 1), r(1, 1)],
            vec![r(2, 1), r(2, 1)],
        ];
        let b = vec![r(1, 1), r(3, 1)];
        assert!(solve_equality_feasibility(a, b).is_none());
    }

    #[test]
    fn tolerates_redundant_rows() {
        let a = vec![
            vec![r(1, 1), r(1, 1)],
            vec![r(2, 1), r(2, 1)],
            vec![r(1, 1), r(0, 1)],
        ];
        let b = vec![r(1, 1), r(2, 1), r(1, 4)];
        let x = solve_equality_feasibility(a, b).unwrap();
        assert_eq!(x, vec![r(1, 4), r(3, 4)]);
    }

    #[test]
    fn infeasible_when_equality_needs_negative_variable() {
        // x0 = 1 and x0 + x1 = 1/2 forces x1 = -1/2
        let a = vec![
            vec![r(1, 1), r(0, 1)],
            vec![r(1, 1), r(1, 1)],
        ];
        let b = vec![r(1, 1), r(1, 2)];
        assert!(solve_equality_feasibility(a, b).is_none());
    }

    #[test]
    fn empty_system_is_trivially_feasible() {
        let x = solve_equality_feasibility(vec![], vec![]).unwrap();
        assert!(x.is_empty());
        let a = vec![vec![r(0, 1), r(0, 1)]];
        let b = vec![r(0, 1)];
        let x = solve_equality_feasibility(a, b).unwrap();
        assert_eq!(x, vec![r(0, 1), r(0, 1)]);
    }

    #[test]
    fn basic_solution_support_is_small() {
        // many generators of a 1-dimensional constraint: support stays <= rank
        let a = vec![vec![r(1, 1); 10]];
        let b = vec![r(1, 1)];
        let x = solve_equality_feasibility(a, b).unwrap();
        let nonzero = x.iter().filter(|v| !v.is_zero()).count();
        assert_eq!(nonzero, 1);
    }
}
