//! Helpers shared by the integration suites.
//!
//! The feasibility oracle here is written from scratch on purpose: it
//! decides `{x >= 0 : Ax = b}` by Gauss-Jordan elimination of the
//! equalities followed by Fourier-Motzkin elimination of the remaining
//! free variables, sharing no code path with the library's simplex.

use std::collections::BTreeSet;
use std::path::PathBuf;

use contextlab::lp::FeasibilityProblem;
use contextlab::Rational;
use num_traits::{Signed, Zero};

#[allow(dead_code)]
pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

/// One inequality `sum(coeffs[i] * x_i) <= bound` over the free variables.
type Inequality = (Vec<Rational>, Rational);

/// Scales an inequality so its first nonzero coefficient has absolute value
/// one; dividing by a positive number keeps the direction.
fn normalize(mut ineq: Inequality) -> Inequality {
    if let Some(scale) = ineq.0.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
        for c in ineq.0.iter_mut() {
            *c = c.clone() / scale.clone();
        }
        ineq.1 /= scale;
    }
    ineq
}

#[allow(dead_code)]
pub fn feasible_by_elimination(p: &FeasibilityProblem<Rational>) -> bool {
    let n = p.num_vars();
    let mut rows: Vec<Vec<Rational>> = (0..p.num_rows())
        .map(|r| {
            let mut row: Vec<Rational> = (0..n).map(|c| p.coefficient(r, c).clone()).collect();
            row.push(p.rhs(r).clone());
            row
        })
        .collect();

    // Gauss-Jordan over the variable columns; the last column is the rhs.
    let mut pivot_cols = Vec::new();
    for col in 0..n {
        let next = pivot_cols.len();
        let Some(hit) = (next..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next, hit);
        let piv = rows[next][col].clone();
        for v in rows[next].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        for r in 0..rows.len() {
            if r == next || rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone();
            for c in 0..=n {
                let delta = factor.clone() * rows[next][c].clone();
                rows[r][c] = rows[r][c].clone() - delta;
            }
        }
        pivot_cols.push(col);
        if pivot_cols.len() == rows.len() {
            break;
        }
    }
    for row in &rows[pivot_cols.len()..] {
        if !row[n].is_zero() {
            return false;
        }
    }
    rows.truncate(pivot_cols.len());

    // Nonnegativity of every original variable, rewritten over the free
    // columns. A pivot variable equals rhs minus the free terms of its row.
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut system: Vec<Inequality> = Vec::new();
    let mut constants: Vec<Rational> = Vec::new();
    for (row, _) in rows.iter().zip(&pivot_cols) {
        let coeffs: Vec<Rational> = free_cols.iter().map(|&f| row[f].clone()).collect();
        if coeffs.iter().all(Rational::is_zero) {
            constants.push(row[n].clone());
        } else {
            system.push(normalize((coeffs, row[n].clone())));
        }
    }
    for (i, _) in free_cols.iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); free_cols.len()];
        coeffs[i] = -Rational::from_integer(1.into());
        system.push((coeffs, Rational::zero()));
    }

    // Fourier-Motzkin: project out one free variable at a time.
    for k in 0..free_cols.len() {
        let mut uppers = Vec::new();
        let mut lowers = Vec::new();
        let mut rest = BTreeSet::new();
        for (coeffs, bound) in system {
            if coeffs[k].is_positive() {
                uppers.push((coeffs, bound));
            } else if coeffs[k].is_negative() {
                lowers.push((coeffs, bound));
            } else {
                rest.insert((coeffs, bound));
            }
        }
        for (lc, lb) in &lowers {
            let lscale = -lc[k].clone();
            for (uc, ub) in &uppers {
                let uscale = uc[k].clone();
                let coeffs: Vec<Rational> = lc
                    .iter()
                    .zip(uc)
                    .map(|(l, u)| l.clone() / lscale.clone() + u.clone() / uscale.clone())
                    .collect();
                let bound = lb.clone() / lscale.clone() + ub.clone() / uscale.clone();
                if coeffs.iter().all(Rational::is_zero) {
                    constants.push(bound);
                } else {
                    rest.insert(normalize((coeffs, bound)));
                }
            }
        }
        system = rest.into_iter().collect();
    }

    for (coeffs, bound) in system {
        debug_assert!(coeffs.iter().all(Rational::is_zero));
        constants.push(bound);
    }
    constants.iter().all(|b| !b.is_negative())
}
