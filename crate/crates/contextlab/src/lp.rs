//! Exact LP feasibility with certificates.
//!
//! Decides whether `Ax = b, x >= 0` has a solution, in exact arithmetic over
//! any [`Scalar`]. Feasible instances come back with a point, infeasible ones
//! with a Farkas certificate `y` (`yᵀA <= 0` componentwise while `yᵀb > 0`),
//! and both kinds are re-verified against the original system before being
//! returned, so a bug in the solver surfaces as an internal error rather than
//! a wrong verdict.
//!
//! The solver is a dense phase-1 simplex with Bland's anti-cycling rule. A
//! zero-elimination presolve runs first: a row with one-signed support and
//! zero right-hand side forces all its variables to zero, which collapses the
//! highly degenerate systems this crate generates (most joint-outcome
//! variables sit under some zero marginal). Certificates found on the reduced
//! system are mapped back by subtracting multiples of the eliminating rows in
//! reverse elimination order; each such row has zero right-hand side, so the
//! certificate's value `yᵀb` survives the mapping untouched.

use std::io;

use itertools::Itertools;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// The system `Ax = b, x >= 0`, rows added one equality at a time.
#[derive(Debug, Clone)]
pub struct FeasibilityProblem<T: Scalar = crate::Rational> {
    num_vars: usize,
    coeffs: Vec<Vec<T>>,
    rhs: Vec<T>,
}

/// Outcome of [`solve_feasibility`]: a feasible point or a Farkas
/// certificate of infeasibility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityResult<T: Scalar = crate::Rational> {
    Feasible(Vec<T>),
    Infeasible(Vec<T>),
}

impl<T: Scalar> FeasibilityProblem<T> {
    pub fn new(num_vars: usize) -> Self {
        FeasibilityProblem {
            num_vars,
            coeffs: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_equality(&mut self, coeffs: Vec<T>, rhs: T) -> Result<()> {
        if coeffs.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "row has {} coefficients, problem has {} variables",
                coeffs.len(),
                self.num_vars
            )));
        }
        self.coeffs.push(coeffs);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn coefficient(&self, row: usize, col: usize) -> &T {
        &self.coeffs[row][col]
    }

    pub fn rhs(&self, row: usize) -> &T {
        &self.rhs[row]
    }

    /// Exact check that `x >= 0` and `Ax = b`.
    pub fn check_feasible_point(&self, x: &[T]) -> bool {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.coeffs.iter().zip(&self.rhs).all(|(row, b)| {
            let lhs = row
                .iter()
                .zip(x)
                .fold(T::zero(), |acc, (a, v)| acc + a.clone() * v.clone());
            lhs == *b
        })
    }

    /// Exact check that `yᵀA <= 0` componentwise and `yᵀb > 0`.
    pub fn check_farkas_certificate(&self, y: &[T]) -> bool {
        if y.len() != self.num_rows() {
            return false;
        }
        for j in 0..self.num_vars {
            let mut comb = T::zero();
            for (i, yi) in y.iter().enumerate() {
                if !yi.is_zero() {
                    comb = comb + yi.clone() * self.coeffs[i][j].clone();
                }
            }
            if comb > T::zero() {
                return false;
            }
        }
        let value = y
            .iter()
            .zip(&self.rhs)
            .fold(T::zero(), |acc, (yi, b)| acc + yi.clone() * b.clone());
        value > T::zero()
    }

    /// Writes the system as TSV: one line per row, coefficients then the
    /// right-hand side, prefixed by a shape comment.
    pub fn dump_tsv<W: io::Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# {} rows\t{} vars\tlast column is rhs", self.num_rows(), self.num_vars)?;
        for (row, b) in self.coeffs.iter().zip(&self.rhs) {
            let mut line = row.iter().map(|v| v.to_string()).collect::<Vec<_>>();
            line.push(b.to_string());
            writeln!(w, "{}", line.join("\t"))?;
        }
        Ok(())
    }

    /// All vertices of `{x >= 0 : Ax = b}` by basic-solution enumeration.
    /// Exponential in the rank; guarded by `max_bases` on the number of
    /// column subsets examined. Intended for small verification problems.
    pub fn enumerate_vertices(&self, max_bases: usize) -> Result<Vec<Vec<T>>> {
        let reduced = match reduce_rows(&self.coeffs, &self.rhs, self.num_vars) {
            Some(r) => r,
            None => return Ok(Vec::new()),
        };
        let rank = reduced.len();
        if rank == 0 {
            return Ok(vec![vec![T::zero(); self.num_vars]]);
        }
        let mut bases_budget = max_bases;
        let mut seen = std::collections::BTreeSet::new();
        for subset in (0..self.num_vars).combinations(rank) {
            if bases_budget == 0 {
                return Err(Error::TooLarge(format!(
                    "vertex enumeration exceeds {max_bases} bases"
                )));
            }
            bases_budget -= 1;
            let square: Vec<Vec<T>> = reduced
                .iter()
                .map(|(row, _)| subset.iter().map(|&j| row[j].clone()).collect())
                .collect();
            let rhs: Vec<T> = reduced.iter().map(|(_, b)| b.clone()).collect();
            let sol = match solve_square(square, rhs) {
                Some(s) => s,
                None => continue,
            };
            if sol.iter().any(|v| v.is_negative()) {
                continue;
            }
            let mut x = vec![T::zero(); self.num_vars];
            for (&j, v) in subset.iter().zip(sol) {
                x[j] = v;
            }
            debug_assert!(self.check_feasible_point(&x));
            seen.insert(x);
        }
        Ok(seen.into_iter().collect())
    }
}

/// Gauss-Jordan on `[A|b]`; returns the independent rows in reduced form, or
/// `None` when the system is inconsistent (a `0 = c` row appears).
fn reduce_rows<T: Scalar>(
    coeffs: &[Vec<T>],
    rhs: &[T],
    num_vars: usize,
) -> Option<Vec<(Vec<T>, T)>> {
    let mut rows: Vec<(Vec<T>, T)> = coeffs
        .iter()
        .zip(rhs)
        .map(|(r, b)| (r.clone(), b.clone()))
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut pivot_row = 0;
    for col in 0..num_vars {
        let found = (pivot_row..rows.len()).find(|&i| !rows[i].0[col].is_zero());
        let i = match found {
            Some(i) => i,
            None => continue,
        };
        rows.swap(pivot_row, i);
        let piv = rows[pivot_row].0[col].clone();
        for v in rows[pivot_row].0.iter_mut() {
            *v = v.clone() / piv.clone();
        }
        rows[pivot_row].1 = rows[pivot_row].1.clone() / piv.clone();
        let pivot_copy = rows[pivot_row].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == pivot_row || row.0[col].is_zero() {
                continue;
            }
            let factor = row.0[col].clone();
            for (v, pv) in row.0.iter_mut().zip(&pivot_copy.0) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
            row.1 = row.1.clone() - factor * pivot_copy.1.clone();
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    for (row, b) in &rows[pivot_row..] {
        debug_assert!(row.iter().all(|v| v.is_zero()));
        if !b.is_zero() {
            return None;
        }
    }
    rows.truncate(pivot_row);
    Some(rows)
}

/// Solves a square system by Gaussian elimination; `None` when singular.
fn solve_square<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv_row = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, piv_row);
        b.swap(col, piv_row);
        let piv = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        b[col] = b[col].clone() / piv;
        let pivot_row = a[col].clone();
        let pivot_rhs = b[col].clone();
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let factor = a[i][col].clone();
            for (v, pv) in a[i].iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
            b[i] = b[i].clone() - factor * pivot_rhs.clone();
        }
    }
    Some(b)
}

/// One presolve elimination event: `row` had one-signed support (`positive`
/// tells which sign) and zero rhs, forcing the `dying` variables to zero.
struct Firing {
    row: usize,
    positive: bool,
    dying: Vec<usize>,
}

enum Presolved<T: Scalar> {
    /// A row alone proves infeasibility; `positive_rhs` fixes the sign of the
    /// unit certificate.
    Infeasible {
        row: usize,
        positive_rhs: bool,
        firings: Vec<Firing>,
    },
    Reduced {
        firings: Vec<Firing>,
        kept_rows: Vec<usize>,
        kept_vars: Vec<usize>,
        sub: FeasibilityProblem<T>,
    },
}

fn presolve<T: Scalar>(p: &FeasibilityProblem<T>) -> Presolved<T> {
    let m = p.num_rows();
    let n = p.num_vars();
    let mut alive_var = vec![true; n];
    let mut alive_row = vec![true; m];
    let mut firings: Vec<Firing> = Vec::new();
    loop {
        let mut changed = false;
        for i in 0..m {
            if !alive_row[i] {
                continue;
            }
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (j, alive) in alive_var.iter().enumerate() {
                if !alive {
                    continue;
                }
                let c = &p.coeffs[i][j];
                if c.is_positive() {
                    pos.push(j);
                } else if c.is_negative() {
                    neg.push(j);
                }
            }
            let b = &p.rhs[i];
            if pos.is_empty() && neg.is_empty() {
                if !b.is_zero() {
                    return Presolved::Infeasible {
                        row: i,
                        positive_rhs: b.is_positive(),
                        firings,
                    };
                }
                alive_row[i] = false;
                changed = true;
            } else if neg.is_empty() && b.is_zero() {
                for &j in &pos {
                    alive_var[j] = false;
                }
                alive_row[i] = false;
                firings.push(Firing {
                    row: i,
                    positive: true,
                    dying: pos,
                });
                changed = true;
            } else if pos.is_empty() && b.is_zero() {
                for &j in &neg {
                    alive_var[j] = false;
                }
                alive_row[i] = false;
                firings.push(Firing {
                    row: i,
                    positive: false,
                    dying: neg,
                });
                changed = true;
            } else if neg.is_empty() && b.is_negative() {
                return Presolved::Infeasible {
                    row: i,
                    positive_rhs: false,
                    firings,
                };
            } else if pos.is_empty() && b.is_positive() {
                return Presolved::Infeasible {
                    row: i,
                    positive_rhs: true,
                    firings,
                };
            }
        }
        if !changed {
            break;
        }
    }
    let kept_vars: Vec<usize> = (0..n).filter(|&j| alive_var[j]).collect();
    let kept_rows: Vec<usize> = (0..m).filter(|&i| alive_row[i]).collect();
    let mut sub = FeasibilityProblem::new(kept_vars.len());
    for &i in &kept_rows {
        let row: Vec<T> = kept_vars.iter().map(|&j| p.coeffs[i][j].clone()).collect();
        sub.add_equality(row, p.rhs[i].clone())
            .expect("row built to sub dimensions");
    }
    Presolved::Reduced {
        firings,
        kept_rows,
        kept_vars,
        sub,
    }
}

/// Repairs `yᵀA <= 0` on eliminated columns by walking the firings in
/// reverse. Each firing's row is zero on every column still alive after it
/// fired and has zero rhs, so the repair never disturbs already-fixed
/// columns or the certificate's value.
fn repair_certificate<T: Scalar>(p: &FeasibilityProblem<T>, y: &mut [T], firings: &[Firing]) {
    for f in firings.iter().rev() {
        let sign = if f.positive { T::one() } else { -T::one() };
        let mut lambda = T::zero();
        for &j in &f.dying {
            let mut w = T::zero();
            for (i, yi) in y.iter().enumerate() {
                if !yi.is_zero() {
                    w = w + yi.clone() * p.coeffs[i][j].clone();
                }
            }
            if !w.is_positive() {
                continue;
            }
            let denom = sign.clone() * p.coeffs[f.row][j].clone();
            debug_assert!(denom.is_positive());
            let need = w / denom;
            if need > lambda {
                lambda = need;
            }
        }
        if lambda.is_positive() {
            y[f.row] = y[f.row].clone() - lambda * sign;
        }
    }
}

/// Phase-1 simplex on the full system (no presolve): minimizes the sum of
/// artificial variables with Bland's rule.
fn phase_one<T: Scalar>(p: &FeasibilityProblem<T>) -> Result<FeasibilityResult<T>> {
    let m = p.num_rows();
    let n = p.num_vars();
    let width = n + m + 1;
    let rhs_col = n + m;

    // Sign-normalize so every rhs is nonnegative; remember flips for the dual.
    let mut flipped = vec![false; m];
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = p.rhs[i].is_negative();
        flipped[i] = flip;
        let mut row = vec![T::zero(); width];
        for j in 0..n {
            let c = p.coeffs[i][j].clone();
            row[j] = if flip { -c } else { c };
        }
        row[n + i] = T::one();
        row[rhs_col] = if flip {
            -p.rhs[i].clone()
        } else {
            p.rhs[i].clone()
        };
        tab.push(row);
    }

    // Objective row holds z_j - c_j for the phase-1 objective (minimize the
    // artificial sum); with the artificial basis this is the column sum for
    // structural columns and zero elsewhere.
    let mut obj = vec![T::zero(); width];
    for j in 0..n {
        obj[j] = tab.iter().fold(T::zero(), |acc, row| acc + row[j].clone());
    }
    obj[rhs_col] = tab
        .iter()
        .fold(T::zero(), |acc, row| acc + row[rhs_col].clone());

    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland: smallest structural column with positive reduced profit.
        let enter = match (0..n).find(|&j| obj[j].is_positive()) {
            Some(j) => j,
            None => break,
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<T> = None;
        for i in 0..m {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = tab[i][rhs_col].clone() / tab[i][enter].clone();
            let better = match &best {
                None => true,
                Some(b) => {
                    ratio < *b
                        || (ratio == *b
                            && basis[i] < basis[leave.expect("leave set with best")])
                }
            };
            if better {
                best = Some(ratio);
                leave = Some(i);
            }
        }
        let leave = leave.ok_or_else(|| {
            Error::Internal("phase-1 objective unbounded below zero".into())
        })?;

        // Pivot.
        let piv = tab[leave][enter].clone();
        for v in tab[leave].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        let pivot_row = tab[leave].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == leave || row[enter].is_zero() {
                continue;
            }
            let factor = row[enter].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
        }
        if !obj[enter].is_zero() {
            let factor = obj[enter].clone();
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * pv.clone();
            }
        }
        basis[leave] = enter;
    }

    if obj[rhs_col].is_zero() {
        let mut x = vec![T::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = tab[i][rhs_col].clone();
            }
        }
        Ok(FeasibilityResult::Feasible(x))
    } else {
        // Dual from the artificial columns: obj[n+i] = y_i - 1 in the
        // sign-normalized system.
        let mut y = Vec::with_capacity(m);
        for i in 0..m {
            let yi = obj[n + i].clone() + T::one();
            y.push(if flipped[i] { -yi } else { yi });
        }
        Ok(FeasibilityResult::Infeasible(y))
    }
}

/// Decides `Ax = b, x >= 0`. The returned point or certificate has been
/// checked against the input system; a failed check is an internal error.
pub fn solve_feasibility<T: Scalar>(p: &FeasibilityProblem<T>) -> Result<FeasibilityResult<T>> {
    let result = match presolve(p) {
        Presolved::Infeasible {
            row,
            positive_rhs,
            firings,
        } => {
            let mut y = vec![T::zero(); p.num_rows()];
            y[row] = if positive_rhs { T::one() } else { -T::one() };
            repair_certificate(p, &mut y, &firings);
            FeasibilityResult::Infeasible(y)
        }
        Presolved::Reduced {
            firings,
            kept_rows,
            kept_vars,
            sub,
        } => match phase_one(&sub)? {
            FeasibilityResult::Feasible(x_sub) => {
                let mut x = vec![T::zero(); p.num_vars()];
                for (&j, v) in kept_vars.iter().zip(x_sub) {
                    x[j] = v;
                }
                FeasibilityResult::Feasible(x)
            }
            FeasibilityResult::Infeasible(y_sub) => {
                let mut y = vec![T::zero(); p.num_rows()];
                for (&i, v) in kept_rows.iter().zip(y_sub) {
                    y[i] = v;
                }
                repair_certificate(p, &mut y, &firings);
                FeasibilityResult::Infeasible(y)
            }
        },
    };
    match &result {
        FeasibilityResult::Feasible(x) => {
            if !p.check_feasible_point(x) {
                return Err(Error::Internal(
                    "solver returned a point that fails the system".into(),
                ));
            }
        }
        FeasibilityResult::Infeasible(y) => {
            if !p.check_farkas_certificate(y) {
                return Err(Error::Internal(
                    "solver returned a certificate that fails the Farkas conditions".into(),
                ));
            }
        }
    }
    Ok(result)
}
