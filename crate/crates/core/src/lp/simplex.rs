//! Two-phase tableau simplex with Bland's pivoting rule, plus a dual simplex
//! for re-solving after a bound is tightened.
//!
//! The tableau is generic over the scalar: exact `BigRational` for reported
//! optima, `f64` inside branch-and-bound, where node bounds are certified
//! separately from the dual values.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{IntegerProgram, Sense};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: BigRational,
        x: Vec<BigRational>,
    },
    Infeasible,
    Unbounded,
}

/// Solves the continuous relaxation of `program` with the given bounds.
pub fn solve_relaxation(program: &IntegerProgram) -> LpOutcome {
    solve_with_bounds(program, &program.lower, &program.upper)
}

pub(crate) fn solve_with_bounds(
    program: &IntegerProgram,
    lower: &[i64],
    upper: &[Option<i64>],
) -> LpOutcome {
    match WarmLp::<BigRational>::solve(program, lower, upper) {
        Ok(lp) => LpOutcome::Optimal {
            value: lp.value(),
            x: lp.x(),
        },
        Err(outcome) => outcome,
    }
}

pub(crate) trait Scalar: Clone + Debug {
    /// Inexact scalars get a pivot cap instead of a termination guarantee.
    const EXACT: bool;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    /// Negative beyond the primal feasibility tolerance.
    fn is_infeasible_rhs(&self) -> bool {
        self.is_neg()
    }
    fn magnitude(&self) -> f64;
    fn lt(&self, other: &Self) -> bool;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn add_assign(&mut self, other: &Self);
    /// `self -= f * x`.
    fn sub_mul(&mut self, f: &Self, x: &Self);
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn magnitude(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::MAX)
    }
    fn lt(&self, other: &Self) -> bool {
        self < other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_mul(&mut self, f: &Self, x: &Self) {
        *self -= f * x;
    }
}

const EPS: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        self.abs() <= EPS
    }
    fn is_pos(&self) -> bool {
        *self > EPS
    }
    fn is_neg(&self) -> bool {
        *self < -EPS
    }
    fn is_infeasible_rhs(&self) -> bool {
        *self < -1e-7
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn lt(&self, other: &Self) -> bool {
        *self < *other - EPS
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_mul(&mut self, f: &Self, x: &Self) {
        *self -= f * x;
        if self.abs() < 1e-12 {
            *self = 0.0;
        }
    }
}

/// An optimal tableau that accepts extra bound rows and re-optimises with
/// the dual simplex.
#[derive(Debug, Clone)]
pub(crate) struct WarmLp<T> {
    tableau: Tableau<T>,
    /// Reduced costs, with `-value` (before shifting) in the last slot.
    obj: Vec<T>,
    /// The solve works in `y = x - shift`.
    shift: Vec<i64>,
    objective_shift: i64,
    /// Row that proved the last `add_bound` infeasible.
    infeasible_row: Option<usize>,
}

/// Result of tightening a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Resolve {
    Feasible,
    Infeasible,
    /// The pivot cap was hit; only possible with inexact scalars.
    Stalled,
}

impl<T: Scalar> WarmLp<T> {
    pub(crate) fn solve(
        program: &IntegerProgram,
        lower: &[i64],
        upper: &[Option<i64>],
    ) -> Result<Self, LpOutcome> {
        let nv = program.num_vars();
        if lower.iter().zip(upper).any(|(l, u)| u.is_some_and(|u| u < *l)) {
            return Err(LpOutcome::Infeasible);
        }
        // x = lower + y, y >= 0
        let mut rows: Vec<(Vec<(usize, i64)>, Sense, i64)> = Vec::new();
        for r in &program.rows {
            let shift: i64 = r.terms.iter().map(|&(j, c)| c * lower[j]).sum();
            rows.push((r.terms.clone(), r.sense, r.rhs - shift));
        }
        for j in 0..nv {
            if let Some(u) = upper[j] {
                rows.push((vec![(j, 1)], Sense::Le, u - lower[j]));
            }
        }
        let mut tableau = Tableau::build(nv, &rows);
        let obj = tableau.run(&program.objective)?;
        Ok(WarmLp {
            tableau,
            obj,
            shift: lower.to_vec(),
            objective_shift: program.objective.iter().zip(lower).map(|(c, l)| c * l).sum(),
            infeasible_row: None,
        })
    }

    pub(crate) fn value(&self) -> T {
        let mut v = self.obj[self.tableau.num_cols].neg();
        v.add_assign(&T::from_i64(self.objective_shift));
        v
    }

    pub(crate) fn x(&self) -> Vec<T> {
        let t = &self.tableau;
        let mut x: Vec<T> = self.shift.iter().map(|&l| T::from_i64(l)).collect();
        for (r, &b) in t.basis.iter().enumerate() {
            if b < t.num_structural {
                x[b].add_assign(&t.rows[r][t.num_cols]);
            }
        }
        x
    }

    /// Dual values of the first `count` input rows, in their original sign
    /// convention: `>= 0` on `<=` rows and `<= 0` on `>=` rows at optimum.
    pub(crate) fn duals(&self, count: usize) -> Vec<T> {
        self.tableau.identity[..count.min(self.tableau.identity.len())]
            .iter()
            .map(|&(k, sign, flipped)| {
                // a column s·e_i with zero cost has reduced cost -s·y_i
                let y = if sign > 0 { self.obj[k].neg() } else { self.obj[k].clone() };
                if flipped {
                    y.neg()
                } else {
                    y
                }
            })
            .collect()
    }

    /// After [`Resolve::Infeasible`], multipliers on the first `count` input
    /// rows (original signs) of the row that has no feasible completion.
    pub(crate) fn farkas(&self, count: usize) -> Option<Vec<T>> {
        let p = self.infeasible_row?;
        let row = &self.tableau.rows[p];
        Some(
            self.tableau.identity[..count.min(self.tableau.identity.len())]
                .iter()
                .map(|&(k, sign, flipped)| {
                    let z = if sign > 0 { row[k].clone() } else { row[k].neg() };
                    if flipped {
                        z.neg()
                    } else {
                        z
                    }
                })
                .collect(),
        )
    }

    /// Adds `x_j <= bound` (`Le`) or `x_j >= bound` (`Ge`) and re-optimises.
    pub(crate) fn add_bound(&mut self, j: usize, sense: Sense, bound: i64) -> Resolve {
        let y_bound = bound - self.shift[j];
        let (coef, rhs) = match sense {
            Sense::Le => (T::from_i64(1), T::from_i64(y_bound)),
            Sense::Ge => (T::from_i64(-1), T::from_i64(-y_bound)),
            Sense::Eq => unreachable!("bounds are one-sided"),
        };
        let t = &mut self.tableau;
        let slack = t.num_cols;
        for row in t.rows.iter_mut() {
            row.insert(slack, T::from_i64(0));
        }
        self.obj.insert(slack, T::from_i64(0));
        t.num_cols += 1;
        let mut row = vec![T::from_i64(0); t.num_cols + 1];
        row[j] = coef.clone();
        row[slack] = T::from_i64(1);
        row[t.num_cols] = rhs;
        // keep the basic columns as unit vectors
        if let Some(r) = t.basis.iter().position(|&b| b == j) {
            for (k, v) in t.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    row[k].sub_mul(&coef, v);
                }
            }
        }
        t.rows.push(row);
        t.basis.push(slack);
        match t.dual_simplex(&mut self.obj) {
            Ok(()) => Resolve::Feasible,
            Err(Some(p)) => {
                self.infeasible_row = Some(p);
                Resolve::Infeasible
            }
            Err(None) => Resolve::Stalled,
        }
    }
}

#[derive(Debug, Clone)]
struct Tableau<T> {
    /// Constraint rows; the last entry of each is the right-hand side.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    num_structural: usize,
    /// Artificial columns; they never re-enter once phase one is over.
    artificial: std::ops::Range<usize>,
    num_cols: usize,
    /// Per input row: a column equal to `sign · e_row` in the starting
    /// tableau, and whether the row was negated to make its rhs positive.
    identity: Vec<(usize, i8, bool)>,
}

impl<T: Scalar> Tableau<T> {
    fn build(nv: usize, rows: &[(Vec<(usize, i64)>, Sense, i64)]) -> Self {
        // normalise to rhs >= 0
        let rows: Vec<(Vec<(usize, i64)>, Sense, i64, bool)> = rows
            .iter()
            .map(|(terms, sense, rhs)| {
                if *rhs < 0 {
                    let flipped = match sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    };
                    (terms.iter().map(|&(j, c)| (j, -c)).collect(), flipped, -rhs, true)
                } else {
                    (terms.clone(), *sense, *rhs, false)
                }
            })
            .collect();

        let num_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let num_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
        let first_artificial = nv + num_slack;
        let num_cols = first_artificial + num_art;

        let mut out = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut identity = Vec::with_capacity(rows.len());
        let (mut slack, mut art) = (nv, first_artificial);
        for (terms, sense, rhs, flipped) in &rows {
            let mut row = vec![T::from_i64(0); num_cols + 1];
            for &(j, c) in terms {
                row[j].add_assign(&T::from_i64(c));
            }
            row[num_cols] = T::from_i64(*rhs);
            match sense {
                Sense::Le => {
                    row[slack] = T::from_i64(1);
                    basis.push(slack);
                    identity.push((slack, 1, *flipped));
                    slack += 1;
                }
                Sense::Ge => {
                    row[slack] = T::from_i64(-1);
                    identity.push((slack, -1, *flipped));
                    slack += 1;
                    row[art] = T::from_i64(1);
                    basis.push(art);
                    art += 1;
                }
                Sense::Eq => {
                    row[art] = T::from_i64(1);
                    basis.push(art);
                    identity.push((art, 1, *flipped));
                    art += 1;
                }
            }
            out.push(row);
        }
        Tableau {
            rows: out,
            basis,
            num_structural: nv,
            artificial: first_artificial..num_cols,
            num_cols,
            identity,
        }
    }

    fn pivot_cap(&self) -> usize {
        if T::EXACT {
            usize::MAX
        } else {
            20 * (self.rows.len() + self.num_cols) + 1000
        }
    }

    fn may_enter(&self, j: usize) -> bool {
        !self.artificial.contains(&j)
    }

    /// Both phases; returns the final reduced-cost row.
    fn run(&mut self, objective: &[i64]) -> Result<Vec<T>, LpOutcome> {
        let n = self.num_cols;
        if !self.artificial.is_empty() {
            let mut cost = vec![T::from_i64(0); n];
            for c in &mut cost[self.artificial.clone()] {
                *c = T::from_i64(-1);
            }
            let mut obj = self.reduced_costs(&cost);
            if self.optimise(&mut obj, true).is_err() {
                // phase one is bounded, so only the pivot cap lands here
                return Err(LpOutcome::Unbounded);
            }
            // the last slot holds the remaining sum of artificials
            if obj[n].is_pos() {
                return Err(LpOutcome::Infeasible);
            }
            self.expel_artificials();
        }

        let mut cost = vec![T::from_i64(0); n];
        for (j, &c) in objective.iter().enumerate() {
            cost[j] = T::from_i64(c);
        }
        let mut obj = self.reduced_costs(&cost);
        if self.optimise(&mut obj, false).is_err() {
            return Err(LpOutcome::Unbounded);
        }
        Ok(obj)
    }

    /// Objective row `c_j - c_B B⁻¹ A_j`, with `-c_B B⁻¹ b` in the last slot.
    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let n = self.num_cols;
        let mut obj: Vec<T> = cost.to_vec();
        obj.push(T::from_i64(0));
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=n {
                if !self.rows[r][j].is_zero() {
                    obj[j].sub_mul(cb, &self.rows[r][j]);
                }
            }
        }
        obj
    }

    /// Pivots until no admissible column has a positive reduced cost.
    fn optimise(&mut self, obj: &mut [T], phase_one: bool) -> Result<(), ()> {
        let n = self.num_cols;
        for _ in 0..self.pivot_cap() {
            let Some(q) = (0..n).find(|&j| (phase_one || self.may_enter(j)) && obj[j].is_pos()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][q];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rows[r][n].div(a);
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio.lt(best) || (!best.lt(&ratio) && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((p, _)) = leave else {
                return Err(());
            };
            self.pivot(p, q, Some(obj));
        }
        Err(())
    }

    /// Restores primal feasibility from a dual-feasible basis. Fails with
    /// the row that has no negative entry, or with `None` at the pivot cap.
    ///
    /// Exact scalars use the smallest-index rules (leaving row by basic
    /// index, entering column by ratio then index), which cannot cycle.
    /// Floats take the most infeasible row and, among near-ties in the
    /// ratio, the largest pivot.
    fn dual_simplex(&mut self, obj: &mut [T]) -> Result<(), Option<usize>> {
        let n = self.num_cols;
        for _ in 0..self.pivot_cap() {
            let infeasible = (0..self.rows.len()).filter(|&r| self.rows[r][n].is_infeasible_rhs());
            let leave = if T::EXACT {
                infeasible.min_by_key(|&r| self.basis[r])
            } else {
                infeasible.max_by(|&a, &b| {
                    let (va, vb) = (self.rows[a][n].magnitude(), self.rows[b][n].magnitude());
                    va.total_cmp(&vb).then(b.cmp(&a))
                })
            };
            let Some(p) = leave else {
                return Ok(());
            };
            let mut enter: Option<(usize, T)> = None;
            for q in 0..n {
                let a = &self.rows[p][q];
                if !a.is_neg() || !self.may_enter(q) {
                    continue;
                }
                let ratio = obj[q].div(a);
                let take = match &enter {
                    None => true,
                    Some((bq, best)) => {
                        ratio.lt(best)
                            || (!T::EXACT
                                && !best.lt(&ratio)
                                && a.magnitude() > self.rows[p][*bq].magnitude())
                    }
                };
                if take {
                    enter = Some((q, ratio));
                }
            }
            let Some((q, _)) = enter else {
                return Err(Some(p));
            };
            self.pivot(p, q, Some(obj));
        }
        Err(None)
    }

    fn pivot(&mut self, p: usize, q: usize, obj: Option<&mut [T]>) {
        let n = self.num_cols;
        let inv = T::from_i64(1).div(&self.rows[p][q]);
        let support: Vec<usize> = (0..=n).filter(|&j| !self.rows[p][j].is_zero()).collect();
        for j in 0..=n {
            self.rows[p][j] = if support.binary_search(&j).is_ok() {
                self.rows[p][j].mul(&inv)
            } else {
                T::from_i64(0)
            };
        }
        let pivot_row = self.rows[p].clone();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == p || row[q].is_zero() {
                continue;
            }
            let f = row[q].clone();
            for &j in &support {
                row[j].sub_mul(&f, &pivot_row[j]);
            }
            row[q] = T::from_i64(0);
        }
        if let Some(obj) = obj {
            if !obj[q].is_zero() {
                let f = obj[q].clone();
                for &j in &support {
                    obj[j].sub_mul(&f, &pivot_row[j]);
                }
                obj[q] = T::from_i64(0);
            }
        }
        self.basis[p] = q;
    }

    /// Pivots zero-valued artificials out of the basis, dropping redundant rows.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.artificial.contains(&self.basis[r]) {
                match (0..self.num_cols).find(|&j| self.may_enter(j) && !self.rows[r][j].is_zero()) {
                    Some(q) => {
                        self.pivot(r, q, None);
                        r += 1;
                    }
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }
}
