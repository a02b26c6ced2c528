//! Integer linear programs with exact rational arithmetic.
//!
//! [`simplex`] solves the continuous relaxation with a two-phase tableau
//! simplex over `BigRational`; [`branch`] runs best-bound branch-and-bound on
//! top of it; [`format`] reads and writes the CPLEX-style `.lp` text format.

pub mod branch;
pub mod format;
pub mod simplex;

use serde::{Deserialize, Serialize};

pub use branch::{solve_integer, BranchOutcome, BranchStatus};
pub use simplex::{solve_relaxation, LpOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// One linear constraint `Σ coef · x_var (sense) rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearRow {
    pub name: String,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl LinearRow {
    pub fn lhs(&self, x: &[i64]) -> i64 {
        self.terms.iter().map(|&(j, c)| c * x[j]).sum()
    }

    pub fn is_satisfied(&self, x: &[i64]) -> bool {
        let lhs = self.lhs(x);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

/// `maximize objective · x` subject to `rows`, `lower <= x <= upper`,
/// `x` integral.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerProgram {
    pub var_names: Vec<String>,
    pub objective: Vec<i64>,
    pub rows: Vec<LinearRow>,
    pub lower: Vec<i64>,
    pub upper: Vec<Option<i64>>,
}

impl IntegerProgram {
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn objective_value(&self, x: &[i64]) -> i64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn is_feasible(&self, x: &[i64]) -> bool {
        x.len() == self.num_vars()
            && x.iter().zip(&self.lower).all(|(v, l)| v >= l)
            && x
                .iter()
                .zip(&self.upper)
                .all(|(v, u)| u.is_none_or(|u| *v <= u))
            && self.rows.iter().all(|r| r.is_satisfied(x))
    }

    /// Tightens each variable's upper bound to `⌊rhs / coef⌋` over every `<=`
    /// row with non-negative coefficients that contains it.
    pub fn tighten_upper_bounds(&mut self) {
        for row in &self.rows {
            if row.sense != Sense::Le || row.rhs < 0 || row.terms.iter().any(|&(_, c)| c < 0) {
                continue;
            }
            let floor_lower: i64 = row
                .terms
                .iter()
                .map(|&(j, c)| c * self.lower[j].max(0))
                .sum();
            for &(j, c) in &row.terms {
                if c == 0 || self.lower[j] < 0 {
                    continue;
                }
                // room left for x_j once the other variables sit at their lower bounds
                let slack = row.rhs - (floor_lower - c * self.lower[j]);
                let cap = slack.div_euclid(c);
                self.upper[j] = Some(self.upper[j].map_or(cap, |u| u.min(cap)));
            }
        }
    }
}
