//! The integer-programming upper bound on `A(n, d)`.
//!
//! Variable `X[b][a]` counts codewords carrying symbol `a` at position `b`.
//! A codeword with `σ(b) = a` contains `C(b-1, ℓ) C(n-b, n-d-ℓ)` subsequences
//! of length `n - d + 1` that have `a` in slot `ℓ + 1`; no two codewords share
//! such a subsequence and only `(n-1)!/(d-1)!` of them exist, which gives one
//! `<=` row per symbol `a` and slot offset `ℓ ∈ {0, ..., n-d}`. Balance rows
//! force every position to see the same number of codewords.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::bounds::{binomial, factorial, singleton_upper, CodeParams};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lp::{self, BranchStatus, IntegerProgram, LinearRow, LpOutcome, Sense};
use crate::perm::Permutation;

/// A row over the `X[b][a]` variables, keyed by 1-based `(b, a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRow {
    pub name: String,
    pub coefficients: BTreeMap<(usize, usize), i64>,
    pub sense: Sense,
    pub rhs: i64,
}

impl ModelRow {
    pub fn coefficient(&self, b: usize, a: usize) -> i64 {
        self.coefficients.get(&(b, a)).copied().unwrap_or(0)
    }
}

/// Supplies additional rows to [`build_model_with`].
///
/// Reserved for tightenings such as joint counts over several positions;
/// none ship with the crate.
pub trait ConstraintProvider {
    fn rows(&self, params: CodeParams) -> Vec<ModelRow>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IlpModel {
    pub params: CodeParams,
    /// `n (n - d + 1)` counting rows, ordered by `a` then `ℓ`.
    pub inequality_rows: Vec<ModelRow>,
    /// `n - 1` balance rows `Σ_a X[b][a] - Σ_a X[b+1][a] = 0`.
    pub equality_rows: Vec<ModelRow>,
    pub extra_rows: Vec<ModelRow>,
    /// Maximised: `Σ_a X[1][a]`.
    pub objective: BTreeMap<(usize, usize), i64>,
}

pub fn build_model(params: CodeParams) -> Result<IlpModel> {
    build_model_with(params, &[])
}

pub fn build_model_with(
    params: CodeParams,
    providers: &[&dyn ConstraintProvider],
) -> Result<IlpModel> {
    if params.d < 2 {
        return Err(Error::InvalidParams(
            "the counting program needs d >= 2; A(n, 1) = n!".into(),
        ));
    }
    let (n, d) = (params.n, params.d);
    let rhs = (factorial(n - 1) / factorial(d - 1))
        .to_i64()
        .ok_or_else(|| Error::Capacity(format!("(n-1)!/(d-1)! overflows i64 at n = {n}")))?;

    let mut inequality_rows = Vec::with_capacity(n * (n - d + 1));
    for a in 1..=n {
        for ell in 0..=n - d {
            let mut coefficients = BTreeMap::new();
            for b in 1..=n {
                let c = binomial(b - 1, ell) * binomial(n - b, n - d - ell);
                let c = c.to_i64().expect("binomial product fits in i64");
                if c != 0 {
                    coefficients.insert((b, a), c);
                }
            }
            inequality_rows.push(ModelRow {
                name: format!("count_a{a}_l{ell}"),
                coefficients,
                sense: Sense::Le,
                rhs,
            });
        }
    }

    let equality_rows = (1..n)
        .map(|b| {
            let mut coefficients = BTreeMap::new();
            for a in 1..=n {
                coefficients.insert((b, a), 1);
                coefficients.insert((b + 1, a), -1);
            }
            ModelRow {
                name: format!("balance_{b}"),
                coefficients,
                sense: Sense::Eq,
                rhs: 0,
            }
        })
        .collect();

    let extra_rows = providers.iter().flat_map(|p| p.rows(params)).collect();
    let objective = (1..=n).map(|a| ((1, a), 1)).collect();
    Ok(IlpModel {
        params,
        inequality_rows,
        equality_rows,
        extra_rows,
        objective,
    })
}

impl IlpModel {
    fn var_index(&self, b: usize, a: usize) -> usize {
        (b - 1) * self.params.n + (a - 1)
    }

    pub fn rows(&self) -> impl Iterator<Item = &ModelRow> {
        self.inequality_rows
            .iter()
            .chain(&self.equality_rows)
            .chain(&self.extra_rows)
    }

    /// The model as a generic program over variables `x_b_a`, row-major in `b`.
    pub fn to_program(&self) -> IntegerProgram {
        let n = self.params.n;
        let var_names = (1..=n)
            .flat_map(|b| (1..=n).map(move |a| format!("x_{b}_{a}")))
            .collect();
        let mut objective = vec![0; n * n];
        for (&(b, a), &c) in &self.objective {
            objective[self.var_index(b, a)] = c;
        }
        let rows = self
            .rows()
            .map(|r| LinearRow {
                name: r.name.clone(),
                terms: r
                    .coefficients
                    .iter()
                    .map(|(&(b, a), &c)| (self.var_index(b, a), c))
                    .collect(),
                sense: r.sense,
                rhs: r.rhs,
            })
            .collect();
        IntegerProgram {
            var_names,
            objective,
            rows,
            lower: vec![0; n * n],
            upper: vec![None; n * n],
        }
    }

    /// Whether the `n × n` matrix `x[b-1][a-1]` satisfies every row.
    pub fn is_feasible(&self, x: &[Vec<i64>]) -> bool {
        let flat: Vec<i64> = x.iter().flatten().copied().collect();
        self.to_program().is_feasible(&flat)
    }
}

/// `X[b][a] = |{σ ∈ words : σ(b) = a}|`, indexed `[b-1][a-1]`.
pub fn position_counts(n: usize, words: &[Permutation]) -> Vec<Vec<i64>> {
    let mut x = vec![vec![0i64; n]; n];
    for w in words {
        for (b, &a) in w.zero_based().iter().enumerate() {
            x[b][a as usize] += 1;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IlpStatus {
    Optimal,
    BoundOnly,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpSolution {
    pub status: IlpStatus,
    /// The integer optimum, or a proven upper bound on it under `BoundOnly`.
    pub objective_value: u64,
    /// `X[b-1][a-1]` of the best integral point.
    pub assignment: Option<Vec<Vec<i64>>>,
    #[serde(with = "rational_string")]
    pub lp_relaxation_value: BigRational,
    pub nodes: u64,
}

pub(crate) mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact optimum of the continuous relaxation.
pub fn solve_lp_relaxation(model: &IlpModel) -> Result<BigRational> {
    match lp::solve_relaxation(&model.to_program()) {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Infeasible => Err(Error::Lp("infeasible".into())),
        LpOutcome::Unbounded => Err(Error::Lp("unbounded".into())),
    }
}

/// Branch-and-bound to the integer optimum, after capping each variable by
/// its tightest counting row.
pub fn solve_ilp(model: &IlpModel, budget: Budget) -> Result<IlpSolution> {
    let relaxation = solve_lp_relaxation(model)?;
    let mut program = model.to_program();
    program.tighten_upper_bounds();
    let outcome = lp::solve_integer(&program, budget)?;
    let n = model.params.n;
    let status = match outcome.status {
        BranchStatus::Optimal => IlpStatus::Optimal,
        BranchStatus::BoundOnly => IlpStatus::BoundOnly,
        BranchStatus::Infeasible => IlpStatus::Infeasible,
    };
    let assignment = outcome
        .incumbent
        .map(|(_, x)| x.chunks(n).map(<[i64]>::to_vec).collect());
    Ok(IlpSolution {
        status,
        objective_value: outcome.objective_bound.max(0) as u64,
        assignment,
        lp_relaxation_value: relaxation,
        nodes: outcome.nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpBound {
    pub params: CodeParams,
    pub value: u64,
    pub status: IlpStatus,
    pub singleton: u64,
}

/// `min(singleton, integer-programming optimum or proven bound)`.
pub fn ip_upper_bound(params: CodeParams, budget: Budget) -> Result<IpBound> {
    let singleton: BigUint = singleton_upper(params);
    let singleton = singleton
        .to_u64()
        .ok_or_else(|| Error::Capacity(format!("(n-d+1)! overflows u64 at {params:?}")))?;
    if params.d == 1 {
        return Ok(IpBound {
            params,
            value: singleton,
            status: IlpStatus::Optimal,
            singleton,
        });
    }
    let solution = solve_ilp(&build_model(params)?, budget)?;
    Ok(IpBound {
        params,
        value: solution.objective_value.min(singleton),
        status: solution.status,
        singleton,
    })
}

/// The model in `.lp` text with variables `x_b_a`.
pub fn export_lp(model: &IlpModel) -> String {
    let comment = format!(
        "Ulam-metric code size bound, n = {}, d = {}",
        model.params.n, model.params.d
    );
    lp::format::write_lp(&model.to_program(), &comment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::all_permutations;

    fn cp(n: usize, d: usize) -> CodeParams {
        CodeParams::new(n, d).unwrap()
    }

    #[test]
    fn worked_example_rows() {
        let m = build_model(cp(5, 3)).unwrap();
        assert_eq!(m.inequality_rows.len(), 15);
        assert_eq!(m.equality_rows.len(), 4);
        let expected = [[6, 3, 1, 0, 0], [0, 3, 4, 3, 0], [0, 0, 1, 3, 6]];
        for a in 1..=5 {
            for ell in 0..3 {
                let row = &m.inequality_rows[(a - 1) * 3 + ell];
                assert_eq!(row.rhs, 12);
                let coefs: Vec<i64> = (1..=5).map(|b| row.coefficient(b, a)).collect();
                assert_eq!(coefs, expected[ell]);
                // the row touches symbol a only
                assert!(row.coefficients.keys().all(|&(_, aa)| aa == a));
            }
        }
    }

    #[test]
    fn row_counts_and_coefficients() {
        for n in 3..=8 {
            for d in 2..n {
                let m = build_model(cp(n, d)).unwrap();
                assert_eq!(m.inequality_rows.len(), n * (n - d + 1));
                assert_eq!(m.equality_rows.len(), n - 1);
                let rhs = (factorial(n - 1) / factorial(d - 1)).to_i64().unwrap();
                for (k, row) in m.inequality_rows.iter().enumerate() {
                    let (a, ell) = (k / (n - d + 1) + 1, k % (n - d + 1));
                    assert_eq!(row.rhs, rhs);
                    for b in 1..=n {
                        let c = (binomial(b - 1, ell) * binomial(n - b, n - d - ell)).to_i64().unwrap();
                        assert_eq!(row.coefficient(b, a), c);
                    }
                }
            }
        }
    }

    #[test]
    fn largest_distance_has_two_slots() {
        let n = 6;
        let m = build_model(cp(n, n - 1)).unwrap();
        assert_eq!(m.inequality_rows.len(), 2 * n);
        let row = &m.inequality_rows[0];
        let coefs: Vec<i64> = (1..=n).map(|b| row.coefficient(b, 1)).collect();
        // C(b-1, 0) C(n-b, 1) = n - b
        assert_eq!(coefs, vec![5, 4, 3, 2, 1, 0]);
    }

    #[test]
    fn rejects_distance_one() {
        assert!(build_model(cp(4, 1)).is_err());
        let b = ip_upper_bound(cp(4, 1), Budget::unlimited()).unwrap();
        assert_eq!(b.value, 24);
    }

    #[test]
    fn all_ones_is_feasible_for_the_worked_example() {
        let m = build_model(cp(5, 3)).unwrap();
        assert!(m.is_feasible(&vec![vec![1; 5]; 5]));
        // column sums of each coefficient pattern stay under the right-hand side
        for row in &m.inequality_rows {
            let total: i64 = row.coefficients.values().sum();
            assert!(total <= row.rhs);
        }
    }

    #[test]
    fn worked_example_optimum() {
        let m = build_model(cp(5, 3)).unwrap();
        let sol = solve_ilp(&m, Budget::unlimited()).unwrap();
        assert_eq!(sol.status, IlpStatus::Optimal);
        assert_eq!(sol.objective_value, 5);
        assert!(m.is_feasible(sol.assignment.as_ref().unwrap()));
        let obj: i64 = sol.assignment.as_ref().unwrap()[0].iter().sum();
        assert_eq!(obj, 5);
        // regression: the relaxation sits exactly on the Singleton value
        assert_eq!(sol.lp_relaxation_value, BigRational::from_integer(6.into()));
    }

    #[test]
    fn relaxation_of_zero_rhs_model_is_zero() {
        let mut m = build_model(cp(5, 3)).unwrap();
        for row in &mut m.inequality_rows {
            row.rhs = 0;
        }
        assert_eq!(
            solve_lp_relaxation(&m).unwrap(),
            BigRational::from_integer(0.into())
        );
    }

    #[test]
    fn distance_two_at_four() {
        let sol = solve_ilp(&build_model(cp(4, 2)).unwrap(), Budget::unlimited()).unwrap();
        assert_eq!(sol.status, IlpStatus::Optimal);
        assert!(sol.objective_value >= 6);
    }

    #[test]
    fn whole_group_counts_violate_only_when_expected() {
        // S_n itself is an (n, 1) code; as an (n, 2) code it breaks the rows
        let all: Vec<_> = all_permutations(4).collect();
        let m = build_model(cp(4, 2)).unwrap();
        assert!(!m.is_feasible(&position_counts(4, &all)));
        assert!(m.is_feasible(&position_counts(4, &all[..1])));
    }

    #[test]
    fn export_is_stable_and_contains_worked_rows() {
        let m = build_model(cp(5, 3)).unwrap();
        let text = export_lp(&m);
        assert_eq!(text, export_lp(&m));
        assert!(text.contains(" count_a2_l0: 6 x_1_2 + 3 x_2_2 + 1 x_3_2 <= 12\n"));
        assert!(text.contains(" count_a2_l1: 3 x_2_2 + 4 x_3_2 + 3 x_4_2 <= 12\n"));
        assert!(text.contains(" count_a2_l2: 1 x_3_2 + 3 x_4_2 + 6 x_5_2 <= 12\n"));
        let reparsed = lp::format::read_lp(&text).unwrap();
        assert_eq!(reparsed, m.to_program());
    }

    struct CapFirstPosition;
    impl ConstraintProvider for CapFirstPosition {
        fn rows(&self, params: CodeParams) -> Vec<ModelRow> {
            let coefficients = (1..=params.n).map(|a| ((1, a), 1)).collect();
            vec![ModelRow {
                name: "cap".into(),
                coefficients,
                sense: Sense::Le,
                rhs: 3,
            }]
        }
    }

    #[test]
    fn constraint_providers_extend_the_model() {
        let m = build_model_with(cp(5, 3), &[&CapFirstPosition]).unwrap();
        assert_eq!(m.extra_rows.len(), 1);
        let sol = solve_ilp(&m, Budget::unlimited()).unwrap();
        assert_eq!(sol.objective_value, 3);
    }
}
