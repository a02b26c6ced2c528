//! Best-bound branch-and-bound.
//!
//! Node LPs are re-solved in floating point by the dual simplex, warm
//! started from the parent tableau. A node's bound is not the float optimum
//! but `⌊y·b + Σ_j max(r_j u_j, r_j l_j)⌋`, evaluated exactly in integers for
//! the rounded float duals `y` and reduced costs `r = c - yA`; weak duality
//! makes it a valid bound for any `y` of the right signs. Infeasibility and
//! doubtful integral points are re-checked with the exact rational simplex,
//! so pruning never rests on rounding.
//!
//! Nodes are ordered by that bound (the objective is integral), then by
//! depth (deeper first), then by creation order. Branching picks the most
//! fractional variable, ties going to the lowest index. The order is fully
//! deterministic, so node counts are reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::simplex::{solve_with_bounds, LpOutcome, Resolve, WarmLp};
use super::{IntegerProgram, Sense};
use crate::budget::Budget;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Optimal,
    BoundOnly,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    pub status: BranchStatus,
    /// The optimum, or the best proven upper bound under `BoundOnly`.
    pub objective_bound: i64,
    /// Best integral point found.
    pub incumbent: Option<(i64, Vec<i64>)>,
    /// Exact optimum of the root relaxation.
    pub relaxation: BigRational,
    pub nodes: u64,
}

/// Open nodes that keep their tableau; beyond this, a node is re-solved
/// from the root tableau when it is expanded.
const STORED_TABLEAUX: usize = 1024;

/// Distance from an integer below which a value counts as integral.
const INTEGRALITY: f64 = 1e-6;

/// Dual values are rounded to multiples of `1 / DUAL_SCALE`.
const DUAL_SCALE: i128 = 1 << 24;

struct Node {
    key: i64,
    depth: u32,
    seq: u64,
    lower: Vec<i64>,
    upper: Vec<Option<i64>>,
    x: Vec<f64>,
    lp: Option<Box<WarmLp<f64>>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

fn floor_i64(v: &BigRational) -> i64 {
    v.floor().to_integer().to_i64().expect("objective fits in i64")
}

/// `⌊max c·x⌋` over the box and rows, bounded through the duals `y`.
fn dual_bound(program: &IntegerProgram, duals: &[f64], lower: &[i64], upper: &[Option<i64>]) -> Option<i64> {
    let total = weak_dual(program, &program.objective, duals, lower, upper)?;
    i64::try_from(total.div_euclid(DUAL_SCALE)).ok()
}

/// With a zero objective, a negative weak-dual value proves that no point
/// in the box satisfies the rows.
fn certifies_infeasible(program: &IntegerProgram, ray: &[f64], lower: &[i64], upper: &[Option<i64>]) -> bool {
    let scale = ray.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return false;
    }
    let ray: Vec<f64> = ray.iter().map(|v| v / scale).collect();
    let zero = vec![0; program.num_vars()];
    weak_dual(program, &zero, &ray, lower, upper).is_some_and(|t| t < 0)
}

/// `y·b + Σ_j max(r_j u_j, r_j l_j)` scaled by `DUAL_SCALE`, with `y`
/// rounded and sign-clamped and `r = c - yA`.
fn weak_dual(
    program: &IntegerProgram,
    objective: &[i64],
    duals: &[f64],
    lower: &[i64],
    upper: &[Option<i64>],
) -> Option<i128> {
    let mut reduced: Vec<i128> = objective.iter().map(|&c| c as i128 * DUAL_SCALE).collect();
    let mut total: i128 = 0;
    for (row, &y) in program.rows.iter().zip(duals) {
        if !y.is_finite() || y.abs() > 1e9 {
            return None;
        }
        let mut y = (y * DUAL_SCALE as f64).round() as i128;
        y = match row.sense {
            Sense::Le => y.max(0),
            Sense::Ge => y.min(0),
            Sense::Eq => y,
        };
        if y == 0 {
            continue;
        }
        total += y * row.rhs as i128;
        for &(j, a) in &row.terms {
            reduced[j] -= y * a as i128;
        }
    }
    for (j, &r) in reduced.iter().enumerate() {
        total += match (r > 0, upper[j]) {
            (true, Some(u)) => r * u as i128,
            (true, None) => return None,
            (false, _) => r * lower[j] as i128,
        };
    }
    Some(total)
}

enum Eval {
    Infeasible,
    Open {
        key: i64,
        x: Vec<f64>,
        lp: Option<WarmLp<f64>>,
    },
}

/// Exact cold solve, for when the float path cannot be trusted.
fn evaluate_exact(program: &IntegerProgram, lower: &[i64], upper: &[Option<i64>]) -> Result<Eval> {
    match solve_with_bounds(program, lower, upper) {
        LpOutcome::Optimal { value, x } => Ok(Eval::Open {
            key: floor_i64(&value),
            x: x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
            lp: None,
        }),
        LpOutcome::Infeasible => Ok(Eval::Infeasible),
        LpOutcome::Unbounded => Err(Error::Lp("unbounded".into())),
    }
}

fn evaluate(program: &IntegerProgram, lp: Option<WarmLp<f64>>, lower: &[i64], upper: &[Option<i64>]) -> Result<Eval> {
    if let Some(lp) = lp {
        if let Some(key) = dual_bound(program, &lp.duals(program.rows.len()), lower, upper) {
            return Ok(Eval::Open {
                key,
                x: lp.x(),
                lp: Some(lp),
            });
        }
    }
    evaluate_exact(program, lower, upper)
}

/// Most fractional variable whose floor leaves room on both sides.
fn branch_variable(x: &[f64], lower: &[i64], upper: &[Option<i64>]) -> Option<(usize, i64)> {
    let mut best: Option<(f64, usize, i64)> = None;
    for (j, &v) in x.iter().enumerate() {
        if (v - v.round()).abs() <= INTEGRALITY {
            continue;
        }
        let floor = v.floor() as i64;
        if floor < lower[j] || upper[j].is_some_and(|u| floor >= u) {
            continue;
        }
        let dist = (v - v.floor() - 0.5).abs();
        if best.is_none_or(|(d, _, _)| dist < d) {
            best = Some((dist, j, floor));
        }
    }
    best.map(|(_, j, f)| (j, f))
}

/// The float tableau of `root` with every bound `lower`/`upper` tighten.
fn rebuild(
    program: &IntegerProgram,
    root: &WarmLp<f64>,
    lower: &[i64],
    upper: &[Option<i64>],
) -> Option<WarmLp<f64>> {
    let mut lp = root.clone();
    for j in 0..lower.len() {
        if lower[j] > program.lower[j] && lp.add_bound(j, Sense::Ge, lower[j]) != Resolve::Feasible {
            return None;
        }
        if upper[j] != program.upper[j] && lp.add_bound(j, Sense::Le, upper[j].unwrap()) != Resolve::Feasible {
            return None;
        }
    }
    Some(lp)
}

/// Solves `program` to integral optimality or until `budget` runs out.
pub fn solve_integer(program: &IntegerProgram, budget: Budget) -> Result<BranchOutcome> {
    let mut meter = budget.start();
    meter.tick();
    let relaxation = match solve_with_bounds(program, &program.lower, &program.upper) {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Infeasible => {
            return Ok(BranchOutcome {
                status: BranchStatus::Infeasible,
                objective_bound: 0,
                incumbent: None,
                relaxation: BigRational::zero(),
                nodes: meter.nodes(),
            })
        }
        LpOutcome::Unbounded => return Err(Error::Lp("unbounded".into())),
    };
    let root_lp = WarmLp::<f64>::solve(program, &program.lower, &program.upper).ok();

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut stored = 0usize;
    match evaluate(program, root_lp.clone(), &program.lower, &program.upper)? {
        Eval::Open { key, x, lp } => {
            stored += usize::from(lp.is_some());
            heap.push(Node {
                key: key.min(floor_i64(&relaxation)),
                depth: 0,
                seq,
                lower: program.lower.clone(),
                upper: program.upper.clone(),
                x,
                lp: lp.map(Box::new),
            });
        }
        Eval::Infeasible => unreachable!("the exact root solve was feasible"),
    }
    let mut incumbent: Option<(i64, Vec<i64>)> = None;

    while let Some(mut node) = heap.pop() {
        if node.lp.is_some() {
            stored -= 1;
        }
        if incumbent.as_ref().is_some_and(|(v, _)| node.key <= *v) {
            heap.clear();
            break;
        }
        let mut branch = branch_variable(&node.x, &node.lower, &node.upper);
        if branch.is_none() {
            let point: Vec<i64> = node.x.iter().map(|v| v.round() as i64).collect();
            let value = program.objective_value(&point);
            let trusted = program.is_feasible(&point)
                && point.iter().zip(&node.lower).all(|(v, l)| v >= l)
                && point.iter().zip(&node.upper).all(|(v, u)| u.is_none_or(|u| *v <= u));
            if trusted && value >= node.key {
                if incumbent.as_ref().is_none_or(|(v, _)| value > *v) {
                    incumbent = Some((value, point));
                }
                continue;
            }
            match solve_with_bounds(program, &node.lower, &node.upper) {
                LpOutcome::Optimal { x, .. } => {
                    if x.iter().all(|v| v.is_integer()) {
                        let point: Vec<i64> = x.iter().map(floor_i64).collect();
                        let value = program.objective_value(&point);
                        if incumbent.as_ref().is_none_or(|(v, _)| value > *v) {
                            incumbent = Some((value, point));
                        }
                        continue;
                    }
                    node.x = x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
                    node.lp = None;
                    branch = branch_variable(&node.x, &node.lower, &node.upper);
                }
                LpOutcome::Infeasible => continue,
                LpOutcome::Unbounded => return Err(Error::Lp("unbounded".into())),
            }
        }
        let Some((j, floor)) = branch else {
            return Err(Error::Lp("no branching variable at a fractional node".into()));
        };

        let parent = match node.lp {
            Some(lp) => Some(*lp),
            None => root_lp
                .as_ref()
                .and_then(|root| rebuild(program, root, &node.lower, &node.upper)),
        };
        let mut down_upper = node.upper.clone();
        down_upper[j] = Some(floor);
        let mut up_lower = node.lower.clone();
        up_lower[j] = floor + 1;
        let children = [
            (node.lower.clone(), down_upper, Sense::Le, floor),
            (up_lower, node.upper.clone(), Sense::Ge, floor + 1),
        ];
        let mut out_of_budget = false;
        for (lower, upper, sense, bound) in children {
            if !meter.tick() {
                out_of_budget = true;
                break;
            }
            let eval = match parent.clone() {
                Some(mut lp) => match lp.add_bound(j, sense, bound) {
                    Resolve::Feasible => evaluate(program, Some(lp), &lower, &upper)?,
                    Resolve::Infeasible
                        if lp
                            .farkas(program.rows.len())
                            .is_some_and(|ray| certifies_infeasible(program, &ray, &lower, &upper)) =>
                    {
                        Eval::Infeasible
                    }
                    _ => evaluate_exact(program, &lower, &upper)?,
                },
                None => evaluate_exact(program, &lower, &upper)?,
            };
            let Eval::Open { key, x, lp } = eval else {
                continue;
            };
            // a child never beats its parent
            let key = key.min(node.key);
            if incumbent.as_ref().is_some_and(|(v, _)| key <= *v) {
                continue;
            }
            seq += 1;
            let lp = if stored < STORED_TABLEAUX {
                lp.map(|lp| {
                    stored += 1;
                    Box::new(lp)
                })
            } else {
                None
            };
            heap.push(Node {
                key,
                depth: node.depth + 1,
                seq,
                lower,
                upper,
                x,
                lp,
            });
        }
        if out_of_budget {
            // the interrupted node still bounds its unexplored children
            let open = heap.iter().map(|n| n.key).chain([node.key]).max().unwrap();
            let best = incumbent.as_ref().map_or(i64::MIN, |(v, _)| *v);
            return Ok(BranchOutcome {
                status: BranchStatus::BoundOnly,
                objective_bound: open.max(best),
                incumbent,
                relaxation,
                nodes: meter.nodes(),
            });
        }
    }

    Ok(match incumbent {
        Some((value, point)) => BranchOutcome {
            status: BranchStatus::Optimal,
            objective_bound: value,
            incumbent: Some((value, point)),
            relaxation,
            nodes: meter.nodes(),
        },
        None => BranchOutcome {
            status: BranchStatus::Infeasible,
            objective_bound: 0,
            incumbent: None,
            relaxation,
            nodes: meter.nodes(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LinearRow;

    fn knapsack() -> IntegerProgram {
        // max 8a + 11b + 6c + 4d, 5a + 7b + 4c + 3d <= 14, binaries -> 21
        IntegerProgram {
            var_names: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            objective: vec![8, 11, 6, 4],
            rows: vec![LinearRow {
                name: "cap".into(),
                terms: vec![(0, 5), (1, 7), (2, 4), (3, 3)],
                sense: Sense::Le,
                rhs: 14,
            }],
            lower: vec![0; 4],
            upper: vec![Some(1); 4],
        }
    }

    /// Exhaustive oracle over the box.
    fn brute_force(p: &IntegerProgram) -> i64 {
        let mut best = i64::MIN;
        let ub: Vec<i64> = p.upper.iter().map(|u| u.unwrap()).collect();
        let mut x = p.lower.clone();
        loop {
            if p.is_feasible(&x) {
                best = best.max(p.objective_value(&x));
            }
            let mut k = 0;
            while k < x.len() {
                if x[k] < ub[k] {
                    x[k] += 1;
                    break;
                }
                x[k] = p.lower[k];
                k += 1;
            }
            if k == x.len() {
                return best;
            }
        }
    }

    #[test]
    fn binary_knapsack() {
        let p = knapsack();
        let out = solve_integer(&p, Budget::unlimited()).unwrap();
        assert_eq!(out.status, BranchStatus::Optimal);
        assert_eq!(out.objective_bound, 21);
        assert_eq!(brute_force(&p), 21);
        assert!(p.is_feasible(&out.incumbent.unwrap().1));
        assert!(floor_i64(&out.relaxation) >= 21);
        assert_eq!(out.relaxation, BigRational::new(22.into(), 1.into()));
    }

    #[test]
    fn general_integers_against_brute_force() {
        let p = IntegerProgram {
            var_names: vec!["x".into(), "y".into(), "z".into()],
            objective: vec![3, 2, 4],
            rows: vec![
                LinearRow {
                    name: "a".into(),
                    terms: vec![(0, 3), (1, 5), (2, 7)],
                    sense: Sense::Le,
                    rhs: 29,
                },
                LinearRow {
                    name: "b".into(),
                    terms: vec![(0, 4), (1, 1), (2, 2)],
                    sense: Sense::Le,
                    rhs: 17,
                },
                LinearRow {
                    name: "c".into(),
                    terms: vec![(0, 1), (2, -1)],
                    sense: Sense::Ge,
                    rhs: -1,
                },
            ],
            lower: vec![0; 3],
            upper: vec![Some(6); 3],
        };
        let out = solve_integer(&p, Budget::unlimited()).unwrap();
        assert_eq!(out.status, BranchStatus::Optimal);
        assert_eq!(out.objective_bound, brute_force(&p));
    }

    #[test]
    fn budget_exhaustion_reports_a_valid_bound() {
        let p = knapsack();
        let out = solve_integer(&p, Budget::nodes(2)).unwrap();
        assert_eq!(out.status, BranchStatus::BoundOnly);
        assert!(out.objective_bound >= 21);
    }

    #[test]
    fn infeasible_program() {
        let mut p = knapsack();
        p.rows[0].sense = Sense::Ge;
        p.rows[0].rhs = 100;
        let out = solve_integer(&p, Budget::unlimited()).unwrap();
        assert_eq!(out.status, BranchStatus::Infeasible);
    }
}
