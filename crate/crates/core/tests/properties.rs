mod common;

use num_traits::ToPrimitive;
use proptest::prelude::*;
use ulam_core::ball::{lis_distribution_exact, lis_prob_mc, sphere_packing_bounds};
use ulam_core::bounds::{gv_lower, rate_function_i, singleton_upper};
use ulam_core::ip::{build_model, export_lp, ip_upper_bound, solve_ilp, IlpStatus};
use ulam_core::lp::{self, format::read_lp, BranchStatus};
use ulam_core::perm::{
    apply_translocation, compose, inverse, lcs_length, lis_length, ulam_distance,
};
use ulam_core::search::{color_class, max_code_search};
use ulam_core::{Budget, CodeParams, Permutation, Translocation};

fn perm_strategy(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..=max_n).prop_flat_map(|n| Just((1..=n).collect::<Vec<_>>()).prop_shuffle())
}

fn pair_strategy(max_n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1..=max_n).prop_flat_map(|n| {
        let id: Vec<usize> = (1..=n).collect();
        (Just(id.clone()).prop_shuffle(), Just(id).prop_shuffle())
    })
}

fn triple_strategy(max_n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>)> {
    (1..=max_n).prop_flat_map(|n| {
        let id: Vec<usize> = (1..=n).collect();
        (
            Just(id.clone()).prop_shuffle(),
            Just(id.clone()).prop_shuffle(),
            Just(id).prop_shuffle(),
        )
    })
}

fn p(v: &[usize]) -> Permutation {
    Permutation::from_one_based(v).unwrap()
}

proptest! {
    #[test]
    fn entries_form_a_bijection(v in perm_strategy(40)) {
        let sigma = p(&v);
        let mut seen = sigma.to_one_based();
        seen.sort_unstable();
        prop_assert_eq!(seen, (1..=v.len()).collect::<Vec<_>>());
    }

    #[test]
    fn composition_follows_the_convention((a, b) in pair_strategy(30)) {
        let r = compose(&p(&a), &p(&b)).unwrap().to_one_based();
        for i in 0..a.len() {
            prop_assert_eq!(r[i], a[b[i] - 1]);
        }
    }

    #[test]
    fn composition_is_associative((a, b, c) in triple_strategy(20)) {
        let (a, b, c) = (p(&a), p(&b), p(&c));
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_laws(v in perm_strategy(40)) {
        let s = p(&v);
        let e = Permutation::identity(v.len());
        prop_assert_eq!(compose(&s, &inverse(&s)).unwrap(), e.clone());
        prop_assert_eq!(compose(&inverse(&s), &s).unwrap(), e);
    }

    #[test]
    fn lis_matches_quadratic_oracle(v in perm_strategy(60)) {
        prop_assert_eq!(lis_length(&p(&v)), common::lis_quadratic(&v));
    }

    #[test]
    fn lcs_matches_dynamic_programme((a, b) in pair_strategy(40)) {
        prop_assert_eq!(lcs_length(&p(&a), &p(&b)).unwrap(), common::lcs_dp(&a, &b));
        prop_assert_eq!(ulam_distance(&p(&a), &p(&b)).unwrap(), common::ulam_dp(&a, &b));
    }

    #[test]
    fn lcs_reduces_to_lis_of_relative_order((a, b) in pair_strategy(40)) {
        let (s, t) = (p(&a), p(&b));
        let reduced = lis_length(&compose(&inverse(&t), &s).unwrap());
        prop_assert_eq!(lcs_length(&s, &t).unwrap(), reduced);
    }

    #[test]
    fn distance_is_a_metric((a, b, c) in triple_strategy(25)) {
        let (a, b, c) = (p(&a), p(&b), p(&c));
        let d = |x: &Permutation, y: &Permutation| ulam_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn distance_is_left_invariant((a, b, c) in triple_strategy(25)) {
        let (a, b, c) = (p(&a), p(&b), p(&c));
        let before = ulam_distance(&a, &b).unwrap();
        let after = ulam_distance(&compose(&c, &a).unwrap(), &compose(&c, &b).unwrap()).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn translocations_move_one_step(v in perm_strategy(12), seed in any::<u64>()) {
        let n = v.len();
        prop_assume!(n >= 2);
        let all = Translocation::all(n);
        let t = all[(seed % all.len() as u64) as usize];
        let s = p(&v);
        let moved = apply_translocation(&s, t).unwrap();
        let mut sorted = moved.to_one_based();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (1..=n).collect::<Vec<_>>());
        prop_assert_eq!(ulam_distance(&s, &moved).unwrap(), 1);
        prop_assert_eq!(apply_translocation(&moved, t.inverse()).unwrap(), s);
        prop_assert!(common::moves(&v).contains(&moved.to_one_based()));
    }

    #[test]
    fn same_color_class_means_distance_below_d(
        (a, b) in pair_strategy(9),
        d_seed in any::<usize>(),
    ) {
        let n = a.len();
        prop_assume!(n >= 3);
        let d = 2 + d_seed % (n - 2);
        let params = CodeParams::new(n, d).unwrap();
        let (s, t) = (p(&a), p(&b));
        if color_class(&s, params).unwrap() == color_class(&t, params).unwrap() {
            prop_assert!(ulam_distance(&s, &t).unwrap() < d);
        }
    }

    #[test]
    fn rate_function_dominates_reference(c in 2.0001f64..10.0) {
        let reference = 2.0 * c * (c.ln() - 1.0);
        prop_assert!(rate_function_i(c).unwrap() > reference);
    }
}

#[test]
fn gv_never_exceeds_singleton() {
    for n in 2..=10 {
        for d in 1..n {
            let params = CodeParams::new(n, d).unwrap();
            assert!(gv_lower(params) <= singleton_upper(params));
        }
    }
}

#[test]
fn ip_bound_never_exceeds_singleton() {
    let mut strict = Vec::new();
    for n in 4..=7 {
        for d in 2..n {
            let params = CodeParams::new(n, d).unwrap();
            let b = ip_upper_bound(params, Budget::nodes(2_000)).unwrap();
            assert!(b.value <= b.singleton, "({n},{d})");
            if b.value < b.singleton {
                strict.push((n, d, b.value, b.singleton));
            }
        }
    }
    // the worked example is one of the improvements
    assert!(strict.contains(&(5, 3, 5, 6)), "{strict:?}");
}

#[test]
fn relaxation_dominates_integer_optimum() {
    for (n, d) in [(4, 2), (4, 3), (5, 2), (5, 3), (5, 4), (6, 3), (6, 5)] {
        let model = build_model(CodeParams::new(n, d).unwrap()).unwrap();
        let s = solve_ilp(&model, Budget::unlimited()).unwrap();
        assert_eq!(s.status, IlpStatus::Optimal);
        let floor = s.lp_relaxation_value.floor().to_integer();
        assert!(floor >= s.objective_value.into(), "({n},{d})");
        let x = s.assignment.unwrap();
        assert!(model.is_feasible(&x));
        assert_eq!(x[0].iter().sum::<i64>() as u64, s.objective_value);
    }
}

#[test]
fn exported_model_round_trips_through_the_parser() {
    let model = build_model(CodeParams::new(5, 3).unwrap()).unwrap();
    let text = export_lp(&model);
    let mut program = read_lp(&text).unwrap();
    program.tighten_upper_bounds();
    let outcome = lp::solve_integer(&program, Budget::unlimited()).unwrap();
    assert_eq!(outcome.status, BranchStatus::Optimal);
    assert_eq!(outcome.objective_bound, 5);
}

#[test]
fn exact_values_lie_inside_every_bound() {
    for (n, d, a) in [(4, 3, 2u64), (5, 3, 4), (5, 4, 2), (6, 3, 24), (6, 4, 4), (6, 5, 2)] {
        let params = CodeParams::new(n, d).unwrap();
        let found = max_code_search(params, Budget::unlimited()).unwrap();
        assert_eq!(found.code.len() as u64, a);
        let gv = gv_lower(params).to_u64().unwrap();
        let sphere = sphere_packing_bounds(params).unwrap();
        let ip = ip_upper_bound(params, Budget::unlimited()).unwrap().value;
        let singleton = singleton_upper(params).to_u64().unwrap();
        assert!(gv <= a && sphere.lower <= a, "({n},{d})");
        assert!(a <= singleton.min(ip).min(sphere.upper), "({n},{d})");
    }
}

#[test]
fn pooled_monte_carlo_is_unbiased() {
    let dist = lis_distribution_exact(6).unwrap();
    let exact = dist.tail(4) as f64 / dist.total as f64;
    let per_seed = 20_000u64;
    let hits: u64 = (0..10)
        .map(|seed| lis_prob_mc(6, 4, per_seed, 1000 + seed).unwrap().hits)
        .sum();
    let total = 10 * per_seed;
    let estimate = hits as f64 / total as f64;
    let se = (exact * (1.0 - exact) / total as f64).sqrt();
    assert!((estimate - exact).abs() <= 4.0 * se, "{estimate} vs {exact}");
}
