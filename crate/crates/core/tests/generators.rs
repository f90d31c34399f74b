mod common;

use common::*;
use proptest::prelude::*;
use qsearch_core::oracle::{close_nogoods, solution_count};
use qsearch_core::problems::{
    encode_3sat, encode_graph_coloring, enumerate_solutions_bruteforce, gen_random_csp, m_max, EnsembleSpec,
};
use qsearch_core::{run_trial, AssumptionSet, PhasePolicy, ProblemInstance, SimulationLimits};

fn dp_solutions(problem: &ProblemInstance) -> Vec<AssumptionSet> {
    let mut s = close_nogoods(problem, &SimulationLimits::default()).unwrap().solutions().to_vec();
    s.sort_unstable();
    s
}

#[test]
fn lattice_closure_agrees_with_brute_force() {
    let mut checked = 0;
    for n in (4..=16).step_by(2) {
        for m in [0, n.min(m_max(n / 2)), m_max(n / 2)] {
            let spec = EnsembleSpec::new(n, m, 5, 17).unwrap();
            for index in 0..5 {
                let problem = gen_random_csp(&spec, index).unwrap();
                let dp = dp_solutions(&problem);
                assert_eq!(dp, enumerate_solutions_bruteforce(&problem).unwrap(), "n={n} m={m} #{index}");
                assert!(!dp.is_empty());
                let planted = problem.prespecified_solution().unwrap();
                assert!(dp.contains(&planted));
                if m == m_max(n / 2) {
                    assert_eq!(dp, vec![planted]);
                }
                if m == 0 {
                    assert_eq!(dp.len(), 1 << (n / 2));
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 100);
}

#[test]
fn engine_matches_dense_simulation_on_random_instances() {
    for n in [4, 6, 8] {
        for m in [0, n / 2, n.min(m_max(n / 2)), m_max(n / 2)] {
            let spec = EnsembleSpec::new(n, m, 3, 5).unwrap();
            for index in 0..3 {
                let problem = gen_random_csp(&spec, index).unwrap();
                for policy in [PhasePolicy::Staged, PhasePolicy::NogoodOnly] {
                    let got = run_trial(&problem, n / 2 + 1, policy).unwrap();
                    let naive = naive_run(&problem, n / 2 + 1, policy == PhasePolicy::Staged);
                    assert!(max_abs_diff(&got.p_soln, &naive) < 1e-12, "n={n} m={m} #{index} {policy}");
                }
            }
        }
    }
}

#[test]
fn coloring_and_sat_agree_with_brute_force() {
    // 4-cycle with a chord, 3 colors: 6 proper colorings.
    let edges = [(1, 2), (2, 3), (3, 4), (4, 1), (1, 3)];
    let p = encode_graph_coloring(&edges, 4, 3).unwrap();
    assert_eq!(dp_solutions(&p), enumerate_solutions_bruteforce(&p).unwrap());
    assert_eq!(solution_count(&close_nogoods(&p, &SimulationLimits::default()).unwrap()), 6);

    let clauses = [[1, -2, 3], [-1, 2, 4], [2, 3, -4], [-3, -4, 5], [1, 4, -5], [-1, -2, -5]];
    let p = encode_3sat(&clauses, 5).unwrap();
    let dp = dp_solutions(&p);
    assert_eq!(dp, enumerate_solutions_bruteforce(&p).unwrap());
    // Count satisfying assignments directly from the clauses.
    let direct = (0u32..32)
        .filter(|a| {
            clauses.iter().all(|c| {
                c.iter().any(|&lit| {
                    let v = (a >> (lit.unsigned_abs() - 1)) & 1 == 1;
                    if lit > 0 { v } else { !v }
                })
            })
        })
        .count();
    assert_eq!(dp.len(), direct);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn goods_are_closed_under_subsets(n in (2usize..=7).prop_map(|h| 2 * h), alpha in 0.0f64..3.0, index in 0u64..1000) {
        let m = ((alpha * n as f64).round() as usize).min(m_max(n / 2));
        let problem = gen_random_csp(&EnsembleSpec::new(n, m, 1, 3).unwrap(), index).unwrap();
        let map = close_nogoods(&problem, &SimulationLimits::default()).unwrap();
        for s in 0u64..1 << n {
            let set = AssumptionSet::from_bits(s);
            prop_assert_eq!(map.is_good(set), naive_is_good(&problem, s));
            if map.is_good(set) {
                for b in 0..n {
                    prop_assert!(map.is_good(AssumptionSet::from_bits(s & !(1 << b))));
                }
            }
        }
    }

    #[test]
    fn generated_nogoods_have_the_expected_shape(n in (1usize..=16).prop_map(|h| 2 * h), frac in 0.0f64..=1.0, seed in any::<u64>(), index in any::<u64>()) {
        let l = n / 2;
        let m = (frac * m_max(l) as f64).floor() as usize;
        let spec = EnsembleSpec::new(n, m, 1, seed).unwrap();
        let problem = gen_random_csp(&spec, index).unwrap();
        prop_assert_eq!(&problem, &gen_random_csp(&spec, index).unwrap());
        let solution = problem.prespecified_solution().unwrap();
        prop_assert_eq!(solution.len(), l);
        prop_assert_eq!(problem.nogoods().len(), l + m);
        let mut seen = std::collections::HashSet::new();
        for ng in problem.nogoods() {
            prop_assert_eq!(ng.len(), 2);
            prop_assert!(!ng.is_subset_of(solution));
            prop_assert!(seen.insert(*ng));
        }
        // Each variable v owns assumptions 2v-1 and 2v; the solution picks one.
        for v in 0..l {
            prop_assert_eq!((solution.bits() >> (2 * v) & 3).count_ones(), 1);
        }
    }
}
