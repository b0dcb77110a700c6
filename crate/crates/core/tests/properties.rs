use proptest::prelude::*;
use uep_core::allocators::{check_feasibility, heuristic_uep_ram, AllocationProblem, AllocationSolution, SolverKind};
use uep_core::channel::RadioConfig;
use uep_core::decode_prob::{brute_force_decode_prob, decode_probabilities, window_decode_prob};
use uep_core::{LayerConfig, TransmissionPlan};

fn instance() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>, Vec<f64>)> {
    (1usize..=3).prop_flat_map(|l| {
        (
            prop::collection::vec(1usize..=12, l),
            prop::collection::vec(0usize..=9, l),
            prop::collection::vec(1usize..=4, l),
            prop::collection::vec(0.0f64..=1.0, l),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dp_equals_enumeration((k, tbs, cap, p) in instance()) {
        let layers = LayerConfig::from_sizes(&k).unwrap();
        let plan = TransmissionPlan::from_capacity(tbs, cap).unwrap();
        let all = decode_probabilities(&layers, &plan, &p).unwrap();
        for w in 1..=k.len() {
            let bf = brute_force_decode_prob(&layers, &plan, &p, w).unwrap();
            prop_assert!((all.window(w) - bf).abs() <= 1e-12);
            prop_assert!((window_decode_prob(&layers, &plan, &p, w).unwrap() - bf).abs() <= 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&bf));
        }
    }

    #[test]
    fn more_tbs_or_fewer_erasures_never_hurt((k, tbs, cap, p) in instance(), which in 0usize..3, dp in 0.0f64..0.5) {
        let layers = LayerConfig::from_sizes(&k).unwrap();
        let which = which % k.len();
        let base = TransmissionPlan::from_capacity(tbs.clone(), cap.clone()).unwrap();
        let mut more = tbs.clone();
        more[which] += 1;
        let more = TransmissionPlan::from_capacity(more, cap).unwrap();
        let mut cleaner = p.clone();
        cleaner[which] = (cleaner[which] - dp).max(0.0);
        let a = decode_probabilities(&layers, &base, &p).unwrap().per_window;
        let b = decode_probabilities(&layers, &more, &p).unwrap().per_window;
        let c = decode_probabilities(&layers, &base, &cleaner).unwrap().per_window;
        for w in 0..k.len() {
            prop_assert!(b[w] >= a[w] - 1e-12);
            prop_assert!(c[w] >= a[w] - 1e-12);
        }
    }

    #[test]
    fn heuristic_output_passes_feasibility(
        k in prop::collection::vec(1usize..=30, 1..=3),
        users in prop::collection::vec(1u8..=15, 1..=30),
        rbp in 1usize..=4,
    ) {
        let l = k.len();
        let t: Vec<f64> = (0..l).map(|i| 0.99 - 0.2 * i as f64).collect();
        let layers = LayerConfig::new(k, vec![1.0; l], vec![30.0; l], t).unwrap();
        let p = AllocationProblem::new(layers, users, RadioConfig::default().with_rbp(rbp), 0.99).unwrap();
        if let Ok(sol) = heuristic_uep_ram(&p) {
            prop_assert!(sol.feasible);
            prop_assert!(check_feasibility(&p, &sol).feasible);
            // Rebuilding from the plan gives the same verdict and ratio.
            let again = AllocationSolution::from_plan(&p, sol.plan.clone(), SolverKind::Heuristic);
            prop_assert_eq!(again.feasible, sol.feasible);
            prop_assert!((again.tau - sol.tau).abs() <= 1e-12);
            let trace = sol.trace.as_ref().unwrap();
            prop_assert!(sol.plan.total_tbs() <= trace.intermediate.total_tbs());
        }
    }
}
