use induced_trees::graph::{
    count_fortified_trees, count_induced_trees, count_maximal_trees, is_induced_tree,
    max_induced_tree, sample_gnp, tree_census, Graph,
};
use induced_trees::threshold::{
    expectation_ratio, find_k0, fortified_ratio, log_expected_trees, markov_tail, maximal_ratio,
};
use proptest::prelude::*;

fn n_and_p() -> impl Strategy<Value = (usize, f64)> {
    // log-uniform p in [1e-4, 0.9], then n with np > 1
    (-9.2f64..-0.1, 0.05f64..11.0).prop_map(|(lp, lnp)| {
        let p = lp.exp();
        let n = ((lnp.exp() / p).ceil() as usize).max(2);
        (n, p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ratio_matches_log_difference(n in 2usize..1_000_000, frac in 0.0f64..1.0, p in 1e-4f64..0.99) {
        let k = 1 + ((n - 2) as f64 * frac) as usize;
        let r = expectation_ratio(n, k, p).unwrap();
        let lo = log_expected_trees(n, k, p).unwrap().log_abs();
        let hi = log_expected_trees(n, k + 1, p).unwrap().log_abs();
        let direct = (hi - lo).exp();
        if r < f64::MIN_POSITIVE {
            // far past the peak both sides underflow
            prop_assert!(direct < 1e-300);
        } else {
            // both sides are rounded logs of magnitudes up to e^(1e6)
            let tol = 1e-9f64.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs()));
            prop_assert!(((r - direct) / r).abs() <= tol, "n={} k={} p={} {} {}", n, k, p, r, direct);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn crossing_is_definitional((n, p) in n_and_p()) {
        let r = find_k0(n, p).unwrap();
        prop_assert!(r.log_expected(r.k0).log_abs() > r.log_cut);
        prop_assert!(r.log_cut >= r.log_expected(r.k0 + 1).log_abs());
        prop_assert!(r.log_expected(r.k_unit).log_abs() >= 0.0);
        prop_assert!(r.log_expected(r.k_unit + 1).log_abs() < 0.0);
        // with np >= e the ln(np) cut is at least 1
        if n as f64 * p >= std::f64::consts::E {
            prop_assert!(r.k_unit >= r.k0);
        }
    }

    #[test]
    fn ratios_are_probabilities(n in 1usize..100_000, frac in 0.0f64..=1.0, p in 1e-4f64..0.999) {
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        let f = fortified_ratio(n, k, p).unwrap().value;
        let w = maximal_ratio(n, k, p).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert!((0.0..=1.0).contains(&markov_tail(n, p, k).unwrap()));
    }

    #[test]
    fn counters_are_consistent(n in 1usize..13, p in 0.05f64..0.95, seed: u64) {
        let g = sample_gnp(n, p, seed).unwrap();
        let t = max_induced_tree(&g).unwrap();
        prop_assert!(is_induced_tree(&g, &t.witness).unwrap());
        let c = tree_census(&g).unwrap();
        prop_assert_eq!(c.max_order(), t.size);
        prop_assert!(count_maximal_trees(&g, t.size).unwrap() >= 1);
        prop_assert_eq!(count_induced_trees(&g, 1).unwrap(), n as u64);
        if n >= 2 {
            prop_assert_eq!(count_induced_trees(&g, 2).unwrap(), g.edge_count() as u64);
        }
        for k in 1..=n {
            let x = count_induced_trees(&g, k).unwrap();
            prop_assert_eq!(x, c.trees[k]);
            prop_assert!(count_fortified_trees(&g, k).unwrap() <= x);
            prop_assert!(count_maximal_trees(&g, k).unwrap() <= x);
        }
        // the vacuous outside condition at k = n
        prop_assert_eq!(c.fortified[n], c.trees[n]);
    }

    #[test]
    fn text_format_round_trips(n in 0usize..80, p in 0.0f64..=1.0, seed: u64) {
        let g = sample_gnp(n, p, seed).unwrap();
        let back: Graph = g.to_string().parse().unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(sample_gnp(n, p, seed).unwrap(), g);
    }
}
