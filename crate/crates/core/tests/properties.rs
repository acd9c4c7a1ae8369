use lomboost::bounds::{
    admissible_range, empirical_gamma, recurrence_envelope_log2, splits_required, BoundQuery,
};
use lomboost::criteria::{
    criterion_bounds, leaf_criterion, split_delta, strong_concavity_lower_bound, tree_criterion,
    CriterionKind, GiniConstant, SplitDecomposition,
};
use lomboost::objective::{
    balance_interval, balancing_factor, objective_value, purity_factor, purity_upper_bound,
    ClassDistribution, SplitStatistics,
};
use proptest::prelude::*;

fn simplex(k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ClassDistribution> {
    k.prop_flat_map(|k| proptest::collection::vec(0.0f64..1.0, k))
        .prop_filter("non-zero mass", |v| v.iter().sum::<f64>() > 1e-6)
        .prop_map(|v| {
            let s: f64 = v.iter().sum();
            ClassDistribution::new(v.into_iter().map(|x| x / s).collect()).unwrap()
        })
}

fn instance() -> impl Strategy<Value = (ClassDistribution, SplitStatistics)> {
    simplex(2..=50).prop_flat_map(|d| {
        let k = d.num_classes();
        proptest::collection::vec(prop_oneof![0.0f64..=1.0, Just(0.0), Just(1.0)], k).prop_map(
            move |p| {
                let s = SplitStatistics::from_conditionals(&d, p).unwrap();
                (d.clone(), s)
            },
        )
    })
}

fn decomposition() -> impl Strategy<Value = SplitDecomposition> {
    (2usize..=50)
        .prop_flat_map(|k| (simplex(k..=k), simplex(k..=k), 0.01f64..=0.99))
        .prop_map(|(l, r, beta)| {
            let parent: Vec<f64> = l
                .probs()
                .iter()
                .zip(r.probs())
                .map(|(a, b)| (1.0 - beta) * a + beta * b)
                .collect();
            SplitDecomposition::new(ClassDistribution::new(parent).unwrap(), beta, l, r).unwrap()
        })
}

fn kinds() -> impl Strategy<Value = CriterionKind> {
    prop_oneof![
        Just(CriterionKind::ShannonEntropy),
        Just(CriterionKind::Gini),
        (2.01f64..20.0).prop_map(|c| CriterionKind::modified_gini(c).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn objective_in_unit_interval((d, s) in instance()) {
        let j = objective_value(&d, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&j));
    }

    #[test]
    fn beta_inside_balance_interval((d, s) in instance()) {
        let j = objective_value(&d, &s).unwrap();
        let (lo, hi) = balance_interval(j).unwrap();
        let beta = balancing_factor(&s);
        prop_assert!(
            (lo - 1e-12..=hi + 1e-12).contains(&beta)
                || (2.0 * beta - 1.0).powi(2) <= 1.0 - j + 1e-12
        );
    }

    #[test]
    fn purity_below_bound_in_the_lighter_orientation((d, s) in instance()) {
        let s = if s.marginal() > 0.5 { s.mirrored() } else { s };
        prop_assume!(s.marginal() > 0.0);
        let j = objective_value(&d, &s).unwrap();
        let alpha = purity_factor(&d, &s).unwrap();
        prop_assert!(alpha <= purity_upper_bound(j, s.marginal()).unwrap() + 1e-9);
    }

    #[test]
    fn objective_symmetric_under_side_swap((d, s) in instance()) {
        let a = objective_value(&d, &s).unwrap();
        let b = objective_value(&d, &s.mirrored()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn objective_invariant_under_class_permutation((d, s) in instance(), rot in 0usize..50) {
        let k = d.num_classes();
        let rot = rot % k;
        let rotate = |v: &[f64]| -> Vec<f64> { (0..k).map(|i| v[(i + rot) % k]).collect() };
        let d2 = ClassDistribution::new(rotate(d.probs())).unwrap();
        let s2 = SplitStatistics::from_conditionals(&d2, rotate(s.conditionals())).unwrap();
        let a = objective_value(&d, &s).unwrap();
        let b = objective_value(&d2, &s2).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn jensen_gap_dominates_concavity_bound(split in decomposition(), kind in kinds()) {
        let delta = split_delta(&split, kind);
        prop_assert!(delta >= 0.0);
        prop_assert!(delta >= strong_concavity_lower_bound(&split, kind) - 1e-9);
    }

    #[test]
    fn gini_gap_equals_its_bound(split in decomposition()) {
        let delta = split_delta(&split, CriterionKind::Gini);
        let bound = strong_concavity_lower_bound(&split, CriterionKind::Gini);
        prop_assert!((delta - bound).abs() <= 1e-12);
    }

    #[test]
    fn modified_gini_never_below_floor(d in simplex(2..=50), c in 2.01f64..20.0) {
        let g = leaf_criterion(&d, CriterionKind::modified_gini(c).unwrap());
        prop_assert!(g >= (c - 1.0).sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn entropy_maximized_by_uniform(d in simplex(2..=50)) {
        let k = d.num_classes();
        let uniform = ClassDistribution::uniform(k);
        let kind = CriterionKind::ShannonEntropy;
        prop_assert!(leaf_criterion(&d, kind) <= leaf_criterion(&uniform, kind) + 1e-12);
    }

    #[test]
    fn single_leaf_tree_within_bounds(d in simplex(2..=50), kind in kinds()) {
        let k = d.num_classes();
        let g = tree_criterion(&[(1.0, d)], kind).unwrap();
        let (lo, hi) = criterion_bounds(0, k, 1.0, kind).unwrap();
        prop_assert!(g >= lo * (1.0 - 1e-12) && g <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn empirical_gamma_in_range((d, s) in instance()) {
        let g = empirical_gamma(&d, &s).unwrap();
        prop_assert!((0.0..=0.5).contains(&g));
    }

    #[test]
    fn budget_drives_envelope_below_target(
        kind in kinds(),
        k in 2usize..=100,
        gamma in 0.01f64..=0.5,
        fraction in 0.001f64..=1.0,
    ) {
        let (lo, hi) = admissible_range(kind, k).unwrap();
        let alpha = lo + fraction * (hi - lo);
        let q = BoundQuery::new(kind, k, gamma, alpha).unwrap();
        let budget = splits_required(&q);
        let envelope = recurrence_envelope_log2(q.initial_value(), q.eta(), budget.log2());
        prop_assert!(envelope <= alpha * (1.0 + 1e-9));
    }

    #[test]
    fn budget_non_increasing_in_gamma(
        k in 2usize..=100,
        g1 in 0.01f64..=0.5,
        g2 in 0.01f64..=0.5,
        fraction in 0.001f64..=1.0,
    ) {
        let kind = CriterionKind::ModifiedGini(GiniConstant::default());
        let (lo, hi) = admissible_range(kind, k).unwrap();
        let alpha = lo + fraction * (hi - lo);
        let (small, large) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let a = splits_required(&BoundQuery::new(kind, k, small, alpha).unwrap());
        let b = splits_required(&BoundQuery::new(kind, k, large, alpha).unwrap());
        prop_assert!(b.log2() <= a.log2());
    }
}
