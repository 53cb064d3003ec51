mod common;

use common::*;
use maxmin_rank::analysis::{enumerate_valid_rankings, h_value};
use maxmin_rank::model::{is_valid, to_upper_only, ConstraintSet, Ranking, ValueModel};
use maxmin_rank::oracle::{best_response, check_monge, weight_order_key, OracleCache};
use maxmin_rank::{baseline_min_value, deterministic_baseline};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn oracle_matches_enumeration(seed in any::<u64>(), groups in 1usize..=3) {
        let (inst, c) = random_case(seed, 2..=7, groups);
        let Ok(upper) = to_upper_only(&c, &inst) else { return Ok(()) };
        let mut r = rng(seed ^ 0xabc);
        let model = random_model(&inst, &mut r);
        let valid = brute_valid(&inst, &upper);
        let weights: Vec<f64> = (0..inst.len()).map(|_| r.gen::<f64>()).collect();
        let got = best_response(&inst, &upper, &model, &weights).unwrap();
        prop_assert!(satisfies(got.ranking.order(), &inst, &upper));
        let best = brute_max(&valid, &model, &weights);
        prop_assert!((got.objective - best).abs() <= 1e-9 * best.abs().max(1.0), "{} vs {}", got.objective, best);
    }

    #[test]
    fn integer_oracle_is_exact(seed in any::<u64>()) {
        let (inst, c) = random_case(seed, 2..=7, 2);
        let upper = to_upper_only(&c, &inst).unwrap();
        let model = ValueModel::position_diff(&inst);
        let mut r = rng(seed);
        let weights: Vec<f64> = (0..inst.len()).map(|_| f64::from(r.gen_range(0..10u32))).collect();
        let got = best_response(&inst, &upper, &model, &weights).unwrap();
        prop_assert_eq!(got.objective, brute_max(&brute_valid(&inst, &upper), &model, &weights));
    }

    #[test]
    fn is_valid_matches_prefix_counts(seed in any::<u64>(), groups in 1usize..=3) {
        let (inst, c) = random_case(seed, 1..=9, groups);
        let mut r = rng(seed);
        for _ in 0..50 {
            let mut order: Vec<usize> = (0..inst.len()).collect();
            order.shuffle(&mut r);
            let ranking = Ranking::from_order(order.clone()).unwrap();
            prop_assert_eq!(is_valid(&ranking, &inst, &c), satisfies(&order, &inst, &c));
        }
    }

    #[test]
    fn enumeration_matches_brute_force(seed in any::<u64>(), groups in 1usize..=3) {
        let (inst, c) = random_case(seed, 1..=7, groups);
        let mut got: Vec<Vec<usize>> = enumerate_valid_rankings(&inst, &c).unwrap().iter().map(|r| r.order().to_vec()).collect();
        let mut want: Vec<Vec<usize>> = brute_valid(&inst, &c).iter().map(|r| r.order().to_vec()).collect();
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn baseline_is_maxmin_optimal(seed in any::<u64>(), groups in 1usize..=2) {
        let (inst, c) = random_case(seed, 1..=7, groups);
        let model = random_model(&inst, &mut rng(seed));
        let r = deterministic_baseline(&inst, &c).unwrap();
        prop_assert!(satisfies(r.order(), &inst, &c));
        let best = brute_valid(&inst, &c)
            .iter()
            .map(|r| model.values(r).into_iter().fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        let got = baseline_min_value(&inst, &c, &model).unwrap();
        prop_assert!((got - best).abs() <= 1e-12, "{} vs {}", got, best);
    }

    #[test]
    fn monge_property(seed in any::<u64>()) {
        let (inst, _) = random_case(seed, 1..=8, 2);
        let mut r = rng(seed);
        let model = random_model(&inst, &mut r);
        let weights: Vec<f64> = (0..inst.len()).map(|_| r.gen::<f64>()).collect();
        prop_assert!(check_monge(&inst, &model, &weights));
    }

    #[test]
    fn equal_keys_give_equal_responses(seed in any::<u64>()) {
        let (inst, c) = random_case(seed, 2..=8, 2);
        let upper = to_upper_only(&c, &inst).unwrap();
        let model = ValueModel::position_diff(&inst);
        let mut r = rng(seed);
        let w: Vec<f64> = (0..inst.len()).map(|_| r.gen::<f64>()).collect();
        // a strictly increasing transform keeps the order
        let w2: Vec<f64> = w.iter().map(|x| x * x * 3.0 + 1.0).collect();
        prop_assert_eq!(weight_order_key(&inst, &w), weight_order_key(&inst, &w2));
        prop_assert_eq!(
            best_response(&inst, &upper, &model, &w).unwrap().ranking,
            best_response(&inst, &upper, &model, &w2).unwrap().ranking
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Rewriting two-group lower bounds as upper bounds keeps the valid set.
    #[test]
    fn upper_only_rewrite_preserves_validity(seed in any::<u64>()) {
        let (inst, c) = random_case(seed, 8..=8, 2);
        let upper = to_upper_only(&c, &inst).unwrap();
        prop_assert!(!upper.has_lower_bounds());
        for p in permutations(8) {
            prop_assert_eq!(satisfies(&p, &inst, &c), satisfies(&p, &inst, &upper));
        }
    }

    /// `H` through indicator weights equals the enumeration maximum on every subset.
    #[test]
    fn h_value_matches_enumeration(seed in any::<u64>()) {
        let (inst, c) = random_case(seed, 2..=7, 2);
        let model = random_model(&inst, &mut rng(seed));
        let valid = brute_valid(&inst, &c);
        let n = inst.len();
        for mask in 0..(1usize << n) {
            let set: Vec<usize> = (0..n).filter(|u| mask >> u & 1 == 1).collect();
            let w: Vec<f64> = (0..n).map(|u| (mask >> u & 1) as f64).collect();
            let want = if set.is_empty() { 0.0 } else { brute_max(&valid, &model, &w) };
            let got = h_value(&inst, &c, &model, &set).unwrap();
            prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{:?}: {} vs {}", set, got, want);
        }
    }
}

#[test]
fn cache_reuses_orders() {
    let (inst, c) = random_case(5, 6..=6, 2);
    let upper = to_upper_only(&c, &inst).unwrap();
    let model = ValueModel::position_diff(&inst);
    let mut cache = OracleCache::new();
    let key = weight_order_key(&inst, &[0.6, 0.5, 0.4, 0.3, 0.2, 0.1]);
    let a = cache.respond(&inst, &upper, &model, &key).unwrap();
    let b = cache.respond(&inst, &upper, &model, &key).unwrap();
    assert_eq!(a, b);
    assert_eq!((cache.oracle_calls(), cache.hits()), (1, 1));
}

#[test]
fn three_group_lower_bounds_are_rejected() {
    let inst = maxmin_rank::synthetic::random_instance(6, 3, 1);
    let mut lower = vec![vec![0; 6]; 3];
    lower[0][5] = 1;
    let c = ConstraintSet::from_bounds(6, vec![(1..=6).collect(); 3], lower).unwrap();
    assert!(matches!(
        to_upper_only(&c, &inst),
        Err(maxmin_rank::Error::UnsupportedLowerBounds(3))
    ));
}
