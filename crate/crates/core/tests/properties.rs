mod common;

use common::q;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use relnet::evaluation::{canonical_expected_utility, EvaluationOptions};
use relnet::game::transformed_partial_sums;
use relnet::*;

fn rational() -> impl Strategy<Value = BigRational> {
    (-60i64..=60, 1i64..=6).prop_map(|(n, d)| q(n, d))
}

proptest! {
    #[test]
    fn every_position_pays_half(k in 1u32..=1024) {
        let p = position(k);
        prop_assert_eq!(&p.expected_payoff, &q(1, 2));
        prop_assert!(p.is_consistent());
    }

    #[test]
    fn table_expectation_is_n_over_two(n in 1u32..=300) {
        let total = payoff_table(n, true)
            .unwrap()
            .iter()
            .fold(BigRational::zero(), |acc, r| acc + &r.expected_payoff);
        prop_assert_eq!(total, q(n as i64, 2));
    }

    #[test]
    fn bounded_transform_stays_below_bound(cap in 1.0f64..1e6, terms in 1u32..=300) {
        // saturating utility x -> cap * x / (1 + x), bounded by cap
        let t = UtilityTransform::custom(move |prize| {
            let x = num_traits::ToPrimitive::to_f64(prize).unwrap();
            cap * x / (1.0 + x)
        });
        let sums = transformed_partial_sums(&t, terms).unwrap();
        prop_assert!(sums.iter().all(|s| *s <= cap));
        prop_assert!(sums.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn argmax_is_invariant_to_termination(p in 1u32..=50, h in 1u32..=500, b in 1i64..=200) {
        let g = GameSpec::canonical();
        for term in [
            TerminationCriterion::Patience(p),
            TerminationCriterion::Horizon(h),
            TerminationCriterion::Budget(q(b, 1)),
        ] {
            let e = incremental_evaluate(&g, &term).unwrap();
            prop_assert_eq!((e.nuc_star, e.ref_pos), (q(1, 2), 1));
        }
    }

    #[test]
    fn trace_best_is_monotone(utilities in prop::collection::vec(rational(), 1..40)) {
        let n = utilities.len() as u32;
        let eu = |k: u32| if k == 0 { BigRational::zero() } else { utilities[k as usize - 1].clone() };
        let e = incremental_evaluate_with(
            &GameSpec::canonical(),
            &TerminationCriterion::Horizon(n),
            &EvaluationOptions::default(),
            eu,
        )
        .unwrap();
        let steps = &e.trace.steps;
        prop_assert!(e.nuc_star >= BigRational::zero());
        let max_nuc = steps.iter().map(|s| s.nuc.clone()).max().unwrap();
        prop_assert_eq!(&e.nuc_star, &std::cmp::max(max_nuc, BigRational::zero()));
        let mut prev_star = BigRational::zero();
        let mut prev_ref = 0;
        for s in steps {
            prop_assert!(s.nuc_star >= prev_star);
            if s.ref_pos != prev_ref {
                prop_assert!(s.nuc > prev_star);
                prop_assert_eq!(s.ref_pos, s.curr_pos);
            }
            prev_star = s.nuc_star.clone();
            prev_ref = s.ref_pos;
        }
        if e.ref_pos > 0 {
            let first = steps.iter().find(|s| s.nuc == e.nuc_star).unwrap();
            prop_assert_eq!(first.curr_pos, e.ref_pos);
        }
    }

    #[test]
    fn tie_break_is_permutation_invariant(
        alts in prop::collection::vec((0i64..3, prop::collection::vec(0i64..4, 2)), 1..12),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let alts: Vec<Alternative> = alts
            .into_iter()
            .map(|(u, r)| Alternative::new(q(u, 1), r.into_iter().map(|x| q(x, 1)).collect()))
            .collect();
        let mut shuffled = alts.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = &alts[break_tie(&alts).unwrap()];
        let b = &shuffled[break_tie(&shuffled).unwrap()];
        prop_assert_eq!(a, b);
    }

    #[test]
    fn truncate_matches_oracle(deltas in prop::collection::vec(rational(), 0..=12)) {
        let p = Plan::from_net_utilities(&deltas);
        let r = truncate(&p);
        prop_assert_eq!(&r, &truncate_oracle(&p).unwrap());
        prop_assert!(r.check(&p).is_ok());
    }

    #[test]
    fn non_positive_tail_is_ignored(
        deltas in prop::collection::vec(rational(), 0..=15),
        tail in rational(),
    ) {
        let tail = -tail.abs();
        let p = Plan::from_net_utilities(&deltas);
        let mut longer = deltas.clone();
        longer.push(tail);
        let q = Plan::from_net_utilities(&longer);
        let (a, b) = (truncate(&p), truncate(&q));
        prop_assert_eq!(a.prefix_length, b.prefix_length);
        prop_assert_eq!(a.prefix_utility, b.prefix_utility);
        prop_assert_eq!(a.prefix_cost, b.prefix_cost);
        prop_assert_eq!(a.prefix_duration, b.prefix_duration);
        prop_assert!(b.full_utility <= a.full_utility);
    }

    #[test]
    fn induction_step_on_non_positive_last_action(
        deltas in prop::collection::vec(rational(), 1..=14),
    ) {
        let p = Plan::from_net_utilities(&deltas);
        let last = deltas.last().unwrap();
        let (full, shorter) = (truncate(&p), truncate(&p.prefix(p.len() - 1)));
        if !last.is_positive() {
            prop_assert_eq!(full.prefix_length, shorter.prefix_length);
            prop_assert_eq!(full.prefix_utility, shorter.prefix_utility);
        } else {
            prop_assert!(full.prefix_utility >= shorter.prefix_utility);
        }
    }

    #[test]
    fn net_preference_ignores_common_shift(
        start in rational(),
        out1 in rational(),
        out2 in rational(),
        shift in rational(),
    ) {
        let act = |from: &BigRational, to: &BigRational| PlanAction::single("a", "s", from.clone(), to.clone());
        let base = prefer_by_net_utility(&act(&start, &out1), &act(&start, &out2)).unwrap();
        let moved = prefer_by_net_utility(
            &act(&(&start + &shift), &(&out1 + &shift)),
            &act(&(&start + &shift), &(&out2 + &shift)),
        )
        .unwrap();
        prop_assert_eq!(base.preference, moved.preference);
        prop_assert_eq!(base.polarity, moved.polarity);
    }
}

#[test]
fn outcome_preference_is_not_shift_invariant() {
    // same actions judged by outcome flip when only one outcome is re-based,
    // while their net utilities are unchanged
    let net1 = PlanAction::single("a1", "s", q(0, 1), q(1, 1));
    let net2 = PlanAction::single("a2", "s", q(10, 1), q(12, 1));
    assert_eq!(
        prefer_by_net_utility(&net1, &net2).unwrap().preference,
        Preference::Second
    );
    assert_eq!(prefer_by_outcome(&q(1, 1), &q(12, 1)), Preference::Second);
    let shifted1 = PlanAction::single("a1", "s", q(100, 1), q(101, 1));
    assert_eq!(
        prefer_by_net_utility(&shifted1, &net2).unwrap().preference,
        Preference::Second
    );
    assert_eq!(prefer_by_outcome(&q(101, 1), &q(12, 1)), Preference::First);
}

#[test]
fn canonical_utility_is_table_expectation() {
    assert!(canonical_expected_utility(0).is_zero());
    for k in 1..50 {
        assert_eq!(canonical_expected_utility(k), q(1, 2));
    }
}
