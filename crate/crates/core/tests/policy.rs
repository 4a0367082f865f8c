use proptest::prelude::*;
use specshare::policy::{ergodic_region, interference, inversion_cost, rate};
use specshare::{
    ergodic_power, outage_power, ChannelState, ConstraintSet, ConstraintVariant, DualVariables,
    Objective, PolicyContext, Region, K,
};

fn variant() -> impl Strategy<Value = ConstraintVariant> {
    prop_oneof![
        Just(ConstraintVariant::F1),
        Just(ConstraintVariant::F2),
        Just(ConstraintVariant::F3),
        Just(ConstraintVariant::F4),
    ]
}

fn limit() -> impl Strategy<Value = f64> {
    prop_oneof![4 => (-3.0f64..3.0).prop_map(|e| 10f64.powf(e)), 1 => Just(f64::INFINITY)]
}

fn gain() -> impl Strategy<Value = f64> {
    prop_oneof![8 => (-4.0f64..3.0).prop_map(|e| 10f64.powf(e)), 1 => Just(0.0)]
}

fn context(objective: Objective) -> impl Strategy<Value = PolicyContext> {
    (
        variant(),
        limit(),
        limit(),
        0.1f64..10.0,
        0.0f64..5.0,
        0.0f64..5.0,
    )
        .prop_filter_map("bounded", move |(v, a, b, n0, lambda, mu)| {
            let cs = ConstraintSet::new(v, a, b, n0).ok()?;
            if matches!(objective, Objective::Ergodic) {
                cs.ensure_bounded().ok()?;
                // an unpriced average constraint leaves the ergodic power unbounded
                if (v == ConstraintVariant::F3 && lambda == 0.0 && cs.q_pk().is_infinite())
                    || (v == ConstraintVariant::F4 && lambda == 0.0)
                {
                    return None;
                }
            }
            let mu = if v == ConstraintVariant::F4 { mu } else { 0.0 };
            let lambda = if v == ConstraintVariant::F1 {
                0.0
            } else {
                lambda
            };
            Some(PolicyContext::new(
                cs,
                DualVariables::new(lambda, mu).unwrap(),
                objective,
            ))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ergodic_power_respects_peaks(ctx in context(Objective::Ergodic), g0 in gain(), g1 in gain()) {
        let s = ChannelState { g0, g1 };
        let p = ergodic_power(&ctx, s);
        prop_assert!(p >= 0.0);
        prop_assert!(p <= ctx.constraints.p_pk());
        prop_assert!(interference(g0, p) <= ctx.constraints.q_pk());
        if g1 == 0.0 {
            prop_assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn ergodic_power_nonincreasing_in_g0(ctx in context(Objective::Ergodic), a in gain(), b in gain(), g1 in 1e-3f64..1e3) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p_lo = ergodic_power(&ctx, ChannelState { g0: lo, g1 });
        let p_hi = ergodic_power(&ctx, ChannelState { g0: hi, g1 });
        prop_assert!(p_hi <= p_lo, "{p_hi} > {p_lo}");
    }

    #[test]
    fn outage_power_is_all_or_nothing(ctx in context(Objective::Outage { r0: 1.0 }), r0 in 0.1f64..4.0, g0 in gain(), g1 in gain()) {
        let ctx = PolicyContext::new(ctx.constraints, ctx.duals, Objective::Outage { r0 });
        let s = ChannelState { g0, g1 };
        let p = outage_power(&ctx, s);
        let n0 = ctx.constraints.n0();
        if p > 0.0 {
            prop_assert_eq!(p, inversion_cost(r0, n0) / g1);
            prop_assert!((rate(s, p, n0) - r0).abs() <= 1e-12 * r0);
            prop_assert!(p <= ctx.constraints.p_pk());
            prop_assert!(interference(g0, p) <= ctx.constraints.q_pk());
        } else {
            prop_assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn f2_regions_partition(lambda in 1e-3f64..10.0, p_pk in 1e-2f64..1e2, n0 in 0.1f64..10.0, g1 in 1e-3f64..1e2) {
        let cs = ConstraintSet::f2(p_pk, 1.0, n0).unwrap();
        let ctx = PolicyContext::new(cs, DualVariables::new(lambda, 0.0).unwrap(), Objective::Ergodic);
        let lower = K / (lambda * (p_pk + n0 / g1));
        let upper = K * g1 / (lambda * n0);
        prop_assert!(lower < upper);
        for k in 0..200 {
            let g0 = upper * 10f64.powf(-3.0 + 3.5 * k as f64 / 199.0);
            let s = ChannelState { g0, g1 };
            let region = ergodic_region(&ctx, s);
            let expected = if g0 >= upper {
                Region::Silent
            } else if g0 <= lower {
                Region::Capped
            } else {
                Region::WaterFilling
            };
            prop_assert_eq!(region, expected);
            let p = ergodic_power(&ctx, s);
            match region {
                Region::Silent => prop_assert_eq!(p, 0.0),
                Region::Capped => prop_assert_eq!(p, p_pk),
                Region::WaterFilling => {
                    prop_assert!(p > 0.0 && p < p_pk);
                    prop_assert!((p - (K / (lambda * g0) - n0 / g1)).abs() <= 1e-12 * p_pk);
                }
            }
        }
    }

    #[test]
    fn f3_without_peak_is_textbook_water_filling(lambda in 1e-3f64..10.0, n0 in 0.1f64..10.0, g0 in gain(), g1 in gain()) {
        let cs = ConstraintSet::f3(1.0, f64::INFINITY, n0).unwrap();
        let ctx = PolicyContext::new(cs, DualVariables::new(lambda, 0.0).unwrap(), Objective::Ergodic);
        let p = ergodic_power(&ctx, ChannelState { g0, g1 });
        let expected = if g1 == 0.0 { 0.0 } else { (K / lambda - n0 / g1).max(0.0) };
        prop_assert_eq!(p, expected);
    }

    #[test]
    fn f2_small_lambda_transmits_at_peak(p_pk in 1e-2f64..1e2, g0 in 1e-3f64..1e2, g1 in 1e-3f64..1e2) {
        let cs = ConstraintSet::f2(p_pk, 1.0, 1.0).unwrap();
        let ctx = PolicyContext::new(cs, DualVariables::new(1e-12, 0.0).unwrap(), Objective::Ergodic);
        prop_assert_eq!(ergodic_power(&ctx, ChannelState { g0, g1 }), p_pk);
    }
}

#[test]
fn spec_examples() {
    let cs = ConstraintSet::f1(1.0, 0.5, 1.0).unwrap();
    let ctx = PolicyContext::new(cs, DualVariables::zero(), Objective::Ergodic);
    assert_eq!(ergodic_power(&ctx, ChannelState { g0: 0.25, g1: 1.0 }), 1.0);

    let cs = ConstraintSet::f2(2.0, 1.0, 1.0).unwrap();
    let ctx = PolicyContext::new(cs, DualVariables::new(K, 0.0).unwrap(), Objective::Ergodic);
    let p = |g0| ergodic_power(&ctx, ChannelState { g0, g1: 1.0 });
    assert_eq!(p(0.25), 2.0);
    assert!((p(0.5) - 1.0).abs() < 1e-15);
    assert_eq!(p(2.0), 0.0);

    let cs = ConstraintSet::f1(2.0, 1.0, 1.0).unwrap();
    let ctx = PolicyContext::new(cs, DualVariables::zero(), Objective::outage(1.0).unwrap());
    assert_eq!(outage_power(&ctx, ChannelState { g0: 0.5, g1: 1.0 }), 1.0);
    assert_eq!(outage_power(&ctx, ChannelState { g0: 0.5, g1: 0.4 }), 0.0);
}
