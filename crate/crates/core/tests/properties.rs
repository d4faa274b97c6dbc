//! Property tests for domain invariants.

use proptest::prelude::*;
use ratfin::excess_vol::{
    expected_excess_lognormal, predictable_variation_lognormal, ConditionalLaw, StatePair,
    StateProcess,
};
use ratfin::nig::NigParams;
use ratfin::premium::premium_ratio;

fn nig_params() -> impl Strategy<Value = NigParams> {
    (
        -5.0..5.0f64,
        0.1..50.0f64,
        0.0..0.95f64,
        0.01..10.0f64,
    )
        .prop_map(|(mu, alpha, beta_frac, delta)| {
            NigParams::new(mu, alpha, beta_frac * alpha, delta).unwrap()
        })
}

proptest! {
    #[test]
    fn pdf_is_nonnegative_and_finite(p in nig_params(), x in -100.0..100.0f64) {
        let v = p.pdf(x);
        prop_assert!(v.is_finite() && v >= 0.0, "pdf({x}) = {v}");
    }

    #[test]
    fn cf_modulus_is_at_most_one(p in nig_params(), t in -50.0..50.0f64) {
        let m = p.cf(t).norm();
        prop_assert!(m <= 1.0 + 1e-12, "|cf({t})| = {m}");
    }

    #[test]
    fn exp_moment_domain_matches_the_radical(p in nig_params(), s in -60.0..60.0f64) {
        let in_domain = p.alpha * p.alpha - (p.beta + s) * (p.beta + s) > 0.0;
        prop_assert_eq!(p.exp_moment(s).is_ok(), in_domain);
    }

    #[test]
    fn premium_ratio_is_positive_in_domain(a in 0.1..20.0f64, slack in 0.01..30.0f64) {
        let alpha = a.max(1.0).max((1.0 - a).abs()) + slack;
        let r = premium_ratio(a, alpha).unwrap();
        prop_assert!(r.is_finite() && r > 0.0, "R({a}, {alpha}) = {r}");
    }

    #[test]
    fn lognormal_excess_is_mu_invariant(
        s2s in 0.0..0.5f64,
        s2b in 0.0..0.5f64,
        mu1 in -5.0..5.0f64,
        mu2 in -5.0..5.0f64,
    ) {
        let base = StatePair {
            stock: ConditionalLaw::LogNormal { mu: 0.0, sigma2: s2s },
            bond: ConditionalLaw::LogNormal { mu: 0.0, sigma2: s2b },
        };
        let shifted = StatePair {
            stock: ConditionalLaw::LogNormal { mu: mu1, sigma2: s2s },
            bond: ConditionalLaw::LogNormal { mu: mu2, sigma2: s2b },
        };
        prop_assert_eq!(
            expected_excess_lognormal(&base).unwrap(),
            expected_excess_lognormal(&shifted).unwrap()
        );
    }

    #[test]
    fn predictable_variation_is_nonnegative(
        w in 0.05..0.95f64,
        s2a in 0.0..0.5f64,
        s2b in 0.0..0.5f64,
        s2c in 0.0..0.5f64,
    ) {
        let pair = |s2: f64| StatePair {
            stock: ConditionalLaw::LogNormal { mu: 0.0, sigma2: s2 },
            bond: ConditionalLaw::LogNormal { mu: 0.0, sigma2: s2c },
        };
        let proc = StateProcess { states: vec![(w, pair(s2a)), (1.0 - w, pair(s2b))] };
        let v = predictable_variation_lognormal(&proc).unwrap();
        prop_assert!(v >= 0.0);
        // zero iff the per-state expected excess is constant
        let e1 = expected_excess_lognormal(&proc.states[0].1).unwrap();
        let e2 = expected_excess_lognormal(&proc.states[1].1).unwrap();
        prop_assert_eq!(v == 0.0, e1 == e2);
    }
}
