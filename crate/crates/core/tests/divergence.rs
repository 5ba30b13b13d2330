use proptest::prelude::*;
use vdm_core::divergence::Interval;
use vdm_core::verify::{
    biconjugate, composition_is_safe, conjugate_checks, gan_js_pointwise_error, gan_js_quoted_error,
    verification_specs,
};
use vdm_core::{make_spec, DivergenceSpec, ShapeParams};

fn spec_strategy() -> impl Strategy<Value = DivergenceSpec> {
    let specs = verification_specs();
    (0..specs.len()).prop_map(move |i| specs[i])
}

/// Map `s ∈ (0, 1)` to an interior point, using a window of 20 next to infinite ends.
fn interior_point(dom: &Interval, s: f64) -> f64 {
    let (lo, hi) = match (dom.lower.is_finite(), dom.upper.is_finite()) {
        (true, true) => (dom.lower, dom.upper),
        (false, true) => (dom.upper - 20.0, dom.upper),
        (true, false) => (dom.lower, dom.lower + 20.0),
        (false, false) => (-10.0, 10.0),
    };
    lo + (hi - lo) * s
}

#[test]
fn every_conjugate_check_passes() {
    for c in conjugate_checks() {
        assert!(c.passed, "{c:?}");
    }
}

#[test]
fn biconjugate_recovers_generator() {
    for s in verification_specs() {
        for k in 0..=20 {
            let u = 0.1 * 100f64.powf(k as f64 / 20.0);
            let err = (biconjugate(&s, u) - s.generator(u).unwrap()).abs();
            assert!(err < 1e-5, "{} at {u}: {err}", s.label());
        }
    }
}

#[test]
fn gan_js_relations() {
    for k in 0..20 {
        let u = 0.01 * 1e4f64.powf(k as f64 / 19.0);
        assert!(gan_js_pointwise_error(u) < 1e-12);
    }
    // The quoted form 2 f_js − log 4 disagrees away from u = 1.
    assert!(gan_js_quoted_error(3.0) > 0.1);
}

#[test]
fn worked_examples() {
    let s = |n: &str| make_spec(n, ShapeParams::default()).unwrap();
    assert_eq!(s("pearson-chi2").generator(3.0).unwrap(), 4.0);
    assert_eq!(s("pearson-chi2").conjugate(2.0).unwrap(), 3.0);
    assert!(s("kl").generator(1e-300).unwrap().abs() < 1e-290);
    assert!((s("jeffrey").conjugate(1.0).unwrap() - 1.330366).abs() < 1e-6);
    assert_eq!(s("jensen-shannon").activation(0.0), 0.0);
    assert!((s("reverse-kl").witness(2.0).unwrap() + 0.5).abs() < 1e-15);
    assert!((s("neyman-chi2").witness(2.0).unwrap() - 0.75).abs() < 1e-15);
    assert!(s("kl").generator(0.0).is_err());
    assert!(s("jensen-shannon").conjugate(2f64.ln()).is_err());
    assert!(s("reverse-kl").conjugate(1.0).is_err());
    assert!(make_spec("alpha", ShapeParams::alpha(1.0)).is_err());
    assert!(make_spec("jensen-shannon-weighted", ShapeParams::pi(1.0)).is_err());
    assert!(make_spec("bhattacharyya", ShapeParams::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn fenchel_young_inequality(s in spec_strategy(), lu in -2.0f64..2.0, st in 0.001f64..0.999) {
        let u = 10f64.powf(lu);
        let t = interior_point(&s.conjugate_domain(), st);
        let c = s.conjugate(t).unwrap();
        prop_assert!(t * u <= s.generator(u).unwrap() + c + 1e-9, "{} u={} t={}", s.label(), u, t);
    }

    #[test]
    fn activation_is_increasing_and_in_domain(s in spec_strategy(), v in -18.0f64..18.0, dv in 1e-3f64..5.0) {
        let w = (v + dv).min(18.0);
        prop_assume!(w > v);
        let dom = s.conjugate_domain();
        prop_assert!(s.activation(w) > s.activation(v), "{} {} {}", s.label(), v, w);
        prop_assert!(dom.contains(s.activation(v)));
        prop_assert!(dom.contains(s.activation(w)));
    }

    #[test]
    fn fused_form_matches_composition(s in spec_strategy(), v in -30.0f64..30.0) {
        let dom = s.conjugate_domain();
        let t = s.activation(v);
        prop_assume!(composition_is_safe(dom.lower, dom.upper, t));
        let composed = s.conjugate(t).unwrap();
        let fused = s.fused_second_term(v);
        prop_assert!((fused - composed).abs() <= 1e-8 * fused.abs().max(1.0), "{} v={}: {} vs {}", s.label(), v, fused, composed);
    }

    #[test]
    fn generator_is_convex(s in spec_strategy(), lu in -3.0f64..3.0) {
        let u = 10f64.powf(lu);
        let h = 1e-3 * u;
        let d2 = s.generator(u + h).unwrap() - 2.0 * s.generator(u).unwrap() + s.generator(u - h).unwrap();
        prop_assert!(d2 >= -1e-9 * (1.0 + s.generator(u).unwrap().abs()), "{} u={} d2={}", s.label(), u, d2);
    }

    #[test]
    fn witness_is_the_generator_slope(s in spec_strategy(), lu in -1.5f64..1.5) {
        let u = 10f64.powf(lu);
        prop_assume!((u - 1.0).abs() > 1e-3);
        let h = 1e-6 * u;
        let fd = (s.generator(u + h).unwrap() - s.generator(u - h).unwrap()) / (2.0 * h);
        let w = s.witness(u).unwrap();
        prop_assert!((fd - w).abs() <= 1e-5 * (1.0 + w.abs()), "{} u={}: {} vs {}", s.label(), u, fd, w);
    }
}
