use proptest::prelude::*;

use putlab::composition::{adp_sandwich, compose, composed_loss_law, composed_pd};
use putlab::local::{class1_pd, dp_known_prior, ml_known_prior};
use putlab::model::{Mechanism, Prior, PrivacyNotion, ProductSpace, SourceSet};
use putlab::privacy::eval_loss;

fn normalized(raw: Vec<f64>) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn base(m: usize) -> impl Strategy<Value = Mechanism> {
    prop::collection::vec(prop::collection::vec(0.02f64..1.0, m), m).prop_map(move |rows| {
        Mechanism::new(ProductSpace::new(m, 1).unwrap(), rows.into_iter().map(normalized).collect()).unwrap()
    })
}

fn setup() -> impl Strategy<Value = (Mechanism, Prior, usize)> {
    (2usize..=3).prop_flat_map(|m| {
        (base(m), prop::collection::vec(0.05f64..1.0, m), 2usize..=3)
            .prop_map(|(q, p, n)| (q, Prior::local(&normalized(p)).unwrap(), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn laws_match_realized_products((q, p, n) in setup()) {
        for k in PrivacyNotion::all(0.1, 2.0) {
            let c = composed_loss_law(k, &q, Some(&p), n).unwrap();
            prop_assert!(c.realized.is_some());
            prop_assert!(c.agrees(1e-9), "{k}: law {} realized {:?}", c.law, c.realized);
        }
    }

    #[test]
    fn approximate_dp_stays_in_sandwich((q, _p, n) in setup(), delta in 0.001f64..0.3) {
        let (lo, hi) = adp_sandwich(&q, delta, n);
        let c = composed_loss_law(PrivacyNotion::approx_dp(delta).unwrap(), &q, None, n).unwrap();
        let realized = c.realized.unwrap();
        prop_assert!(lo <= realized + 1e-9 && realized <= hi + 1e-9, "{lo} ≤ {realized} ≤ {hi}");
    }
}

#[test]
fn product_of_randomized_response_is_the_wang_mechanism() {
    let rr = Mechanism::new(ProductSpace::new(2, 1).unwrap(), vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
    let product = compose(&rr, 3).unwrap().realized.unwrap();
    let wang = putlab::catalog::wang_mechanism(ProductSpace::new(2, 3).unwrap(), 0.6).unwrap();
    for (a, b) in product.rows().iter().flatten().zip(wang.rows().iter().flatten()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn realization_is_skipped_past_the_cap() {
    let rr = Mechanism::new(ProductSpace::new(2, 1).unwrap(), vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
    let c = composed_loss_law(PrivacyNotion::Dp, &rr, None, 17).unwrap();
    assert!(c.realized.is_none());
    assert!((c.law - 4f64.ln()).abs() < 1e-12);
}

#[test]
fn composed_curves_at_a_known_prior() {
    let p = Prior::local(&[0.4, 0.3, 0.2, 0.1]).unwrap();
    let s = SourceSet::Singleton(p.clone());
    for d in [0.3, 0.6, 1.2] {
        let dp = composed_pd(PrivacyNotion::Dp, 3, d, &s).unwrap();
        assert!(dp.exact && (dp.upper - dp_known_prior(&p, d / 3.0).unwrap()).abs() < 1e-12);
        let ml = composed_pd(PrivacyNotion::MaxLeakage, 3, d, &s).unwrap();
        assert!(ml.exact && (ml.upper - 3.0 * ml_known_prior(&p, d / 3.0).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn composed_class_one_dp_is_the_local_value() {
    let s = SourceSet::FullSimplex(ProductSpace::new(3, 1).unwrap());
    for d in [0.2, 0.9, 1.5] {
        let composed = composed_pd(PrivacyNotion::Dp, 3, d, &s).unwrap();
        let local = class1_pd(PrivacyNotion::Dp, d / 3.0, &s).unwrap();
        assert!((composed.upper - local.upper).abs() < 1e-12);
        let q = putlab::catalog::wang_mechanism(ProductSpace::new(3, 3).unwrap(), d).unwrap();
        assert!((eval_loss(PrivacyNotion::Dp, &q, None).unwrap() - composed.upper).abs() < 1e-9);
    }
}
