use mollify_lab::exponents::{
    beta0, critical_beta, est_eps_margin, optimized_margin, q_window, r_of_q, r_window, remark37_check, s_of_q,
    shinbrot_s, ExponentBundle,
};
use proptest::prelude::*;

#[test]
fn reference_values() {
    assert!((beta0(1.0 / 3.0).unwrap() - 18.0 / 11.0).abs() < 1e-12);
    assert!((critical_beta(0.5).unwrap() - 1.5).abs() < 1e-12);
    assert!(remark37_check(2.0));
    assert!(!remark37_check(1.999));
    assert!(beta0(1.5).is_err());
}

#[test]
fn bundle_for_a_positive_margin() {
    let b = ExponentBundle::new(0.5, 1.9, Some(4.0 / 3.9)).unwrap();
    assert!((b.margin - 0.4).abs() < 1e-12);
    assert!(b.valid.conjugate && b.valid.routes_agree && b.valid.margin_positive);
    let json = serde_json::to_value(&b).unwrap();
    for key in ["alpha", "beta", "beta0", "q", "r", "s", "s_prime", "margin", "valid"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!(ExponentBundle::new(0.5, 2.5, None).is_err());
}

proptest! {
    #[test]
    fn conjugate_pair(beta in 1.01f64..1.99, t in 0.01f64..0.99) {
        let w = q_window(beta).unwrap();
        let q = w.lo + t * (w.hi - w.lo);
        let (s, sp) = s_of_q(q, beta).unwrap();
        prop_assert!((1.0 / s + 1.0 / sp - 1.0).abs() < 1e-12);
        // the Shinbrot relation is consistent with r(q)
        let r = r_of_q(q, beta).unwrap();
        prop_assert!((shinbrot_s(r, beta).unwrap() - s).abs() < 1e-10 * s);
        prop_assert!(r > 1.0 - 1e-12 && r < q);
        prop_assert!(r < r_window(beta).unwrap().hi);
    }

    #[test]
    fn margin_formula(alpha in 0.01f64..0.99, beta in 1.01f64..1.99, t in 0.0f64..0.99) {
        let w = q_window(beta).unwrap();
        let q = w.lo + t * (w.hi - w.lo);
        let want = alpha * (2.0 / q - 1.0) - 0.75 * (2.0 - beta);
        prop_assert!((est_eps_margin(alpha, q, beta).unwrap() - want).abs() < 1e-12);
        prop_assert!(optimized_margin(alpha, beta).unwrap() >= want - 1e-12);
    }

    #[test]
    fn critical_beta_closed_form(alpha in 0.01f64..0.99) {
        prop_assert!((critical_beta(alpha).unwrap() - 6.0 / (3.0 + 2.0 * alpha)).abs() < 1e-10);
    }
}
