//! Property tests for the algebraic laws the tensor and parafermion layers
//! promise.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use quon_core::numerics::{
    compare_up_to_scalar, tensor_compose, tensor_kron, Tensor, Tolerance,
};
use quon_core::pf_algebra::{pf_adjoint, pf_charge, pf_mul, ChargeValue, PFElement};
use quon_core::quon_calculus::{BraidSign, StrandWord, WordGen};

fn arb_c64() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn arb_tensor(d: usize, out_legs: usize, in_legs: usize) -> impl Strategy<Value = Tensor> {
    let len = d.pow((out_legs + in_legs) as u32);
    proptest::collection::vec(arb_c64(), len)
        .prop_map(move |v| Tensor::from_entries(d, out_legs, in_legs, v))
}

fn arb_pf(d: usize, n: usize) -> impl Strategy<Value = PFElement> {
    let expo = proptest::collection::vec(0..d as u8, n);
    proptest::collection::vec((expo, arb_c64()), 1..4).prop_map(move |terms| {
        let mut x = PFElement::zero(d, n);
        for (e, c) in terms {
            x = x.add(&PFElement::monomial(d, e, c)).unwrap();
        }
        x
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_is_associative(a in arb_tensor(3, 1, 1), b in arb_tensor(3, 1, 1), c in arb_tensor(3, 1, 1)) {
        let lhs = tensor_compose(&tensor_compose(&a, &b).unwrap(), &c).unwrap();
        let rhs = tensor_compose(&a, &tensor_compose(&b, &c).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, Tolerance::default()));
    }

    #[test]
    fn kron_compose_interchange(
        a in arb_tensor(2, 1, 1),
        b in arb_tensor(2, 2, 1),
        c in arb_tensor(2, 1, 2),
        e in arb_tensor(2, 1, 1),
    ) {
        let lhs = tensor_compose(&tensor_kron(&a, &b).unwrap(), &tensor_kron(&c, &e).unwrap()).unwrap();
        let rhs = tensor_kron(&tensor_compose(&a, &c).unwrap(), &tensor_compose(&b, &e).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, Tolerance::default()));
    }

    #[test]
    fn compare_up_to_scalar_finds_planted_phase(t in arb_tensor(3, 1, 1), theta in 0.0..std::f64::consts::TAU) {
        prop_assume!(t.norm() > 1e-3);
        let lam = C64::from_polar(1.0, theta);
        let scaled = t.scale(lam);
        let found = compare_up_to_scalar(&scaled, &t, Tolerance::default()).unwrap();
        prop_assert!(found.is_some());
        prop_assert!((found.unwrap() - lam).norm() < 1e-7);
    }

    #[test]
    fn pf_mul_associative(a in arb_pf(3, 3), b in arb_pf(3, 3), c in arb_pf(3, 3)) {
        let lhs = pf_mul(&pf_mul(&a, &b).unwrap(), &c).unwrap();
        let rhs = pf_mul(&a, &pf_mul(&b, &c).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-9));
    }

    #[test]
    fn pf_adjoint_is_involutive_antihomomorphism(a in arb_pf(4, 3), b in arb_pf(4, 3)) {
        let back = pf_adjoint(&pf_adjoint(&a));
        prop_assert!(back.approx_eq(&a, 1e-9));
        let lhs = pf_adjoint(&pf_mul(&a, &b).unwrap());
        let rhs = pf_mul(&pf_adjoint(&b), &pf_adjoint(&a)).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-9));
    }

    #[test]
    fn pf_charge_additive_on_monomials(
        ea in proptest::collection::vec(0..3u8, 4),
        eb in proptest::collection::vec(0..3u8, 4),
    ) {
        let d = 3;
        let a = PFElement::monomial(d, ea, C64::new(1.0, 0.0));
        let b = PFElement::monomial(d, eb, C64::new(1.0, 0.0));
        let (ChargeValue::Value(ca), ChargeValue::Value(cb)) = (pf_charge(&a), pf_charge(&b)) else {
            return Err(TestCaseError::fail("monomials are homogeneous"));
        };
        match pf_charge(&pf_mul(&a, &b).unwrap()) {
            ChargeValue::Value(c) => prop_assert_eq!(c, (ca + cb) % d),
            ChargeValue::NonHomogeneous => return Err(TestCaseError::fail("product of monomials")),
        }
    }

    #[test]
    fn word_text_roundtrip(gens in proptest::collection::vec(arb_wordgen(), 0..8)) {
        let w = StrandWord::new(3, gens);
        let text = w.render();
        let back = StrandWord::parse(3, &text).unwrap();
        prop_assert_eq!(w, back);
    }
}

fn arb_wordgen() -> impl Strategy<Value = WordGen> {
    prop_oneof![
        (1..=3u8, prop_oneof![Just(BraidSign::Positive), Just(BraidSign::Negative)])
            .prop_map(|(i, s)| WordGen::Braid(i, s)),
        (1..=4u8, -4..=4i64).prop_map(|(s, g)| WordGen::Charge(s, g)),
    ]
}
