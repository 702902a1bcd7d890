//! Randomized algebraic invariants via proptest.

use num_bigint::BigInt;
use proptest::prelude::*;

use qcrystal::context::Context;
use qcrystal::deltaring::{APoly, AXiPoly};
use qcrystal::groupoid::flip;
use qcrystal::qarith::{adic_order, q_binomial, AdicOrder, IntPoly, LocalScalar};
use qcrystal::twisted::{dp_mul, embed_poly, from_twisted_basis, to_twisted_basis, DividedElem};

fn int_poly_strategy(max_deg: usize) -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(-6i64..=6, 0..=max_deg + 1)
        .prop_map(|v| IntPoly::from_coeffs(v.into_iter().map(BigInt::from).collect()))
}

fn apoly_strategy() -> impl Strategy<Value = APoly> {
    prop::collection::vec((-3i64..=3, 0usize..=1), 0..=3).prop_map(|v| {
        APoly::from_coeffs(
            v.into_iter()
                .map(|(c, d)| LocalScalar::from_int_poly(IntPoly::monomial(BigInt::from(c), d)))
                .collect(),
        )
    })
}

fn axipoly_strategy() -> impl Strategy<Value = AXiPoly> {
    prop::collection::vec(apoly_strategy(), 0..=3).prop_map(AXiPoly::from_coeffs)
}

fn divided_strategy() -> impl Strategy<Value = DividedElem> {
    prop::collection::btree_map(0usize..=4, apoly_strategy(), 0..=3).prop_map(|m| {
        let mut out = DividedElem::zero();
        for (n, f) in m {
            out.insert_add(n, f);
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_division_round_trips(f in int_poly_strategy(5), g in int_poly_strategy(4)) {
        prop_assume!(!g.is_zero());
        let prod = &f * &g;
        prop_assert_eq!(prod.exact_div(&g).unwrap(), f);
    }

    #[test]
    fn binomial_symmetry(n in 0usize..=14, k in 0usize..=14) {
        prop_assume!(k <= n);
        prop_assert_eq!(q_binomial(n, k).unwrap(), q_binomial(n, n - k).unwrap());
    }

    #[test]
    fn adic_order_superadditive(f in int_poly_strategy(4), g in int_poly_strategy(4)) {
        let ctx = Context::new(2).unwrap();
        let (of, og) = (adic_order(&f, &ctx), adic_order(&g, &ctx));
        let ofg = adic_order(&(&f * &g), &ctx);
        match (of, og) {
            (AdicOrder::Finite(a), AdicOrder::Finite(b)) => {
                prop_assert!(ofg.at_least(a + b));
            }
            _ => prop_assert_eq!(ofg, AdicOrder::Infinite),
        }
    }

    #[test]
    fn twisted_basis_is_a_basis(f in axipoly_strategy()) {
        prop_assert_eq!(from_twisted_basis(&to_twisted_basis(&f)), f);
    }

    #[test]
    fn embedding_respects_products(f in axipoly_strategy(), g in axipoly_strategy()) {
        prop_assert_eq!(
            embed_poly(&(&f * &g)),
            dp_mul(&embed_poly(&f), &embed_poly(&g))
        );
    }

    #[test]
    fn divided_product_commutes(u in divided_strategy(), v in divided_strategy()) {
        prop_assert_eq!(dp_mul(&u, &v), dp_mul(&v, &u));
    }

    #[test]
    fn flip_is_involutive(u in divided_strategy()) {
        prop_assert_eq!(flip(&flip(&u)), u);
    }

    #[test]
    fn scalar_serialization_round_trips(num in int_poly_strategy(4)) {
        let ctx = Context::new(3).unwrap();
        let s = LocalScalar::new(num, qcrystal::qarith::q_int(2), &ctx).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: LocalScalar = serde_json::from_str(&json).unwrap();
        prop_assert!(back.validate(&ctx).is_ok());
        prop_assert_eq!(back, s);
    }
}
