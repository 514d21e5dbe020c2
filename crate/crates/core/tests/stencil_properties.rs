//! Property tests for the boundary-condition stencils: polynomial exactness
//! at roundoff level and the plus/minus edge antisymmetry.

use gaptooth_core::opcalc::{rat, to_f64, EdgeSign, Rational};
use gaptooth_core::ptbc::{PtbcStencil, StencilPair};
use proptest::prelude::*;

fn arb_ratio() -> impl Strategy<Value = Rational> {
    // r = num/den confined to (0, 1/2]
    (1i64..=8, 2i64..=24)
        .prop_map(|(num, den)| rat(num, den))
        .prop_filter("r in (0, 1/2]", |r| r > &rat(0, 1) && r <= &rat(1, 2))
}

/// Evaluates `q(ξ) = Σ c_e ξ^e` and its derivative.
fn poly_eval(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut deriv = 0.0;
    for &c in coeffs.iter().rev() {
        deriv = deriv * x + value;
        value = value * x + c;
    }
    (value, deriv)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stencils_differentiate_polynomials_exactly(
        r in arb_ratio(),
        p in 1usize..=3,
        coeffs in prop::collection::vec(-3.0f64..3.0, 1..=7),
        plus_edge in any::<bool>(),
    ) {
        // degree ≤ 2p
        let coeffs = &coeffs[..coeffs.len().min(2 * p + 1)];
        let sign = if plus_edge { EdgeSign::Plus } else { EdgeSign::Minus };
        let st = PtbcStencil::build(p, &r, sign).unwrap();

        let window: Vec<f64> = (-(p as i64)..=p as i64)
            .map(|k| poly_eval(coeffs, k as f64).0)
            .collect();
        let got = st.apply_window(&window);
        let edge = sign.factor() as f64 * to_f64(&r);
        let expected = poly_eval(coeffs, edge).1;

        let scale: f64 = st
            .weights()
            .iter()
            .zip(&window)
            .map(|(w, u)| (w * u).abs())
            .sum::<f64>()
            + expected.abs()
            + 1.0;
        prop_assert!(
            (got - expected).abs() <= 1e3 * f64::EPSILON * scale,
            "p={} r={} sign={}: {} vs {}",
            p, r, sign, got, expected
        );
    }

    #[test]
    fn minus_edge_equals_negated_plus_on_reversed_field(
        r in arb_ratio(),
        p in 1usize..=3,
        window in prop::collection::vec(-5.0f64..5.0, 7),
    ) {
        let pair = StencilPair::build(p, &r).unwrap();
        let window = &window[..2 * p + 1];
        let reversed: Vec<f64> = window.iter().rev().copied().collect();
        let minus = pair.minus.apply_window(window);
        let plus_rev = pair.plus.apply_window(&reversed);
        prop_assert!(
            (minus + plus_rev).abs() < 1e-12 * (1.0 + plus_rev.abs()),
            "{} vs {}",
            minus,
            -plus_rev
        );
    }

    #[test]
    fn exactness_contract_holds_for_random_ratios(r in arb_ratio(), p in 1usize..=4) {
        let st = PtbcStencil::build(p, &r, EdgeSign::Plus).unwrap();
        prop_assert!(st.exactness_order() >= 2 * p);
    }
}
