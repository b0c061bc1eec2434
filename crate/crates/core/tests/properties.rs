//! Property tests for the structural invariants of the algebra, the group
//! action, and the series arithmetic.

use dmst::algebra::{Exp, SuperAlgebra, SuperElement};
use dmst::groups::{GroupMatrix, SubgroupSpec};
use dmst::oracle::graded_monomials;
use dmst::series::{LaurentPoly, RationalSeries};
use dmst::Field;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

fn algebra(q: u64, n: usize) -> SuperAlgebra {
    SuperAlgebra::new(Field::gf(q).unwrap(), n).unwrap()
}

/// A random homogeneous element of the given bidegree (possibly zero).
fn homogeneous(
    alg: &SuperAlgebra,
    bidegree: (Exp, usize),
    coeffs: &[u64],
) -> SuperElement {
    let monos = graded_monomials(alg, bidegree);
    let mut out = alg.zero();
    for (i, m) in monos.into_iter().enumerate() {
        let c = coeffs[i % coeffs.len()] % alg.field().q();
        if c != 0 {
            out = out
                .add(&alg.monomial(m, alg.field().element(c).unwrap()))
                .unwrap();
        }
    }
    out
}

fn homogeneous_strategy(
    q: u64,
    n: usize,
    max_deg: u64,
) -> impl Strategy<Value = (SuperElement, (Exp, usize))> {
    (
        0..=max_deg,
        0..=n,
        prop::collection::vec(0u64..q, 1..=12),
    )
        .prop_map(move |(i, j, coeffs)| {
            let alg = algebra(q, n);
            let bideg = (i as Exp, j);
            (homogeneous(&alg, bideg, &coeffs), bideg)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// f g = (-1)^(|f||g|) g f for homogeneous f, g.
    #[test]
    fn multiplication_is_supercommutative(
        (f, df) in homogeneous_strategy(3, 4, 3),
        (g, dg) in homogeneous_strategy(3, 4, 3),
    ) {
        let fg = f.mul(&g).unwrap();
        let gf = g.mul(&f).unwrap();
        let expect = if df.1 % 2 == 1 && dg.1 % 2 == 1 { gf.neg() } else { gf };
        prop_assert_eq!(fg, expect);
    }

    /// Multiplication is associative.
    #[test]
    fn multiplication_is_associative(
        (f, _) in homogeneous_strategy(2, 3, 3),
        (g, _) in homogeneous_strategy(2, 3, 3),
        (h, _) in homogeneous_strategy(2, 3, 3),
    ) {
        let lhs = f.mul(&g).unwrap().mul(&h).unwrap();
        let rhs = f.mul(&g.mul(&h).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// exact_divide(g h, g) = h for even g.
    #[test]
    fn division_inverts_multiplication(
        (g, _) in homogeneous_strategy(3, 3, 3).prop_filter("even nonzero", |(g, d)| !g.is_zero() && d.1 == 0),
        (h, _) in homogeneous_strategy(3, 3, 3),
    ) {
        let prod = g.mul(&h).unwrap();
        prop_assert_eq!(prod.exact_divide(&g).unwrap(), h);
    }

    /// The identity assignment substitutes to the identity map.
    #[test]
    fn identity_substitution(
        (f, _) in homogeneous_strategy(4, 3, 3),
    ) {
        let alg = f.algebra().clone();
        let (xs, ys) = SuperElement::identity_images(&alg);
        prop_assert_eq!(f.substitute(&xs, &ys).unwrap(), f);
    }

    /// Printing then parsing is the identity.
    #[test]
    fn text_grammar_roundtrip(
        (f, _) in homogeneous_strategy(4, 3, 4),
        (g, _) in homogeneous_strategy(4, 3, 2),
    ) {
        let h = f.add(&g).unwrap(); // mixed bidegrees
        let alg = h.algebra().clone();
        prop_assert_eq!(alg.parse(&h.to_string()).unwrap(), h);
    }

    /// act(g, act(h, f)) = act(gh, f) and the twist is a determinant scale.
    #[test]
    fn action_composition_and_twist(
        (f, _) in homogeneous_strategy(3, 3, 3),
        seed in 0u64..1000,
    ) {
        let field = Field::gf(3).unwrap();
        let gens = SubgroupSpec::gl(field.clone(), 3).generators();
        let g = &gens[seed as usize % gens.len()];
        let h = &gens[(seed / 7) as usize % gens.len()];
        let gh = g.mul(h).unwrap();
        prop_assert_eq!(
            g.act(&h.act(&f, 0).unwrap(), 0).unwrap(),
            gh.act(&f, 0).unwrap()
        );
        let k = 1u64;
        let twisted = g.act(&f, k).unwrap();
        let scaled = g
            .act(&f, 0)
            .unwrap()
            .scale(field.pow(g.det(), k as u128).unwrap())
            .unwrap();
        prop_assert_eq!(twisted, scaled);
    }

    /// Row determinants are alternating in even rows: swapping two rows of
    /// commuting entries negates the determinant.
    #[test]
    fn row_det_alternating(
        exps in prop::collection::vec(0u32..3, 9),
        coeffs in prop::collection::vec(0u64..3, 9),
    ) {
        let alg = algebra(3, 3);
        let entry = |i: usize| -> SuperElement {
            let e = alg.x_pow(1 + i % 3, exps[i] as Exp).unwrap();
            e.scale(alg.field().element(1 + coeffs[i] % 2).unwrap()).unwrap()
        };
        let rows: Vec<Vec<SuperElement>> = (0..3)
            .map(|r| (0..3).map(|c| entry(3 * r + c)).collect())
            .collect();
        let det = alg.matrix(rows.clone()).unwrap().row_det().unwrap();
        let mut swapped = rows;
        swapped.swap(0, 2);
        let det_swapped = alg.matrix(swapped).unwrap().row_det().unwrap();
        prop_assert_eq!(det, det_swapped.neg());
    }

    /// expand is additive and multiplicative up to the truncation bound.
    #[test]
    fn expansion_is_a_ring_map(
        ms_a in prop::collection::vec(1i64..5, 1..3),
        ms_b in prop::collection::vec(1i64..5, 1..3),
        num_a in 0i64..4,
        num_b in 0i64..4,
    ) {
        let t_max = 12i64;
        let mut a = RationalSeries::from_poly(LaurentPoly::monomial(num_a, 0, BigRational::one()));
        for m in &ms_a { a = a.div_factor(*m, 1); }
        let mut b = RationalSeries::from_poly(LaurentPoly::monomial(num_b, 1, BigRational::one()));
        for m in &ms_b { b = b.div_factor(*m, 1); }

        let sum = a.add(&b).expand(t_max);
        let prod = a.mul(&b).expand(t_max);
        let (ea, eb) = (a.expand(t_max), b.expand(t_max));
        for t in 0..=t_max {
            for s in 0..3u32 {
                prop_assert_eq!(sum.coeff(t, s), ea.coeff(t, s) + eb.coeff(t, s));
                // Cauchy product of the truncations
                let mut acc = BigRational::from_integer(0.into());
                for t1 in 0..=t {
                    for s1 in 0..=s {
                        acc += ea.coeff(t1, s1) * eb.coeff(t - t1, s - s1);
                    }
                }
                prop_assert_eq!(prod.coeff(t, s), acc);
            }
        }
    }
}

/// Enumerated closure sizes match the product formulas (deterministic, so
/// outside the proptest block).
#[test]
fn enumerated_orders_match_formulas() {
    let f2 = Field::gf(2).unwrap();
    let f3 = Field::gf(3).unwrap();
    for (spec, expect) in [
        (SubgroupSpec::gl(f2.clone(), 2), 6u64),
        (SubgroupSpec::unitriangular(f2.clone(), 3), 8),
        (SubgroupSpec::gl(f3.clone(), 2), 48),
        (SubgroupSpec::sl(f3.clone(), 2), 24),
    ] {
        let elements = spec.enumerate(10_000).unwrap();
        assert_eq!(elements.len() as u64, expect);
        assert_eq!(spec.order().to_u64().unwrap(), expect);
        // closure members are invertible and closed under product
        let g = &elements[elements.len() / 2];
        let h = &elements[1 % elements.len()];
        let gh = g.mul(h).unwrap();
        assert!(elements.contains(&gh));
        assert!(elements.contains(&g.inverse()));
        assert!(elements.contains(&GroupMatrix::identity(spec.field(), spec.n())));
    }
}
