use lepage_core::charts::{check_theta_invariance, obstruction_3rd, prolong, shear, ChartTransform};
use lepage_core::exterior::{
    contact_component, contract, exterior_derivative, horizontalize, omega_forms, wedge, Form, VectorField,
};
use lepage_core::kernel::{
    equals_zero, formal_derivative, normalize, partial, partial_atom, registry, Atom, Expr, JetSpace, MultiIndex, RawExpr,
};
use lepage_core::lepage::{
    caratheodory_closed, caratheodory_contraction, caratheodory_first, check_lepage, euler_lagrange, euler_lagrange_classical,
    fundamental_form, is_trivial, principal_component, Lagrangian,
};
use lepage_core::suite::Sampler;
use lepage_core::Rational;
use proptest::prelude::*;

fn space(n: usize, m: usize, cap: usize) -> JetSpace {
    JetSpace::new(n, m, cap).unwrap()
}

/// A raw tree built from random polynomials with sums, products, negation
/// and small powers.
fn raw_tree(s: &mut Sampler, sp: &JetSpace, depth: usize) -> RawExpr {
    if depth == 0 || s.below(3) == 0 {
        let terms = 1 + s.below(2);
        return RawExpr::from(&s.polynomial(sp, 2, 2, terms));
    }
    match s.below(4) {
        0 => RawExpr::Add(vec![raw_tree(s, sp, depth - 1), raw_tree(s, sp, depth - 1)]),
        1 => RawExpr::Mul(vec![raw_tree(s, sp, depth - 1), raw_tree(s, sp, depth - 1)]),
        2 => RawExpr::Neg(Box::new(raw_tree(s, sp, depth - 1))),
        _ => RawExpr::Pow(Box::new(raw_tree(s, sp, depth - 1)), 1 + s.below(2) as i32),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn formal_derivatives_commute(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(3, 2, 4);
        let e = s.polynomial(&sp, 2, 3, 4);
        let (i, j) = (1 + s.below(3) as u8, 1 + s.below(3) as u8);
        let ij = formal_derivative(&formal_derivative(&e, i, &sp).unwrap(), j, &sp).unwrap();
        let ji = formal_derivative(&formal_derivative(&e, j, &sp).unwrap(), i, &sp).unwrap();
        prop_assert!(equals_zero(&(&ij - &ji)));
    }

    #[test]
    fn chain_rule_over_ordered_tuples(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(2, 2, 3);
        let e = s.polynomial(&sp, 2, 3, 4);
        let i = 1 + s.below(2) as u8;
        let mut expected = partial_atom(&e, &Atom::X(i));
        for sigma in 1..=2 {
            for k in 0..=2 {
                for tuple in MultiIndex::all_tuples(2, k) {
                    let mut with_i = tuple.clone();
                    with_i.push(i);
                    expected = &expected + &(&partial(&e, sigma, &tuple) * &Expr::y(sigma, &with_i));
                }
            }
        }
        prop_assert_eq!(formal_derivative(&e, i, &sp).unwrap(), expected);
    }

    #[test]
    fn normalize_is_idempotent_homomorphism(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(2, 2, 2);
        let a = raw_tree(&mut s, &sp, 3);
        let b = raw_tree(&mut s, &sp, 3);
        let na = normalize(&a, &sp).unwrap();
        let nb = normalize(&b, &sp).unwrap();
        prop_assert_eq!(normalize(&RawExpr::from(&na), &sp).unwrap(), na.clone());
        prop_assert_eq!(normalize(&RawExpr::Add(vec![a.clone(), b.clone()]), &sp).unwrap(), &na + &nb);
        prop_assert_eq!(normalize(&RawExpr::Mul(vec![a, b]), &sp).unwrap(), &na * &nb);
    }

    #[test]
    fn zero_stays_zero_under_formal_derivative(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(2, 1, 3);
        let p = s.polynomial(&sp, 1, 2, 3);
        let q = &s.polynomial(&sp, 1, 2, 2) + &Expr::int(3);
        let inv = registry::register_nonvanishing(&q).unwrap();
        let root = registry::sqrt(&q).unwrap();
        // p q / q - p and sqrt(q)^2 - q, both zero only after clearing atoms
        let e = &(&(&(&p * &inv) * &q) - &p) + &(&(&root * &root) - &q);
        prop_assert!(equals_zero(&e));
        for i in 1..=2 {
            prop_assert!(equals_zero(&formal_derivative(&e, i, &sp).unwrap()));
        }
    }

    #[test]
    fn exterior_derivative_squares_to_zero(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(3, 1, 3);
        let deg = s.below(3);
        let rho = s.form(sp, deg, 2, 3).unwrap();
        prop_assert!(exterior_derivative(&exterior_derivative(&rho).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn horizontalization_is_multiplicative(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(3, 2, 3);
        let da = 1 + s.below(2);
        let a = s.form(sp, da, 1, 2).unwrap();
        let b = s.form(sp, 1, 1, 2).unwrap();
        let lhs = horizontalize(&wedge(&a, &b).unwrap()).unwrap();
        let rhs = wedge(&horizontalize(&a).unwrap(), &horizontalize(&b).unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs).unwrap());
    }

    #[test]
    fn contact_components_sum_to_form(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(2, 2, 3);
        let deg = 1 + s.below(3);
        let rho = s.form(sp, deg, 2, 3).unwrap();
        let mut total = Form::zero(sp, deg, 3).unwrap();
        for k in 0..=deg {
            total = total.add(&contact_component(&rho, k).unwrap()).unwrap();
        }
        prop_assert!(total.equals(&rho.promoted(3).unwrap()).unwrap());
    }

    #[test]
    fn pullback_commutes_with_d_and_wedge(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(2, 1, 3);
        let t = s.transform(sp).unwrap();
        let p = prolong(&t, 1).unwrap();
        let deg = s.below(2);
        let a = s.form(sp, deg, 1, 2).unwrap();
        let b = s.form(sp, 1, 1, 2).unwrap();
        let d_then_pull = p.pullback(&exterior_derivative(&a).unwrap()).unwrap();
        let pull_then_d = exterior_derivative(&p.pullback(&a).unwrap()).unwrap();
        prop_assert!(d_then_pull.equals(&pull_then_d).unwrap());
        let wedge_then_pull = p.pullback(&wedge(&a, &b).unwrap()).unwrap();
        let pull_then_wedge = wedge(&p.pullback(&a).unwrap(), &p.pullback(&b).unwrap()).unwrap();
        prop_assert!(wedge_then_pull.equals(&pull_then_wedge).unwrap());
    }

    #[test]
    fn graded_anticommutativity(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(3, 1, 2);
        let (p, q) = (s.below(3), 1 + s.below(2));
        let a = s.form(sp, p, 1, 2).unwrap();
        let b = s.form(sp, q, 1, 2).unwrap();
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        let ba = if (p * q) % 2 == 0 { ba } else { ba.neg() };
        prop_assert!(ab.equals(&ba).unwrap());
    }

    #[test]
    fn contractions_anticommute(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(2, 2, 2);
        let deg = 2 + s.below(2);
        let rho = s.form(sp, deg, 1, 3).unwrap();
        let x = s.vector_field(sp, 1).unwrap();
        let y = s.vector_field(sp, 1).unwrap();
        let xy = contract(&x, &contract(&y, &rho).unwrap()).unwrap();
        let yx = contract(&y, &contract(&x, &rho).unwrap()).unwrap();
        prop_assert!(xy.add(&yx).unwrap().is_zero());
    }
}

#[test]
fn formal_fields_annihilate_contact_forms() {
    let sp = space(2, 2, 4);
    for i in 1..=2 {
        let field = VectorField::formal(sp, i, 3).unwrap();
        for a in sp.field_atoms(3) {
            let Atom::Y(sigma, j) = a else { unreachable!() };
            let w = Form::contact(sp, sigma, j.entries()).unwrap();
            assert!(contract(&field, &w).unwrap().is_zero(), "d_{i} on w{sigma}_{j}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_order_contraction_matches_formula(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let n = 2 + s.below(2);
        let m = 1 + s.below(2);
        let l = s.lagrangian(space(n, m, 3), 1, 3, true).unwrap();
        prop_assert!(caratheodory_contraction(&l).unwrap().factorwise_equals(&caratheodory_first(&l).unwrap()).unwrap());
    }

    #[test]
    fn second_order_caratheodory(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let l = s.lagrangian(space(2, 1, 5), 2, 3, true).unwrap();
        let closed = caratheodory_closed(&l).unwrap();
        prop_assert!(caratheodory_contraction(&l).unwrap().factorwise_equals(&closed).unwrap());
        let form = closed.expand().unwrap();
        prop_assert!(horizontalize(&form).unwrap().equals(&l.form().unwrap()).unwrap());
        prop_assert!(check_lepage(&form, &l).unwrap().lepage_ok);
    }

    #[test]
    fn principal_component_is_lepage(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let r = 1 + s.below(2);
        let n = if r == 1 { 2 + s.below(2) } else { 2 };
        let m = 1 + s.below(2);
        let l = s.lagrangian(space(n, m, 4), r, 3, false).unwrap();
        let report = check_lepage(&principal_component(&l).unwrap(), &l).unwrap();
        prop_assert!(report.equivalent_ok && report.lepage_ok);
        prop_assert!(euler_lagrange(&l).unwrap().equals(&euler_lagrange_classical(&l).unwrap()).unwrap());
    }

    #[test]
    fn fundamental_form_closed_iff_trivial(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(2, 1, 3);
        let density = if s.below(2) == 0 {
            // a total divergence d_1 f + d_2 g of order-zero f, g
            let f = s.polynomial(&sp, 0, 3, 3);
            let g = s.polynomial(&sp, 0, 3, 3);
            &formal_derivative(&f, 1, &sp).unwrap() + &formal_derivative(&g, 2, &sp).unwrap()
        } else {
            s.lagrangian(sp, 1, 3, false).unwrap().density().clone()
        };
        let l = Lagrangian::new(sp, 1, density).unwrap();
        let closed = exterior_derivative(&fundamental_form(&l).unwrap()).unwrap().is_zero();
        prop_assert_eq!(closed, is_trivial(&l).unwrap());
    }

    #[test]
    fn one_dimensional_base_collapses(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let l = s.lagrangian(space(1, 1, 3), 1, 3, true).unwrap();
        let theta = principal_component(&l).unwrap();
        prop_assert!(fundamental_form(&l).unwrap().equals(&theta).unwrap());
        prop_assert!(caratheodory_first(&l).unwrap().expand().unwrap().equals(&theta).unwrap());
    }

    #[test]
    fn prolongation_recursion(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(2, 1 + s.below(2), 3);
        let t = s.transform(sp).unwrap();
        prop_assert!(prolong(&t, 3).unwrap().recursion_holds().unwrap());
    }

    #[test]
    fn prolongation_is_functorial(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let sp = space(1, 1, 3);
        let inner = s.transform(sp).unwrap();
        let c = s.coefficient();
        let outer = ChartTransform::new(
            sp,
            vec![Expr::x(1).scale(&Rational::from_int(2))],
            vec![&Expr::y(1, &[]).scale(&c) + &Expr::x(1)],
        ).unwrap();
        let composed = prolong(&ChartTransform::compose(&outer, &inner).unwrap(), 2).unwrap();
        let (po, pi) = (prolong(&outer, 2).unwrap(), prolong(&inner, 2).unwrap());
        for j in [&[][..], &[1], &[1, 1]] {
            let chained = pi.pullback_expr(po.jet_map(1, j).unwrap()).unwrap();
            prop_assert!(equals_zero(&(&chained - composed.jet_map(1, j).unwrap())));
        }
    }

    #[test]
    fn horizontal_volume_pieces_transform_with_jacobian(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let n = 2 + s.below(2);
        let sp = space(n, 1, 2);
        let t = s.transform(sp).unwrap();
        let p = prolong(&t, 1).unwrap();
        let (_, w) = omega_forms(sp).unwrap();
        for j in 0..n {
            let mut expected = Form::zero(sp, n - 1, 0).unwrap();
            for q in 0..n {
                expected = expected.add(&w[q].scale(&(&t.inv_jacobian()[q][j] * t.det()))).unwrap();
            }
            prop_assert!(p.pullback(&w[j]).unwrap().equals(&expected).unwrap());
        }
    }

    #[test]
    fn principal_component_invariant_up_to_second_order(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let r = 1 + s.below(2);
        let sp = space(2, 1, 4);
        let barred = s.lagrangian(sp, r, 2, false).unwrap();
        let t = s.transform(sp).unwrap();
        prop_assert!(check_theta_invariance(&barred, &t).unwrap());
    }
}

/// Third-order case: the strict condition (all undifferentiated terms
/// vanish) is equivalent to invariance of the principal component, and on
/// this family the divergence condition implies invariance.
#[test]
fn third_order_obstruction_against_direct_invariance() {
    let sp = space(2, 1, 6);
    let t = shear(sp).unwrap();
    let p = prolong(&t, 5).unwrap();
    let mut s = Sampler::new(0x3D);
    let mut both = 0;
    for k in 0..12 {
        let barred = if k % 3 == 0 {
            Lagrangian::new(sp, 3, s.lagrangian(sp, 2, 3, false).unwrap().density().clone()).unwrap()
        } else {
            s.lagrangian(sp, 3, 2, false).unwrap()
        };
        let unbarred = p.pullback_lagrangian(&barred).unwrap();
        let report = obstruction_3rd(&unbarred, &t).unwrap();
        let invariant = check_theta_invariance(&barred, &t).unwrap();
        assert_eq!(report.strict_holds, invariant, "case {k}: {}", barred.density());
        if report.holds {
            assert!(invariant, "case {k}: {}", barred.density());
            both += 1;
        }
    }
    assert!(both >= 4);
}
