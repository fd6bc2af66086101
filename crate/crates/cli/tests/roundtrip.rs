//! Printed expressions and forms read back to the same objects.

use lepage_cli::emit::{in_basis, text_decomposable, PrintBasis};
use lepage_cli::{sexpr, syntax};
use lepage_core::kernel::{equal, registry, simplify};
use lepage_core::lepage::caratheodory_contraction;
use lepage_core::suite::Sampler;
use lepage_core::{Expr, JetSpace};
use proptest::prelude::*;

fn space(n: usize, m: usize) -> JetSpace {
    JetSpace::new(n, m, 3).unwrap()
}

/// A polynomial, sometimes divided by a registered denominator or
/// multiplied by a square root.
fn sample_expr(seed: u64, sp: &JetSpace) -> Expr {
    let mut s = Sampler::new(seed);
    let terms = 1 + s.below(5);
    let p = s.polynomial(sp, 2, 3, terms);
    let den = &Expr::one() + &Expr::y(1, &[]).pow(2);
    let rad = &Expr::int(2) + &Expr::x(1).pow(2);
    match s.below(3) {
        0 => p,
        1 => &p * &registry::register_nonvanishing(&den).unwrap(),
        _ => &p * &registry::sqrt(&rad).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expressions_round_trip(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2) {
        let sp = space(n, m);
        let e = sample_expr(seed, &sp);
        let shown = simplify(&e);
        let from_sexpr = sexpr::parse_expr(&sexpr::expr(&shown), &sp).unwrap();
        prop_assert_eq!(&from_sexpr, &shown);
        let from_text = syntax::parse_expr(&shown.to_string(), &sp).unwrap();
        prop_assert_eq!(&from_text, &shown);
        prop_assert!(equal(&from_text, &e));
    }

    #[test]
    fn forms_round_trip(seed in any::<u64>(), n in 1usize..=3, degree in 0usize..=2, contact in any::<bool>()) {
        let sp = space(n, 1);
        let mut s = Sampler::new(seed);
        let terms = 1 + s.below(4);
        let f = s.form(sp, degree, 1, terms).unwrap();
        let basis = if contact { PrintBasis::Contact } else { PrintBasis::Coordinate };
        let shown = in_basis(&f, basis).unwrap();
        let back = sexpr::parse_form(&sexpr::form(&shown), &sp).unwrap();
        prop_assert!(back.equals(&f).unwrap());
        prop_assert_eq!(back.degree(), f.degree());
        let back = syntax::parse_form(&shown.to_string(), &sp).unwrap();
        prop_assert!(back.equals(&f).unwrap());
        // printing the re-read form gives the same text
        prop_assert_eq!(in_basis(&back, basis).unwrap().to_string(), shown.to_string());
    }
}

#[test]
fn decomposable_forms_round_trip() {
    let sp = JetSpace::new(2, 1, 3).unwrap();
    for seed in 0..6 {
        let l = Sampler::new(seed).lagrangian(sp, 1, 2, true).unwrap();
        let d = caratheodory_contraction(&l).unwrap();
        let text = text_decomposable(&d, PrintBasis::Contact).unwrap();
        assert!(syntax::parse_form(&text, &sp).unwrap().equals(&d.expand().unwrap()).unwrap());
        let tidy = lepage_cli::emit::tidy(&d, PrintBasis::Contact).unwrap();
        let back = sexpr::parse_decomposable(&sexpr::decomposable(&tidy), &sp).unwrap();
        assert!(back.factorwise_equals(&d).unwrap());
    }
}
