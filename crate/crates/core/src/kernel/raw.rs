//! Unnormalized expression trees and their reduction to normal form.

use super::atom::{Atom, JetSpace};
use super::expr::Expr;
use super::registry;
use crate::error::Result;
use crate::rational::Rational;

/// An expression as written, before any simplification.
#[derive(Clone, Debug, PartialEq)]
pub enum RawExpr {
    Num(Rational),
    Atom(Atom),
    Add(Vec<RawExpr>),
    Mul(Vec<RawExpr>),
    Neg(Box<RawExpr>),
    Div(Box<RawExpr>, Box<RawExpr>),
    Pow(Box<RawExpr>, i32),
    Sqrt(Box<RawExpr>),
    Inv(Box<RawExpr>),
}

/// Reduces a tree to canonical normal form.
///
/// Atoms are range-checked against `space`. Division and `inv` require the
/// denominator to reduce to a registered nonvanishing polynomial; `sqrt`
/// registers its radicand.
pub fn normalize(e: &RawExpr, space: &JetSpace) -> Result<Expr> {
    Ok(match e {
        RawExpr::Num(c) => Expr::constant(c.clone()),
        RawExpr::Atom(a) => {
            space.check_atom(a)?;
            Expr::atom(*a)
        }
        RawExpr::Add(parts) => {
            let mut out = Expr::zero();
            for p in parts {
                out = &out + &normalize(p, space)?;
            }
            out
        }
        RawExpr::Mul(parts) => {
            let mut out = Expr::one();
            for p in parts {
                out = &out * &normalize(p, space)?;
            }
            out
        }
        RawExpr::Neg(a) => -normalize(a, space)?,
        RawExpr::Div(a, b) => &normalize(a, space)? * &registry::inverse(&normalize(b, space)?)?,
        RawExpr::Pow(a, k) => {
            let base = normalize(a, space)?;
            if *k >= 0 {
                base.pow(*k as u32)
            } else {
                registry::inverse(&base)?.pow(k.unsigned_abs())
            }
        }
        RawExpr::Sqrt(a) => registry::sqrt(&normalize(a, space)?)?,
        RawExpr::Inv(a) => registry::inverse(&normalize(a, space)?)?,
    })
}

impl From<&Expr> for RawExpr {
    /// The tree of a normal form; `inv` and `sqrt` atoms are spelled out
    /// through their polynomials.
    fn from(e: &Expr) -> Self {
        let terms = e
            .terms()
            .iter()
            .map(|(m, c)| {
                let mut parts = vec![RawExpr::Num(c.clone())];
                for (a, k) in m.factors() {
                    let base = match a {
                        Atom::Inv(id) => RawExpr::Inv(Box::new(RawExpr::from(&*registry::inv_poly(*id)))),
                        Atom::Sqrt(id) => RawExpr::Sqrt(Box::new(RawExpr::from(&*registry::sqrt_poly(*id)))),
                        _ => RawExpr::Atom(*a),
                    };
                    parts.push(if *k == 1 { base } else { RawExpr::Pow(Box::new(base), *k) });
                }
                RawExpr::Mul(parts)
            })
            .collect();
        RawExpr::Add(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn y(s: u16, j: &[u8]) -> RawExpr {
        RawExpr::Atom(Atom::y(s, j))
    }

    #[test]
    fn commutativity_cancels() {
        let sp = JetSpace::new(2, 1, 2).unwrap();
        let t = RawExpr::Add(vec![
            RawExpr::Mul(vec![y(1, &[2]), y(1, &[1])]),
            RawExpr::Neg(Box::new(RawExpr::Mul(vec![y(1, &[1]), y(1, &[2])]))),
        ]);
        assert!(normalize(&t, &sp).unwrap().is_zero());
    }

    #[test]
    fn sqrt_relation_reduces() {
        let sp = JetSpace::new(2, 1, 2).unwrap();
        let p = RawExpr::Mul(vec![y(1, &[]), y(1, &[])]);
        let s = RawExpr::Sqrt(Box::new(p));
        let sq = normalize(&RawExpr::Pow(Box::new(s), 2), &sp).unwrap();
        assert_eq!(sq, Expr::y(1, &[]).pow(2));
    }

    #[test]
    fn inverse_relation_cancels() {
        let sp = JetSpace::new(2, 1, 2).unwrap();
        registry::register_nonvanishing(&Expr::y(1, &[1])).unwrap();
        let t = RawExpr::Mul(vec![y(1, &[1]), RawExpr::Inv(Box::new(y(1, &[1])))]);
        assert!(normalize(&t, &sp).unwrap().is_one());
    }

    #[test]
    fn out_of_range_rejected() {
        let sp = JetSpace::new(2, 1, 2).unwrap();
        assert!(normalize(&y(1, &[3]), &sp).is_err());
        assert!(normalize(&RawExpr::Atom(Atom::x(3)), &sp).is_err());
    }

    #[test]
    fn unregistered_denominator_rejected() {
        let sp = JetSpace::new(2, 3, 2).unwrap();
        let d = RawExpr::Add(vec![y(3, &[1, 2]), y(2, &[2, 2])]);
        let t = RawExpr::Div(Box::new(RawExpr::Num(Rational::one())), Box::new(d));
        assert!(matches!(normalize(&t, &sp), Err(Error::Unregistered(_))));
    }
}
