use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::atom::{Atom, MultiIndex};
use super::registry;
use crate::rational::Rational;

/// A power product of atoms, sorted by atom, with no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct Monomial(SmallVec<[(Atom, i32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn atom(a: Atom, e: i32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(smallvec::smallvec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn exponent(&self, a: &Atom) -> i32 {
        self.0.iter().find(|(b, _)| b == a).map_or(0, |(_, e)| *e)
    }

    pub fn with_exponent(&self, a: Atom, e: i32) -> Monomial {
        let mut v: SmallVec<[(Atom, i32); 4]> = self.0.iter().filter(|(b, _)| *b != a).cloned().collect();
        if e != 0 {
            let pos = v.iter().position(|(b, _)| *b > a).unwrap_or(v.len());
            v.insert(pos, (a, e));
        }
        Monomial(v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if self.0.is_empty() {
            return other.clone();
        }
        if other.0.is_empty() {
            return self.clone();
        }
        let mut out: SmallVec<[(Atom, i32); 4]> = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn inverse(&self) -> Monomial {
        Monomial(self.0.iter().map(|&(a, e)| (a, -e)).collect())
    }

    pub fn total_degree(&self) -> i32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    fn sqrt_overflow(&self) -> Option<(Atom, i32)> {
        self.0.iter().find(|(a, e)| matches!(a, Atom::Sqrt(_)) && (*e >= 2 || *e < 0)).cloned()
    }
}

/// Exact rational-coefficient expression in canonical sorted form.
///
/// Square-root atoms never appear with exponent two or more; the relation
/// `s^2 = P` is applied as terms are produced.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Expr {
    terms: Vec<(Monomial, Rational)>,
}

/// Hash-map accumulator used by every term-producing operation.
#[derive(Default)]
pub(crate) struct Accum {
    map: FxHashMap<Monomial, Rational>,
}

impl Accum {
    pub(crate) fn with_capacity(n: usize) -> Self {
        let mut map = FxHashMap::default();
        map.reserve(n);
        Accum { map }
    }

    pub(crate) fn add(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        if let Some((atom, e)) = m.sqrt_overflow() {
            let Atom::Sqrt(id) = atom else { unreachable!() };
            let p = registry::sqrt_poly(id);
            let (q, r) = (e.div_euclid(2), e.rem_euclid(2));
            let base = m.with_exponent(atom, r);
            let factor = if q >= 0 {
                p.pow(q as u32)
            } else {
                registry::inverse(&p).expect("sqrt radicand is registered nonvanishing").pow((-q) as u32)
            };
            for (tm, tc) in factor.terms {
                self.add(base.mul(&tm), &c * &tc);
            }
            return;
        }
        match self.map.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// Adds `c * m * e`.
    pub(crate) fn add_scaled(&mut self, e: &Expr, m: &Monomial, c: &Rational) {
        for (tm, tc) in &e.terms {
            self.add(tm.mul(m), tc * c);
        }
    }

    pub(crate) fn merge(&mut self, other: Accum) {
        if self.map.len() < other.map.len() {
            let mine = std::mem::replace(&mut self.map, other.map);
            for (m, c) in mine {
                self.add(m, c);
            }
        } else {
            for (m, c) in other.map {
                self.add(m, c);
            }
        }
    }

    pub(crate) fn finish(self) -> Expr {
        let mut terms: Vec<(Monomial, Rational)> = self.map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Expr { terms }
    }
}

const PAR_THRESHOLD: usize = 40_000;

impl Expr {
    pub fn zero() -> Self {
        Expr { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            Expr::zero()
        } else {
            Expr { terms: vec![(Monomial::one(), c)] }
        }
    }

    pub fn int(v: i64) -> Self {
        Expr::constant(Rational::from_int(v))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Expr::constant(Rational::new(num, den))
    }

    pub fn atom(a: Atom) -> Self {
        Expr::term(Monomial::atom(a, 1), Rational::one())
    }

    pub fn x(i: u8) -> Self {
        Expr::atom(Atom::X(i))
    }

    pub fn y(sigma: u16, j: &[u8]) -> Self {
        Expr::atom(Atom::Y(sigma, MultiIndex::new(j)))
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut acc = Accum::default();
        acc.add(m, c);
        acc.finish()
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(it: I) -> Self {
        let mut acc = Accum::default();
        for (m, c) in it {
            acc.add(m, c);
        }
        acc.finish()
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Structural zero (empty normal form). See [`super::equals_zero`] for the
    /// decision procedure that accounts for inverse atoms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Expr {
        let mut acc = Accum::with_capacity(self.terms.len());
        acc.add_scaled(self, m, c);
        acc.finish()
    }

    pub fn pow(&self, e: u32) -> Expr {
        let mut acc = Expr::one();
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Atoms occurring directly in monomials.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms.iter().flat_map(|(m, _)| m.factors().iter().map(|(a, _)| *a)).collect()
    }

    /// Plain atoms the expression depends on, including through inverse and
    /// square-root atoms.
    pub fn dependencies(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            match a {
                Atom::Inv(_) | Atom::Sqrt(_) => out.extend(registry::dependencies(&a).iter().copied()),
                _ => {
                    out.insert(a);
                }
            }
        }
        out
    }

    pub fn depends_on(&self, a: &Atom) -> bool {
        self.terms.iter().any(|(m, _)| {
            m.factors().iter().any(|(b, _)| b == a || (matches!(b, Atom::Inv(_) | Atom::Sqrt(_)) && registry::dependencies(b).contains(a)))
        })
    }

    /// Highest jet order among the expression's dependencies.
    pub fn jet_order(&self) -> usize {
        self.dependencies().iter().map(Atom::jet_order).max().unwrap_or(0)
    }

    pub fn contains_opaque(&self) -> bool {
        self.dependencies().iter().any(|a| matches!(a, Atom::Opaque(_)))
    }

    /// Splits off the part that is free of `a`: returns `(coefficient of a^k)` for each `k`.
    pub fn collect_by(&self, a: &Atom) -> Vec<(i32, Expr)> {
        let mut groups: std::collections::BTreeMap<i32, Accum> = Default::default();
        for (m, c) in &self.terms {
            let e = m.exponent(a);
            groups.entry(e).or_default().add(m.with_exponent(*a, 0), c.clone());
        }
        groups.into_iter().map(|(k, acc)| (k, acc.finish())).collect()
    }
}

fn add_exprs(a: &Expr, b: &Expr, negate_b: bool) -> Expr {
    let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
    let (mut i, mut j) = (0, 0);
    let nb = |c: &Rational| if negate_b { -c.clone() } else { c.clone() };
    while i < a.terms.len() && j < b.terms.len() {
        match a.terms[i].0.cmp(&b.terms[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a.terms[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((b.terms[j].0.clone(), nb(&b.terms[j].1)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let c = &a.terms[i].1 + &nb(&b.terms[j].1);
                if !c.is_zero() {
                    out.push((a.terms[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a.terms[i..].iter().cloned());
    out.extend(b.terms[j..].iter().map(|(m, c)| (m.clone(), nb(c))));
    Expr { terms: out }
}

fn mul_exprs(a: &Expr, b: &Expr) -> Expr {
    if a.is_empty() || b.is_empty() {
        return Expr::zero();
    }
    if let Some(c) = a.as_constant() {
        return b.scale(&c);
    }
    if let Some(c) = b.as_constant() {
        return a.scale(&c);
    }
    let (big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if big.len() * small.len() < PAR_THRESHOLD {
        let mut acc = Accum::with_capacity(big.len() * small.len());
        for (m, c) in &small.terms {
            acc.add_scaled(big, m, c);
        }
        return acc.finish();
    }
    let chunk = (PAR_THRESHOLD / small.len()).max(64);
    let acc = big
        .terms
        .par_chunks(chunk)
        .map(|ch| {
            let mut acc = Accum::with_capacity(ch.len() * small.len());
            for (m1, c1) in ch {
                for (m2, c2) in &small.terms {
                    acc.add(m1.mul(m2), c1 * c2);
                }
            }
            acc
        })
        .reduce(Accum::default, |mut x, y| {
            x.merge(y);
            x
        });
    acc.finish()
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &'a Expr) -> Expr {
        add_exprs(self, rhs, false)
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &'a Expr) -> Expr {
        add_exprs(self, rhs, true)
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &'a Expr) -> Expr {
        mul_exprs(self, rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &'a Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = Accum::default();
        for e in iter {
            for (m, c) in e.terms {
                acc.add(m, c);
            }
        }
        acc.finish()
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::constant(c)
    }
}

impl From<Atom> for Expr {
    fn from(a: Atom) -> Self {
        Expr::atom(a)
    }
}
