use rustc_hash::FxHashMap;

use super::atom::{Atom, JetSpace, MultiIndex};
use super::expr::{Accum, Expr, Monomial};
use super::registry;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Applies the derivation determined by its values on plain atoms.
///
/// `on_atom` returns the image of a plain atom (`None` for zero). Inverse and
/// square-root atoms are handled by the chain rule through their defining
/// polynomials: `D inv(P) = -inv(P)^2 DP` and `D s = s inv(P) DP / 2`.
pub fn derive<F>(e: &Expr, on_atom: &mut F) -> Result<Expr>
where
    F: FnMut(&Atom) -> Result<Option<Expr>>,
{
    let mut cache: FxHashMap<Atom, Option<Expr>> = FxHashMap::default();
    derive_cached(e, on_atom, &mut cache)
}

fn derive_cached<F>(e: &Expr, on_atom: &mut F, cache: &mut FxHashMap<Atom, Option<Expr>>) -> Result<Expr>
where
    F: FnMut(&Atom) -> Result<Option<Expr>>,
{
    let mut acc = Accum::with_capacity(e.len());
    for (m, c) in e.terms() {
        for &(a, k) in m.factors() {
            if !cache.contains_key(&a) {
                let image = atom_image(&a, on_atom, cache)?;
                cache.insert(a, image);
            }
            let Some(image) = cache.get(&a).and_then(|v| v.as_ref()) else { continue };
            let rest = m.with_exponent(a, k - 1);
            acc.add_scaled(image, &rest, &(c * &Rational::from_int(k as i64)));
        }
    }
    Ok(acc.finish())
}

fn atom_image<F>(a: &Atom, on_atom: &mut F, cache: &mut FxHashMap<Atom, Option<Expr>>) -> Result<Option<Expr>>
where
    F: FnMut(&Atom) -> Result<Option<Expr>>,
{
    match *a {
        Atom::Inv(id) => {
            let p = registry::inv_poly(id);
            let dp = derive_cached(&p, on_atom, cache)?;
            if dp.is_zero() {
                return Ok(None);
            }
            let inv2 = Expr::term(Monomial::atom(*a, 2), Rational::from_int(-1));
            Ok(Some(&inv2 * &dp))
        }
        Atom::Sqrt(id) => {
            let p = registry::sqrt_poly(id);
            let dp = derive_cached(&p, on_atom, cache)?;
            if dp.is_zero() {
                return Ok(None);
            }
            let half_s = Expr::term(Monomial::atom(*a, 1), Rational::new(1, 2));
            let inv_p = registry::inverse(&p)?;
            Ok(Some(&(&half_s * &inv_p) * &dp))
        }
        _ => on_atom(a),
    }
}

/// Raw partial derivative with respect to a plain atom.
pub fn partial_atom(e: &Expr, target: &Atom) -> Expr {
    if !e.depends_on(target) {
        return Expr::zero();
    }
    derive(e, &mut |a: &Atom| Ok((a == target).then(Expr::one))).expect("partial derivatives of registered atoms exist")
}

/// Symmetrized partial `∂̂e/∂y^σ_K`: the raw partial with respect to the
/// canonical variable `y^σ_{sort K}`, divided by the multiplicity of `K`.
///
/// With this weighting, sums over unordered index tuples reproduce the
/// chain rule `de = Σ_K ∂̂e/∂y^σ_K dy^σ_K` taken over all ordered `K`.
pub fn partial(e: &Expr, sigma: u16, k: &[u8]) -> Expr {
    let j = MultiIndex::new(k);
    let raw = partial_atom(e, &Atom::Y(sigma, j));
    let mult = j.multiplicity();
    if mult == 1 {
        raw
    } else {
        raw.scale(&Rational::new(1, mult as i64))
    }
}

/// Formal (total) derivative `d_i`.
pub fn formal_derivative(e: &Expr, i: u8, space: &JetSpace) -> Result<Expr> {
    if i == 0 || i > space.n {
        return Err(Error::IndexOutOfRange { what: "base index", index: i as usize, bound: space.n as usize });
    }
    derive(e, &mut |a: &Atom| match *a {
        Atom::X(j) => Ok((j == i).then(Expr::one)),
        Atom::Y(s, jj) => {
            space.require_order(jj.order() + 1)?;
            Ok(Some(Expr::atom(Atom::Y(s, jj.with(i)))))
        }
        Atom::Opaque(id) => Err(Error::OpaqueDerivative(registry::opaque_name(id))),
        _ => unreachable!("relation atoms are expanded by the chain rule"),
    })
}

/// Iterated formal derivative `d_{p1} ... d_{pk}`.
pub fn formal_derivatives(e: &Expr, indices: &[u8], space: &JetSpace) -> Result<Expr> {
    let mut out = e.clone();
    for &i in indices {
        out = formal_derivative(&out, i, space)?;
    }
    Ok(out)
}

/// Simultaneous substitution of plain atoms; unmapped atoms stay fixed.
///
/// Inverse and square-root atoms whose polynomials are touched are rebuilt
/// (and registered) from the substituted polynomial.
pub fn substitute<F>(e: &Expr, map: &F) -> Result<Expr>
where
    F: Fn(&Atom) -> Option<Expr>,
{
    let mut images: FxHashMap<Atom, Option<Expr>> = FxHashMap::default();
    let mut powers: FxHashMap<(Atom, i32), Expr> = FxHashMap::default();
    let mut acc = Accum::with_capacity(e.len());
    for (m, c) in e.terms() {
        let mut fixed = Monomial::one();
        let mut product = Expr::constant(c.clone());
        for &(a, k) in m.factors() {
            if !images.contains_key(&a) {
                let img = atom_substitution(&a, map)?;
                images.insert(a, img);
            }
            match &images[&a] {
                None => fixed = fixed.mul(&Monomial::atom(a, k)),
                Some(img) => {
                    if !powers.contains_key(&(a, k)) {
                        let p = if k >= 0 {
                            img.pow(k as u32)
                        } else {
                            registry::register_nonvanishing(img)?.pow((-k) as u32)
                        };
                        powers.insert((a, k), p);
                    }
                    product = &product * &powers[&(a, k)];
                }
            }
        }
        acc.add_scaled(&product, &fixed, &Rational::one());
    }
    Ok(acc.finish())
}

fn atom_substitution<F>(a: &Atom, map: &F) -> Result<Option<Expr>>
where
    F: Fn(&Atom) -> Option<Expr>,
{
    match *a {
        Atom::Inv(id) => {
            let p = registry::inv_poly(id);
            if !p.dependencies().iter().any(|d| map(d).is_some()) {
                return Ok(None);
            }
            let q = substitute(&p, map)?;
            Ok(Some(registry::register_nonvanishing(&q)?))
        }
        Atom::Sqrt(id) => {
            let p = registry::sqrt_poly(id);
            if !p.dependencies().iter().any(|d| map(d).is_some()) {
                return Ok(None);
            }
            let q = substitute(&p, map)?;
            Ok(Some(registry::sqrt(&q)?))
        }
        _ => Ok(map(a)),
    }
}

/// Splits `e` as `N · Π inv(Q_i)^{K_i}` with `N` free of inverse atoms.
/// `K_i` is the top power of each inverse atom present.
fn clear_denominators(e: &Expr) -> (Expr, Vec<(Atom, i32)>) {
    let mut tops: FxHashMap<Atom, i32> = FxHashMap::default();
    for (m, _) in e.terms() {
        for &(a, k) in m.factors() {
            if matches!(a, Atom::Inv(_)) {
                let t = tops.entry(a).or_insert(k);
                *t = (*t).max(k);
            }
        }
    }
    if tops.is_empty() {
        return (e.clone(), Vec::new());
    }
    let mut powers: FxHashMap<(Atom, i32), Expr> = FxHashMap::default();
    let mut acc = Accum::with_capacity(e.len());
    for (m, c) in e.terms() {
        let mut rest = m.clone();
        let mut factor = Expr::one();
        for (a, top) in &tops {
            let k = m.exponent(a);
            rest = rest.with_exponent(*a, 0);
            let need = top - k;
            if need > 0 {
                let Atom::Inv(id) = a else { unreachable!() };
                let p = powers.entry((*a, need)).or_insert_with(|| registry::inv_poly(*id).pow(need as u32));
                factor = &factor * &*p;
            }
        }
        acc.add_scaled(&factor, &rest, c);
    }
    let mut tops: Vec<(Atom, i32)> = tops.into_iter().collect();
    tops.sort_unstable();
    (acc.finish(), tops)
}

/// Decides whether `e` vanishes on the declared domain.
///
/// Every inverse atom `inv(Q)` of top power `K` is cleared by multiplying
/// through with `Q^K`; the result is a Laurent polynomial in plain atoms with
/// reduced square-root atoms, which is zero iff its normal form is empty.
pub fn equals_zero(e: &Expr) -> bool {
    e.is_zero() || clear_denominators(e).0.is_zero()
}

/// Graded lexicographic comparison of monomials with nonnegative exponents.
fn grlex(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    match a.total_degree().cmp(&b.total_degree()) {
        Equal => {}
        o => return o,
    }
    let (x, y) = (a.factors(), b.factors());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            Less => return Greater,
            Greater => return Less,
            Equal => match x[i].1.cmp(&y[j].1) {
                Equal => {
                    i += 1;
                    j += 1;
                }
                o => return o,
            },
        }
    }
    (x.len() - i).cmp(&(y.len() - j))
}

fn leading(e: &Expr) -> &(Monomial, Rational) {
    e.terms().iter().max_by(|p, q| grlex(&p.0, &q.0)).expect("nonzero")
}

/// `n / q` when `q` divides `n` exactly as polynomials in their atoms.
fn exact_div(n: &Expr, q: &Expr) -> Option<Expr> {
    let plain = |e: &Expr| e.terms().iter().all(|(m, _)| m.factors().iter().all(|(a, k)| *k > 0 && !matches!(a, Atom::Inv(_))));
    if q.is_zero() || !plain(n) || !plain(q) || q.terms().iter().any(|(m, _)| m.factors().iter().any(|(a, _)| matches!(a, Atom::Sqrt(_)))) {
        return None;
    }
    let (lq, cq) = leading(q).clone();
    let mut rem = n.clone();
    let mut quot = Expr::zero();
    while !rem.is_zero() {
        let (lm, lc) = leading(&rem).clone();
        let mut m = lm.clone();
        for &(a, k) in lq.factors() {
            let have = lm.exponent(&a);
            if have < k {
                return None;
            }
            m = m.with_exponent(a, have - k);
        }
        let c = &lc / &cq;
        quot = &quot + &Expr::term(m.clone(), c.clone());
        rem = &rem - &q.mul_monomial(&m, &c);
    }
    Some(quot)
}

/// A representative of `e` over the common denominator of its inverse atoms,
/// with every denominator that divides the numerator exactly cancelled.
/// Equal to `e` on the declared domain, and the zero expression iff `e`
/// vanishes there.
pub fn simplify(e: &Expr) -> Expr {
    let (mut num, tops) = clear_denominators(e);
    if tops.is_empty() {
        return num;
    }
    if num.is_zero() {
        return Expr::zero();
    }
    let mut den = Monomial::one();
    for (a, top) in tops {
        let Atom::Inv(id) = a else { unreachable!() };
        let q = registry::inv_poly(id);
        let mut k = top;
        while k > 0 {
            match exact_div(&num, &q) {
                Some(d) => {
                    num = d;
                    k -= 1;
                }
                None => break,
            }
        }
        den = den.mul(&Monomial::atom(a, k));
    }
    num.mul_monomial(&den, &Rational::one())
}

/// `a - b` vanishes on the declared domain.
pub fn equal(a: &Expr, b: &Expr) -> bool {
    equals_zero(&(a - b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(s: u16, j: &[u8]) -> Expr {
        Expr::y(s, j)
    }

    #[test]
    fn simplify_cancels_registered_factors() {
        let q = &(&y(1, &[]) * &y(3, &[])) - &y(2, &[]).pow(2);
        let iq = registry::register_nonvanishing(&q).unwrap();
        let e = &(&q * &y(1, &[1])) * &iq.pow(2);
        assert_ne!(e, &y(1, &[1]) * &iq);
        assert_eq!(simplify(&e), &y(1, &[1]) * &iq);
        assert!(simplify(&(&q * &iq)).is_one());
        let hidden = &(&(&q * &iq.pow(3)) * &y(1, &[])) - &(&y(1, &[]) * &iq.pow(2));
        assert!(!hidden.is_zero());
        assert!(simplify(&hidden).is_zero());
    }

    #[test]
    fn simplify_keeps_coprime_denominators() {
        let p = &Expr::x(1) + &Expr::one();
        let ip = registry::register_nonvanishing(&p).unwrap();
        let e = &Expr::x(2) * &ip;
        assert_eq!(simplify(&e), e);
        assert_eq!(simplify(&Expr::x(2)), Expr::x(2));
    }

    #[test]
    fn exact_division() {
        let a = &Expr::x(1) + &Expr::x(2);
        let b = &Expr::x(1) - &Expr::x(2).pow(3);
        assert_eq!(exact_div(&(&a * &b), &a), Some(b.clone()));
        assert_eq!(exact_div(&(&a * &b), &b), Some(a.clone()));
        assert_eq!(exact_div(&(&(&a * &b) + &Expr::one()), &a), None);
    }
}
