//! Process-wide interning of the polynomials behind inverse and square-root
//! atoms, of opaque symbol names, and of nonvanishing declarations.
//!
//! Interning is monotone: entries are only ever added, so expressions stay
//! value-semantic while sharing atom ids across threads.

use std::collections::BTreeSet;
use std::sync::{Arc, LazyLock};

use parking_lot::RwLock;
use rustc_hash::{FxHashMap, FxHashSet};

use super::atom::Atom;
use super::expr::{Accum, Expr, Monomial};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Default)]
struct Registry {
    inv_polys: Vec<Arc<Expr>>,
    inv_deps: Vec<Arc<BTreeSet<Atom>>>,
    inv_index: FxHashMap<Expr, u32>,
    sqrt_polys: Vec<Arc<Expr>>,
    sqrt_deps: Vec<Arc<BTreeSet<Atom>>>,
    sqrt_index: FxHashMap<Expr, u32>,
    opaque_names: Vec<String>,
    opaque_index: FxHashMap<String, u32>,
    nonvanishing_atoms: FxHashSet<Atom>,
    inverse_cache: FxHashMap<Expr, Expr>,
}

static REGISTRY: LazyLock<RwLock<Registry>> = LazyLock::new(Default::default);

/// Defining polynomial `P` of `inv(P)`.
pub fn inv_poly(id: u32) -> Arc<Expr> {
    REGISTRY.read().inv_polys[id as usize].clone()
}

/// Radicand `P` of the square-root atom `s`, `s^2 = P`.
pub fn sqrt_poly(id: u32) -> Arc<Expr> {
    REGISTRY.read().sqrt_polys[id as usize].clone()
}

/// Plain atoms an inverse or square-root atom depends on.
pub fn dependencies(a: &Atom) -> Arc<BTreeSet<Atom>> {
    let reg = REGISTRY.read();
    match *a {
        Atom::Inv(id) => reg.inv_deps[id as usize].clone(),
        Atom::Sqrt(id) => reg.sqrt_deps[id as usize].clone(),
        _ => Arc::new(BTreeSet::from([*a])),
    }
}

/// Interns an opaque symbol by name.
pub fn opaque(name: &str) -> Atom {
    if let Some(&id) = REGISTRY.read().opaque_index.get(name) {
        return Atom::Opaque(id);
    }
    let mut reg = REGISTRY.write();
    if let Some(&id) = reg.opaque_index.get(name) {
        return Atom::Opaque(id);
    }
    let id = reg.opaque_names.len() as u32;
    reg.opaque_names.push(name.to_string());
    reg.opaque_index.insert(name.to_string(), id);
    Atom::Opaque(id)
}

pub fn opaque_name(id: u32) -> String {
    REGISTRY.read().opaque_names[id as usize].clone()
}

pub fn is_nonvanishing_atom(a: &Atom) -> bool {
    REGISTRY.read().nonvanishing_atoms.contains(a)
}

/// Declares `p` nonvanishing on the working domain and returns `1/p`.
pub fn register_nonvanishing(p: &Expr) -> Result<Expr> {
    inverse_of(p, true)
}

/// `1/p`, provided `p` (or the polynomial it reduces to) was registered.
pub fn inverse(p: &Expr) -> Result<Expr> {
    inverse_of(p, false)
}

/// `sqrt(p)`; registers `p` nonvanishing so the atom can be differentiated.
pub fn sqrt(p: &Expr) -> Result<Expr> {
    if let Some(c) = p.as_constant() {
        if c.is_negative() || c.is_zero() {
            return Err(Error::Precondition(format!("square root of non-positive constant {c}")));
        }
        if let Some(r) = c.sqrt_exact() {
            return Ok(Expr::constant(r));
        }
    }
    register_nonvanishing(p)?;
    if let Some(&id) = REGISTRY.read().sqrt_index.get(p) {
        return Ok(Expr::atom(Atom::Sqrt(id)));
    }
    let deps = Arc::new(p.dependencies());
    let mut reg = REGISTRY.write();
    if let Some(&id) = reg.sqrt_index.get(p) {
        return Ok(Expr::atom(Atom::Sqrt(id)));
    }
    let id = reg.sqrt_polys.len() as u32;
    reg.sqrt_polys.push(Arc::new(p.clone()));
    reg.sqrt_deps.push(deps);
    reg.sqrt_index.insert(p.clone(), id);
    Ok(Expr::atom(Atom::Sqrt(id)))
}

fn inverse_of(p: &Expr, register: bool) -> Result<Expr> {
    if p.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if let Some(c) = p.as_constant() {
        return Ok(Expr::constant(c.recip()));
    }
    if let Some(hit) = REGISTRY.read().inverse_cache.get(p) {
        return Ok(hit.clone());
    }
    let (lead, content, primitive) = split_content(p);
    let mut out = Expr::constant(lead.recip());
    for &(a, e) in content.factors() {
        let factor = match a {
            Atom::Inv(id) if e > 0 => inv_poly(id).pow(e as u32),
            Atom::Sqrt(id) if e == 1 => {
                let radicand = sqrt_poly(id);
                &Expr::atom(a) * &inverse_of(&radicand, register)?
            }
            Atom::Inv(_) | Atom::Sqrt(_) => {
                return Err(Error::Precondition(format!("unexpected exponent {e} on relation atom")));
            }
            _ => {
                if e > 0 && !register && !is_nonvanishing_atom(&a) {
                    return Err(Error::Unregistered(super::print::atom_to_string(&a)));
                }
                if e > 0 && register {
                    REGISTRY.write().nonvanishing_atoms.insert(a);
                }
                Expr::term(Monomial::atom(a, -e), Rational::one())
            }
        };
        out = &out * &factor;
    }
    if !primitive.is_one() {
        out = &out * &inverse_primitive(&primitive, register)?;
    }
    let mut reg = REGISTRY.write();
    reg.inverse_cache.insert(p.clone(), out.clone());
    Ok(out)
}

/// `p = lead * content * primitive` with `primitive` free of common atom
/// factors and normalized so its first term has coefficient one.
fn split_content(p: &Expr) -> (Rational, Monomial, Expr) {
    let mut content = Monomial::one();
    for a in p.atoms() {
        let e = p.terms().iter().map(|(m, _)| m.exponent(&a)).min().unwrap_or(0);
        if e != 0 {
            content = content.mul(&Monomial::atom(a, e));
        }
    }
    let divisor = content.inverse();
    let mut acc = Accum::with_capacity(p.len());
    for (m, c) in p.terms() {
        acc.add(m.mul(&divisor), c.clone());
    }
    let shifted = acc.finish();
    let lead = shifted.terms()[0].1.clone();
    (lead.clone(), content, shifted.scale(&lead.recip()))
}

fn inverse_primitive(p: &Expr, register: bool) -> Result<Expr> {
    let atoms = p.atoms();
    let invs: Vec<Atom> = atoms.iter().filter(|a| matches!(a, Atom::Inv(_))).copied().collect();
    if !invs.is_empty() {
        // multiply through by Q^K for every inverse atom inv(Q) of top power K
        let mut cleared = p.clone();
        let mut multiplier = Expr::one();
        for a in invs {
            let Atom::Inv(id) = a else { unreachable!() };
            let q = inv_poly(id);
            let groups = cleared.collect_by(&a);
            let top = groups.iter().map(|(k, _)| *k).max().unwrap_or(0).max(0);
            let mut next = Expr::zero();
            for (k, part) in groups {
                next = &next + &(&part * &q.pow((top - k) as u32));
            }
            cleared = next;
            multiplier = &multiplier * &q.pow(top as u32);
        }
        return Ok(&multiplier * &inverse_of(&cleared, register)?);
    }
    if let Some(s) = atoms.iter().find(|a| matches!(a, Atom::Sqrt(_))).copied() {
        let groups = p.collect_by(&s);
        let mut a = Expr::zero();
        let mut b = Expr::zero();
        for (k, part) in groups {
            match k {
                0 => a = part,
                1 => b = part,
                _ => return Err(Error::Precondition("square-root atom not reduced".into())),
            }
        }
        let conj = &a - &(&b * &Expr::atom(s));
        let norm = p * &conj;
        if norm.is_zero() {
            return Err(Error::DivisionByZero);
        }
        return Ok(&conj * &inverse_of(&norm, register)?);
    }
    if let Some(&id) = REGISTRY.read().inv_index.get(p) {
        return Ok(Expr::atom(Atom::Inv(id)));
    }
    if !register {
        return Err(Error::Unregistered(p.to_string()));
    }
    let deps = Arc::new(p.dependencies());
    let mut reg = REGISTRY.write();
    if let Some(&id) = reg.inv_index.get(p) {
        return Ok(Expr::atom(Atom::Inv(id)));
    }
    let id = reg.inv_polys.len() as u32;
    reg.inv_polys.push(Arc::new(p.clone()));
    reg.inv_deps.push(deps);
    reg.inv_index.insert(p.clone(), id);
    Ok(Expr::atom(Atom::Inv(id)))
}
