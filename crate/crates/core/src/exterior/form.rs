use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::covector::{Covector, Wedge};
use crate::error::{Error, Result};
use crate::kernel::expr::Accum;
use crate::kernel::{equals_zero, Atom, Expr, JetSpace, Monomial, MultiIndex};
use crate::rational::Rational;

/// Which basis a form's covectors are expressed in.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub enum Basis {
    /// `{dx^i, dy^σ_J}`; exterior derivatives are taken here.
    #[default]
    Coordinate,
    /// `{dx^i, ω^σ_J}`.
    Contact,
}

/// An exterior form of fixed degree on the jet space of a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    space: JetSpace,
    degree: usize,
    order: usize,
    basis: Basis,
    terms: BTreeMap<Wedge, Expr>,
}

/// Image of a covector under a substitution, as a linear combination.
pub(crate) type CovectorImage = Vec<(Covector, Expr)>;

impl Form {
    pub fn zero(space: JetSpace, degree: usize, order: usize) -> Result<Form> {
        space.require_order(order)?;
        Ok(Form { space, degree, order, basis: Basis::Coordinate, terms: BTreeMap::new() })
    }

    /// A function viewed as a 0-form.
    pub fn scalar(space: JetSpace, order: usize, f: Expr) -> Result<Form> {
        Form::from_terms(space, 0, order, Basis::Coordinate, [(Wedge::one(), f)])
    }

    pub fn dx(space: JetSpace, i: u8) -> Result<Form> {
        Form::from_terms(space, 1, 0, Basis::Coordinate, [(Wedge::single(Covector::Dx(i)), Expr::one())])
    }

    pub fn dy(space: JetSpace, sigma: u16, j: &[u8]) -> Result<Form> {
        let c = Covector::dy(sigma, j);
        Form::from_terms(space, 1, j.len(), Basis::Coordinate, [(Wedge::single(c), Expr::one())])
    }

    /// The contact form `ω^σ_J`, kept in the contact basis.
    pub fn contact(space: JetSpace, sigma: u16, j: &[u8]) -> Result<Form> {
        let c = Covector::w(sigma, j);
        Form::from_terms(space, 1, j.len() + 1, Basis::Contact, [(Wedge::single(c), Expr::one())])
    }

    /// Builds a form, checking degrees, index ranges and jet orders.
    pub fn from_terms<I>(space: JetSpace, degree: usize, order: usize, basis: Basis, terms: I) -> Result<Form>
    where
        I: IntoIterator<Item = (Wedge, Expr)>,
    {
        space.require_order(order)?;
        let mut out: BTreeMap<Wedge, Accum> = BTreeMap::new();
        for (w, c) in terms {
            if w.degree() != degree {
                return Err(Error::DegreeMismatch(w.degree(), degree));
            }
            for cv in w.factors() {
                check_covector(&space, order, basis, cv)?;
            }
            for a in c.dependencies() {
                space.check_atom(&a)?;
                if a.jet_order() > order {
                    return Err(Error::WrongOrder { expected: format!("coefficient order <= {order}"), found: a.jet_order() });
                }
            }
            out.entry(w).or_default().add_scaled(&c, &Monomial::one(), &Rational::one());
        }
        Ok(Form::assemble(space, degree, order, basis, out))
    }

    pub(crate) fn assemble(space: JetSpace, degree: usize, order: usize, basis: Basis, acc: BTreeMap<Wedge, Accum>) -> Form {
        let terms = acc.into_iter().map(|(w, a)| (w, a.finish())).filter(|(_, e)| !e.is_zero()).collect();
        Form { space, degree, order, basis, terms }
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Jet order of the space the form lives on.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Wedge, &Expr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Wedge) -> Expr {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    /// Coefficient of the monomial with the given (unsorted) factors, with
    /// the sign of the sorting permutation applied.
    pub fn coefficient_of(&self, factors: &[Covector]) -> Expr {
        match Wedge::from_factors(factors) {
            Some((w, s)) => self.coefficient(&w).scale(&Rational::from_int(s as i64)),
            None => Expr::zero(),
        }
    }

    /// Every coefficient vanishes on the declared domain.
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(equals_zero)
    }

    /// The same form regarded on a higher jet order.
    pub fn promoted(&self, order: usize) -> Result<Form> {
        self.space.require_order(order)?;
        let mut out = self.clone();
        out.order = out.order.max(order);
        Ok(out)
    }

    pub fn scale(&self, f: &Expr) -> Form {
        let terms = self.terms.iter().map(|(w, c)| (w.clone(), c * f)).filter(|(_, c)| !c.is_zero()).collect();
        let order = self.order.max(f.jet_order());
        Form { terms, order, ..self.clone_empty() }
    }

    fn clone_empty(&self) -> Form {
        Form { space: self.space, degree: self.degree, order: self.order, basis: self.basis, terms: BTreeMap::new() }
    }

    pub fn neg(&self) -> Form {
        Form { terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(), ..self.clone_empty() }
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.combine(other, true)
    }

    fn combine(&self, other: &Form, negate: bool) -> Result<Form> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        if self.basis != other.basis {
            return self.to_coordinate()?.combine(&other.to_coordinate()?, negate);
        }
        let mut terms = self.terms.clone();
        for (w, c) in &other.terms {
            let entry = terms.entry(w.clone()).or_default();
            *entry = if negate { &*entry - c } else { &*entry + c };
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(Form { terms, order: self.order.max(other.order), ..self.clone_empty() })
    }

    /// Coefficient-wise equality after conversion to the coordinate basis.
    pub fn equals(&self, other: &Form) -> Result<bool> {
        Ok(self.sub(other)?.to_coordinate()?.is_zero())
    }

    /// Re-expresses the form in the coordinate basis (same order).
    pub fn to_coordinate(&self) -> Result<Form> {
        if self.basis == Basis::Coordinate {
            return Ok(self.clone());
        }
        let n = self.space.n;
        self.expand(&|c| Ok(c.clone()), &mut |cv| {
            Ok(match *cv {
                Covector::W(s, j) => {
                    let mut v = vec![(Covector::Dy(s, j), Expr::one())];
                    for k in 1..=n {
                        v.push((Covector::Dx(k), -Expr::atom(Atom::Y(s, j.with(k)))));
                    }
                    v
                }
                other => vec![(other, Expr::one())],
            })
        }, Basis::Coordinate, self.order, None)
    }

    /// Re-expresses the form in the contact basis; the result lives one
    /// order higher, where every `dy^σ_J` has its contact counterpart.
    pub fn to_contact(&self) -> Result<Form> {
        self.contact_view(None)
    }

    /// Contact view restricted to monomials with exactly `k` contact factors
    /// when `k` is given.
    pub(crate) fn contact_view(&self, k: Option<usize>) -> Result<Form> {
        self.space.require_order(self.order + 1)?;
        if self.basis == Basis::Contact {
            let mut out = self.clone();
            out.order += 1;
            if let Some(k) = k {
                out.terms.retain(|w, _| w.contact_count() == k);
            }
            return Ok(out);
        }
        let n = self.space.n;
        self.expand(&|c| Ok(c.clone()), &mut |cv| {
            Ok(match *cv {
                Covector::Dy(s, j) => {
                    let mut v = vec![(Covector::W(s, j), Expr::one())];
                    for i in 1..=n {
                        v.push((Covector::Dx(i), Expr::atom(Atom::Y(s, j.with(i)))));
                    }
                    v
                }
                other => vec![(other, Expr::one())],
            })
        }, Basis::Contact, self.order + 1, k)
    }

    /// Replaces every covector by a linear combination and every coefficient
    /// by `coef(c)`, expanding wedge products with signs.
    ///
    /// With `contact = Some(k)` only monomials with exactly `k` contact
    /// factors are produced.
    pub(crate) fn expand(
        &self,
        coef: &dyn Fn(&Expr) -> Result<Expr>,
        image: &mut dyn FnMut(&Covector) -> Result<CovectorImage>,
        basis: Basis,
        order: usize,
        contact: Option<usize>,
    ) -> Result<Form> {
        let mut cache: FxHashMap<Covector, CovectorImage> = FxHashMap::default();
        let mut out: BTreeMap<Wedge, Accum> = BTreeMap::new();
        for (w, c) in &self.terms {
            let mut lists: Vec<&CovectorImage> = Vec::with_capacity(w.degree());
            for cv in w.factors() {
                if !cache.contains_key(cv) {
                    let img = image(cv)?;
                    cache.insert(*cv, img);
                }
            }
            for cv in w.factors() {
                lists.push(&cache[cv]);
            }
            let mut local: BTreeMap<Wedge, Expr> = BTreeMap::new();
            let mut chosen: SmallVec<[Covector; 8]> = SmallVec::new();
            expand_rec(&lists, 0, &mut chosen, Expr::one(), 0, contact, &mut local);
            if local.is_empty() {
                continue;
            }
            let c2 = coef(c)?;
            if c2.is_zero() {
                continue;
            }
            for (wedge, e) in local {
                let prod = &e * &c2;
                out.entry(wedge).or_default().add_scaled(&prod, &Monomial::one(), &Rational::one());
            }
        }
        Ok(Form::assemble(self.space, self.degree, order, basis, out))
    }

    /// Rendering with one coefficient per monomial, horizontal monomials first.
    pub fn display_terms(&self) -> Vec<(&Wedge, &Expr)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_key(|(w, _)| (w.factors().iter().filter(|c| !matches!(c, Covector::Dx(_))).count(), (*w).clone()));
        v
    }
}

fn expand_rec(
    lists: &[&CovectorImage],
    idx: usize,
    chosen: &mut SmallVec<[Covector; 8]>,
    acc: Expr,
    contacts: usize,
    target: Option<usize>,
    out: &mut BTreeMap<Wedge, Expr>,
) {
    if idx == lists.len() {
        if target.is_some_and(|k| k != contacts) {
            return;
        }
        if let Some((w, s)) = Wedge::from_factors(chosen) {
            let e = if s < 0 { -&acc } else { acc };
            let entry = out.entry(w).or_default();
            *entry = &*entry + &e;
        }
        return;
    }
    let remaining = lists.len() - idx;
    for (cv, e) in lists[idx] {
        if chosen.contains(cv) {
            continue;
        }
        let c = contacts + cv.is_contact() as usize;
        if let Some(k) = target {
            if c > k || c + remaining - 1 < k {
                continue;
            }
        }
        chosen.push(*cv);
        expand_rec(lists, idx + 1, chosen, &acc * e, c, target, out);
        chosen.pop();
    }
}

fn check_covector(space: &JetSpace, order: usize, basis: Basis, cv: &Covector) -> Result<()> {
    let check_j = |s: u16, j: &MultiIndex, max: usize| -> Result<()> {
        space.check_atom(&Atom::Y(s, *j))?;
        if j.order() > max {
            return Err(Error::WrongOrder { expected: format!("covector order <= {max}"), found: j.order() });
        }
        Ok(())
    };
    match (cv, basis) {
        (Covector::Dx(i), _) => space.check_atom(&Atom::X(*i)),
        (Covector::Dy(s, j), Basis::Coordinate) => check_j(*s, j, order),
        (Covector::W(s, j), Basis::Contact) => {
            if order == 0 {
                return Err(Error::WrongOrder { expected: "order >= 1 for contact forms".into(), found: 0 });
            }
            check_j(*s, j, order - 1)
        }
        _ => Err(Error::Precondition(format!("covector {cv} does not belong to the {basis:?} basis"))),
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (w, c)) in self.display_terms().into_iter().enumerate() {
            let (neg, body) = match c.terms() {
                [(_, r)] if r.is_negative() => (true, -c),
                _ => (false, c.clone()),
            };
            if k > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            let text = if body.len() > 1 { format!("({body})") } else { body.to_string() };
            match (w.degree(), body.is_one()) {
                (0, _) => write!(f, "{text}")?,
                (_, true) => write!(f, "{w}")?,
                _ => write!(f, "{text}*{w}")?,
            }
        }
        Ok(())
    }
}
