//! Lepage equivalents of a Lagrangian: principal component, fundamental
//! form, Carathéodory forms, the Euler–Lagrange form, and the Lepage test.
//!
//! Index sums run over all index values independently; they are evaluated
//! as sums over sorted multi-indices weighted by multiplicity, with
//! symmetrized partials `∂̂`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{
    contact_component, contract, exterior_derivative, horizontalize, omega_forms, wedge_all, Basis, Covector, Form,
    VectorField, Wedge,
};
use crate::kernel::{equals_zero, formal_derivatives, partial, registry, Expr, JetSpace, MultiIndex};
use crate::rational::Rational;

/// A Lagrangian `λ = ℒ ω_0` of order `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lagrangian {
    space: JetSpace,
    order: usize,
    density: Expr,
    nonvanishing: bool,
}

impl Lagrangian {
    pub fn new(space: JetSpace, order: usize, density: Expr) -> Result<Self> {
        if order == 0 {
            return Err(Error::Precondition("a Lagrangian has order at least 1".into()));
        }
        space.require_order(order)?;
        if density.contains_opaque() {
            return Err(Error::OpaqueInLagrangian);
        }
        for a in density.dependencies() {
            space.check_atom(&a)?;
        }
        let found = density.jet_order();
        if found > order {
            return Err(Error::DensityOrder { declared: order, found });
        }
        Ok(Lagrangian { space, order, density, nonvanishing: false })
    }

    /// Declares `ℒ` nonvanishing on the working domain and registers `1/ℒ`.
    pub fn declare_nonvanishing(mut self) -> Result<Self> {
        registry::register_nonvanishing(&self.density)?;
        self.nonvanishing = true;
        Ok(self)
    }

    /// The same Lagrangian on a space with a different order cap.
    pub fn with_order_cap(&self, cap: usize) -> Result<Self> {
        let space = self.space.with_order_cap(cap)?;
        space.require_order(self.order)?;
        Ok(Lagrangian { space, ..self.clone() })
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }

    pub fn is_nonvanishing(&self) -> bool {
        self.nonvanishing
    }

    /// `λ = ℒ ω_0` on order `r`.
    pub fn form(&self) -> Result<Form> {
        let (w0, _) = omega_forms(self.space)?;
        w0.scale(&self.density).promoted(self.order)
    }

    fn require_nonvanishing(&self) -> Result<()> {
        if self.nonvanishing {
            Ok(())
        } else {
            Err(Error::NotNonvanishing)
        }
    }

    fn require_first_order(&self) -> Result<()> {
        if self.order == 1 {
            Ok(())
        } else {
            Err(Error::WrongOrder { expected: "1".into(), found: self.order })
        }
    }

    /// `(1/ℒ)^{n-1}`.
    fn prefactor(&self) -> Result<Expr> {
        Ok(registry::inverse(&self.density)?.pow(self.space.n as u32 - 1))
    }
}

/// Symmetrized partials `∂̂ℒ/∂y^σ_K`, memoized by sorted `K`.
struct Partials<'a> {
    density: &'a Expr,
    cache: BTreeMap<(u16, MultiIndex), Expr>,
}

impl<'a> Partials<'a> {
    fn new(density: &'a Expr) -> Self {
        Partials { density, cache: BTreeMap::new() }
    }

    fn get(&mut self, sigma: u16, k: MultiIndex) -> Expr {
        self.cache.entry((sigma, k)).or_insert_with(|| partial(self.density, sigma, k.entries())).clone()
    }
}

/// `Σ_{l=0}^{depth} (-1)^l d_{p_1}…d_{p_l} ∂̂ℒ/∂y^σ_{K p_1…p_l}` with the
/// `p` summed over all index values.
fn alternating_tail(partials: &mut Partials<'_>, space: &JetSpace, sigma: u16, k: MultiIndex, depth: usize) -> Vec<(MultiIndex, Expr, i64)> {
    let mut jobs = Vec::new();
    for l in 0..=depth {
        for p in MultiIndex::all_of_order(space.n, l) {
            let target = k.union(&p);
            let d = partials.get(sigma, target);
            if d.is_zero() {
                continue;
            }
            let sign = if l % 2 == 0 { 1 } else { -1 };
            jobs.push((p, d, sign * p.multiplicity() as i64));
        }
    }
    jobs
}

fn evaluate_tail(jobs: Vec<(MultiIndex, Expr, i64)>, space: &JetSpace) -> Result<Expr> {
    let parts: Vec<Expr> = jobs
        .into_par_iter()
        .map(|(p, d, w)| Ok(formal_derivatives(&d, p.entries(), space)?.scale(&Rational::from_int(w))))
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().sum())
}

/// `ω_i` as a list of base covectors with its sign.
fn omega_i(n: u8, i: u8) -> (Vec<Covector>, i64) {
    let factors = (1..=n).filter(|&k| k != i).map(Covector::Dx).collect();
    (factors, if i % 2 == 1 { 1 } else { -1 })
}

/// The principal component `Θ_λ`, on order `2r - 1`, in the coordinate basis.
pub fn principal_component(lagrangian: &Lagrangian) -> Result<Form> {
    let space = lagrangian.space;
    let r = lagrangian.order;
    let top = 2 * r - 1;
    space.require_order(top)?;
    let n = space.n;
    let mut partials = Partials::new(&lagrangian.density);
    let mut jobs = Vec::new();
    for sigma in 1..=space.m {
        for k in 0..r {
            for j in MultiIndex::all_of_order(n, k) {
                for i in 1..=n {
                    let tail = alternating_tail(&mut partials, &space, sigma, j.with(i), r - 1 - k);
                    if !tail.is_empty() {
                        jobs.push((sigma, j, i, tail));
                    }
                }
            }
        }
    }
    let terms: Vec<(Wedge, Expr)> = jobs
        .into_par_iter()
        .map(|(sigma, j, i, tail)| {
            let c = evaluate_tail(tail, &space)?;
            let (mut factors, sign) = omega_i(n, i);
            factors.insert(0, Covector::W(sigma, j));
            let (w, s) = Wedge::from_factors(&factors).expect("distinct covectors");
            Ok((w, c.scale(&Rational::from_int(sign * s as i64 * j.multiplicity() as i64))))
        })
        .collect::<Result<_>>()?;
    let mut all = vec![(base_wedge(n), lagrangian.density.clone())];
    all.extend(terms);
    Form::from_terms(space, n as usize, top, Basis::Contact, all)?.to_coordinate()
}

fn base_wedge(n: u8) -> Wedge {
    let all: Vec<Covector> = (1..=n).map(Covector::Dx).collect();
    Wedge::from_factors(&all).expect("distinct base covectors").0
}

/// The fundamental Lepage form `Z_λ` of a first-order Lagrangian.
pub fn fundamental_form(lagrangian: &Lagrangian) -> Result<Form> {
    lagrangian.require_first_order()?;
    let space = lagrangian.space;
    let n = space.n as usize;
    let m = space.m;
    let perms = permutations(n);
    let mut terms = vec![(base_wedge(space.n), lagrangian.density.clone())];
    // derivatives by ordered (σ, j) lists, shared between permutations
    let mut derivs: BTreeMap<Vec<(u16, u8)>, Expr> = BTreeMap::new();
    derivs.insert(Vec::new(), lagrangian.density.clone());
    for k in 1..=n {
        let weight = Rational::new(1, (factorial(n - k) * factorial(k) * factorial(k)) as i64);
        for sigmas in tuples(m as usize, k) {
            for (perm, eps) in &perms {
                let key: Vec<(u16, u8)> = sigmas.iter().zip(perm).map(|(&s, &j)| (s as u16, j)).collect();
                let d = derivative_chain(&mut derivs, &key);
                if d.is_zero() {
                    continue;
                }
                let mut factors: Vec<Covector> = key.iter().map(|&(s, _)| Covector::W(s, MultiIndex::empty())).collect();
                factors.extend(perm[k..].iter().map(|&i| Covector::Dx(i)));
                if let Some((w, s)) = Wedge::from_factors(&factors) {
                    terms.push((w, d.scale(&(&weight * &Rational::from_int((eps * s as i64) as i64)))));
                }
            }
        }
    }
    Form::from_terms(space, n, 1, Basis::Contact, terms)?.to_coordinate()
}

fn derivative_chain(cache: &mut BTreeMap<Vec<(u16, u8)>, Expr>, key: &[(u16, u8)]) -> Expr {
    if let Some(e) = cache.get(key) {
        return e.clone();
    }
    let parent = derivative_chain(cache, &key[..key.len() - 1]);
    let (s, j) = key[key.len() - 1];
    let e = partial(&parent, s, &[j]);
    cache.insert(key.to_vec(), e.clone());
    e
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// All permutations of `1..=n` with their signs.
fn permutations(n: usize) -> Vec<(Vec<u8>, i64)> {
    fn rec(prefix: &mut Vec<u8>, rest: &mut Vec<u8>, sign: i64, out: &mut Vec<(Vec<u8>, i64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for pos in 0..rest.len() {
            let v = rest.remove(pos);
            prefix.push(v);
            // moving the element at `pos` to the front takes `pos` transpositions
            rec(prefix, rest, if pos % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            rest.insert(pos, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (1..=n as u8).collect(), 1, &mut out);
    out
}

/// All `k`-tuples over `1..=m`.
fn tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|t| (1..=m).map(move |v| [t.clone(), vec![v]].concat())).collect();
    }
    out
}

/// A decomposable form `prefactor · φ_1 ∧ … ∧ φ_n`, kept factored.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposable {
    pub prefactor: Expr,
    pub factors: Vec<Form>,
}

impl Decomposable {
    /// The expanded form in the coordinate basis.
    pub fn expand(&self) -> Result<Form> {
        let space = *self.factors.first().ok_or_else(|| Error::Precondition("no factors".into()))?.space();
        let coords: Vec<Form> = self.factors.iter().map(Form::to_coordinate).collect::<Result<_>>()?;
        Ok(wedge_all(space, &coords)?.scale(&self.prefactor))
    }

    /// Factor-by-factor equality with the same prefactor; implies equality
    /// of the expanded forms.
    pub fn factorwise_equals(&self, other: &Decomposable) -> Result<bool> {
        if self.factors.len() != other.factors.len() || !equals_zero(&(&self.prefactor - &other.prefactor)) {
            return Ok(false);
        }
        for (a, b) in self.factors.iter().zip(&other.factors) {
            if !a.equals(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The first-order Carathéodory form.
pub fn caratheodory_first(lagrangian: &Lagrangian) -> Result<Decomposable> {
    lagrangian.require_first_order()?;
    caratheodory_closed(lagrangian)
}

/// The Carathéodory form of an order-`r` Lagrangian from its closed
/// expression; factor `j` is
/// `ℒ dx^j + Σ_s Σ_k (-1)^k d_{p_1}…d_{p_k} ∂̂ℒ/∂y^σ_{i_1…i_s p_1…p_k j} ω^σ_{i_1…i_s}`.
pub fn caratheodory_closed(lagrangian: &Lagrangian) -> Result<Decomposable> {
    lagrangian.require_nonvanishing()?;
    let space = lagrangian.space;
    let r = lagrangian.order;
    let top = 2 * r - 1;
    space.require_order(top)?;
    let n = space.n;
    let mut partials = Partials::new(&lagrangian.density);
    let mut jobs = Vec::new();
    for j in 1..=n {
        for sigma in 1..=space.m {
            for s in 0..r {
                for i in MultiIndex::all_of_order(n, s) {
                    let tail = alternating_tail(&mut partials, &space, sigma, i.with(j), r - 1 - s);
                    if !tail.is_empty() {
                        jobs.push((j, sigma, i, tail));
                    }
                }
            }
        }
    }
    let coeffs: Vec<(u8, Wedge, Expr)> = jobs
        .into_par_iter()
        .map(|(j, sigma, i, tail)| {
            let c = evaluate_tail(tail, &space)?;
            Ok((j, Wedge::single(Covector::W(sigma, i)), c.scale(&Rational::from_int(i.multiplicity() as i64))))
        })
        .collect::<Result<_>>()?;
    let mut factors = Vec::with_capacity(n as usize);
    for j in 1..=n {
        let mut terms = vec![(Wedge::single(Covector::Dx(j)), lagrangian.density.clone())];
        terms.extend(coeffs.iter().filter(|(jj, _, _)| *jj == j).map(|(_, w, c)| (w.clone(), c.clone())));
        factors.push(Form::from_terms(space, 1, top, Basis::Contact, terms)?);
    }
    Ok(Decomposable { prefactor: lagrangian.prefactor()?, factors })
}

/// The Carathéodory form built from `Θ_λ` by contractions with the formal
/// derivative fields: factor `j` is `(-1)^{n-j} i_{d_n}…î_{d_j}…i_{d_1} Θ_λ`.
pub fn caratheodory_contraction(lagrangian: &Lagrangian) -> Result<Decomposable> {
    lagrangian.require_nonvanishing()?;
    let space = lagrangian.space;
    let top = 2 * lagrangian.order - 1;
    space.require_order(top + 1)?;
    let theta = principal_component(lagrangian)?;
    let n = space.n;
    let fields: Vec<VectorField> = (1..=n).map(|i| VectorField::formal(space, i, top)).collect::<Result<_>>()?;
    let factors: Vec<Form> = (1..=n)
        .into_par_iter()
        .map(|j| {
            let mut f = theta.clone();
            for i in 1..=n {
                if i != j {
                    f = contract(&fields[i as usize - 1], &f)?;
                }
            }
            Ok(if (n - j) % 2 == 0 { f } else { f.neg() })
        })
        .collect::<Result<_>>()?;
    Ok(Decomposable { prefactor: lagrangian.prefactor()?, factors })
}

/// The Euler–Lagrange form `E_λ = p_1 dΘ_λ`, in the contact basis on order `2r`.
pub fn euler_lagrange(lagrangian: &Lagrangian) -> Result<Form> {
    lagrangian.space.require_order(2 * lagrangian.order)?;
    let theta = principal_component(lagrangian)?;
    contact_component(&exterior_derivative(&theta)?, 1)
}

/// Classical Euler–Lagrange expressions
/// `E_σ = Σ_l (-1)^l d_{p_1}…d_{p_l} ∂̂ℒ/∂y^σ_{p_1…p_l}`, one per field.
pub fn euler_lagrange_expressions(lagrangian: &Lagrangian) -> Result<Vec<Expr>> {
    let space = lagrangian.space;
    space.require_order(2 * lagrangian.order)?;
    let mut partials = Partials::new(&lagrangian.density);
    (1..=space.m)
        .map(|sigma| {
            let tail = alternating_tail(&mut partials, &space, sigma, MultiIndex::empty(), lagrangian.order);
            evaluate_tail(tail, &space)
        })
        .collect()
}

/// `Σ_σ E_σ ω^σ ∧ ω_0` from the classical expressions.
pub fn euler_lagrange_classical(lagrangian: &Lagrangian) -> Result<Form> {
    let space = lagrangian.space;
    let exprs = euler_lagrange_expressions(lagrangian)?;
    let mut terms = Vec::new();
    for (k, e) in exprs.into_iter().enumerate() {
        let mut factors = vec![Covector::W(k as u16 + 1, MultiIndex::empty())];
        factors.extend((1..=space.n).map(Covector::Dx));
        let (w, _) = Wedge::from_factors(&factors).expect("distinct covectors");
        terms.push((w, e));
    }
    Form::from_terms(space, space.n as usize + 1, 2 * lagrangian.order, Basis::Contact, terms)
}

/// A Lagrangian is trivial when all its Euler–Lagrange expressions vanish.
pub fn is_trivial(lagrangian: &Lagrangian) -> Result<bool> {
    Ok(euler_lagrange_expressions(lagrangian)?.iter().all(equals_zero))
}

/// Outcome of the Lepage test for a candidate `n`-form.
#[derive(Clone, Debug, PartialEq)]
pub struct LepageReport {
    /// `h ρ = λ`.
    pub equivalent_ok: bool,
    /// `h i_ξ dρ = 0` for an arbitrary vertical `ξ`.
    pub lepage_ok: bool,
    /// The computed `h i_ξ dρ`.
    pub residual: Form,
}

/// Checks that `ρ` is a Lepage equivalent of `λ`. The vertical field has
/// opaque components `xi<σ>_<J>`, so vanishing holds for every such field.
pub fn check_lepage(rho: &Form, lagrangian: &Lagrangian) -> Result<LepageReport> {
    let space = lagrangian.space;
    if rho.degree() != space.n as usize {
        return Err(Error::DegreeMismatch(rho.degree(), space.n as usize));
    }
    let h = horizontalize(rho)?;
    let equivalent_ok = h.sub(&lagrangian.form()?)?.is_zero();
    let xi = VectorField::vertical_opaque(space, rho.order(), "xi")?;
    let residual = horizontalize(&contract(&xi, &exterior_derivative(rho)?)?)?;
    let lepage_ok = residual.is_zero();
    Ok(LepageReport { equivalent_ok, lepage_ok, residual })
}
