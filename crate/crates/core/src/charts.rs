//! Fibered chart changes, their jet prolongations, and chart-invariance
//! checks for the principal component and the Carathéodory form.
//!
//! Barred and unbarred charts share the same atom names: a form "in the
//! barred chart" is an ordinary form read in barred coordinates, and its
//! pullback substitutes every barred coordinate by its expression in the
//! unbarred ones. No inverse map is ever needed.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{pullback_by, Form};
use crate::kernel::matrix::{self, Matrix};
use crate::kernel::{equals_zero, formal_derivative, partial, partial_atom, substitute, Atom, Expr, JetSpace, MultiIndex};
use crate::lepage::{caratheodory_closed, principal_component, Lagrangian};

/// A fibered chart change `x̄^k = x̄^k(x)`, `ȳ^σ = ȳ^σ(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartTransform {
    space: JetSpace,
    base_map: Vec<Expr>,
    fiber_map: Vec<Expr>,
    /// `[k][s] = ∂x̄^k/∂x^s`.
    jacobian: Matrix,
    det: Expr,
    /// `[s][k] = ∂x^s/∂x̄^k`.
    inv_jacobian: Matrix,
    /// `[σ][ν] = ∂ȳ^σ/∂y^ν`.
    fiber_jacobian: Matrix,
    /// `[τ][σ] = ∂y^τ/∂ȳ^σ`.
    fiber_inverse: Matrix,
}

impl ChartTransform {
    /// Builds the transform, registering both Jacobian determinants as
    /// nonvanishing and checking the inverses symbolically.
    pub fn new(space: JetSpace, base_map: Vec<Expr>, fiber_map: Vec<Expr>) -> Result<Self> {
        let (n, m) = (space.n as usize, space.m as usize);
        if base_map.len() != n || fiber_map.len() != m {
            return Err(Error::Precondition(format!(
                "transform needs {n} base and {m} fiber components, got {} and {}",
                base_map.len(),
                fiber_map.len()
            )));
        }
        for e in &base_map {
            if e.dependencies().iter().any(|a| !matches!(a, Atom::X(_))) {
                return Err(Error::Precondition(format!("base map `{e}` may depend on base coordinates only")));
            }
        }
        for e in &fiber_map {
            if e.dependencies().iter().any(|a| !matches!(a, Atom::X(_)) && a.jet_order() > 0 || matches!(a, Atom::Opaque(_))) {
                return Err(Error::Precondition(format!("fiber map `{e}` may depend on x and y only")));
            }
        }
        for e in base_map.iter().chain(&fiber_map) {
            for a in e.dependencies() {
                space.check_atom(&a)?;
            }
        }
        let jacobian: Matrix = base_map.iter().map(|e| (1..=space.n).map(|s| partial_atom(e, &Atom::X(s))).collect()).collect();
        let (det, inv_jacobian) = matrix::inverse(&jacobian)?;
        let fiber_jacobian: Matrix =
            fiber_map.iter().map(|e| (1..=space.m).map(|nu| partial_atom(e, &Atom::Y(nu, MultiIndex::empty()))).collect()).collect();
        let (_, fiber_inverse) = matrix::inverse(&fiber_jacobian)?;
        if !matrix::is_identity(&matrix::product(&jacobian, &inv_jacobian))
            || !matrix::is_identity(&matrix::product(&fiber_jacobian, &fiber_inverse))
        {
            return Err(Error::SingularJacobian);
        }
        Ok(ChartTransform { space, base_map, fiber_map, jacobian, det, inv_jacobian, fiber_jacobian, fiber_inverse })
    }

    pub fn identity(space: JetSpace) -> Result<Self> {
        let base = (1..=space.n).map(Expr::x).collect();
        let fiber = (1..=space.m).map(|s| Expr::y(s, &[])).collect();
        ChartTransform::new(space, base, fiber)
    }

    /// `outer ∘ inner`: first `inner`, then `outer`.
    pub fn compose(outer: &ChartTransform, inner: &ChartTransform) -> Result<Self> {
        if outer.space != inner.space {
            return Err(Error::SpaceMismatch);
        }
        let map = |a: &Atom| match *a {
            Atom::X(k) => Some(inner.base_map[k as usize - 1].clone()),
            Atom::Y(s, j) if j.is_empty() => Some(inner.fiber_map[s as usize - 1].clone()),
            _ => None,
        };
        let base = outer.base_map.iter().map(|e| substitute(e, &map)).collect::<Result<_>>()?;
        let fiber = outer.fiber_map.iter().map(|e| substitute(e, &map)).collect::<Result<_>>()?;
        ChartTransform::new(outer.space, base, fiber)
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn base_map(&self) -> &[Expr] {
        &self.base_map
    }

    pub fn fiber_map(&self) -> &[Expr] {
        &self.fiber_map
    }

    pub fn jacobian(&self) -> &Matrix {
        &self.jacobian
    }

    /// `det(∂x̄/∂x)`.
    pub fn det(&self) -> &Expr {
        &self.det
    }

    pub fn inv_jacobian(&self) -> &Matrix {
        &self.inv_jacobian
    }

    pub fn fiber_jacobian(&self) -> &Matrix {
        &self.fiber_jacobian
    }

    pub fn fiber_inverse(&self) -> &Matrix {
        &self.fiber_inverse
    }

    /// `∂²x̄^p/∂x^a∂x^b`.
    pub fn hessian(&self, p: usize, a: u8, b: u8) -> Expr {
        partial_atom(&self.jacobian[p - 1][a as usize - 1], &Atom::X(b))
    }

    /// True when every second derivative of the base map vanishes.
    pub fn is_base_linear(&self) -> bool {
        (1..=self.space.n as usize).all(|p| (1..=self.space.n).all(|a| (1..=self.space.n).all(|b| self.hessian(p, a, b).is_zero())))
    }
}

/// A chart change together with its jet maps `ȳ^σ_J` up to a given order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedTransform {
    transform: ChartTransform,
    order: usize,
    jets: BTreeMap<(u16, MultiIndex), Expr>,
}

/// Prolongs `t` to order `s` by `ȳ^σ_{Jk} = (∂x^q/∂x̄^k) d_q ȳ^σ_J`.
///
/// Each sorted multi-index is reached from the one with its last entry
/// removed; [`ProlongedTransform::recursion_holds`] re-derives every map from
/// all other splittings.
pub fn prolong(t: &ChartTransform, s: usize) -> Result<ProlongedTransform> {
    let space = t.space;
    space.require_order(s)?;
    let mut jets = BTreeMap::new();
    for sigma in 1..=space.m {
        jets.insert((sigma, MultiIndex::empty()), t.fiber_map[sigma as usize - 1].clone());
    }
    for k in 1..=s {
        let targets: Vec<(u16, MultiIndex)> =
            (1..=space.m).flat_map(|sigma| MultiIndex::all_of_order(space.n, k).into_iter().map(move |j| (sigma, j))).collect();
        let computed: Vec<((u16, MultiIndex), Expr)> = targets
            .into_par_iter()
            .map(|(sigma, j)| {
                let last = *j.entries().last().expect("nonempty");
                let parent = j.without(last).expect("contains last");
                let e = prolong_step(t, &jets[&(sigma, parent)], last)?;
                Ok(((sigma, j), e))
            })
            .collect::<Result<_>>()?;
        jets.extend(computed);
    }
    Ok(ProlongedTransform { transform: t.clone(), order: s, jets })
}

/// `(∂x^q/∂x̄^k) d_q e`.
fn prolong_step(t: &ChartTransform, e: &Expr, k: u8) -> Result<Expr> {
    let mut out = Expr::zero();
    for q in 1..=t.space.n {
        let c = &t.inv_jacobian[q as usize - 1][k as usize - 1];
        if !c.is_zero() {
            out = &out + &(c * &formal_derivative(e, q, &t.space)?);
        }
    }
    Ok(out)
}

impl ProlongedTransform {
    pub fn transform(&self) -> &ChartTransform {
        &self.transform
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `ȳ^σ_J` in unbarred coordinates.
    pub fn jet_map(&self, sigma: u16, j: &[u8]) -> Option<&Expr> {
        self.jets.get(&(sigma, MultiIndex::new(j)))
    }

    fn image(&self, a: &Atom) -> Option<Expr> {
        match *a {
            Atom::X(k) => Some(self.transform.base_map[k as usize - 1].clone()),
            Atom::Y(s, j) => self.jets.get(&(s, j)).cloned(),
            _ => None,
        }
    }

    fn require(&self, needed: usize) -> Result<()> {
        if needed > self.order {
            Err(Error::TransformTooShort { have: self.order, needed })
        } else {
            Ok(())
        }
    }

    /// A barred function expressed in unbarred coordinates.
    pub fn pullback_expr(&self, e: &Expr) -> Result<Expr> {
        self.require(e.jet_order())?;
        substitute(e, &|a| self.image(a))
    }

    /// Pullback of a barred form.
    pub fn pullback(&self, rho: &Form) -> Result<Form> {
        self.require(rho.order())?;
        pullback_by(rho, &|a| self.image(a), rho.order())
    }

    /// The unbarred Lagrangian `ℒ = (ℒ̄ ∘ T) det(∂x̄/∂x)` of a barred one;
    /// nonvanishing declarations carry over.
    pub fn pullback_lagrangian(&self, barred: &Lagrangian) -> Result<Lagrangian> {
        let density = &self.pullback_expr(barred.density())? * &self.transform.det;
        let l = Lagrangian::new(*barred.space(), barred.order(), density)?;
        if barred.is_nonvanishing() {
            l.declare_nonvanishing()
        } else {
            Ok(l)
        }
    }

    /// Re-derives each `ȳ^σ_K`, `|K| >= 2`, from every other way of
    /// splitting off one index and compares.
    pub fn recursion_holds(&self) -> Result<bool> {
        for ((sigma, j), e) in &self.jets {
            let mut seen = Vec::new();
            for &k in j.entries() {
                if seen.contains(&k) {
                    continue;
                }
                seen.push(k);
                let parent = j.without(k).expect("contains k");
                if !equals_zero(&(&prolong_step(&self.transform, &self.jets[&(*sigma, parent)], k)? - e)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Whether `T^* Θ̄ = Θ` for a Lagrangian given in the barred chart.
pub fn check_theta_invariance(barred: &Lagrangian, t: &ChartTransform) -> Result<bool> {
    let top = 2 * barred.order() - 1;
    let p = prolong(t, top)?;
    let unbarred = p.pullback_lagrangian(barred)?;
    let theta_bar = principal_component(barred)?;
    let theta = principal_component(&unbarred)?;
    p.pullback(&theta_bar)?.equals(&theta)
}

/// The third-order invariance condition for one chart change.
///
/// `residuals` are the divergences `d_k F^{ks}_σ`, one per `(σ, s)`, and
/// `holds` says they all vanish. `fluxes` are the undifferentiated
/// `F^{ks}_σ` (antisymmetric in `k, s`, listed for `k < s`); they all vanish
/// exactly when the principal component is invariant, which is stronger
/// than `holds` (`y1_111` under the quadratic shear has `holds` but not
/// invariance).
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionReport {
    pub residuals: Vec<((u16, u8), Expr)>,
    pub holds: bool,
    pub fluxes: Vec<((u16, u8, u8), Expr)>,
    pub strict_holds: bool,
}

/// Evaluates, for an unbarred third-order Lagrangian and a chart change,
/// `F^{ks}_σ = (∂̂ℒ/∂y^τ_{l₁l₂k} ∂x^s/∂x̄^p - ∂̂ℒ/∂y^τ_{l₁l₂s} ∂x^k/∂x̄^p)
///   ∂²x̄^p/∂x^{l₁}∂x^{l₂} ∂y^τ/∂ȳ^σ` summed over `p, τ, l₁, l₂`, and the
/// residuals `d_k F^{ks}_σ`.
pub fn obstruction_3rd(lagrangian: &Lagrangian, t: &ChartTransform) -> Result<ObstructionReport> {
    if lagrangian.order() != 3 {
        return Err(Error::WrongOrder { expected: "3".into(), found: lagrangian.order() });
    }
    let space = *lagrangian.space();
    if space != t.space {
        return Err(Error::SpaceMismatch);
    }
    space.require_order(4)?;
    let n = space.n;
    // Σ_p ∂x^a/∂x̄^p ∂²x̄^p/∂x^{l₁}∂x^{l₂}, indexed by (a, l₁, l₂)
    let mut contracted: BTreeMap<(u8, u8, u8), Expr> = BTreeMap::new();
    for a in 1..=n {
        for l1 in 1..=n {
            for l2 in 1..=n {
                let mut e = Expr::zero();
                for p in 1..=n as usize {
                    let h = t.hessian(p, l1, l2);
                    if !h.is_zero() {
                        e = &e + &(&t.inv_jacobian[a as usize - 1][p - 1] * &h);
                    }
                }
                contracted.insert((a, l1, l2), e);
            }
        }
    }
    let partial3 = |tau: u16, l1: u8, l2: u8, k: u8| partial(lagrangian.density(), tau, &[l1, l2, k]);
    let flux = |sigma: u16, k: u8, s: u8| {
        let mut out = Expr::zero();
        for tau in 1..=space.m {
            let finv = &t.fiber_inverse[tau as usize - 1][sigma as usize - 1];
            if finv.is_zero() {
                continue;
            }
            for l1 in 1..=n {
                for l2 in 1..=n {
                    let a = &partial3(tau, l1, l2, k) * &contracted[&(s, l1, l2)];
                    let b = &partial3(tau, l1, l2, s) * &contracted[&(k, l1, l2)];
                    out = &out + &(&(&a - &b) * finv);
                }
            }
        }
        out
    };
    let keys: Vec<(u16, u8)> = (1..=space.m).flat_map(|sigma| (1..=n).map(move |s| (sigma, s))).collect();
    let rows: Vec<((u16, u8), Expr, Vec<(u8, Expr)>)> = keys
        .into_par_iter()
        .map(|(sigma, s)| {
            let mut total = Expr::zero();
            let mut upper = Vec::new();
            for k in 1..=n {
                let f = flux(sigma, k, s);
                total = &total + &formal_derivative(&f, k, &space)?;
                if k < s {
                    upper.push((k, f));
                }
            }
            Ok(((sigma, s), total, upper))
        })
        .collect::<Result<_>>()?;
    let mut residuals = Vec::new();
    let mut fluxes = Vec::new();
    for ((sigma, s), total, upper) in rows {
        residuals.push(((sigma, s), total));
        fluxes.extend(upper.into_iter().map(|(k, f)| ((sigma, k, s), f)));
    }
    fluxes.sort_by_key(|(key, _)| *key);
    let holds = residuals.iter().all(|(_, e)| equals_zero(e));
    let strict_holds = fluxes.iter().all(|(_, e)| equals_zero(e));
    Ok(ObstructionReport { residuals, holds, fluxes, strict_holds })
}

/// Whether `T^* Λ̄ = Λ` for a nonvanishing Lagrangian given in the barred
/// chart. For order 3 the obstruction must hold for the unbarred Lagrangian.
pub fn check_caratheodory_invariance(barred: &Lagrangian, t: &ChartTransform) -> Result<bool> {
    if !barred.is_nonvanishing() {
        return Err(Error::NotNonvanishing);
    }
    let top = 2 * barred.order() - 1;
    let p = prolong(t, top)?;
    let unbarred = p.pullback_lagrangian(barred)?;
    if barred.order() == 3 && !obstruction_3rd(&unbarred, t)?.holds {
        return Err(Error::ObstructionViolated);
    }
    let bar = caratheodory_closed(barred)?.expand()?;
    let here = caratheodory_closed(&unbarred)?.expand()?;
    p.pullback(&bar)?.equals(&here)
}

/// Runs the principal-component invariance check over a family of
/// transforms, one result per transform.
pub fn theta_invariance_suite(barred: &Lagrangian, family: &[ChartTransform]) -> Result<Vec<bool>> {
    family.iter().map(|t| check_theta_invariance(barred, t)).collect()
}

/// A fixed family of test transforms on `space`: the identity, a linear
/// base change with a fiber rescaling, the quadratic shear
/// `x̄^n = x^n + (x^1)^2/2`, and an affine fiber change depending on `x`.
pub fn standard_family(space: JetSpace) -> Result<Vec<ChartTransform>> {
    let n = space.n;
    let xs: Vec<Expr> = (1..=n).map(Expr::x).collect();
    let ys: Vec<Expr> = (1..=space.m).map(|s| Expr::y(s, &[])).collect();
    let mut out = vec![ChartTransform::identity(space)?];

    let mut linear = xs.clone();
    linear[0] = xs[0].scale(&crate::Rational::from_int(2));
    if n > 1 {
        linear[n as usize - 1] = &xs[n as usize - 1] + &xs[0];
    }
    let scaled: Vec<Expr> = ys.iter().map(|y| y.scale(&crate::Rational::from_int(3))).collect();
    out.push(ChartTransform::new(space, linear, scaled)?);

    if n > 1 {
        out.push(shear(space)?);
    }

    let fiber: Vec<Expr> = ys.iter().map(|y| &(y + &xs[0]) + &Expr::x(n).pow(2)).collect();
    out.push(ChartTransform::new(space, xs, fiber)?);
    Ok(out)
}

/// `x̄^n = x^n + (x^1)^2/2`, other coordinates unchanged.
pub fn shear(space: JetSpace) -> Result<ChartTransform> {
    let n = space.n;
    let mut base: Vec<Expr> = (1..=n).map(Expr::x).collect();
    base[n as usize - 1] = &Expr::x(n) + &Expr::x(1).pow(2).scale(&crate::Rational::new(1, 2));
    let fiber = (1..=space.m).map(|s| Expr::y(s, &[])).collect();
    ChartTransform::new(space, base, fiber)
}
