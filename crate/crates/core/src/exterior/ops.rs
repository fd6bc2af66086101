use std::collections::BTreeMap;

use super::covector::{Covector, Wedge};
use super::field::{Direction, VectorField};
use super::form::{Basis, CovectorImage, Form};
use crate::error::{Error, Result};
use crate::kernel::expr::Accum;
use crate::kernel::{partial_atom, registry, substitute, Atom, Expr, JetSpace, Monomial};
use crate::rational::Rational;

/// `a ∧ b`.
pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch);
    }
    if a.basis() != b.basis() {
        return wedge(&a.to_coordinate()?, &b.to_coordinate()?);
    }
    let space = *a.space();
    let degree = a.degree() + b.degree();
    if degree > space.n as usize + 1 {
        return Err(Error::DegreeOverflow(degree, space.n as usize + 1));
    }
    let mut out: BTreeMap<Wedge, Accum> = BTreeMap::new();
    for (wa, ca) in a.terms() {
        for (wb, cb) in b.terms() {
            if let Some((w, s)) = wa.mul(wb) {
                out.entry(w).or_default().add_scaled(&(ca * cb), &Monomial::one(), &Rational::from_int(s as i64));
            }
        }
    }
    Ok(Form::assemble(space, degree, a.order().max(b.order()), a.basis(), out))
}

/// Wedge of several forms, left to right; the empty product is the constant 1.
pub fn wedge_all(space: JetSpace, forms: &[Form]) -> Result<Form> {
    let mut acc = Form::scalar(space, 0, Expr::one())?;
    for f in forms {
        acc = wedge(&acc, f)?;
    }
    Ok(acc)
}

/// Differential of a function as a combination of coordinate covectors.
pub fn differential(e: &Expr) -> Result<CovectorImage> {
    let mut out = Vec::new();
    for a in e.dependencies() {
        let cv = match a {
            Atom::X(i) => Covector::Dx(i),
            Atom::Y(s, j) => Covector::Dy(s, j),
            Atom::Opaque(id) => return Err(Error::OpaqueDerivative(registry::opaque_name(id))),
            Atom::Inv(_) | Atom::Sqrt(_) => unreachable!("dependencies are plain"),
        };
        let g = partial_atom(e, &a);
        if !g.is_zero() {
            out.push((cv, g));
        }
    }
    Ok(out)
}

/// Exterior derivative; works in the coordinate basis and keeps the order.
pub fn exterior_derivative(rho: &Form) -> Result<Form> {
    let rho = rho.to_coordinate()?;
    let mut out: BTreeMap<Wedge, Accum> = BTreeMap::new();
    for (w, c) in rho.terms() {
        for (cv, g) in differential(c)? {
            if let Some((nw, s)) = Wedge::single(cv).mul(w) {
                out.entry(nw).or_default().add_scaled(&g, &Monomial::one(), &Rational::from_int(s as i64));
            }
        }
    }
    Ok(Form::assemble(*rho.space(), rho.degree() + 1, rho.order(), Basis::Coordinate, out))
}

/// Value of a basis covector on a vector field.
fn pairing(x: &VectorField, cv: &Covector) -> Expr {
    let comp = |d: Direction| x.component(&d).cloned().unwrap_or_default();
    match *cv {
        Covector::Dx(i) => comp(Direction::X(i)),
        Covector::Dy(s, j) => comp(Direction::Y(s, j)),
        Covector::W(s, j) => {
            let mut v = comp(Direction::Y(s, j));
            for i in 1..=x.space().n {
                let xi = comp(Direction::X(i));
                if !xi.is_zero() {
                    v = &v - &(&Expr::atom(Atom::Y(s, j.with(i))) * &xi);
                }
            }
            v
        }
    }
}

/// Interior product `i_X ρ`.
pub fn contract(x: &VectorField, rho: &Form) -> Result<Form> {
    if rho.degree() == 0 {
        return Err(Error::Precondition("contraction needs a form of degree at least 1".into()));
    }
    if x.space() != rho.space() {
        return Err(Error::SpaceMismatch);
    }
    let mut values: BTreeMap<Covector, Expr> = BTreeMap::new();
    let mut out: BTreeMap<Wedge, Accum> = BTreeMap::new();
    for (w, c) in rho.terms() {
        for (pos, cv) in w.factors().iter().enumerate() {
            let v = values.entry(*cv).or_insert_with(|| pairing(x, cv));
            if v.is_zero() {
                continue;
            }
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            out.entry(w.without(pos)).or_default().add_scaled(&(&*v * c), &Monomial::one(), &Rational::from_int(sign));
        }
    }
    let order = rho.order().max(x.order());
    rho.space().require_order(order)?;
    Ok(Form::assemble(*rho.space(), rho.degree() - 1, order, rho.basis(), out))
}

/// Horizontalization `h`: `dy^σ_J ↦ y^σ_{Js} dx^s`, contact forms to zero.
/// The result lives one order higher.
pub fn horizontalize(rho: &Form) -> Result<Form> {
    rho.space().require_order(rho.order() + 1)?;
    let n = rho.space().n;
    rho.expand(
        &|c| Ok(c.clone()),
        &mut |cv| {
            Ok(match *cv {
                Covector::Dx(i) => vec![(Covector::Dx(i), Expr::one())],
                Covector::Dy(s, j) => (1..=n).map(|i| (Covector::Dx(i), Expr::atom(Atom::Y(s, j.with(i))))).collect(),
                Covector::W(..) => Vec::new(),
            })
        },
        Basis::Coordinate,
        rho.order() + 1,
        None,
    )
}

/// The `k`-contact component `p_k ρ`, in the contact basis one order up.
pub fn contact_component(rho: &Form, k: usize) -> Result<Form> {
    if k > rho.degree() {
        return Err(Error::Precondition(format!("contact degree {k} exceeds form degree {}", rho.degree())));
    }
    rho.contact_view(Some(k))
}

/// Pulls back along a coordinate substitution.
///
/// `images` gives the expression of each coordinate function of the source
/// chart in terms of the target chart's atoms (identity where `None`);
/// coefficients are substituted and covectors replaced by differentials of
/// the images. `order` is the jet order of the result.
pub fn pullback_by<F>(rho: &Form, images: &F, order: usize) -> Result<Form>
where
    F: Fn(&Atom) -> Option<Expr>,
{
    let rho = rho.to_coordinate()?;
    rho.space().require_order(order)?;
    rho.expand(
        &|c| substitute(c, images),
        &mut |cv| {
            let atom = match *cv {
                Covector::Dx(i) => Atom::X(i),
                Covector::Dy(s, j) => Atom::Y(s, j),
                Covector::W(..) => unreachable!("coordinate basis"),
            };
            differential(&images(&atom).unwrap_or_else(|| Expr::atom(atom)))
        },
        Basis::Coordinate,
        order,
        None,
    )
}

/// `ω_0 = dx^1 ∧ … ∧ dx^n` and `ω_j = i_{∂/∂x^j} ω_0`.
pub fn omega_forms(space: JetSpace) -> Result<(Form, Vec<Form>)> {
    let all: Vec<Covector> = (1..=space.n).map(Covector::Dx).collect();
    let (w, _) = Wedge::from_factors(&all).expect("distinct base covectors");
    let omega0 = Form::from_terms(space, space.n as usize, 0, Basis::Coordinate, [(w, Expr::one())])?;
    let mut omegas = Vec::with_capacity(space.n as usize);
    for j in 1..=space.n {
        omegas.push(contract(&VectorField::partial_x(space, j), &omega0)?);
    }
    Ok((omega0, omegas))
}

/// Lie derivative via Cartan's formula `i_X dρ + d i_X ρ`.
pub fn lie_derivative(x: &VectorField, rho: &Form) -> Result<Form> {
    let first = contract(x, &exterior_derivative(rho)?)?;
    if rho.degree() == 0 {
        return Ok(first);
    }
    let second = exterior_derivative(&contract(x, rho)?)?;
    first.add(&second)
}
