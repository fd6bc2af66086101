//! Metric fields as a jet space: scalar curvature, the Hilbert Lagrangian
//! and its principal and Carathéodory Lepage equivalents.
//!
//! The fiber coordinate `g_ab` (`a <= b`) is the field `y<σ>` with `σ` the
//! position of `(a, b)` in the row-major list of sorted pairs, so
//! `g_ab,cd` is `y<σ>_cd`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{Basis, Covector, Form, Wedge};
use crate::kernel::matrix::{self, Matrix};
use crate::kernel::{formal_derivative, registry, Atom, Expr, JetSpace, MultiIndex};
use crate::lepage::{caratheodory_closed, euler_lagrange, principal_component, Decomposable, Lagrangian};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signature {
    /// `s² = det g`.
    Riemannian,
    /// `s² = -det g`.
    Lorentzian,
}

/// Jets of a metric on an `n`-dimensional base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MetricJetSpace {
    pub n: u8,
    pub signature: Signature,
    space: JetSpace,
}

impl MetricJetSpace {
    /// Base dimension 2 to 4, jets up to `order_cap`.
    pub fn new(n: usize, signature: Signature, order_cap: usize) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::UnsupportedDimension(format!("metric base dimension {n}, expected 2 to 4")));
        }
        let space = JetSpace::new(n, n * (n + 1) / 2, order_cap)?;
        Ok(MetricJetSpace { n: n as u8, signature, space })
    }

    pub fn space(&self) -> JetSpace {
        self.space
    }

    /// Field label of `g_ab` (either order of `a, b`).
    pub fn label(&self, a: u8, b: u8) -> u16 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let n = self.n as u16;
        let (a, b) = (a as u16, b as u16);
        // pairs before row a: n + (n-1) + … + (n-a+2)
        (a - 1) * (n + 1) - (a - 1) * a / 2 + (b - a) + 1
    }

    /// The sorted pair of a field label.
    pub fn pair(&self, sigma: u16) -> (u8, u8) {
        for a in 1..=self.n {
            for b in a..=self.n {
                if self.label(a, b) == sigma {
                    return (a, b);
                }
            }
        }
        panic!("label {sigma} out of range")
    }

    /// `g_ab` differentiated along `derivs`.
    pub fn g(&self, a: u8, b: u8, derivs: &[u8]) -> Expr {
        Expr::y(self.label(a, b), derivs)
    }

    pub fn metric_matrix(&self) -> Matrix {
        (1..=self.n).map(|a| (1..=self.n).map(|b| self.g(a, b, &[])).collect()).collect()
    }

    /// Human-readable name of a metric jet atom, e.g. `g12,3`.
    pub fn atom_name(&self, a: &Atom) -> Option<String> {
        match a {
            Atom::Y(sigma, j) if *sigma as usize <= self.space.m as usize => {
                let (p, q) = self.pair(*sigma);
                Some(if j.is_empty() { format!("g{p}{q}") } else { format!("g{p}{q},{j}") })
            }
            _ => None,
        }
    }
}

/// Curvature objects of the generic metric.
#[derive(Clone, Debug)]
pub struct MetricObjects {
    pub space: MetricJetSpace,
    pub det: Expr,
    /// `s`, the square root of `|det g|`.
    pub volume: Expr,
    pub inverse: Matrix,
    /// `[k][i][j] = Γ^k_ij`.
    pub christoffel: Vec<Vec<Vec<Expr>>>,
    pub ricci: Matrix,
    pub scalar: Expr,
    /// `R·s`.
    pub density: Expr,
}

type Cache = Mutex<HashMap<(u8, Signature), Arc<MetricObjects>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Levi-Civita curvature of the generic metric, cached per dimension and
/// signature. Works on jets up to order 4 so that the Euler–Lagrange form of
/// the Hilbert Lagrangian can be built on the same space.
pub fn metric_objects(n: usize, signature: Signature) -> Result<Arc<MetricObjects>> {
    let ms = MetricJetSpace::new(n, signature, 4)?;
    if let Some(o) = cache().lock().get(&(ms.n, signature)) {
        return Ok(o.clone());
    }
    let objects = Arc::new(build_objects(ms)?);
    cache().lock().insert((ms.n, signature), objects.clone());
    Ok(objects)
}

fn build_objects(ms: MetricJetSpace) -> Result<MetricObjects> {
    let space = ms.space;
    let n = ms.n;
    let idx = |a: u8| a as usize - 1;
    let (det, inverse) = matrix::inverse(&ms.metric_matrix())?;
    let volume = match ms.signature {
        Signature::Riemannian => registry::sqrt(&det)?,
        Signature::Lorentzian => registry::sqrt(&-&det)?,
    };
    let half = Rational::new(1, 2);
    // Γ_{l,ij} = (g_li,j + g_lj,i - g_ij,l)/2, then raised with g^{kl}
    let triples: Vec<(u8, u8, u8)> = (1..=n).flat_map(|k| (1..=n).flat_map(move |i| (1..=n).map(move |j| (k, i, j)))).collect();
    let flat: Vec<Expr> = triples
        .par_iter()
        .map(|&(k, i, j)| {
            if j < i {
                return Expr::zero();
            }
            (1..=n)
                .map(|l| {
                    let first = &(&ms.g(l, i, &[j]) + &ms.g(l, j, &[i])) - &ms.g(i, j, &[l]);
                    &inverse[idx(k)][idx(l)] * &first.scale(&half)
                })
                .sum()
        })
        .collect();
    let mut christoffel = vec![vec![vec![Expr::zero(); n as usize]; n as usize]; n as usize];
    for (&(k, i, j), e) in triples.iter().zip(flat) {
        if j >= i {
            christoffel[idx(k)][idx(j)][idx(i)] = e.clone();
            christoffel[idx(k)][idx(i)][idx(j)] = e;
        }
    }
    let gam = &christoffel;
    // R_ij = d_k Γ^k_ij - d_j Γ^k_ki + Γ^k_kl Γ^l_ij - Γ^k_jl Γ^l_ki
    let pairs: Vec<(u8, u8)> = (1..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect();
    let entries: Vec<Expr> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut r = Expr::zero();
            for k in 1..=n {
                r = &r + &formal_derivative(&gam[idx(k)][idx(i)][idx(j)], k, &space)?;
                r = &r - &formal_derivative(&gam[idx(k)][idx(k)][idx(i)], j, &space)?;
                for l in 1..=n {
                    r = &r + &(&gam[idx(k)][idx(k)][idx(l)] * &gam[idx(l)][idx(i)][idx(j)]);
                    r = &r - &(&gam[idx(k)][idx(j)][idx(l)] * &gam[idx(l)][idx(k)][idx(i)]);
                }
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let mut ricci = vec![vec![Expr::zero(); n as usize]; n as usize];
    for (&(i, j), e) in pairs.iter().zip(entries) {
        ricci[idx(j)][idx(i)] = e.clone();
        ricci[idx(i)][idx(j)] = e;
    }
    let scalar: Expr = pairs
        .par_iter()
        .map(|&(i, j)| {
            let w = if i == j { 1 } else { 2 };
            (&inverse[idx(i)][idx(j)] * &ricci[idx(i)][idx(j)]).scale(&Rational::from_int(w))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let density = &scalar * &volume;
    Ok(MetricObjects { space: ms, det, volume, inverse, christoffel, ricci, scalar, density })
}

/// The scalar curvature `R` of the generic metric (Riemannian).
pub fn scalar_curvature(n: usize) -> Result<Expr> {
    Ok(metric_objects(n, Signature::Riemannian)?.scalar.clone())
}

/// `λ = R·s ω_0` as a nonvanishing second-order Lagrangian.
pub fn hilbert_lagrangian(n: usize) -> Result<Lagrangian> {
    hilbert_lagrangian_with(n, Signature::Riemannian)
}

pub fn hilbert_lagrangian_with(n: usize, signature: Signature) -> Result<Lagrangian> {
    let o = metric_objects(n, signature)?;
    Lagrangian::new(o.space.space(), 2, o.density.clone())?.declare_nonvanishing()
}

/// The principal Lepage equivalent of the Hilbert Lagrangian.
pub fn hilbert_theta(n: usize) -> Result<Form> {
    principal_component(&hilbert_lagrangian(n)?)
}

/// The Carathéodory equivalent of the Hilbert Lagrangian written with the
/// metric's own coefficients: factor `k` is
/// `𝓡 dx^k + C^{ijk} ω_ij + D^{ijkl} ω_ij,l` with
/// `C^{ijk} = s/2 (g^{qp}g^{si}g^{jk} - 2g^{sq}g^{pi}g^{jk} + g^{pi}g^{qj}g^{sk}) g_pq,s`
/// and `D^{ijkl} = s (g^{il}g^{kj} - g^{kl}g^{ji})`, summed over all `i, j`;
/// the coefficient of the contact form of a sorted pair `(a, b)` collects
/// both orders.
pub fn hilbert_caratheodory(n: usize) -> Result<Decomposable> {
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(format!("base dimension {n}, expected 2 or 3")));
    }
    let o = metric_objects(n, Signature::Riemannian)?;
    let lagrangian = hilbert_lagrangian(n)?;
    let ms = o.space;
    let space = ms.space();
    let n = ms.n;
    let gi = |a: u8, b: u8| &o.inverse[a as usize - 1][b as usize - 1];
    let s = &o.volume;
    let c = |i: u8, j: u8, k: u8| -> Expr {
        let mut acc = Expr::zero();
        for p in 1..=n {
            for q in 1..=n {
                for t in 1..=n {
                    let a = &(gi(q, p) * gi(t, i)) * gi(j, k);
                    let b = (&(gi(t, q) * gi(p, i)) * gi(j, k)).scale(&Rational::from_int(2));
                    let d = &(gi(p, i) * gi(q, j)) * gi(t, k);
                    acc = &acc + &(&(&(&a - &b) + &d) * &ms.g(p, q, &[t]));
                }
            }
        }
        (&acc * s).scale(&Rational::new(1, 2))
    };
    let d = |i: u8, j: u8, k: u8, l: u8| -> Expr { &(&(gi(i, l) * gi(k, j)) - &(gi(k, l) * gi(j, i))) * s };
    let factors: Vec<Form> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let mut terms = vec![(Wedge::single(Covector::Dx(k)), o.density.clone())];
            for a in 1..=n {
                for b in a..=n {
                    let sigma = ms.label(a, b);
                    let both = |f: &dyn Fn(u8, u8) -> Expr| if a == b { f(a, a) } else { &f(a, b) + &f(b, a) };
                    terms.push((Wedge::single(Covector::W(sigma, MultiIndex::empty())), both(&|i, j| c(i, j, k))));
                    for l in 1..=n {
                        terms.push((Wedge::single(Covector::W(sigma, MultiIndex::new(&[l]))), both(&|i, j| d(i, j, k, l))));
                    }
                }
            }
            Form::from_terms(space, 1, 3, Basis::Contact, terms)
        })
        .collect::<Result<_>>()?;
    let prefactor = registry::inverse(lagrangian.density())?.pow(n as u32 - 1);
    Ok(Decomposable { prefactor, factors })
}

/// The generic Carathéodory construction applied to the Hilbert Lagrangian.
pub fn hilbert_caratheodory_generic(n: usize) -> Result<Decomposable> {
    caratheodory_closed(&hilbert_lagrangian(n)?)
}

/// The Euler–Lagrange form of the Hilbert Lagrangian.
pub fn einstein_el(n: usize) -> Result<Form> {
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(format!("base dimension {n}, expected 2 or 3")));
    }
    euler_lagrange(&hilbert_lagrangian(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::horizontalize;
    use crate::kernel::{equals_zero, partial_atom, substitute};
    use crate::lepage::check_lepage;

    #[test]
    fn labels_round_trip() {
        for n in 2..=4 {
            let ms = MetricJetSpace::new(n, Signature::Riemannian, 2).unwrap();
            let mut seen = Vec::new();
            for a in 1..=n as u8 {
                for b in a..=n as u8 {
                    let l = ms.label(a, b);
                    assert_eq!(ms.pair(l), (a, b));
                    assert_eq!(ms.label(b, a), l);
                    seen.push(l);
                }
            }
            assert_eq!(seen, (1..=(n * (n + 1) / 2) as u16).collect::<Vec<_>>());
        }
        assert!(MetricJetSpace::new(5, Signature::Riemannian, 2).is_err());
    }

    #[test]
    fn inverse_metric_is_inverse() {
        for n in 2..=3 {
            let o = metric_objects(n, Signature::Riemannian).unwrap();
            assert!(matrix::is_identity(&matrix::product(&o.space.metric_matrix(), &o.inverse)));
        }
    }

    #[test]
    fn scalar_curvature_affine_in_second_derivatives() {
        let o = metric_objects(2, Signature::Riemannian).unwrap();
        let second: Vec<Atom> = o.space.space().field_atoms(2).into_iter().filter(|a| a.jet_order() == 2).collect();
        for a in &second {
            let d = partial_atom(&o.scalar, a);
            for b in &second {
                assert!(partial_atom(&d, b).is_zero());
            }
        }
    }

    #[test]
    fn lorentzian_volume() {
        let o = metric_objects(2, Signature::Lorentzian).unwrap();
        assert!(equals_zero(&(&(&o.volume * &o.volume) + &o.det)));
    }

    #[test]
    fn unsupported_dimensions() {
        assert!(matches!(hilbert_caratheodory(4), Err(Error::UnsupportedDimension(_))));
        assert!(matches!(einstein_el(4), Err(Error::UnsupportedDimension(_))));
    }

    fn diagonal_2d(o: &MetricObjects, g22: [Expr; 3]) -> impl Fn(&Atom) -> Option<Expr> + '_ {
        let ms = o.space;
        move |a: &Atom| match a {
            Atom::Y(s, j) if *s == ms.label(2, 2) => Some(match j.entries() {
                [] => g22[0].clone(),
                [1] => g22[1].clone(),
                [1, 1] => g22[2].clone(),
                _ => Expr::zero(),
            }),
            Atom::Y(s, j) if *s == ms.label(1, 1) && j.is_empty() => Some(Expr::one()),
            Atom::Y(..) => Some(Expr::zero()),
            _ => None,
        }
    }

    #[test]
    fn polar_plane_is_flat() {
        let o = metric_objects(2, Signature::Riemannian).unwrap();
        let map = diagonal_2d(&o, [Expr::x(1).pow(2), Expr::x(1).scale(&Rational::from_int(2)), Expr::int(2)]);
        assert!(substitute(&o.scalar, &map).unwrap().is_zero());
    }

    #[test]
    fn unit_sphere_has_curvature_two() {
        // dθ² + sin²θ dφ² at sin θ = 3/5, cos θ = 4/5
        let o = metric_objects(2, Signature::Riemannian).unwrap();
        let map = diagonal_2d(&o, [Expr::rational(9, 25), Expr::rational(24, 25), Expr::rational(14, 25)]);
        assert_eq!(substitute(&o.scalar, &map).unwrap(), Expr::int(2));
    }

    #[test]
    fn scalar_curvature_relabel_symmetry() {
        for n in 2..=3u8 {
            let o = metric_objects(n as usize, Signature::Riemannian).unwrap();
            let ms = o.space;
            let swap = |i: u8| match i {
                1 => 2,
                2 => 1,
                k => k,
            };
            let map = |a: &Atom| match a {
                Atom::X(i) => Some(Expr::x(swap(*i))),
                Atom::Y(s, j) => {
                    let (p, q) = ms.pair(*s);
                    let js: Vec<u8> = j.entries().iter().map(|&k| swap(k)).collect();
                    Some(ms.g(swap(p), swap(q), &js))
                }
                _ => None,
            };
            assert!(equals_zero(&(&substitute(&o.scalar, &map).unwrap() - &o.scalar)));
        }
    }

    #[test]
    fn hilbert_density_linear_in_volume() {
        let o = metric_objects(2, Signature::Riemannian).unwrap();
        let Some(Atom::Sqrt(_)) = o.volume.atoms().into_iter().next() else { panic!("volume is a root atom") };
        let root = o.volume.atoms().into_iter().next().unwrap();
        assert!(o.density.terms().iter().all(|(m, _)| m.exponent(&root) == 1));
        let l = hilbert_lagrangian(2).unwrap();
        assert!(l.is_nonvanishing());
        for a in o.space.space().field_atoms(2).into_iter().filter(|a| a.jet_order() == 2) {
            assert!(partial_atom(&l.density().clone(), &a).jet_order() <= 1);
        }
    }

    #[test]
    fn hilbert_theta_is_first_order() {
        for n in 2..=3 {
            let theta = hilbert_theta(n).unwrap();
            for (w, c) in theta.terms() {
                assert!(c.jet_order() <= 1, "coefficient {c}");
                assert!(w.factors().iter().all(|f| match f {
                    Covector::Dy(_, j) | Covector::W(_, j) => j.order() <= 1,
                    Covector::Dx(_) => true,
                }));
            }
        }
    }

    #[test]
    fn hilbert_theta_is_lepage() {
        let l = hilbert_lagrangian(2).unwrap();
        let theta = hilbert_theta(2).unwrap();
        assert!(horizontalize(&theta).unwrap().equals(&l.form().unwrap()).unwrap());
        let report = check_lepage(&theta, &l).unwrap();
        assert!(report.equivalent_ok && report.lepage_ok);
    }

    #[test]
    fn printed_caratheodory_matches_construction() {
        for n in 2..=3 {
            let printed = hilbert_caratheodory(n).unwrap();
            assert!(printed.factorwise_equals(&hilbert_caratheodory_generic(n).unwrap()).unwrap());
        }
        let l = hilbert_lagrangian(2).unwrap();
        let form = hilbert_caratheodory(2).unwrap().expand().unwrap();
        assert!(horizontalize(&form).unwrap().equals(&l.form().unwrap()).unwrap());
    }

    #[test]
    fn two_dimensional_einstein_vanishes() {
        assert!(einstein_el(2).unwrap().is_zero());
    }

    /// Ricci tensor through the full Riemann tensor
    /// `R^a_bcd = d_c Γ^a_db - d_d Γ^a_cb + Γ^a_ce Γ^e_db - Γ^a_de Γ^e_cb`.
    fn ricci_via_riemann(ms: MetricJetSpace) -> (Matrix, Matrix, Expr) {
        let n = ms.n as usize;
        let space = ms.space();
        let (_, inv) = matrix::inverse(&ms.metric_matrix()).unwrap();
        let g = |a: usize, b: usize, d: &[usize]| ms.g(a as u8 + 1, b as u8 + 1, &d.iter().map(|&k| k as u8 + 1).collect::<Vec<_>>());
        let mut gam = vec![vec![vec![Expr::zero(); n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let t = &(&g(d, b, &[c]) + &g(d, c, &[b])) - &g(b, c, &[d]);
                        gam[a][b][c] = &gam[a][b][c] + &(&inv[a][d] * &t).scale(&Rational::new(1, 2));
                    }
                }
            }
        }
        let dd = |e: &Expr, k: usize| formal_derivative(e, k as u8 + 1, &space).unwrap();
        let mut ric = vec![vec![Expr::zero(); n]; n];
        for b in 0..n {
            for d in 0..n {
                let mut r = Expr::zero();
                for a in 0..n {
                    r = &r + &(&dd(&gam[a][d][b], a) - &dd(&gam[a][a][b], d));
                    for e in 0..n {
                        r = &r + &(&(&gam[a][a][e] * &gam[e][d][b]) - &(&gam[a][d][e] * &gam[e][a][b]));
                    }
                }
                ric[b][d] = r;
            }
        }
        let mut scalar = Expr::zero();
        for a in 0..n {
            for b in 0..n {
                scalar = &scalar + &(&inv[a][b] * &ric[a][b]);
            }
        }
        (inv, ric, scalar)
    }

    #[test]
    fn three_dimensional_einstein_matches_einstein_tensor() {
        let o = metric_objects(3, Signature::Riemannian).unwrap();
        let ms = o.space;
        let (inv, ric, scalar) = ricci_via_riemann(ms);
        assert!(equals_zero(&(&scalar - &o.scalar)));
        let el = einstein_el(3).unwrap();
        let half = Rational::new(1, 2);
        for a in 0..3usize {
            for b in a..3usize {
                // G^{ab} = g^{ac} g^{bd} (R_cd - R g_cd / 2)
                let mut upper = Expr::zero();
                for c in 0..3usize {
                    for d in 0..3usize {
                        let lower = &ric[c][d] - &(&scalar * &ms.g(c as u8 + 1, d as u8 + 1, &[])).scale(&half);
                        upper = &upper + &(&(&inv[a][c] * &inv[b][d]) * &lower);
                    }
                }
                let weight = if a == b { -1 } else { -2 };
                let expected = (&upper * &o.volume).scale(&Rational::from_int(weight));
                let sigma = ms.label(a as u8 + 1, b as u8 + 1);
                let got = el.coefficient_of(&[Covector::W(sigma, MultiIndex::empty()), Covector::Dx(1), Covector::Dx(2), Covector::Dx(3)]);
                assert!(equals_zero(&(&got - &expected)), "component g{}{}", a + 1, b + 1);
            }
        }
    }

    #[test]
    fn flat_metric_is_extremal() {
        for n in 2..=3 {
            let el = einstein_el(n).unwrap();
            let ms = metric_objects(n, Signature::Riemannian).unwrap().space;
            let flat = |a: &Atom| match a {
                Atom::Y(s, j) => {
                    let (p, q) = ms.pair(*s);
                    Some(if j.is_empty() && p == q { Expr::one() } else { Expr::zero() })
                }
                _ => None,
            };
            for (_, c) in el.terms() {
                assert!(substitute(c, &flat).unwrap().is_zero());
            }
        }
    }
}
