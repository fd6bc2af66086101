//! Seeded random instances and the named check suites run by the
//! acceptance tests and the command line.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charts::{check_caratheodory_invariance, check_theta_invariance, obstruction_3rd, prolong, shear, standard_family, ChartTransform};
use crate::error::Result;
use crate::exterior::{
    contact_component, contract, exterior_derivative, horizontalize, wedge, Basis, Covector, Direction, Form, VectorField, Wedge,
};
use crate::kernel::{Atom, Expr, JetSpace, MultiIndex};
use crate::lepage::{
    caratheodory_closed, caratheodory_contraction, caratheodory_first, check_lepage, euler_lagrange, euler_lagrange_classical,
    fundamental_form, is_trivial, principal_component, Lagrangian,
};
use crate::rational::Rational;
use crate::relativity::{einstein_el, hilbert_caratheodory, hilbert_caratheodory_generic, hilbert_theta};

/// Deterministic generator of polynomials, Lagrangians, forms and
/// transforms.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// A small nonzero rational.
    pub fn coefficient(&mut self) -> Rational {
        let num = *[-3i64, -2, -1, 1, 2, 3, 5].choose(&mut self.rng).unwrap();
        let den = *[1i64, 1, 1, 2, 3].choose(&mut self.rng).unwrap();
        Rational::new(num, den)
    }

    fn atom_pool(space: &JetSpace, order: usize) -> Vec<Atom> {
        let mut pool: Vec<Atom> = (1..=space.n).map(Atom::X).collect();
        pool.extend(space.field_atoms(order));
        pool
    }

    /// Sum of `terms` monomials of degree 1 to `degree` in `x` and the jets
    /// up to `order`.
    pub fn polynomial(&mut self, space: &JetSpace, order: usize, degree: usize, terms: usize) -> Expr {
        let pool = Self::atom_pool(space, order);
        (0..terms).map(|_| self.monomial(&pool, degree)).sum()
    }

    fn monomial(&mut self, pool: &[Atom], degree: usize) -> Expr {
        let d = self.rng.gen_range(1..=degree);
        let mut m = Expr::constant(self.coefficient());
        for _ in 0..d {
            m = &m * &Expr::atom(*pool.choose(&mut self.rng).unwrap());
        }
        m
    }

    /// A polynomial Lagrangian that really has order `order`; with
    /// `nonvanishing` a nonzero constant is added and `ℒ` is registered.
    pub fn lagrangian(&mut self, space: JetSpace, order: usize, degree: usize, nonvanishing: bool) -> Result<Lagrangian> {
        let top: Vec<Atom> = space.field_atoms(order).into_iter().filter(|a| a.jet_order() == order).collect();
        loop {
            let terms = 2 + self.below(3);
            let mut density = self.polynomial(&space, order, degree, terms);
            let head = Expr::atom(*top.choose(&mut self.rng).unwrap());
            let lead = &head * &self.monomial(&Self::atom_pool(&space, order), degree.max(2) - 1);
            density = &density + &lead;
            if nonvanishing {
                density = &density + &Expr::int(self.rng.gen_range(1..=9));
            }
            if density.jet_order() != order {
                continue;
            }
            let l = Lagrangian::new(space, order, density)?;
            return if nonvanishing { l.declare_nonvanishing() } else { Ok(l) };
        }
    }

    /// A `degree`-form on jets up to `order` in the coordinate basis.
    pub fn form(&mut self, space: JetSpace, degree: usize, order: usize, terms: usize) -> Result<Form> {
        let mut covectors: Vec<Covector> = (1..=space.n).map(Covector::Dx).collect();
        covectors.extend(space.field_atoms(order).into_iter().map(|a| match a {
            Atom::Y(s, j) => Covector::Dy(s, j),
            _ => unreachable!("field atoms"),
        }));
        let mut out = Vec::new();
        for _ in 0..terms {
            let picked: Vec<Covector> = covectors.choose_multiple(&mut self.rng, degree).copied().collect();
            let (w, sign) = Wedge::from_factors(&picked).expect("distinct covectors");
            let count = 1 + self.below(2);
            let coef = self.polynomial(&space, order, 2, count).scale(&Rational::from_int(sign as i64));
            out.push((w, coef));
        }
        Form::from_terms(space, degree, order, Basis::Coordinate, out)
    }

    /// A vector field with polynomial components along `x` and jets up to
    /// `order`.
    pub fn vector_field(&mut self, space: JetSpace, order: usize) -> Result<VectorField> {
        let mut dirs: Vec<Direction> = (1..=space.n).map(Direction::X).collect();
        dirs.extend(space.field_atoms(order).into_iter().map(|a| match a {
            Atom::Y(s, j) => Direction::Y(s, j),
            _ => unreachable!("field atoms"),
        }));
        let k = 1 + self.below(dirs.len().min(3));
        let picked: Vec<Direction> = dirs.choose_multiple(&mut self.rng, k).copied().collect();
        let comps: Vec<(Direction, Expr)> = picked.into_iter().map(|d| (d, self.polynomial(&space, order, 2, 1))).collect();
        VectorField::new(space, order, comps)
    }

    /// A chart change with a quadratic base part and an affine fiber part
    /// whose fiber Jacobian is constant.
    pub fn transform(&mut self, space: JetSpace) -> Result<ChartTransform> {
        let n = space.n;
        let mut base: Vec<Expr> = (1..=n).map(Expr::x).collect();
        let i = 1 + self.below(n as usize) as u8;
        let mut j = 1 + self.below(n as usize) as u8;
        if n > 1 {
            while j == i {
                j = 1 + self.below(n as usize) as u8;
            }
            // x̄^i = x^i + c (x^j)^2 keeps a triangular Jacobian
            base[i as usize - 1] = &Expr::x(i) + &Expr::x(j).pow(2).scale(&self.coefficient());
        } else {
            base[0] = &Expr::x(1) + &Expr::x(1).pow(3).scale(&Rational::new(1, 3));
        }
        let fiber = (1..=space.m)
            .map(|s| {
                let c = self.coefficient();
                let shift = 1 + self.below(n as usize) as u8;
                &Expr::y(s, &[]).scale(&c) + &Expr::x(shift).pow(2)
            })
            .collect();
        ChartTransform::new(space, base, fiber)
    }
}

/// Outcome of a named suite: one line per individual check.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<(String, bool)>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport { name, checks: Vec::new() }
    }

    fn record(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, ok)| !ok).map(|(s, _)| s.as_str()).collect()
    }
}

pub const SUITES: [&str; 8] = ["caratheodory-first", "caratheodory-second", "lepage", "fundamental", "invariance", "obstruction", "hilbert", "calculus"];

pub fn run(name: &str) -> Result<Option<SuiteReport>> {
    Ok(Some(match name {
        "caratheodory-first" => caratheodory_first_suite(25)?,
        "caratheodory-second" => caratheodory_second_suite(15)?,
        "lepage" => lepage_suite(10)?,
        "fundamental" => fundamental_suite()?,
        "invariance" => invariance_suite()?,
        "obstruction" => obstruction_suite()?,
        "hilbert" => hilbert_suite(true)?,
        "calculus" => calculus_suite(50)?,
        _ => return Ok(None),
    }))
}

/// The first-order family: `n ∈ {2, 3}`, `m ∈ {1, 2}`, degree at most 3.
pub fn first_order_family(seed: u64, count: usize, nonvanishing: bool) -> Result<Vec<Lagrangian>> {
    let mut s = Sampler::new(seed);
    (0..count)
        .map(|k| {
            let space = JetSpace::new(2 + k % 2, 1 + (k / 2) % 2, 3)?;
            s.lagrangian(space, 1, 3, nonvanishing)
        })
        .collect()
}

/// The second-order family: `n = 2`, `m = 1`, degree at most 3.
pub fn second_order_family(seed: u64, count: usize, nonvanishing: bool) -> Result<Vec<Lagrangian>> {
    let mut s = Sampler::new(seed);
    let space = JetSpace::new(2, 1, 5)?;
    (0..count).map(|_| s.lagrangian(space, 2, 3, nonvanishing)).collect()
}

/// Third-order Lagrangians (`n = 2`, `m = 1`) with no third-order jet atoms.
pub fn third_order_free_family(seed: u64, count: usize) -> Result<Vec<Lagrangian>> {
    let mut s = Sampler::new(seed);
    let space = JetSpace::new(2, 1, 6)?;
    (0..count).map(|_| Ok(Lagrangian::new(space, 3, s.lagrangian(space, 2, 3, true)?.density().clone())?.declare_nonvanishing()?)).collect()
}

pub fn caratheodory_first_suite(count: usize) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("caratheodory-first");
    for (k, l) in first_order_family(0xC1, count, true)?.iter().enumerate() {
        let ok = caratheodory_contraction(l)?.factorwise_equals(&caratheodory_first(l)?)?;
        r.record(format!("#{k} n={} m={}: contraction = first-order formula", l.space().n, l.space().m), ok);
    }
    Ok(r)
}

pub fn caratheodory_second_suite(count: usize) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("caratheodory-second");
    for (k, l) in second_order_family(0xC2, count, true)?.iter().enumerate() {
        let closed = caratheodory_closed(l)?;
        r.record(format!("#{k}: contraction = closed form"), caratheodory_contraction(l)?.factorwise_equals(&closed)?);
        let form = closed.expand()?;
        r.record(format!("#{k}: h(Λ) = λ"), horizontalize(&form)?.equals(&l.form()?)?);
        let report = check_lepage(&form, l)?;
        r.record(format!("#{k}: h i_ξ dΛ = 0"), report.lepage_ok);
    }
    Ok(r)
}

pub fn lepage_suite(count: usize) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("lepage");
    let first = first_order_family(0x1E, count, false)?;
    let second = second_order_family(0x2E, count, false)?;
    for (k, l) in first.iter().chain(&second).enumerate() {
        let theta = principal_component(l)?;
        let report = check_lepage(&theta, l)?;
        r.record(format!("#{k} r={}: Θ is a Lepage equivalent", l.order()), report.equivalent_ok && report.lepage_ok);
        let el = euler_lagrange(l)?;
        r.record(format!("#{k} r={}: p1 dΘ = classical Euler-Lagrange form", l.order()), el.equals(&euler_lagrange_classical(l)?)?);
    }
    Ok(r)
}

pub fn fundamental_suite() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("fundamental");
    let space = JetSpace::new(2, 2, 3)?;
    let l = Lagrangian::new(space, 1, &Expr::y(1, &[1]) * &Expr::y(2, &[2]))?;
    let z = fundamental_form(&l)?;
    let half = Form::contact(space, 1, &[])?;
    let pair = wedge(&half, &Form::contact(space, 2, &[])?)?.scale(&Expr::rational(1, 2));
    let expected = l
        .form()?
        .add(&wedge(&Form::contact(space, 1, &[])?, &Form::dx(space, 2)?)?.scale(&Expr::y(2, &[2])))?
        .sub(&wedge(&Form::contact(space, 2, &[])?, &Form::dx(space, 1)?)?.scale(&Expr::y(1, &[1])))?
        .add(&pair)?;
    r.record("Z for y1_1*y2_2", z.equals(&expected)?);

    // d_1(y²) + d_1(x1 x2) and d_1(x1 y) + d_2(y)
    let one = JetSpace::new(2, 1, 3)?;
    let divergences = [
        &(&Expr::y(1, &[1]) * &Expr::y(1, &[])).scale(&Rational::from_int(2)) + &Expr::x(2),
        &(&(&Expr::y(1, &[1]) * &Expr::x(1)) + &Expr::y(1, &[])) + &Expr::y(1, &[2]),
    ];
    for (k, d) in divergences.into_iter().enumerate() {
        let l = Lagrangian::new(one, 1, d)?;
        let closed = exterior_derivative(&fundamental_form(&l)?)?.is_zero();
        r.record(format!("divergence #{k}: trivial and dZ = 0"), closed && is_trivial(&l)?);
    }
    let l = Lagrangian::new(one, 1, Expr::y(1, &[]))?;
    let closed = exterior_derivative(&fundamental_form(&l)?)?.is_zero();
    r.record("y1: nontrivial and dZ != 0", !closed && !is_trivial(&l)?);
    Ok(r)
}

pub fn invariance_suite() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("invariance");
    let space = JetSpace::new(2, 1, 5)?;
    let t = shear(space)?;
    for (k, l) in second_order_family(0x15, 4, true)?.iter().enumerate() {
        r.record(format!("#{k}: Θ invariant under the shear"), check_theta_invariance(l, &t)?);
        r.record(format!("#{k}: Λ invariant under the shear"), check_caratheodory_invariance(l, &t)?);
    }
    Ok(r)
}

pub fn obstruction_suite() -> Result<SuiteReport> {
    let mut r = SuiteReport::new("obstruction");
    let space = JetSpace::new(2, 1, 6)?;
    let family = standard_family(space)?;
    let free = third_order_free_family(0x0B, 4)?;
    for (k, l) in free.iter().enumerate() {
        for (ti, t) in family.iter().enumerate() {
            let report = obstruction_3rd(l, t)?;
            r.record(format!("free #{k}, transform #{ti}: residuals vanish"), report.holds);
        }
    }
    let mut s = Sampler::new(0x0C);
    let linear: Vec<&ChartTransform> = family.iter().filter(|t| t.is_base_linear()).collect();
    for k in 0..4 {
        let l = s.lagrangian(space, 3, 3, false)?;
        for t in &linear {
            r.record(format!("arbitrary #{k} under a linear transform: residuals vanish"), obstruction_3rd(&l, t)?.holds);
        }
    }
    let t = shear(space)?;
    let report = obstruction_3rd(&Lagrangian::new(space, 3, Expr::y(1, &[1, 1, 1]))?, &t)?;
    r.record("y1_111 under the shear: nonzero residual", !report.holds);
    for (k, l) in free.iter().take(2).enumerate() {
        r.record(format!("free #{k}: Carathéodory form invariant under the shear"), check_caratheodory_invariance(l, &t)?);
    }
    Ok(r)
}

pub fn hilbert_suite(with_three: bool) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("hilbert");
    let theta = hilbert_theta(2)?;
    r.record("n=2: Θ has first-order coefficients", theta.terms().all(|(_, c)| c.jet_order() <= 1));
    r.record("n=2: Euler-Lagrange form vanishes", einstein_el(2)?.is_zero());
    r.record("n=2: printed Carathéodory factors = construction", hilbert_caratheodory(2)?.factorwise_equals(&hilbert_caratheodory_generic(2)?)?);
    if with_three {
        r.record("n=3: printed Carathéodory factors = construction", hilbert_caratheodory(3)?.factorwise_equals(&hilbert_caratheodory_generic(3)?)?);
        let el = einstein_el(3)?;
        r.record("n=3: Euler-Lagrange form is nonzero", !el.is_zero());
    }
    Ok(r)
}

/// Calculus identities on `count` random instances each.
pub fn calculus_suite(count: usize) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("calculus");
    let mut s = Sampler::new(0xCA);
    let mut tally = [0usize; 5];
    for k in 0..count {
        let space = JetSpace::new(2 + k % 2, 1 + k % 3 / 2, 4)?;
        let n = space.n as usize;
        let deg = s.below(n);
        let rho = s.form(space, deg, 2, 3)?;
        tally[0] += exterior_derivative(&exterior_derivative(&rho)?)?.is_zero() as usize;

        let a = s.form(space, 1, 1, 2)?;
        let deg = 1 + s.below(n - 1);
        let b = s.form(space, deg, 1, 2)?;
        tally[1] += horizontalize(&wedge(&a, &b)?)?.equals(&wedge(&horizontalize(&a)?, &horizontalize(&b)?)?)? as usize;

        let sigma = 1 + s.below(space.m as usize) as u16;
        let len = s.below(3);
        let j = *MultiIndex::all_of_order(space.n, len).choose(&mut s.rng).unwrap();
        let i = 1 + s.below(n) as u8;
        let field = VectorField::formal(space, i, 2)?;
        tally[2] += contract(&field, &Form::contact(space, sigma, j.entries())?)?.is_zero() as usize;

        let deg = 1 + s.below(n);
        let rho = s.form(space, deg, 2, 3)?;
        let mut total = Form::zero(space, rho.degree(), 3)?;
        for q in 0..=rho.degree() {
            total = total.add(&contact_component(&rho, q)?)?;
        }
        tally[3] += total.equals(&rho.promoted(3)?)? as usize;

        let t = s.transform(space)?;
        let p = prolong(&t, 1)?;
        let deg = s.below(n);
        let rho = s.form(space, deg, 1, 2)?;
        tally[4] += p.pullback(&exterior_derivative(&rho)?)?.equals(&exterior_derivative(&p.pullback(&rho)?)?)? as usize;
    }
    let names = ["d∘d = 0", "h(a∧b) = h(a)∧h(b)", "i_{d_i} ω = 0", "Σ p_k ρ = ρ", "pullback commutes with d"];
    for (name, hits) in names.iter().zip(tally) {
        r.record(format!("{name}: {hits}/{count}"), hits == count);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_deterministic() {
        let space = JetSpace::new(2, 2, 3).unwrap();
        let a = Sampler::new(7).lagrangian(space, 2, 3, false).unwrap();
        let b = Sampler::new(7).lagrangian(space, 2, 3, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.density().jet_order(), 2);
    }

    #[test]
    fn unknown_suite() {
        assert!(run("nope").unwrap().is_none());
    }
}
