//! Differential forms on jet spaces.
//!
//! Forms are stored over the coordinate basis `{dx^i, dy^σ_J}` where the
//! exterior derivative is structural; the contact basis `{dx^i, ω^σ_J}` is a
//! view produced by [`Form::to_contact`], [`contact_component`] and printing.

mod covector;
mod field;
mod form;
mod ops;

pub use covector::{Covector, Wedge};
pub use field::{Direction, VectorField};
pub use form::{Basis, Form};
pub use ops::{
    contact_component, contract, differential, exterior_derivative, horizontalize, lie_derivative, omega_forms,
    pullback_by, wedge, wedge_all,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Atom, Expr, JetSpace};

    fn sp(n: usize, m: usize) -> JetSpace {
        JetSpace::new(n, m, 4).unwrap()
    }

    fn f(space: JetSpace, order: usize, e: Expr) -> Form {
        Form::scalar(space, order, e).unwrap()
    }

    #[test]
    fn wedge_examples() {
        let s = sp(2, 1);
        let w = wedge(&Form::dx(s, 1).unwrap(), &Form::dx(s, 2).unwrap()).unwrap();
        assert_eq!(w.to_string(), "dx1^dx2");
        assert!(wedge(&Form::dx(s, 1).unwrap(), &Form::dx(s, 1).unwrap()).unwrap().is_empty());
        let a = wedge(&f(s, 0, Expr::y(1, &[])), &Form::dx(s, 1).unwrap()).unwrap();
        let b = wedge(&a, &Form::dy(s, 1, &[]).unwrap()).unwrap();
        assert_eq!(b.to_string(), "-y1*dy1^dx1");
        let c = wedge(&Form::dy(s, 1, &[]).unwrap(), &a).unwrap();
        assert!(b.add(&c).unwrap().is_zero());
    }

    #[test]
    fn derivative_examples() {
        let s = sp(2, 1);
        assert_eq!(exterior_derivative(&f(s, 0, Expr::y(1, &[]))).unwrap().to_string(), "dy1");
        let w1 = Form::contact(s, 1, &[]).unwrap();
        let dw = exterior_derivative(&w1).unwrap();
        let expected = wedge(&Form::dy(s, 1, &[1]).unwrap(), &Form::dx(s, 1).unwrap())
            .unwrap()
            .add(&wedge(&Form::dy(s, 1, &[2]).unwrap(), &Form::dx(s, 2).unwrap()).unwrap())
            .unwrap()
            .neg();
        assert!(dw.equals(&expected).unwrap());
        let x1dx1 = wedge(&f(s, 0, Expr::x(1)), &Form::dx(s, 1).unwrap()).unwrap();
        assert!(exterior_derivative(&x1dx1).unwrap().is_empty());
    }

    #[test]
    fn opaque_coefficients_have_no_differential() {
        let s = sp(1, 1);
        let xi = Expr::atom(crate::kernel::registry::opaque("zeta_test"));
        assert!(exterior_derivative(&f(s, 0, xi)).is_err());
    }

    #[test]
    fn contraction_examples() {
        let s = sp(2, 2);
        let w = wedge(&Form::dx(s, 1).unwrap(), &Form::dx(s, 2).unwrap()).unwrap();
        let d1 = VectorField::formal(s, 1, 2).unwrap();
        assert_eq!(contract(&d1, &w).unwrap().to_string(), "dx2");
        for i in 1..=2 {
            let di = VectorField::formal(s, i, 2).unwrap();
            for sigma in 1..=2 {
                for j in [&[][..], &[1], &[2], &[1, 2]] {
                    let om = Form::contact(s, sigma, j).unwrap();
                    assert!(contract(&di, &om).unwrap().is_zero());
                    assert!(contract(&di, &om.to_coordinate().unwrap()).unwrap().is_zero());
                }
            }
        }
        let dy1 = VectorField::partial_y(s, 1, &[]);
        assert!(contract(&dy1, &Form::contact(s, 1, &[]).unwrap()).unwrap().equals(&f(s, 1, Expr::one())).unwrap());
    }

    #[test]
    fn horizontalization_examples() {
        let s = sp(2, 1);
        let h = horizontalize(&Form::dy(s, 1, &[]).unwrap()).unwrap();
        assert_eq!(h.to_string(), "y1_1*dx1 + y1_2*dx2");
        assert!(horizontalize(&Form::contact(s, 1, &[2]).unwrap()).unwrap().is_zero());
        assert!(horizontalize(&Form::contact(s, 1, &[2]).unwrap().to_coordinate().unwrap()).unwrap().is_zero());
        let (w0, _) = omega_forms(s).unwrap();
        let fw0 = w0.scale(&Expr::y(1, &[1]));
        assert!(horizontalize(&fw0).unwrap().equals(&fw0).unwrap());
    }

    #[test]
    fn contact_component_examples() {
        let s = sp(2, 2);
        let a = wedge(&Form::dy(s, 1, &[]).unwrap(), &Form::dx(s, 2).unwrap()).unwrap();
        assert_eq!(contact_component(&a, 1).unwrap().to_string(), "w1^dx2");
        assert!(contact_component(&a, 0).unwrap().equals(&horizontalize(&a).unwrap()).unwrap());
        let b = wedge(&Form::dy(s, 1, &[]).unwrap(), &Form::dy(s, 2, &[]).unwrap()).unwrap();
        assert_eq!(contact_component(&b, 2).unwrap().to_string(), "w1^w2");
        assert!(contact_component(&b, 3).is_err());
    }

    #[test]
    fn contact_view_prints_horizontal_first() {
        let s = sp(2, 1);
        let theta = wedge(&Form::dy(s, 1, &[]).unwrap(), &Form::dx(s, 2).unwrap()).unwrap();
        assert_eq!(theta.to_string(), "dy1^dx2");
        assert_eq!(theta.to_contact().unwrap().to_string(), "y1_1*dx1^dx2 + w1^dx2");
    }

    #[test]
    fn pullback_examples() {
        let s = sp(1, 1);
        let id = |_: &Atom| None;
        let rho = wedge(&f(s, 1, Expr::y(1, &[1])), &Form::dy(s, 1, &[]).unwrap()).unwrap();
        assert!(pullback_by(&rho, &id, 1).unwrap().equals(&rho).unwrap());
        let scale = |a: &Atom| (*a == Atom::X(1)).then(|| Expr::x(1).scale(&crate::Rational::from_int(2)));
        let pulled = pullback_by(&Form::dx(s, 1).unwrap(), &scale, 0).unwrap();
        assert_eq!(pulled.to_string(), "2*dx1");
    }

    #[test]
    fn omega_examples() {
        let s = sp(2, 1);
        let (w0, w) = omega_forms(s).unwrap();
        assert_eq!(w[0].to_string(), "dx2");
        assert_eq!(w[1].to_string(), "-dx1");
        assert!(wedge(&Form::dx(s, 1).unwrap(), &w[0]).unwrap().equals(&w0).unwrap());
        assert!(wedge(&Form::dx(s, 2).unwrap(), &w[0]).unwrap().is_zero());
        for n in 1..=4 {
            let s = sp(n, 1);
            let (w0, w) = omega_forms(s).unwrap();
            for k in 1..=n as u8 {
                for j in 1..=n {
                    let p = wedge(&Form::dx(s, k).unwrap(), &w[j - 1]).unwrap();
                    if k as usize == j {
                        assert!(p.equals(&w0).unwrap());
                    } else {
                        assert!(p.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn lie_examples() {
        let s = sp(2, 1);
        let x1dx2 = wedge(&f(s, 0, Expr::x(1)), &Form::dx(s, 2).unwrap()).unwrap();
        let l = lie_derivative(&VectorField::partial_x(s, 1), &x1dx2).unwrap();
        assert!(l.equals(&Form::dx(s, 2).unwrap()).unwrap());
        let (w0, _) = omega_forms(s).unwrap();
        assert!(lie_derivative(&VectorField::formal(s, 1, 1).unwrap(), &w0).unwrap().is_zero());
    }
}
