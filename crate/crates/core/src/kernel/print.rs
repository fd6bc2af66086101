//! Plain-text rendering of atoms and expressions.
//!
//! The output is accepted back by the problem-file expression grammar.

use std::fmt;

use super::atom::Atom;
use super::expr::{Expr, Monomial};
use super::registry;

pub fn atom_to_string(a: &Atom) -> String {
    match *a {
        Atom::X(i) => format!("x{i}"),
        Atom::Y(s, j) if j.is_empty() => format!("y{s}"),
        Atom::Y(s, j) => format!("y{s}_{j}"),
        Atom::Inv(id) => format!("inv({})", registry::inv_poly(id)),
        Atom::Sqrt(id) => format!("sqrt({})", registry::sqrt_poly(id)),
        Atom::Opaque(id) => registry::opaque_name(id),
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&atom_to_string(self))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (k, (a, e)) in self.factors().iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{a}")?;
            if *e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms().iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}
