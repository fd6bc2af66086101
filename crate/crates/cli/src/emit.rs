//! Output documents and their text, LaTeX and s-expression renderings.

use lepage_core::exterior::{Basis, Covector, Form};
use lepage_core::lepage::Decomposable;
use lepage_core::{Atom, Expr, Monomial, Rational};
use lepage_core::kernel::{registry, simplify};

use crate::sexpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Latex,
    Sexpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum PrintBasis {
    #[default]
    Contact,
    Coordinate,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Expr(Expr),
    Form(Form),
    Decomposable(Decomposable),
    /// Outcome of a check.
    Flag(bool),
    Note(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub label: String,
    pub payload: Payload,
}

impl Section {
    pub fn new(label: impl Into<String>, payload: Payload) -> Self {
        Section { label: label.into(), payload }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutputDocument {
    pub format: Format,
    pub basis: PrintBasis,
    pub sections: Vec<Section>,
}

impl OutputDocument {
    pub fn push(&mut self, label: impl Into<String>, payload: Payload) {
        self.sections.push(Section::new(label, payload));
    }
}

/// The form re-expressed in the printing basis with simplified
/// coefficients. Forms already in that basis are not converted.
pub fn in_basis(f: &Form, basis: PrintBasis) -> lepage_core::Result<Form> {
    let f = match (basis, f.basis()) {
        (PrintBasis::Contact, Basis::Contact) | (PrintBasis::Coordinate, Basis::Coordinate) => f.clone(),
        (PrintBasis::Contact, Basis::Coordinate) => f.to_contact()?,
        (PrintBasis::Coordinate, Basis::Contact) => f.to_coordinate()?,
    };
    let terms: Vec<_> = f.terms().map(|(w, c)| (w.clone(), simplify(c))).collect();
    Form::from_terms(*f.space(), f.degree(), f.order(), f.basis(), terms)
}

/// The decomposable form with simplified prefactor and factors.
pub fn tidy(d: &Decomposable, basis: PrintBasis) -> lepage_core::Result<Decomposable> {
    Ok(Decomposable {
        prefactor: simplify(&d.prefactor),
        factors: d.factors.iter().map(|f| in_basis(f, basis)).collect::<lepage_core::Result<_>>()?,
    })
}

pub fn emit(doc: &OutputDocument) -> lepage_core::Result<String> {
    let mut out = String::new();
    for s in &doc.sections {
        let line = match doc.format {
            Format::Text => text_section(s, doc.basis)?,
            Format::Latex => latex_section(s, doc.basis)?,
            Format::Sexpr => sexpr_section(s, doc.basis)?,
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn flag(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

pub fn text_decomposable(d: &Decomposable, basis: PrintBasis) -> lepage_core::Result<String> {
    let d = tidy(d, basis)?;
    let factors: Vec<String> = d.factors.iter().map(|f| format!("({f})")).collect();
    let body = factors.join("^");
    Ok(if d.prefactor.is_one() { body } else { format!("({})*{body}", d.prefactor) })
}

fn text_section(s: &Section, basis: PrintBasis) -> lepage_core::Result<String> {
    Ok(match &s.payload {
        Payload::Expr(e) => format!("{} = {}", s.label, simplify(e)),
        Payload::Form(f) => format!("{} = {}", s.label, in_basis(f, basis)?),
        Payload::Decomposable(d) => format!("{} = {}", s.label, text_decomposable(d, basis)?),
        Payload::Flag(b) => format!("{}: {}", s.label, flag(*b)),
        Payload::Note(n) => format!("# {}{n}", if s.label.is_empty() { String::new() } else { format!("{}: ", s.label) }),
    })
}

fn sexpr_section(s: &Section, basis: PrintBasis) -> lepage_core::Result<String> {
    let body = match &s.payload {
        Payload::Expr(e) => sexpr::expr(&simplify(e)),
        Payload::Form(f) => sexpr::form(&in_basis(f, basis)?),
        Payload::Decomposable(d) => sexpr::decomposable(&tidy(d, basis)?),
        Payload::Flag(b) => flag(*b).to_string(),
        Payload::Note(n) => return Ok(format!("; {}{n}", if s.label.is_empty() { String::new() } else { format!("{}: ", s.label) })),
    };
    Ok(format!("({} {body})", s.label))
}

fn latex_section(s: &Section, basis: PrintBasis) -> lepage_core::Result<String> {
    let label = format!("\\mathrm{{{}}}", s.label.replace('-', "\\text{-}"));
    Ok(match &s.payload {
        Payload::Expr(e) => format!("{label} = {}", latex_expr(&simplify(e))),
        Payload::Form(f) => format!("{label} = {}", latex_form(&in_basis(f, basis)?)),
        Payload::Decomposable(d) => {
            let d = tidy(d, basis)?;
            let mut parts = Vec::new();
            if !d.prefactor.is_one() {
                parts.push(format!("\\left({}\\right)", latex_expr(&d.prefactor)));
            }
            let factors: Vec<String> = d
                .factors
                .iter()
                .map(|f| format!("\\left({}\\right)", latex_form(f)))
                .collect();
            parts.push(factors.join(" \\wedge "));
            format!("{label} = {}", parts.join(" "))
        }
        Payload::Flag(b) => format!("{label} \\;\\text{{{}}}", flag(*b)),
        Payload::Note(n) => format!("% {}{n}", if s.label.is_empty() { String::new() } else { format!("{}: ", s.label) }),
    })
}

fn latex_indices(j: &lepage_core::MultiIndex) -> String {
    if j.is_empty() {
        String::new()
    } else {
        format!("_{{{j}}}")
    }
}

fn latex_atom(a: &Atom) -> String {
    match a {
        Atom::X(i) => format!("x^{{{i}}}"),
        Atom::Y(s, j) => format!("y^{{{s}}}{}", latex_indices(j)),
        Atom::Inv(id) => format!("\\left({}\\right)^{{-1}}", latex_expr(&registry::inv_poly(*id))),
        Atom::Sqrt(id) => format!("\\sqrt{{{}}}", latex_expr(&registry::sqrt_poly(*id))),
        Atom::Opaque(_) => format!("\\mathrm{{{a}}}"),
    }
}

fn latex_monomial(m: &Monomial) -> String {
    m.factors()
        .iter()
        .map(|(a, k)| {
            let base = latex_atom(a);
            match (k, a) {
                (1, _) => base,
                (_, Atom::X(_) | Atom::Y(..) | Atom::Opaque(_)) => format!("\\left({base}\\right)^{{{k}}}"),
                _ => format!("{base}^{{{k}}}"),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn latex_rational(r: &Rational) -> String {
    let (n, d) = r.parts();
    if d == "1" {
        n
    } else {
        format!("\\frac{{{n}}}{{{d}}}")
    }
}

pub fn latex_expr(e: &Expr) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (m, c)) in e.terms().iter().enumerate() {
        let neg = c.is_negative();
        out.push_str(match (k, neg) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        let mag = c.abs();
        if m.is_one() {
            out.push_str(&latex_rational(&mag));
        } else if mag.is_one() {
            out.push_str(&latex_monomial(m));
        } else {
            out.push_str(&format!("{} {}", latex_rational(&mag), latex_monomial(m)));
        }
    }
    out
}

fn latex_covector(c: &Covector) -> String {
    match c {
        Covector::Dx(i) => format!("dx^{{{i}}}"),
        Covector::Dy(s, j) => format!("dy^{{{s}}}{}", latex_indices(j)),
        Covector::W(s, j) => format!("\\omega^{{{s}}}{}", latex_indices(j)),
    }
}

pub fn latex_form(f: &Form) -> String {
    if f.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (w, c)) in f.display_terms().into_iter().enumerate() {
        let (neg, body) = match c.terms() {
            [(_, r)] if r.is_negative() => (true, -c),
            _ => (false, c.clone()),
        };
        out.push_str(match (k, neg) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        let coef = if body.len() > 1 { format!("\\left({}\\right)", latex_expr(&body)) } else { latex_expr(&body) };
        let wedge = w.factors().iter().map(latex_covector).collect::<Vec<_>>().join(" \\wedge ");
        match (w.degree(), body.is_one()) {
            (0, _) => out.push_str(&coef),
            (_, true) => out.push_str(&wedge),
            _ => out.push_str(&format!("{coef} \\, {wedge}")),
        }
    }
    out
}
