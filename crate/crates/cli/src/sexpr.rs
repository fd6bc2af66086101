//! S-expression rendering of expressions and forms, and the reader that
//! takes it back.
//!
//! ```text
//! (+ (* 1/2 (^ y1_1 2)) (* 1/2 (^ y1_2 2)))
//! (form 2 (term y1_1 dx1 dx2) (term 1 w1 dx2))
//! ```

use std::str::FromStr;

use lepage_core::exterior::{wedge, Covector, Form};
use lepage_core::kernel::{normalize, registry, RawExpr};
use lepage_core::lepage::Decomposable;
use lepage_core::{Atom, Expr, JetSpace, Rational};

use crate::error::ParseError;

fn atom(a: &Atom) -> String {
    match a {
        Atom::Inv(id) => format!("(inv {})", expr(&registry::inv_poly(*id))),
        Atom::Sqrt(id) => format!("(sqrt {})", expr(&registry::sqrt_poly(*id))),
        other => other.to_string(),
    }
}

pub fn expr(e: &Expr) -> String {
    let terms: Vec<String> = e
        .terms()
        .iter()
        .map(|(m, c)| {
            let mut parts = Vec::new();
            if !c.is_one() || m.is_one() {
                parts.push(c.to_string());
            }
            for (a, k) in m.factors() {
                parts.push(if *k == 1 { atom(a) } else { format!("(^ {} {k})", atom(a)) });
            }
            if parts.len() == 1 {
                parts.pop().unwrap()
            } else {
                format!("(* {})", parts.join(" "))
            }
        })
        .collect();
    match terms.len() {
        0 => "0".into(),
        1 => terms.into_iter().next().unwrap(),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

/// `(form <degree> (term <coef> <covector>...)...)`, monomials in the
/// form's own basis and canonical order.
pub fn form(f: &Form) -> String {
    let mut out = format!("(form {}", f.degree());
    for (w, c) in f.display_terms() {
        out.push_str(&format!(" (term {}", expr(c)));
        for cv in w.factors() {
            out.push_str(&format!(" {cv}"));
        }
        out.push(')');
    }
    out.push(')');
    out
}

pub fn decomposable(d: &Decomposable) -> String {
    let mut out = format!("(decomposable {}", expr(&d.prefactor));
    for f in &d.factors {
        out.push(' ');
        out.push_str(&form(f));
    }
    out.push(')');
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tree {
    Word(String, usize),
    List(Vec<Tree>, usize),
}

impl Tree {
    fn col(&self) -> usize {
        match self {
            Tree::Word(_, c) | Tree::List(_, c) => *c,
        }
    }
}

/// Reads one s-expression; columns are 1-based on a single line.
pub fn read(text: &str) -> Result<Tree, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let t = read_at(&chars, &mut pos)?;
    skip_ws(&chars, &mut pos);
    if pos < chars.len() {
        return Err(ParseError::new(1, pos + 1, "trailing input after s-expression"));
    }
    Ok(t)
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn read_at(chars: &[char], pos: &mut usize) -> Result<Tree, ParseError> {
    skip_ws(chars, pos);
    let col = *pos + 1;
    match chars.get(*pos) {
        None => Err(ParseError::new(1, col, "unexpected end of s-expression")),
        Some(')') => Err(ParseError::new(1, col, "unexpected `)`")),
        Some('(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    Some(')') => {
                        *pos += 1;
                        return Ok(Tree::List(items, col));
                    }
                    None => return Err(ParseError::new(1, *pos + 1, "unclosed `(`")),
                    _ => items.push(read_at(chars, pos)?),
                }
            }
        }
        Some(_) => {
            let start = *pos;
            while *pos < chars.len() && !chars[*pos].is_whitespace() && chars[*pos] != '(' && chars[*pos] != ')' {
                *pos += 1;
            }
            Ok(Tree::Word(chars[start..*pos].iter().collect(), col))
        }
    }
}

fn word_atom(w: &str, col: usize, space: &JetSpace) -> Result<RawExpr, ParseError> {
    if w.starts_with(|c: char| c.is_ascii_digit() || c == '-') {
        return Rational::from_str(w).map(RawExpr::Num).map_err(|e| ParseError::new(1, col, e.to_string()));
    }
    let e = crate::syntax::parse_expr_at(w, 1, col - 1, space)?;
    match e.terms() {
        [(m, c)] if c.is_one() && m.factors().len() == 1 && m.factors()[0].1 == 1 => Ok(RawExpr::Atom(m.factors()[0].0)),
        _ => Err(ParseError::new(1, col, format!("`{w}` is not an atom"))),
    }
}

fn raw(t: &Tree, space: &JetSpace) -> Result<RawExpr, ParseError> {
    match t {
        Tree::Word(w, col) => word_atom(w, *col, space),
        Tree::List(items, col) => {
            let head = match items.first() {
                Some(Tree::Word(h, _)) => h.as_str(),
                _ => return Err(ParseError::new(1, *col, "expected an operator")),
            };
            let args = &items[1..];
            let arity = |k: usize| {
                if args.len() == k {
                    Ok(())
                } else {
                    Err(ParseError::new(1, *col, format!("`{head}` takes {k} argument(s)")))
                }
            };
            match head {
                "+" => Ok(RawExpr::Add(args.iter().map(|a| raw(a, space)).collect::<Result<_, _>>()?)),
                "*" => Ok(RawExpr::Mul(args.iter().map(|a| raw(a, space)).collect::<Result<_, _>>()?)),
                "-" if args.len() == 1 => Ok(RawExpr::Neg(Box::new(raw(&args[0], space)?))),
                "/" => {
                    arity(2)?;
                    Ok(RawExpr::Div(Box::new(raw(&args[0], space)?), Box::new(raw(&args[1], space)?)))
                }
                "^" => {
                    arity(2)?;
                    let k = match &args[1] {
                        Tree::Word(w, c) => w.parse::<i32>().map_err(|_| ParseError::new(1, *c, "bad exponent"))?,
                        other => return Err(ParseError::new(1, other.col(), "bad exponent")),
                    };
                    Ok(RawExpr::Pow(Box::new(raw(&args[0], space)?), k))
                }
                "inv" => {
                    arity(1)?;
                    Ok(RawExpr::Inv(Box::new(raw(&args[0], space)?)))
                }
                "sqrt" => {
                    arity(1)?;
                    Ok(RawExpr::Sqrt(Box::new(raw(&args[0], space)?)))
                }
                other => Err(ParseError::new(1, *col, format!("unknown operator `{other}`"))),
            }
        }
    }
}

fn tree_expr(t: &Tree, space: &JetSpace) -> Result<Expr, ParseError> {
    normalize(&raw(t, space)?, space).map_err(|e| ParseError::new(1, t.col(), e.to_string()))
}

pub fn parse_expr(text: &str, space: &JetSpace) -> Result<Expr, ParseError> {
    tree_expr(&read(text)?, space)
}

fn covector_form(w: &str, col: usize, space: &JetSpace) -> Result<Form, ParseError> {
    let f = crate::syntax::parse_form(w, space).map_err(|e| ParseError::new(1, col, e.msg))?;
    let single = f.degree() == 1
        && f.len() == 1
        && f.terms().all(|(wd, c)| c.is_one() && matches!(wd.factors(), [Covector::Dx(_) | Covector::Dy(..) | Covector::W(..)]));
    if single {
        Ok(f)
    } else {
        Err(ParseError::new(1, col, format!("`{w}` is not a basis covector")))
    }
}

fn tree_form(t: &Tree, space: &JetSpace) -> Result<Form, ParseError> {
    let err = |col: usize, msg: &str| ParseError::new(1, col, msg.to_string());
    let lib = |col: usize| move |e: lepage_core::Error| ParseError::new(1, col, e.to_string());
    let Tree::List(items, col) = t else {
        return Err(err(t.col(), "expected `(form ...)`"));
    };
    let degree = match items.as_slice() {
        [Tree::Word(h, _), Tree::Word(d, dc), ..] if h == "form" => {
            d.parse::<usize>().map_err(|_| err(*dc, "bad degree"))?
        }
        _ => return Err(err(*col, "expected `(form <degree> ...)`")),
    };
    let mut acc = Form::zero(*space, degree, 0).map_err(lib(*col))?;
    for item in &items[2..] {
        let Tree::List(parts, tc) = item else {
            return Err(err(item.col(), "expected `(term ...)`"));
        };
        match parts.first() {
            Some(Tree::Word(h, _)) if h == "term" && parts.len() >= 2 => {}
            _ => return Err(err(*tc, "expected `(term <coef> <covector>...)`")),
        }
        let coef = tree_expr(&parts[1], space)?;
        let mut f = Form::scalar(*space, coef.jet_order(), coef).map_err(lib(*tc))?;
        for p in &parts[2..] {
            let Tree::Word(w, wc) = p else {
                return Err(err(p.col(), "expected a covector"));
            };
            f = wedge(&f, &covector_form(w, *wc, space)?).map_err(lib(*wc))?;
        }
        acc = acc.add(&f).map_err(lib(*tc))?;
    }
    Ok(acc)
}

pub fn parse_form(text: &str, space: &JetSpace) -> Result<Form, ParseError> {
    tree_form(&read(text)?, space)
}

/// Reads a decomposable form; the result is the prefactor and the factors.
pub fn parse_decomposable(text: &str, space: &JetSpace) -> Result<Decomposable, ParseError> {
    let t = read(text)?;
    let Tree::List(items, col) = &t else {
        return Err(ParseError::new(1, 1, "expected `(decomposable ...)`"));
    };
    match items.first() {
        Some(Tree::Word(h, _)) if h == "decomposable" && items.len() >= 2 => {}
        _ => return Err(ParseError::new(1, *col, "expected `(decomposable <prefactor> <form>...)`")),
    }
    let prefactor = tree_expr(&items[1], space)?;
    let factors = items[2..].iter().map(|f| tree_form(f, space)).collect::<Result<_, _>>()?;
    Ok(Decomposable { prefactor, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_expressions() {
        let sp = JetSpace::new(2, 1, 3).unwrap();
        let e = crate::syntax::parse_expr("(1/2)*(y1_1^2 + y1_2^2) - 3*x1", &sp).unwrap();
        assert_eq!(expr(&e), "(+ (* -3 x1) (* 1/2 (^ y1_1 2)) (* 1/2 (^ y1_2 2)))");
        assert_eq!(parse_expr(&expr(&e), &sp).unwrap(), e);
        assert_eq!(expr(&Expr::zero()), "0");
        assert_eq!(expr(&Expr::rational(-3, 2)), "-3/2");
    }

    #[test]
    fn renders_forms() {
        let sp = JetSpace::new(2, 1, 3).unwrap();
        let f = crate::syntax::parse_form("y1_1*dx1^dx2 + w1^dx2", &sp).unwrap();
        assert_eq!(form(&f), "(form 2 (term 1 dy1 dx2))");
        let f = f.to_contact().unwrap();
        let s = form(&f);
        assert_eq!(s, "(form 2 (term y1_1 dx1 dx2) (term 1 w1 dx2))");
        assert!(parse_form(&s, &sp).unwrap().equals(&f).unwrap());
    }

    #[test]
    fn reader_errors_have_columns() {
        let sp = JetSpace::new(2, 1, 3).unwrap();
        assert_eq!(parse_expr("(+ x1 (* 2 x3))", &sp).unwrap_err().col, 12);
        assert!(parse_expr("(+ x1", &sp).is_err());
        assert!(parse_form("(form 1 (term 1 x1))", &sp).is_err());
    }
}
