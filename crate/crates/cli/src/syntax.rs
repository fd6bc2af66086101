//! Tokenizer and recursive-descent parser for expressions and forms.
//!
//! One grammar covers both: covector symbols (`dx1`, `dy1_2`, `w1_2`) make a
//! subtree a form, `*` between forms is the wedge product and `^` after a
//! form is a wedge rather than a power.

use std::str::FromStr;

use lepage_core::exterior::{wedge, Form};
use lepage_core::kernel::{normalize, RawExpr};
use lepage_core::{Atom, Expr, JetSpace, Rational};

use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Int(String),
    Ident(String),
    Op(char),
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub col: usize,
}

pub fn tokenize(line: &str, lineno: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Spanned { tok: Tok::Int(chars[start..i].iter().collect()), col });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        if "+-*/^(),;".contains(c) {
            out.push(Spanned { tok: Tok::Op(c), col });
            i += 1;
            continue;
        }
        return Err(ParseError::new(lineno, col, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

/// Parsed symbol: a coordinate atom or a basis covector.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Symbol {
    Atom(Atom),
    Dx(u8),
    Dy(u16, Atom),
    W(u16, Atom),
}

/// Syntax tree before normalization.
#[derive(Clone, Debug)]
enum Node {
    Num(Rational),
    Sym(Symbol),
    Add(Vec<Node>),
    Neg(Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Wedge(Box<Node>, Box<Node>),
    Sqrt(Box<Node>),
    Inv(Box<Node>),
}

impl Node {
    fn is_form(&self) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Sym(s) => !matches!(s, Symbol::Atom(_)),
            Node::Add(v) => v.iter().any(Node::is_form),
            Node::Neg(a) | Node::Pow(a, _) | Node::Sqrt(a) | Node::Inv(a) => a.is_form(),
            Node::Mul(a, b) | Node::Div(a, b) | Node::Wedge(a, b) => a.is_form() || b.is_form(),
        }
    }
}

/// Splits `y12_213` into fiber label and sorted derivative indices, checking
/// both against the space.
fn split_jet(body: &str, n: usize, m: usize, lineno: usize, col: usize) -> Result<(u16, Vec<u8>), ParseError> {
    let (label, digits) = match body.split_once('_') {
        Some((l, d)) => (l, Some(d)),
        None => (body, None),
    };
    let bad = || ParseError::new(lineno, col, format!("malformed jet symbol `{body}`"));
    if label.is_empty() || !label.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let sigma: usize = label.parse().map_err(|_| bad())?;
    if sigma == 0 || sigma > m {
        return Err(ParseError::new(lineno, col, format!("fiber index {sigma} exceeds fiber dimension {m}")));
    }
    let mut idx = Vec::new();
    if let Some(d) = digits {
        if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        for b in d.bytes() {
            let k = (b - b'0') as usize;
            if k == 0 || k > n {
                return Err(ParseError::new(lineno, col, format!("index {k} exceeds base dimension {n}")));
            }
            idx.push(k as u8);
        }
        if idx.len() >= lepage_core::kernel::MAX_ORDER {
            return Err(ParseError::new(lineno, col, "jet order too large"));
        }
    }
    idx.sort_unstable();
    Ok((sigma as u16, idx))
}

fn symbol(word: &str, space: &JetSpace, lineno: usize, col: usize) -> Result<Option<Symbol>, ParseError> {
    let (n, m) = (space.n as usize, space.m as usize);
    let base_index = |rest: &str| -> Result<u8, ParseError> {
        let i: usize = rest.parse().map_err(|_| ParseError::new(lineno, col, format!("malformed symbol `{word}`")))?;
        if i == 0 || i > n {
            return Err(ParseError::new(lineno, col, format!("index {i} exceeds base dimension {n}")));
        }
        Ok(i as u8)
    };
    let digit_start = |rest: &str| rest.as_bytes().first().is_some_and(u8::is_ascii_digit);
    if let Some(rest) = word.strip_prefix("dx").filter(|r| digit_start(r)) {
        return Ok(Some(Symbol::Dx(base_index(rest)?)));
    }
    if let Some(rest) = word.strip_prefix("dy").filter(|r| digit_start(r)) {
        let (s, j) = split_jet(rest, n, m, lineno, col)?;
        return Ok(Some(Symbol::Dy(s, Atom::y(s, &j))));
    }
    if let Some(rest) = word.strip_prefix('w').filter(|r| digit_start(r)) {
        let (s, j) = split_jet(rest, n, m, lineno, col)?;
        return Ok(Some(Symbol::W(s, Atom::y(s, &j))));
    }
    if let Some(rest) = word.strip_prefix('x').filter(|r| digit_start(r)) {
        return Ok(Some(Symbol::Atom(Atom::x(base_index(rest)?))));
    }
    if let Some(rest) = word.strip_prefix('y').filter(|r| digit_start(r)) {
        let (s, j) = split_jet(rest, n, m, lineno, col)?;
        return Ok(Some(Symbol::Atom(Atom::y(s, &j))));
    }
    Ok(None)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
    space: &'a JetSpace,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), msg)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut parts = vec![self.product()?];
        loop {
            if self.eat('+') {
                parts.push(self.product()?);
            } else if self.eat('-') {
                parts.push(Node::Neg(Box::new(self.product()?)));
            } else {
                break;
            }
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Node::Add(parts) })
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = Node::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat('/') {
                acc = Node::Div(Box::new(acc), Box::new(self.unary()?));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let mut base = self.primary()?;
        while self.eat('^') {
            if base.is_form() {
                base = Node::Wedge(Box::new(base), Box::new(self.primary()?));
            } else {
                base = Node::Pow(Box::new(base), self.exponent()?);
            }
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let col = self.col();
        let v = match self.peek() {
            Some(Tok::Int(s)) => s.parse::<i32>().map_err(|_| ParseError::new(self.line, col, "exponent too large"))?,
            _ => return Err(self.err("expected integer exponent")),
        };
        self.pos += 1;
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -v } else { v })
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(s)) => {
                self.pos += 1;
                let r = Rational::from_str(&s).map_err(|_| ParseError::new(self.line, col, "bad number"))?;
                Ok(Node::Num(r))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                if w == "sqrt" || w == "inv" {
                    self.expect('(')?;
                    let e = self.sum()?;
                    self.expect(')')?;
                    if e.is_form() {
                        return Err(ParseError::new(self.line, col, format!("`{w}` of a form")));
                    }
                    return Ok(if w == "sqrt" { Node::Sqrt(Box::new(e)) } else { Node::Inv(Box::new(e)) });
                }
                match symbol(&w, self.space, self.line, col)? {
                    Some(s) => Ok(Node::Sym(s)),
                    None => Err(ParseError::new(self.line, col, format!("unknown symbol `{w}`"))),
                }
            }
            Some(Tok::Op(c)) => Err(ParseError::new(self.line, col, format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn raw(node: &Node) -> RawExpr {
    match node {
        Node::Num(r) => RawExpr::Num(r.clone()),
        Node::Sym(Symbol::Atom(a)) => RawExpr::Atom(*a),
        Node::Add(v) => RawExpr::Add(v.iter().map(raw).collect()),
        Node::Neg(a) => RawExpr::Neg(Box::new(raw(a))),
        Node::Mul(a, b) => RawExpr::Mul(vec![raw(a), raw(b)]),
        Node::Div(a, b) => RawExpr::Div(Box::new(raw(a)), Box::new(raw(b))),
        Node::Pow(a, k) => RawExpr::Pow(Box::new(raw(a)), *k),
        Node::Sqrt(a) => RawExpr::Sqrt(Box::new(raw(a))),
        Node::Inv(a) => RawExpr::Inv(Box::new(raw(a))),
        Node::Sym(_) | Node::Wedge(..) => unreachable!("form node in scalar context"),
    }
}

fn jet_of(a: &Atom) -> (u16, Vec<u8>) {
    match a {
        Atom::Y(s, j) => (*s, j.entries().to_vec()),
        _ => unreachable!(),
    }
}

/// Evaluates a tree into a form; scalar subtrees become 0-forms.
fn form_of(node: &Node, space: &JetSpace) -> lepage_core::Result<Form> {
    if !node.is_form() {
        let e = normalize(&raw(node), space)?;
        let order = e.jet_order();
        return Form::scalar(*space, order, e);
    }
    match node {
        Node::Sym(Symbol::Dx(i)) => Form::dx(*space, *i),
        Node::Sym(Symbol::Dy(_, a)) => {
            let (s, j) = jet_of(a);
            Form::dy(*space, s, &j)
        }
        Node::Sym(Symbol::W(_, a)) => {
            let (s, j) = jet_of(a);
            Form::contact(*space, s, &j)
        }
        Node::Add(v) => {
            let mut acc = form_of(&v[0], space)?;
            for p in &v[1..] {
                acc = acc.add(&form_of(p, space)?)?;
            }
            Ok(acc)
        }
        Node::Neg(a) => Ok(form_of(a, space)?.neg()),
        Node::Mul(a, b) | Node::Wedge(a, b) => wedge(&form_of(a, space)?, &form_of(b, space)?),
        Node::Div(a, b) => {
            if b.is_form() {
                return Err(lepage_core::Error::Precondition("division by a form".into()));
            }
            let d = normalize(&raw(b), space)?;
            Ok(form_of(a, space)?.scale(&lepage_core::kernel::registry::inverse(&d)?))
        }
        _ => unreachable!("scalar-only nodes handled above"),
    }
}

fn parse_tree(text: &str, lineno: usize, col0: usize, space: &JetSpace) -> Result<Node, ParseError> {
    let mut toks = tokenize(text, lineno)?;
    for t in &mut toks {
        t.col += col0;
    }
    let end_col = col0 + text.chars().count() + 1;
    let mut p = Parser { toks: &toks, pos: 0, line: lineno, end_col, space };
    let node = p.sum()?;
    if p.pos < toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(node)
}

/// Parses one scalar expression. `lineno` and `col0` place error positions
/// inside a larger source.
pub fn parse_expr_at(text: &str, lineno: usize, col0: usize, space: &JetSpace) -> Result<Expr, ParseError> {
    let node = parse_tree(text, lineno, col0, space)?;
    if node.is_form() {
        return Err(ParseError::new(lineno, col0 + 1, "expected a function, found a form"));
    }
    normalize(&raw(&node), space).map_err(|e| ParseError::new(lineno, col0 + 1, e.to_string()))
}

pub fn parse_expr(text: &str, space: &JetSpace) -> Result<Expr, ParseError> {
    parse_expr_at(text, 1, 0, space)
}

/// Parses a form written in either basis (or a mix of both).
pub fn parse_form(text: &str, space: &JetSpace) -> Result<Form, ParseError> {
    let node = parse_tree(text, 1, 0, space)?;
    form_of(&node, space).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp() -> JetSpace {
        JetSpace::new(2, 1, 4).unwrap()
    }

    #[test]
    fn indices_sorted() {
        assert_eq!(parse_expr("y1_21", &sp()).unwrap(), Expr::y(1, &[1, 2]));
    }

    #[test]
    fn out_of_range_index_reports_column() {
        let e = parse_expr("y1_1 + y1_3", &sp()).unwrap_err();
        assert_eq!((e.line, e.col), (1, 8));
        assert!(e.msg.contains("index 3 exceeds base dimension"));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("-x1^2 + 2*x2/4 - (1/2)", &sp()).unwrap();
        let want = &(&-Expr::x(1).pow(2) + &Expr::x(2).scale(&Rational::new(1, 2))) - &Expr::rational(1, 2);
        assert_eq!(e, want);
        assert!(parse_expr("x1^-1*x1", &sp()).is_err());
        assert_eq!(parse_expr("x1-x2", &sp()).unwrap(), &Expr::x(1) - &Expr::x(2));
    }

    #[test]
    fn forms_in_both_bases_agree() {
        let a = parse_form("dy1^dx2", &sp()).unwrap();
        let b = parse_form("y1_1*dx1^dx2 + w1^dx2", &sp()).unwrap();
        assert!(a.equals(&b).unwrap());
        assert_eq!(a.degree(), 2);
    }

    #[test]
    fn scalar_where_form_expected_is_a_zero_form() {
        assert_eq!(parse_form("x1*y1", &sp()).unwrap().degree(), 0);
        assert!(parse_expr("x1*dx1", &sp()).is_err());
    }
}
