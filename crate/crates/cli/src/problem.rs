//! Problem files: a jet space, a Lagrangian and optional chart transforms.
//!
//! ```text
//! base 2
//! fiber 1
//! order 1
//! lagrangian (1/2)*(y1_1^2 + y1_2^2)   # comments run to end of line
//! nonvanishing lagrangian
//! transform x1, x2 + x1^2/2 ; y1
//! ```
//!
//! `nonvanishing <expr>` registers any other denominator; `mode metric`
//! switches to metric jets over `base` dimensions for the Hilbert commands.

use lepage_core::charts::ChartTransform;
use lepage_core::kernel::{registry, MAX_ORDER};
use lepage_core::relativity::{MetricJetSpace, Signature};
use lepage_core::lepage::Lagrangian;
use lepage_core::{Expr, JetSpace};

use crate::error::ParseError;
use crate::syntax::{parse_expr_at, tokenize, Tok};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Generic,
    Metric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformSpec {
    pub line: usize,
    pub base_map: Vec<Expr>,
    pub fiber_map: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub base: usize,
    pub fiber: usize,
    pub order: usize,
    pub mode: Mode,
    pub space: JetSpace,
    pub lagrangian: Option<Expr>,
    pub nonvanishing_lagrangian: bool,
    /// Registered denominators other than the Lagrangian.
    pub nonvanishing: Vec<Expr>,
    pub transforms: Vec<TransformSpec>,
}

impl ProblemFile {
    /// The Lagrangian, declared nonvanishing when the file says so.
    pub fn lagrangian(&self) -> lepage_core::Result<Lagrangian> {
        let density = self
            .lagrangian
            .clone()
            .ok_or_else(|| lepage_core::Error::Precondition("problem has no lagrangian".into()))?;
        let l = Lagrangian::new(self.space, self.order, density)?;
        if self.nonvanishing_lagrangian {
            l.declare_nonvanishing()
        } else {
            Ok(l)
        }
    }

    pub fn chart_transforms(&self) -> lepage_core::Result<Vec<ChartTransform>> {
        self.transforms
            .iter()
            .map(|t| ChartTransform::new(self.space, t.base_map.clone(), t.fiber_map.clone()))
            .collect()
    }
}

struct Line<'a> {
    no: usize,
    keyword: &'a str,
    kw_col: usize,
    rest: &'a str,
    rest_col: usize,
}

fn split_lines(source: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (k, raw) in source.lines().enumerate() {
        let text = raw.split('#').next().unwrap_or("");
        let trimmed = text.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let kw_start = text.len() - trimmed.len();
        let kw_len = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let rest = &text[kw_start + kw_len..];
        out.push(Line {
            no: k + 1,
            keyword: &trimmed[..kw_len],
            kw_col: kw_start + 1,
            rest,
            rest_col: kw_start + kw_len,
        });
    }
    out
}

fn integer(line: &Line<'_>) -> Result<usize, ParseError> {
    let t = line.rest.trim();
    let col = line.rest_col + line.rest.len() - line.rest.trim_start().len() + 1;
    t.parse::<usize>()
        .map_err(|_| ParseError::new(line.no, col, format!("`{}` expects a positive integer", line.keyword)))
}

/// Parses a problem file. `order_cap` bounds the jet space; by default it is
/// `2r + 1` (at most the engine maximum), enough for every command.
pub fn parse_problem(source: &str, order_cap: Option<usize>) -> Result<ProblemFile, ParseError> {
    let lines = split_lines(source);
    let mut base = None;
    let mut fiber = None;
    let mut order = None;
    let mut mode = None;
    for l in &lines {
        let slot = match l.keyword {
            "base" => &mut base,
            "fiber" => &mut fiber,
            "order" => &mut order,
            "mode" => {
                let word = l.rest.trim();
                let m = match word {
                    "generic" => Mode::Generic,
                    "metric" => Mode::Metric,
                    _ => return Err(ParseError::new(l.no, l.rest_col + 2, format!("unknown mode `{word}`"))),
                };
                if mode.replace(m).is_some() {
                    return Err(ParseError::new(l.no, l.kw_col, "duplicate `mode`"));
                }
                continue;
            }
            "lagrangian" | "nonvanishing" | "transform" => continue,
            other => return Err(ParseError::new(l.no, l.kw_col, format!("unknown keyword `{other}`"))),
        };
        let v = integer(l)?;
        if v == 0 {
            return Err(ParseError::new(l.no, l.rest_col + 2, format!("`{}` must be positive", l.keyword)));
        }
        if slot.replace((v, l.no)).is_some() {
            return Err(ParseError::new(l.no, l.kw_col, format!("duplicate `{}`", l.keyword)));
        }
    }
    let mode = mode.unwrap_or_default();
    let (n, base_line) = base.ok_or_else(|| ParseError::new(1, 1, "missing `base`"))?;
    if n > 9 {
        return Err(ParseError::new(base_line, 1, "base dimension above 9 is not supported"));
    }

    let lag_lines: Vec<&Line<'_>> = lines.iter().filter(|l| l.keyword == "lagrangian").collect();
    if lag_lines.len() > 1 {
        return Err(ParseError::new(lag_lines[1].no, lag_lines[1].kw_col, "duplicate `lagrangian`"));
    }

    let (m, declared_order) = match mode {
        Mode::Generic => (fiber.map_or(1, |f| f.0), order.map(|o| o.0)),
        Mode::Metric => {
            let m = n * (n + 1) / 2;
            if let Some((f, no)) = fiber.filter(|f| f.0 != m) {
                return Err(ParseError::new(no, 1, format!("metric mode over base {n} has fiber {m}, not {f}")));
            }
            (m, Some(order.map_or(2, |o| o.0)))
        }
    };

    // Undeclared orders are read off the longest jet symbol in the text.
    let mut inferred = 1;
    if let Some(l) = lag_lines.first() {
        for t in tokenize(l.rest, l.no)? {
            if let Tok::Ident(w) = t.tok {
                if let Some((_, d)) = w.strip_prefix('y').and_then(|r| r.split_once('_')) {
                    inferred = inferred.max(d.len());
                }
            }
        }
    }
    let r = declared_order.unwrap_or(inferred);
    let cap = order_cap.unwrap_or((2 * r + 1).min(MAX_ORDER - 1));
    if cap < r {
        return Err(ParseError::new(order.map_or(1, |o| o.1), 1, format!("order cap {cap} below order {r}")));
    }
    let space = match mode {
        Mode::Generic => JetSpace::new(n, m, cap),
        Mode::Metric => MetricJetSpace::new(n, Signature::Riemannian, cap).map(|s| s.space()),
    }
    .map_err(|e| ParseError::new(base_line, 1, e.to_string()))?;

    let mut nonvanishing_lagrangian = false;
    let mut nonvanishing = Vec::new();
    for l in lines.iter().filter(|l| l.keyword == "nonvanishing") {
        if l.rest.trim() == "lagrangian" {
            nonvanishing_lagrangian = true;
            continue;
        }
        let e = parse_expr_at(l.rest, l.no, l.rest_col, &space)?;
        registry::register_nonvanishing(&e).map_err(|err| ParseError::new(l.no, l.rest_col + 1, err.to_string()))?;
        nonvanishing.push(e);
    }

    let lagrangian = match lag_lines.first() {
        Some(l) => {
            let e = parse_expr_at(l.rest, l.no, l.rest_col, &space)?;
            if e.jet_order() > r {
                return Err(ParseError::new(
                    l.no,
                    l.rest_col + 1,
                    format!("lagrangian has jet order {} above declared order {r}", e.jet_order()),
                ));
            }
            Some(e)
        }
        None => None,
    };
    if nonvanishing_lagrangian && lagrangian.is_none() {
        return Err(ParseError::new(1, 1, "`nonvanishing lagrangian` without a lagrangian"));
    }

    let mut transforms = Vec::new();
    for l in lines.iter().filter(|l| l.keyword == "transform") {
        transforms.push(parse_transform(l, &space)?);
    }

    Ok(ProblemFile {
        base: n,
        fiber: m,
        order: r,
        mode,
        space,
        lagrangian,
        nonvanishing_lagrangian,
        nonvanishing,
        transforms,
    })
}

fn parse_transform(l: &Line<'_>, space: &JetSpace) -> Result<TransformSpec, ParseError> {
    let Some((b, f)) = l.rest.split_once(';') else {
        return Err(ParseError::new(l.no, l.kw_col, "transform needs `base maps ; fiber maps`"));
    };
    let pieces = |text: &str, offset: usize| -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        let mut col = offset;
        for part in text.split(',') {
            out.push(parse_expr_at(part, l.no, col, space)?);
            col += part.len() + 1;
        }
        Ok(out)
    };
    let base_map = pieces(b, l.rest_col)?;
    let fiber_map = pieces(f, l.rest_col + b.len() + 1)?;
    if base_map.len() != space.n as usize || fiber_map.len() != space.m as usize {
        return Err(ParseError::new(
            l.no,
            l.kw_col,
            format!(
                "transform gives {} base and {} fiber maps, expected {} and {}",
                base_map.len(),
                fiber_map.len(),
                space.n,
                space.m
            ),
        ));
    }
    Ok(TransformSpec { line: l.no, base_map, fiber_map })
}
