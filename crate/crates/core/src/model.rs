//! The model language: a line-oriented description of a moment system with
//! optional conformal fields, named points and gauge twists.
//!
//! ```text
//! ring x, y;
//! order 2;
//! bracket {x,y} = 1;
//! alpha y = x;
//! conformal euler: x -> x, y -> y;
//! weight -2;
//! point p = (x = 1, y = 2, s = 1, t = 0);
//! twist g: x -> x + t*y^2;
//! unit 1 + t*y;
//! ```
//!
//! Statements may appear in any order. Brackets list each unordered pair at
//! most once; the mate is derived.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::derivation::Derivation;
use crate::line::{LineData, TotElement};
use crate::moment::{GaugeTwist, MomentSystem};
use crate::poisson::{PoissonStructure, Point};
use crate::poly::Poly;
use crate::rat::Rat;
use crate::tpoly::TPoly;

/// Names that cannot be used as generators.
pub const RESERVED: [&str; 2] = ["s", "t"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ModelError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    fn error(self, message: impl Into<String>) -> ModelError {
        ModelError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformalDecl {
    pub name: String,
    /// `t`-free values on generators, at order 0.
    pub field: Derivation,
    pub weight: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub gens: Vec<String>,
    pub order: usize,
    /// Nonzero `{x_i, x_j}` for `i < j`, at order `n`.
    pub brackets: BTreeMap<(usize, usize), TPoly>,
    /// Nonzero `alpha(x_i)`, at order `n-1`.
    pub alpha: BTreeMap<usize, TPoly>,
    pub conformal: Vec<ConformalDecl>,
    pub points: Vec<(String, Point)>,
    pub twists: Vec<(String, GaugeTwist)>,
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const SYMBOLS: [&str; 14] = ["->", ";", ",", "{", "}", "(", ")", "=", ":", "+", "-", "*", "/", "^"];

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ModelError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = Span { line: ln + 1, col: i + 1 };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), span));
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push((Tok::Int(digits.parse().expect("ascii digits")), span));
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push((Tok::Sym(s), span));
                    i += s.len();
                }
                None => return Err(span.error(format!("unexpected character `{c}`"))),
            }
        }
    }
    let end = Span {
        line: text.lines().count().max(1),
        col: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    out.push((Tok::Eof, end));
    Ok(out)
}

// ---------------------------------------------------------------- syntax

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(BigInt, Span),
    Var(String, Span),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, Span),
    Pow(Box<Expr>, i64, Span),
}

type Mapping = Vec<((String, Span), Expr)>;

#[derive(Clone, Debug)]
enum Stmt {
    Ring(Vec<(String, Span)>, Span),
    Order(BigInt, Span),
    Bracket((String, Span), (String, Span), Expr, Span),
    Alpha((String, Span), Expr, Span),
    Conformal((String, Span), Mapping, Rat),
    Point((String, Span), Vec<((String, Span), Rat)>),
    Twist((String, Span), Mapping, Expr),
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ModelError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn eat(&mut self, sym: &str) -> bool {
        if self.at(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<Span, ModelError> {
        if self.at(sym) {
            Ok(self.bump().1)
        } else {
            Err(self.span().error(format!("expected `{sym}`, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ModelError> {
        match self.bump() {
            (Tok::Ident(s), span) => Ok((s, span)),
            (t, span) => Err(span.error(format!("expected identifier, found {t}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Span, ModelError> {
        match self.bump() {
            (Tok::Ident(s), span) if s == kw => Ok(span),
            (t, span) => Err(span.error(format!("expected `{kw}`, found {t}"))),
        }
    }

    fn rational(&mut self) -> Result<Rat, ModelError> {
        let negative = self.eat("-");
        let num = match self.bump() {
            (Tok::Int(n), _) => n,
            (t, span) => return Err(span.error(format!("expected a rational number, found {t}"))),
        };
        let mut value = Rat::from_integer(num);
        if self.at("/") {
            self.bump();
            match self.bump() {
                (Tok::Int(d), span) => {
                    if d.is_zero() {
                        return Err(span.error("division by zero"));
                    }
                    value /= Rat::from_integer(d);
                }
                (t, span) => return Err(span.error(format!("expected a denominator, found {t}"))),
            }
        }
        Ok(if negative { -value } else { value })
    }

    fn model(&mut self) -> Result<Vec<Stmt>, ModelError> {
        let mut stmts = Vec::new();
        while *self.peek() != Tok::Eof {
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ModelError> {
        let (kw, span) = self.ident()?;
        let stmt = match kw.as_str() {
            "ring" => {
                let mut names = vec![self.ident()?];
                while self.eat(",") {
                    names.push(self.ident()?);
                }
                Stmt::Ring(names, span)
            }
            "order" => match self.bump() {
                (Tok::Int(n), s) => Stmt::Order(n, s),
                (t, s) => return Err(s.error(format!("expected an integer order, found {t}"))),
            },
            "bracket" => {
                self.expect("{")?;
                let a = self.ident()?;
                self.expect(",")?;
                let b = self.ident()?;
                self.expect("}")?;
                self.expect("=")?;
                Stmt::Bracket(a, b, self.expr()?, span)
            }
            "alpha" => {
                let g = self.ident()?;
                self.expect("=")?;
                Stmt::Alpha(g, self.expr()?, span)
            }
            "conformal" => {
                let name = self.ident()?;
                self.expect(":")?;
                let values = self.mapping()?;
                if values.is_empty() {
                    return Err(self.span().error("conformal field needs at least one `x -> expr`"));
                }
                self.expect(";")?;
                self.keyword("weight")?;
                Stmt::Conformal(name, values, self.rational()?)
            }
            "point" => {
                let name = self.ident()?;
                self.expect("=")?;
                self.expect("(")?;
                let mut coords = Vec::new();
                while !self.at(")") {
                    let g = self.ident()?;
                    self.expect("=")?;
                    coords.push((g, self.rational()?));
                    if !self.at(")") {
                        self.eat(",");
                    }
                }
                self.expect(")")?;
                Stmt::Point(name, coords)
            }
            "twist" => {
                let name = self.ident()?;
                self.expect(":")?;
                let values = self.mapping()?;
                self.expect(";")?;
                self.keyword("unit")?;
                Stmt::Twist(name, values, self.expr()?)
            }
            _ => return Err(span.error(format!("unknown statement `{kw}`"))),
        };
        self.expect(";")?;
        Ok(stmt)
    }

    /// `(ident "->" expr ","?)*`, stopping at `;`.
    fn mapping(&mut self) -> Result<Mapping, ModelError> {
        let mut out = Vec::new();
        while !self.at(";") {
            let g = self.ident()?;
            self.expect("->")?;
            out.push((g, self.expr()?));
            if !self.at(";") {
                self.eat(",");
            }
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat("-") {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat("*") {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.at("/") {
                let span = self.bump().1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), span);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ModelError> {
        if self.eat("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.at("^") {
            let span = self.bump().1;
            let negative = self.eat("-");
            let e = match self.bump() {
                (Tok::Int(n), s) => n.to_i64().ok_or_else(|| s.error("exponent too large"))?,
                (t, s) => return Err(s.error(format!("expected an integer exponent, found {t}"))),
            };
            return Ok(Expr::Pow(Box::new(base), if negative { -e } else { e }, span));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ModelError> {
        match self.bump() {
            (Tok::Int(n), s) => Ok(Expr::Num(n, s)),
            (Tok::Ident(v), s) => Ok(Expr::Var(v, s)),
            (Tok::Sym("("), _) => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            (t, s) => Err(s.error(format!("expected an expression, found {t}"))),
        }
    }
}

// ---------------------------------------------------------------- evaluation

/// Laurent polynomial in `s` with coefficients in `gens + t` (t last).
#[derive(Clone, Debug)]
struct Laurent {
    nvars: usize,
    terms: BTreeMap<i64, Poly>,
}

impl Laurent {
    fn zero(nvars: usize) -> Self {
        Laurent { nvars, terms: BTreeMap::new() }
    }

    fn from_poly(p: Poly, deg: i64) -> Self {
        let mut l = Laurent::zero(p.nvars());
        if !p.is_zero() {
            l.terms.insert(deg, p);
        }
        l
    }

    fn add(&self, other: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (p, f) in &other.terms {
            let sum = match out.terms.remove(p) {
                Some(g) => &g + f,
                None => f.clone(),
            };
            if !sum.is_zero() {
                out.terms.insert(*p, sum);
            }
        }
        out
    }

    fn neg(&self) -> Laurent {
        Laurent {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(p, f)| (*p, -f)).collect(),
        }
    }

    fn mul(&self, other: &Laurent) -> Laurent {
        let mut out = Laurent::zero(self.nvars);
        for (p, f) in &self.terms {
            for (q, g) in &other.terms {
                out = out.add(&Laurent::from_poly(f * g, p + q));
            }
        }
        out
    }

    fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&0).and_then(Poly::as_constant),
            _ => None,
        }
    }

    fn is_monomial_s(&self) -> Option<i64> {
        match self.terms.iter().next() {
            Some((p, f)) if self.terms.len() == 1 && f.as_constant() == Some(Rat::one()) => Some(*p),
            _ => None,
        }
    }
}

struct Scope<'a> {
    gens: &'a [String],
    allow_s: bool,
}

impl Scope<'_> {
    /// Variables are the generators followed by `t`.
    fn eval(&self, e: &Expr) -> Result<Laurent, ModelError> {
        let nv = self.gens.len() + 1;
        Ok(match e {
            Expr::Num(n, _) => Laurent::from_poly(Poly::constant(nv, Rat::from_integer(n.clone())), 0),
            Expr::Var(v, span) => {
                if let Some(i) = self.gens.iter().position(|g| g == v) {
                    Laurent::from_poly(Poly::var(nv, i), 0)
                } else if v == "t" {
                    Laurent::from_poly(Poly::var(nv, nv - 1), 0)
                } else if v == "s" && self.allow_s {
                    Laurent::from_poly(Poly::one(nv), 1)
                } else {
                    return Err(span.error(format!("undeclared generator {v}")));
                }
            }
            Expr::Neg(a) => self.eval(a)?.neg(),
            Expr::Add(a, b) => self.eval(a)?.add(&self.eval(b)?),
            Expr::Sub(a, b) => self.eval(a)?.add(&self.eval(b)?.neg()),
            Expr::Mul(a, b) => self.eval(a)?.mul(&self.eval(b)?),
            Expr::Div(a, b, span) => {
                let d = self
                    .eval(b)?
                    .as_constant()
                    .ok_or_else(|| span.error("division is only by nonzero constants"))?;
                if d.is_zero() {
                    return Err(span.error("division by zero"));
                }
                let inv = Laurent::from_poly(Poly::constant(nv, d.recip()), 0);
                self.eval(a)?.mul(&inv)
            }
            Expr::Pow(a, k, span) => {
                let base = self.eval(a)?;
                if *k < 0 {
                    match base.is_monomial_s() {
                        Some(p) => {
                            Laurent::from_poly(Poly::one(nv), p.checked_mul(*k).ok_or_else(|| span.error("exponent too large"))?)
                        }
                        None => return Err(span.error("negative exponents apply only to s")),
                    }
                } else {
                    if *k > u32::MAX as i64 {
                        return Err(span.error("exponent too large"));
                    }
                    let mut out = Laurent::from_poly(Poly::one(nv), 0);
                    for _ in 0..*k {
                        out = out.mul(&base);
                    }
                    out
                }
            }
        })
    }

    /// Splits `sum c_k t^k` into a `TPoly` of the given order.
    fn to_tpoly(&self, p: &Poly, order: usize, span: Span, what: &str) -> Result<TPoly, ModelError> {
        let coeffs = p.split_last();
        if coeffs.len() > order + 1 {
            return Err(span.error(format!(
                "{what} has t-order {} exceeding {order}",
                coeffs.len() - 1
            )));
        }
        TPoly::from_coeffs(self.gens.len(), order, coeffs).map_err(|e| span.error(e.to_string()))
    }

    fn tpoly(&self, e: &Expr, order: usize, what: &str) -> Result<TPoly, ModelError> {
        let l = self.eval(e)?;
        let p = l.terms.get(&0).cloned().unwrap_or_else(|| Poly::zero(self.gens.len() + 1));
        self.to_tpoly(&p, order, expr_span(e), what)
    }
}

fn expr_span(e: &Expr) -> Span {
    match e {
        Expr::Num(_, s) | Expr::Var(_, s) => *s,
        Expr::Neg(a) | Expr::Add(a, _) | Expr::Sub(a, _) | Expr::Mul(a, _) => expr_span(a),
        Expr::Div(a, _, _) | Expr::Pow(a, _, _) => expr_span(a),
    }
}

// ---------------------------------------------------------------- semantics

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let stmts = Parser::new(text)?.model()?;

    let mut ring = None;
    let mut order = None;
    for st in &stmts {
        match st {
            Stmt::Ring(names, span) => {
                if ring.is_some() {
                    return Err(span.error("ring declared twice"));
                }
                let mut gens: Vec<String> = Vec::new();
                for (g, s) in names {
                    if RESERVED.contains(&g.as_str()) {
                        return Err(s.error(format!("`{g}` is reserved and cannot be a generator")));
                    }
                    if gens.contains(g) {
                        return Err(s.error(format!("generator {g} declared twice")));
                    }
                    gens.push(g.clone());
                }
                ring = Some(gens);
            }
            Stmt::Order(n, span) => {
                if order.is_some() {
                    return Err(span.error("order declared twice"));
                }
                let n = n.to_usize().filter(|n| (1..=64).contains(n)).ok_or_else(|| {
                    span.error("order must be an integer between 1 and 64")
                })?;
                order = Some(n);
            }
            _ => {}
        }
    }
    let gens = ring.ok_or_else(|| Span { line: 1, col: 1 }.error("missing `ring` declaration"))?;
    let n = order.ok_or_else(|| Span { line: 1, col: 1 }.error("missing `order` declaration"))?;
    let scope = Scope { gens: &gens, allow_s: false };
    let k = gens.len();
    let index = |(g, s): &(String, Span)| -> Result<usize, ModelError> {
        gens.iter()
            .position(|x| x == g)
            .ok_or_else(|| s.error(format!("undeclared generator {g}")))
    };

    let mut model = Model {
        gens: gens.clone(),
        order: n,
        brackets: BTreeMap::new(),
        alpha: BTreeMap::new(),
        conformal: Vec::new(),
        points: Vec::new(),
        twists: Vec::new(),
    };
    let mut seen_pairs = BTreeMap::new();
    let mut seen_alpha = BTreeMap::new();
    for st in &stmts {
        match st {
            Stmt::Ring(..) | Stmt::Order(..) => {}
            Stmt::Bracket(a, b, e, span) => {
                let (i, j) = (index(a)?, index(b)?);
                if i == j {
                    return Err(a.1.error(format!("bracket {{{0},{0}}} is zero by antisymmetry", a.0)));
                }
                let key = (i.min(j), i.max(j));
                if seen_pairs.insert(key, *span).is_some() {
                    return Err(span.error(format!(
                        "bracket {{{},{}}} declared twice; the antisymmetric mate is derived",
                        a.0, b.0
                    )));
                }
                let v = scope.tpoly(e, n, &format!("bracket {{{},{}}}", a.0, b.0))?;
                let v = if i < j { v } else { -&v };
                if !v.is_zero() {
                    model.brackets.insert(key, v);
                }
            }
            Stmt::Alpha(g, e, span) => {
                let i = index(g)?;
                if seen_alpha.insert(i, *span).is_some() {
                    return Err(span.error(format!("alpha {} declared twice", g.0)));
                }
                let l = scope.eval(e)?;
                let p = l.terms.get(&0).cloned().unwrap_or_else(|| Poly::zero(k + 1));
                if p.split_last().len() > n {
                    return Err(expr_span(e).error(format!(
                        "alpha order exceeds n-1 (alpha {} has t-order {}, model order {n})",
                        g.0,
                        p.split_last().len() - 1
                    )));
                }
                let v = scope.to_tpoly(&p, n - 1, expr_span(e), "alpha")?;
                if !v.is_zero() {
                    model.alpha.insert(i, v);
                }
            }
            Stmt::Conformal(name, values, weight) => {
                if model.conformal.iter().any(|c| c.name == name.0) {
                    return Err(name.1.error(format!("conformal field {} declared twice", name.0)));
                }
                let mut field = vec![None; k];
                for (g, e) in values {
                    let i = index(g)?;
                    if field[i].is_some() {
                        return Err(g.1.error(format!("value for {} given twice", g.0)));
                    }
                    field[i] = Some(scope.tpoly(e, 0, "conformal field value")?);
                }
                let field = field.into_iter().map(|v| v.unwrap_or_else(|| TPoly::zero(k, 0))).collect();
                model.conformal.push(ConformalDecl {
                    name: name.0.clone(),
                    field: Derivation::over_t(field).map_err(|e| name.1.error(e.to_string()))?,
                    weight: weight.clone(),
                });
            }
            Stmt::Point(name, coords) => {
                if model.points.iter().any(|(p, _)| *p == name.0) {
                    return Err(name.1.error(format!("point {} declared twice", name.0)));
                }
                let mut values = BTreeMap::new();
                for ((g, s), v) in coords {
                    if !gens.contains(g) && !RESERVED.contains(&g.as_str()) {
                        return Err(s.error(format!("undeclared generator {g}")));
                    }
                    if values.insert(g.clone(), v.clone()).is_some() {
                        return Err(s.error(format!("coordinate {g} given twice")));
                    }
                }
                model.points.push((name.0.clone(), Point::new(values)));
            }
            Stmt::Twist(name, values, unit) => {
                if model.twists.iter().any(|(p, _)| *p == name.0) {
                    return Err(name.1.error(format!("twist {} declared twice", name.0)));
                }
                let mut phi: Vec<Option<TPoly>> = vec![None; k];
                for (g, e) in values {
                    let i = index(g)?;
                    if phi[i].is_some() {
                        return Err(g.1.error(format!("value for {} given twice", g.0)));
                    }
                    let v = scope.tpoly(e, n, "twist value")?;
                    if v.coeff(0) != &Poly::var(k, i) {
                        return Err(expr_span(e).error(format!(
                            "twist value for {} must equal {} modulo t",
                            g.0, g.0
                        )));
                    }
                    phi[i] = Some(v);
                }
                let phi = phi
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| v.unwrap_or_else(|| TPoly::var(k, n, i)))
                    .collect();
                let unit = scope.tpoly(unit, n - 1, "twist unit")?;
                if unit.coeff(0).as_constant().is_none_or(|c| c.is_zero()) {
                    return Err(name.1.error(format!(
                        "twist {} unit must have a nonzero constant t^0 part",
                        name.0
                    )));
                }
                model.twists.push((name.0.clone(), GaugeTwist { phi, unit }));
            }
        }
    }
    Ok(model)
}

/// Parses a total-space expression such as `x*s^2 + t - 2*y*s^-1` at order `n`.
pub fn parse_tot(text: &str, gens: &[String], n: usize) -> Result<TotElement, ModelError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.span().error(format!("unexpected {} after expression", p.peek())));
    }
    let scope = Scope { gens, allow_s: true };
    let l = scope.eval(&e)?;
    let span = expr_span(&e);
    let mut terms = Vec::new();
    for (deg, f) in &l.terms {
        terms.push((*deg, scope.to_tpoly(f, n, span, "Tot expression")?));
    }
    TotElement::from_terms(gens.len(), n, terms).map_err(|e| span.error(e.to_string()))
}

/// Parses a single `t`-polynomial expression at order `n`.
pub fn parse_tpoly(text: &str, gens: &[String], n: usize) -> Result<TPoly, ModelError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.span().error(format!("unexpected {} after expression", p.peek())));
    }
    Scope { gens, allow_s: false }.tpoly(&e, n, "expression")
}

// ---------------------------------------------------------------- model <-> system

impl Model {
    pub fn system(&self) -> crate::error::Result<MomentSystem> {
        let names: Vec<&str> = self.gens.iter().map(String::as_str).collect();
        let base = PoissonStructure::new(
            &names,
            self.order,
            self.brackets.iter().map(|(&(i, j), v)| (i, j, v.clone())),
        )?;
        let k = self.gens.len();
        let alpha = (0..k)
            .map(|i| {
                self.alpha
                    .get(&i)
                    .cloned()
                    .unwrap_or_else(|| TPoly::zero(k, self.order - 1))
            })
            .collect();
        Ok(MomentSystem::new(LineData::new(base, alpha)?))
    }

    /// A model carrying only the bracket table and `alpha` of `ms`.
    pub fn from_system(ms: &MomentSystem) -> Model {
        let k = ms.nvars();
        let s = ms.structure();
        let mut brackets = BTreeMap::new();
        for i in 0..k {
            for j in (i + 1)..k {
                if !s.entry(i, j).is_zero() {
                    brackets.insert((i, j), s.entry(i, j).clone());
                }
            }
        }
        let alpha = (0..k)
            .filter(|&i| !ms.line().alpha().value(i).is_zero())
            .map(|i| (i, ms.line().alpha().value(i).clone()))
            .collect();
        Model {
            gens: ms.gens().to_vec(),
            order: ms.n(),
            brackets,
            alpha,
            conformal: Vec::new(),
            points: Vec::new(),
            twists: Vec::new(),
        }
    }

    pub fn point(&self, name: &str) -> Option<&Point> {
        self.points.iter().find(|(p, _)| p == name).map(|(_, p)| p)
    }

    pub fn twist(&self, name: &str) -> Option<&GaugeTwist> {
        self.twists.iter().find(|(p, _)| p == name).map(|(_, g)| g)
    }

    /// Canonical text; `parse_model(&m.render()) == Ok(m)`.
    pub fn render(&self) -> String {
        let g = &self.gens;
        let mut out = format!("ring {};\norder {};\n", g.join(", "), self.order);
        for (&(i, j), v) in &self.brackets {
            out += &format!("bracket {{{},{}}} = {};\n", g[i], g[j], v.render(g));
        }
        for (&i, v) in &self.alpha {
            out += &format!("alpha {} = {};\n", g[i], v.render(g));
        }
        for c in &self.conformal {
            let values: Vec<String> = c
                .field
                .values()
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| format!("{} -> {}", g[i], v.render(g)))
                .collect();
            let values = if values.is_empty() {
                format!("{} -> 0", g[0])
            } else {
                values.join(", ")
            };
            out += &format!("conformal {}: {};\nweight {};\n", c.name, values, c.weight);
        }
        for (name, p) in &self.points {
            let coords: Vec<String> = p.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            out += &format!("point {name} = ({});\n", coords.join(", "));
        }
        for (name, tw) in &self.twists {
            let values: Vec<String> = tw
                .phi
                .iter()
                .enumerate()
                .filter(|(i, v)| **v != TPoly::var(g.len(), self.order, *i))
                .map(|(i, v)| format!("{} -> {}", g[i], v.render(g)))
                .collect();
            out += &format!("twist {name}: {};\nunit {};\n", values.join(", "), tw.unit.render(g));
        }
        out
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
