//! The prepotential expression language.
//!
//! ```text
//! expression → term (('+' | '-') term)*
//! term       → factor ('*' factor)*
//! factor     → '-' factor | primary ('^' uint)?
//! primary    → number | 'i' | ident | ident '[' args ']' | '(' expression ')' | matrix
//! number     → uint ('/' uint)?
//! args       → arg (',' arg)*        arg → uint | '+' | '-'
//! matrix     → '[' row (',' row)* ']'    row → '[' expression (',' expression)* ']'
//! ```
//!
//! `−` and `×` are accepted for `-` and `*`.

use crate::harmonic::HarmonicModel;
use crate::linalg::Mat;
use crate::poly::{Poly, PolyMatrix, UM1, UP1};
use crate::scalar::Gq;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unexpected character '{ch}' at {pos}")]
    Lexical { ch: char, pos: Pos },
    #[error("unexpected end of input at {0}")]
    UnexpectedEnd(Pos),
    #[error("unexpected token '{found}' at {pos}, expected {expected}")]
    UnexpectedToken {
        found: String,
        expected: &'static str,
        pos: Pos,
    },
    #[error("undeclared identifier '{name}' at {pos}")]
    Undeclared { name: String, pos: Pos },
    #[error("{msg} at {pos}")]
    Elaboration { msg: String, pos: Pos },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Lexical { pos, .. }
            | ParseError::UnexpectedToken { pos, .. }
            | ParseError::Undeclared { pos, .. }
            | ParseError::Elaboration { pos, .. } => *pos,
            ParseError::UnexpectedEnd(p) => *p,
        }
    }
}

pub type Result<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational, String),
    Ident(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
    Eof,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(_, s) => s.clone(),
            Tok::Ident(s) => s.clone(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Caret => "^".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' | '×' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, pos));
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let num: String = chars[start..i].iter().collect();
            let mut text = num.clone();
            let mut den = "1".to_string();
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                let s = i + 1;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                den = chars[s..i].iter().collect();
                text = format!("{num}/{den}");
            }
            let n: BigInt = num.parse().expect("digits");
            let d: BigInt = den.parse().expect("digits");
            if d == BigInt::from(0) {
                return Err(ParseError::Elaboration {
                    msg: "zero denominator".into(),
                    pos,
                });
            }
            col += i - start;
            out.push((Tok::Num(BigRational::new(n, d), text), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        return Err(ParseError::Lexical { ch: c, pos });
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Num(String),
    Plus,
    Minus,
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Num(s) => write!(f, "{s}"),
            Arg::Plus => write!(f, "+"),
            Arg::Minus => write!(f, "-"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Kind {
    Num(BigRational),
    Imag,
    Name(String),
    Var(String, Vec<Arg>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, u32),
    Matrix(Vec<Vec<Ast>>),
}

/// Syntax tree node; equality ignores positions.
#[derive(Debug, Clone)]
pub struct Ast {
    pub kind: Kind,
    pub pos: Pos,
}

impl PartialEq for Kind {
    fn eq(&self, o: &Self) -> bool {
        use Kind::*;
        match (self, o) {
            (Num(a), Num(b)) => a == b,
            (Imag, Imag) => true,
            (Name(a), Name(b)) => a == b,
            (Var(a, x), Var(b, y)) => a == b && x == y,
            (Add(a, b), Add(c, d)) | (Sub(a, b), Sub(c, d)) | (Mul(a, b), Mul(c, d)) => {
                a == c && b == d
            }
            (Neg(a), Neg(b)) => a == b,
            (Pow(a, n), Pow(b, k)) => a == b && n == k,
            (Matrix(a), Matrix(b)) => a == b,
            _ => false,
        }
    }
}

impl PartialEq for Ast {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
    }
}

const FUNCTIONS: [&str; 8] = ["x", "u", "xplus", "xminus", "xppp", "xppm", "xpmm", "xmmm"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Tok::Eof => ParseError::UnexpectedEnd(self.pos()),
            t => ParseError::UnexpectedToken {
                found: t.text(),
                expected,
                pos: self.pos(),
            },
        }
    }

    fn expect(&mut self, t: Tok, what: &'static str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(what))
        }
    }

    fn expression(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            let kind: fn(Box<Ast>, Box<Ast>) -> Kind = match self.peek() {
                Tok::Plus => Kind::Add,
                Tok::Minus => Kind::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Ast {
                kind: kind(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            let pos = self.pos();
            self.bump();
            let rhs = self.factor()?;
            lhs = Ast {
                kind: Kind::Mul(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Ast> {
        let pos = self.pos();
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.factor()?;
            return Ok(Ast {
                kind: Kind::Neg(Box::new(inner)),
                pos,
            });
        }
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            let pos = self.pos();
            self.bump();
            let exp = match self.peek().clone() {
                Tok::Num(r, _) if r.is_integer() => r.to_integer(),
                _ => return Err(self.fail("an unsigned integer exponent")),
            };
            let e = u32::try_from(exp).map_err(|_| ParseError::Elaboration {
                msg: "exponent too large".into(),
                pos: self.pos(),
            })?;
            self.bump();
            return Ok(Ast {
                kind: Kind::Pow(Box::new(base), e),
                pos,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Ast> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(r, _) => {
                self.bump();
                Ok(Ast {
                    kind: Kind::Num(r),
                    pos,
                })
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() != Tok::LBracket {
                    let kind = if name == "i" { Kind::Imag } else { Kind::Name(name) };
                    return Ok(Ast { kind, pos });
                }
                if !FUNCTIONS.contains(&name.as_str()) {
                    return Err(ParseError::Undeclared { name, pos });
                }
                self.bump();
                let mut args = vec![self.arg()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.arg()?);
                }
                self.expect(Tok::RBracket, "']'")?;
                Ok(Ast {
                    kind: Kind::Var(name, args),
                    pos,
                })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expression()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::LBracket => {
                self.bump();
                let mut rows = vec![self.row()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    rows.push(self.row()?);
                }
                self.expect(Tok::RBracket, "']'")?;
                Ok(Ast {
                    kind: Kind::Matrix(rows),
                    pos,
                })
            }
            _ => Err(self.fail("an operand")),
        }
    }

    fn row(&mut self) -> Result<Vec<Ast>> {
        self.expect(Tok::LBracket, "'[' starting a matrix row")?;
        let mut cells = vec![self.expression()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            cells.push(self.expression()?);
        }
        self.expect(Tok::RBracket, "']'")?;
        Ok(cells)
    }

    fn arg(&mut self) -> Result<Arg> {
        let a = match self.peek() {
            Tok::Num(r, s) if r.is_integer() => Arg::Num(s.clone()),
            Tok::Plus => Arg::Plus,
            Tok::Minus => Arg::Minus,
            _ => return Err(self.fail("an index")),
        };
        self.bump();
        Ok(a)
    }
}

pub fn parse(src: &str) -> Result<Ast> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expression()?;
    if *p.peek() != Tok::Eof {
        return Err(p.fail("an operator or end of input"));
    }
    Ok(e)
}

fn level(k: &Kind) -> u8 {
    match k {
        Kind::Add(..) | Kind::Sub(..) => 1,
        Kind::Mul(..) => 2,
        Kind::Neg(..) => 3,
        Kind::Pow(..) => 4,
        _ => 5,
    }
}

fn write_at(out: &mut String, a: &Ast, min: u8) {
    let paren = level(&a.kind) < min;
    if paren {
        out.push('(');
    }
    match &a.kind {
        Kind::Num(r) => {
            if r.is_integer() {
                out.push_str(&r.numer().to_string());
            } else {
                out.push_str(&format!("{}/{}", r.numer(), r.denom()));
            }
        }
        Kind::Imag => out.push('i'),
        Kind::Name(n) => out.push_str(n),
        Kind::Var(n, args) => {
            let a: Vec<String> = args.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{n}[{}]", a.join(",")));
        }
        Kind::Add(l, r) | Kind::Sub(l, r) => {
            write_at(out, l, 1);
            out.push_str(if matches!(a.kind, Kind::Add(..)) { " + " } else { " - " });
            write_at(out, r, 2);
        }
        Kind::Mul(l, r) => {
            write_at(out, l, 2);
            out.push_str(" * ");
            write_at(out, r, 3);
        }
        Kind::Neg(x) => {
            out.push('-');
            write_at(out, x, 3);
        }
        Kind::Pow(b, e) => {
            write_at(out, b, 5);
            out.push_str(&format!("^{e}"));
        }
        Kind::Matrix(rows) => {
            out.push('[');
            for (i, row) in rows.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push('[');
                for (j, c) in row.iter().enumerate() {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    write_at(out, c, 1);
                }
                out.push(']');
            }
            out.push(']');
        }
    }
    if paren {
        out.push(')');
    }
}

/// Canonical text; `parse(print(a)) == a`.
pub fn print(a: &Ast) -> String {
    let mut s = String::new();
    write_at(&mut s, a, 1);
    s
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(Poly),
    Matrix(PolyMatrix),
}

/// Names visible to elaboration.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub matrices: BTreeMap<String, Mat<Gq>>,
}

fn index(arg: &Arg, max: usize, what: &str, pos: Pos) -> Result<usize> {
    if let Arg::Num(s) = arg {
        if let Ok(v) = s.parse::<usize>() {
            if (1..=max).contains(&v) {
                return Ok(v - 1);
            }
        }
    }
    Err(ParseError::Elaboration {
        msg: format!("{what} index {arg} out of range 1..={max}"),
        pos,
    })
}

fn elab(a: &Ast, model: &HarmonicModel, scope: &Scope) -> Result<Value> {
    let pos = a.pos;
    let err = |msg: String| ParseError::Elaboration { msg, pos };
    let m = model.spin_m;
    let p = model.rank_e;
    let wrap = |r: std::result::Result<PolyMatrix, crate::poly::PolyError>| {
        r.map(Value::Matrix).map_err(|e| err(e.to_string()))
    };
    Ok(match &a.kind {
        Kind::Num(r) => Value::Scalar(Poly::constant(Gq::real(r.clone()))),
        Kind::Imag => Value::Scalar(Poly::constant(Gq::i())),
        Kind::Name(n) => {
            if let Some(mat) = scope.matrices.get(n) {
                wrap(PolyMatrix::from_const(mat))?
            } else if let Ok(v) = model.vars.get(n) {
                if v < crate::poly::N_U || model.x_index.iter().flatten().any(|&x| x == v) {
                    return Err(ParseError::Undeclared { name: n.clone(), pos });
                }
                Value::Scalar(Poly::var(v))
            } else {
                return Err(ParseError::Undeclared { name: n.clone(), pos });
            }
        }
        Kind::Var(name, args) => {
            let need = if name == "x" || name == "u" { 2 } else { 1 };
            if args.len() != need {
                return Err(err(format!("{name} takes {need} index(es)")));
            }
            let poly = match name.as_str() {
                "u" => {
                    let base = match args[0] {
                        Arg::Plus => UP1,
                        Arg::Minus => UM1,
                        Arg::Num(_) => return Err(err("u needs a sign as first index".into())),
                    };
                    Poly::var(base + index(&args[1], 2, "u", pos)?)
                }
                "x" => {
                    let e = index(&args[0], p, "E", pos)?;
                    let k = match &args[1] {
                        Arg::Num(s) if s.len() == m && s.chars().all(|c| c == '1' || c == '2') => {
                            s.chars().filter(|&c| c == '2').count()
                        }
                        other => {
                            return Err(err(format!(
                                "x index {other} is not {m} digit(s) from {{1,2}}"
                            )))
                        }
                    };
                    model.x(e, k)
                }
                "xplus" | "xminus" => {
                    if m != 1 {
                        return Err(err(format!("{name} is only defined for spin 1")));
                    }
                    model.x_pm(index(&args[0], p, "E", pos)?, name == "xminus")
                }
                _ => {
                    if m != 3 {
                        return Err(err(format!("{name} is only defined for spin 3")));
                    }
                    let e = index(&args[0], p, "E", pos)?;
                    model
                        .x_pattern(e, &name[1..])
                        .ok_or_else(|| err(format!("bad pattern {name}")))?
                }
            };
            Value::Scalar(poly)
        }
        Kind::Add(l, r) | Kind::Sub(l, r) => {
            let sub = matches!(a.kind, Kind::Sub(..));
            match (elab(l, model, scope)?, elab(r, model, scope)?) {
                (Value::Scalar(x), Value::Scalar(y)) => {
                    Value::Scalar(if sub { x.sub(&y) } else { x.add(&y) })
                }
                (Value::Matrix(x), Value::Matrix(y)) => {
                    wrap(if sub { x.sub(&y) } else { x.add(&y) })?
                }
                _ => return Err(err("cannot add a scalar and a matrix".into())),
            }
        }
        Kind::Mul(l, r) => match (elab(l, model, scope)?, elab(r, model, scope)?) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x.mul(&y)),
            (Value::Scalar(s), Value::Matrix(x)) | (Value::Matrix(x), Value::Scalar(s)) => {
                Value::Matrix(x.scale_poly(&s))
            }
            (Value::Matrix(x), Value::Matrix(y)) => wrap(x.mul(&y))?,
        },
        Kind::Neg(x) => match elab(x, model, scope)? {
            Value::Scalar(s) => Value::Scalar(s.neg()),
            Value::Matrix(x) => Value::Matrix(x.neg()),
        },
        Kind::Pow(b, e) => match elab(b, model, scope)? {
            Value::Scalar(s) => Value::Scalar(s.pow(*e)),
            Value::Matrix(x) => {
                let mut acc = PolyMatrix::identity(x.dim());
                for _ in 0..*e {
                    acc = acc.mul(&x).map_err(|e| err(e.to_string()))?;
                }
                Value::Matrix(acc)
            }
        },
        Kind::Matrix(rows) => {
            let mut out = Vec::new();
            for row in rows {
                let mut cells = Vec::new();
                for c in row {
                    match elab(c, model, scope)? {
                        Value::Scalar(s) => cells.push(s),
                        Value::Matrix(_) => {
                            return Err(ParseError::Elaboration {
                                msg: "matrix entries must be scalars".into(),
                                pos: c.pos,
                            })
                        }
                    }
                }
                out.push(cells);
            }
            wrap(PolyMatrix::from_rows(out))?
        }
    })
}

/// Elaborates to an `r × r` matrix; a scalar result `s` becomes `s·Id`.
pub fn elaborate(a: &Ast, model: &HarmonicModel, scope: &Scope) -> Result<PolyMatrix> {
    let r = model.gauge_rank;
    let m = match elab(a, model, scope)? {
        Value::Scalar(s) => PolyMatrix::identity(r).scale_poly(&s),
        Value::Matrix(m) => m,
    };
    if m.dim() != r {
        return Err(ParseError::Elaboration {
            msg: format!("shape mismatch: {0}×{0} matrix for gauge rank {r}", m.dim()),
            pos: a.pos,
        });
    }
    Ok(m)
}

pub fn parse_and_elaborate(src: &str, model: &HarmonicModel, scope: &Scope) -> Result<PolyMatrix> {
    elaborate(&parse(src)?, model, scope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope() -> Scope {
        let mut s = Scope::default();
        s.matrices.insert(
            "N".into(),
            vec![vec![Gq::zero(), Gq::one()], vec![Gq::zero(), Gq::zero()]],
        );
        s
    }

    #[test]
    fn end_of_input_position() {
        let e = parse("xplus[1").unwrap_err();
        assert_eq!(e.to_string(), "unexpected end of input at 1:8");
    }

    #[test]
    fn shapes() {
        let a = parse("xplus[1]^2 * N").unwrap();
        assert!(matches!(a.kind, Kind::Mul(..)));
        assert!(parse("(x[1,1] + 3/2) * u[+,2]").is_ok());
    }

    #[test]
    fn worked_prepotential() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let got = parse_and_elaborate("xplus[1]^2 * N", &model, &scope()).unwrap();
        let xp = model.x_pm(0, false);
        let want = PolyMatrix::poly_times_const(&xp.mul(&xp), &scope().matrices["N"]).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn zero_is_zero_matrix() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        assert!(parse_and_elaborate("0", &model, &scope()).unwrap().is_zero());
    }

    #[test]
    fn printed_matrix_reparses() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let m = parse_and_elaborate("(xplus[1]^2 - 3/2*i*x[2,1]) * N + [[1, u[-,2]], [0, 1]]", &model, &scope())
            .unwrap();
        let text = m.to_text(&model.vars);
        assert_eq!(parse_and_elaborate(&text, &model, &scope()).unwrap(), m);
    }

    #[test]
    fn errors_have_positions() {
        let model = HarmonicModel::build(1, 2, 2).unwrap();
        let e = parse("x[1,1] + $").unwrap_err();
        assert_eq!(e.pos(), Pos { line: 1, col: 10 });
        let e = parse("foo[1]").unwrap_err();
        assert!(e.to_string().contains("undeclared identifier 'foo' at 1:1"));
        let e = parse_and_elaborate("\n  M * 2", &model, &scope()).unwrap_err();
        assert_eq!(e.pos(), Pos { line: 2, col: 3 });
        let e = parse_and_elaborate("xppm[1]", &model, &scope()).unwrap_err();
        assert!(e.to_string().contains("spin 3"));
        let e = parse_and_elaborate("x[3,1]", &model, &scope()).unwrap_err();
        assert!(e.to_string().contains("out of range"));
    }

    #[test]
    fn round_trip_simple() {
        for s in ["-x[1,2]^3 * (u[+,1] - -2)", "a - (b + c)", "[[1, 2/3], [-i, 0]]", "-(a * b)^2"] {
            let a = parse(s).unwrap();
            assert_eq!(parse(&print(&a)).unwrap(), a, "{s} -> {}", print(&a));
        }
    }
}
