//! A small expression language for the coefficient functions `b`, `r`, `f`
//! (and manufactured solutions), with pointwise evaluation and symbolic
//! differentiation in the single variable `x`.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" factor)?
//! atom   := number | "x" | "pi" | ident "(" expr ")" | "(" expr ")"
//! ident  := sin | cos | tan | exp | log | sqrt | abs
//! ```

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnexpectedToken(String),
    BadNumber(String),
    UnknownIdentifier(String),
    TrailingInput,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "unexpected character '{c}' at offset {}", self.offset)
            }
            ParseErrorKind::UnexpectedEnd => {
                write!(f, "unexpected end of input at offset {}", self.offset)
            }
            ParseErrorKind::UnexpectedToken(t) => {
                write!(f, "unexpected '{t}' at offset {}", self.offset)
            }
            ParseErrorKind::BadNumber(s) => {
                write!(f, "malformed number '{s}' at offset {}", self.offset)
            }
            ParseErrorKind::UnknownIdentifier(s) => {
                write!(f, "unknown identifier '{s}' at offset {}", self.offset)
            }
            ParseErrorKind::TrailingInput => {
                write!(f, "trailing input at offset {}", self.offset)
            }
        }
    }
}

impl core::error::Error for ParseError {}

impl ParseError {
    pub fn is_unknown_identifier(&self) -> bool {
        matches!(self.kind, ParseErrorKind::UnknownIdentifier(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    DivisionByZero { subexpr: String, x: f64 },
    Domain { func: &'static str, subexpr: String, x: f64 },
    NotFinite { subexpr: String, x: f64 },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::DivisionByZero { subexpr, x } => {
                write!(f, "division by zero in '{subexpr}' at x = {x}")
            }
            EvalError::Domain { func, subexpr, x } => {
                write!(f, "argument outside the domain of {func} in '{subexpr}' at x = {x}")
            }
            EvalError::NotFinite { subexpr, x } => {
                write!(f, "non-finite value from '{subexpr}' at x = {x}")
            }
        }
    }
}

impl core::error::Error for EvalError {}

#[derive(Clone, Debug, PartialEq)]
pub enum DiffError {
    /// `abs` has no derivative at its kink; rejected outright.
    Unsupported { func: &'static str },
}

impl fmt::Display for DiffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffError::Unsupported { func } => write!(f, "cannot differentiate {func}"),
        }
    }
}

impl core::error::Error for DiffError {}

// ---------------------------------------------------------------------------
// lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((start, t));
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut end = self.pos;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut e = end + 1;
                if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                    e += 1;
                }
                if e < bytes.len() && bytes[e].is_ascii_digit() {
                    while e < bytes.len() && bytes[e].is_ascii_digit() {
                        e += 1;
                    }
                    end = e;
                }
            }
            let text = &self.src[start..end];
            self.pos = end;
            return f64::from_str(text)
                .map(|v| (start, Tok::Num(v)))
                .map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::BadNumber(text.to_string()),
                });
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = self.pos;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((start, Tok::Ident(self.src[start..end].to_string())));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ParseError { offset: start, kind: ParseErrorKind::UnexpectedChar(ch) })
    }
}

// ---------------------------------------------------------------------------
// parser

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lex = Lexer { src, pos: 0 };
        let (at, tok) = lex.next()?;
        Ok(Parser { lex, tok, at })
    }

    fn bump(&mut self) -> Result<Tok, ParseError> {
        let (at, tok) = self.lex.next()?;
        self.at = at;
        Ok(core::mem::replace(&mut self.tok, tok))
    }

    fn unexpected(&self) -> ParseError {
        let kind = match &self.tok {
            Tok::End => ParseErrorKind::UnexpectedEnd,
            t => ParseErrorKind::UnexpectedToken(tok_text(t)),
        };
        ParseError { offset: self.at, kind }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.tok == want {
            self.bump()?;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.bump()?;
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.at;
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == "x" {
                    self.bump()?;
                    return Ok(Expr::X);
                }
                if name == "pi" {
                    self.bump()?;
                    return Ok(Expr::Num(core::f64::consts::PI));
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    });
                };
                self.bump()?;
                self.expect(Tok::LParen)?;
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.unexpected()),
        }
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num(v) => alloc::format!("{v}"),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::End => "end of input".into(),
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(ParseError { offset: p.at, kind: ParseErrorKind::TrailingInput });
    }
    Ok(e)
}

impl FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// ---------------------------------------------------------------------------
// evaluation

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    /// True if the expression does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::X => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Bin(op, a, b) => {
                let l = a.eval(x)?;
                let r = b.eval(x)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::DivisionByZero { subexpr: self.to_string(), x });
                        }
                        l / r
                    }
                    BinOp::Pow => {
                        let v = pow(l, r);
                        if v.is_nan() {
                            return Err(EvalError::Domain { func: "^", subexpr: self.to_string(), x });
                        }
                        v
                    }
                }
            }
            Expr::Call(func, a) => {
                let u = a.eval(x)?;
                let domain = |ok: bool| -> Result<(), EvalError> {
                    if ok {
                        Ok(())
                    } else {
                        Err(EvalError::Domain { func: func.name(), subexpr: self.to_string(), x })
                    }
                };
                match func {
                    Func::Sin => libm::sin(u),
                    Func::Cos => libm::cos(u),
                    Func::Tan => libm::tan(u),
                    Func::Exp => libm::exp(u),
                    Func::Log => {
                        domain(u > 0.0)?;
                        libm::log(u)
                    }
                    Func::Sqrt => {
                        domain(u >= 0.0)?;
                        libm::sqrt(u)
                    }
                    Func::Abs => libm::fabs(u),
                }
            }
        };
        if !v.is_finite() {
            return Err(EvalError::NotFinite { subexpr: self.to_string(), x });
        }
        Ok(v)
    }
}

fn pow(base: f64, exp: f64) -> f64 {
    // integer exponents go through repeated multiplication for exactness on
    // small integers (x^2 == x*x)
    if exp == libm::trunc(exp) && libm::fabs(exp) <= 64.0 {
        let n = exp as i32;
        let mut acc = 1.0;
        let mut b = if n < 0 { 1.0 / base } else { base };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc *= b;
            }
            b *= b;
            k >>= 1;
        }
        return acc;
    }
    libm::pow(base, exp)
}

// ---------------------------------------------------------------------------
// construction helpers with constant folding

fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_number(), b.as_number()) {
        (Some(x), _) if x == 0.0 => Expr::Num(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn powe(a: Expr, b: Expr) -> Expr {
    match b.as_number() {
        Some(y) if y == 1.0 => a,
        Some(y) if y == 0.0 => Expr::Num(1.0),
        _ => Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl core::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        add(self, rhs)
    }
}

impl core::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        sub(self, rhs)
    }
}

impl core::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        mul(self, rhs)
    }
}

impl core::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        div(self, rhs)
    }
}

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl Expr {
    pub fn differentiate(&self) -> Result<Expr, DiffError> {
        Ok(match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::X => Expr::Num(1.0),
            Expr::Neg(a) => neg(a.differentiate()?),
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => add(a.differentiate()?, b.differentiate()?),
                    BinOp::Sub => sub(a.differentiate()?, b.differentiate()?),
                    BinOp::Mul => add(mul(a.differentiate()?, v), mul(u, b.differentiate()?)),
                    BinOp::Div => {
                        let num = sub(mul(a.differentiate()?, v.clone()), mul(u, b.differentiate()?));
                        div(num, powe(v, Expr::Num(2.0)))
                    }
                    BinOp::Pow => {
                        if b.is_constant() {
                            // c u^(c-1) u'
                            let c = v;
                            let lowered = powe(u, sub(c.clone(), Expr::Num(1.0)));
                            mul(mul(c, lowered), a.differentiate()?)
                        } else if a.is_constant() {
                            // a^v ln(a) v'
                            let whole = self.clone();
                            mul(mul(whole, call(Func::Log, u)), b.differentiate()?)
                        } else {
                            // u^v (v' ln u + v u'/u)
                            let whole = self.clone();
                            let t1 = mul(b.differentiate()?, call(Func::Log, u.clone()));
                            let t2 = div(mul(v, a.differentiate()?), u);
                            mul(whole, add(t1, t2))
                        }
                    }
                }
            }
            Expr::Call(func, a) => {
                let u = a.as_ref().clone();
                let du = a.differentiate()?;
                let outer = match func {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Tan => div(Expr::Num(1.0), powe(call(Func::Cos, u), Expr::Num(2.0))),
                    Func::Exp => call(Func::Exp, u),
                    Func::Log => div(Expr::Num(1.0), u),
                    Func::Sqrt => div(Expr::Num(1.0), mul(Expr::Num(2.0), call(Func::Sqrt, u))),
                    Func::Abs => return Err(DiffError::Unsupported { func: "abs" }),
                };
                mul(outer, du)
            }
        })
    }
}

// ---------------------------------------------------------------------------
// printing

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => PREC_NEG,
            Expr::Num(_) | Expr::X | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_NEG,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
            Expr::Bin(BinOp::Pow, ..) => PREC_POW,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let paren = self.precedence() < min_prec;
        if paren {
            f.write_str("(")?;
        }
        match self {
            // `{:?}` is the shortest representation that round-trips
            Expr::Num(v) => write!(f, "{v:?}")?,
            Expr::X => f.write_str("x")?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(f, PREC_NEG)?;
            }
            Expr::Bin(op, a, b) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => (" + ", PREC_ADD, PREC_MUL),
                    BinOp::Sub => (" - ", PREC_ADD, PREC_MUL),
                    BinOp::Mul => ("*", PREC_MUL, PREC_NEG),
                    BinOp::Div => ("/", PREC_MUL, PREC_NEG),
                    BinOp::Pow => ("^", PREC_ATOM, PREC_NEG),
                };
                a.fmt_at(f, lp)?;
                f.write_str(sym)?;
                b.fmt_at(f, rp)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_at(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn ev(s: &str, x: f64) -> f64 {
        parse(s).unwrap().eval(x).unwrap()
    }

    #[test]
    fn basic_values() {
        assert!((ev("cos(x)", 0.5) - 0.8775825618903728).abs() < 1e-15);
        assert_eq!(ev("1", 0.3), 1.0);
        assert_eq!(ev("2^3^2", 0.1), 512.0);
        assert_eq!(ev("2^(3^2)", 0.1), ev("2^3^2", 0.9));
        assert_eq!(ev("exp(x)", 0.0), 1.0);
        assert_eq!(ev("1+x", 1.0), 2.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("2*-x", 3.0), -6.0);
        assert_eq!(ev("1e-5*x", 2.0), 2e-5);
        assert_eq!(ev("8/2/2", 0.0), 2.0);
        assert_eq!(ev("1-2-3", 0.0), -4.0);
    }

    #[test]
    fn division_by_zero_reported() {
        let e = parse("sin(x)/x").unwrap();
        match e.eval(0.0) {
            Err(EvalError::DivisionByZero { subexpr, .. }) => assert_eq!(subexpr, "sin(x)/x"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("log(x-1)").unwrap().eval(0.5), Err(EvalError::Domain { .. })));
        assert!(matches!(parse("sqrt(-x)").unwrap().eval(0.5), Err(EvalError::Domain { .. })));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse("1 + * x").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse("sin(x").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(e.offset, 5);
        let e = parse("foo(x)").unwrap_err();
        assert!(e.is_unknown_identifier());
        assert_eq!(e.offset, 0);
        let e = parse("x $").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(e.offset, 2);
        assert_eq!(parse("x)").unwrap_err().kind, ParseErrorKind::TrailingInput);
    }

    #[test]
    fn derivative_of_cos_prints_as_negated_sine() {
        let d = parse("cos(x)").unwrap().differentiate().unwrap();
        assert_eq!(format!("{d}"), "-sin(x)");
    }

    #[test]
    fn derivative_of_square() {
        let d = parse("x^2").unwrap().differentiate().unwrap();
        for k in 0..100 {
            let x = k as f64 / 99.0;
            assert!((d.eval(x).unwrap() - 2.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        for s in ["exp(x)*x", "sin(3*x)/(1+x^2)", "sqrt(1+x)*log(2+x)", "x^x", "2^x", "tan(x)"] {
            let e = parse(s).unwrap();
            let d = e.differentiate().unwrap();
            for k in 1..20 {
                let x = k as f64 / 20.0;
                let h = 1e-5;
                let fd = (e.eval(x + h).unwrap() - e.eval(x - h).unwrap()) / (2.0 * h);
                assert!((d.eval(x).unwrap() - fd).abs() < 1e-6, "{s} at {x}");
            }
        }
    }

    #[test]
    fn abs_is_not_differentiable() {
        assert_eq!(
            parse("abs(x)").unwrap().differentiate(),
            Err(DiffError::Unsupported { func: "abs" })
        );
    }

    #[test]
    fn constant_derivative_is_zero() {
        let d = parse("3*pi + exp(2)").unwrap().differentiate().unwrap();
        assert_eq!(d, Expr::Num(0.0));
    }

    #[test]
    fn printing_round_trips() {
        for s in ["-x^2", "(-x)^2", "2^-x", "2^3^2", "(2^3)^2", "1-(2-x)", "x/(x*3)", "-(1+x)", "-2.5*x", "--x"] {
            let e = parse(s).unwrap();
            let printed = format!("{e}");
            let back = parse(&printed).unwrap();
            for k in 1..10 {
                let x = k as f64 / 10.0;
                assert_eq!(e.eval(x).unwrap(), back.eval(x).unwrap(), "{s} -> {printed}");
            }
        }
        let folded = neg(Expr::Num(2.0)) * Expr::X;
        let back = parse(&format!("{folded}")).unwrap();
        assert_eq!(back.eval(0.5).unwrap(), -1.0);
    }
}
