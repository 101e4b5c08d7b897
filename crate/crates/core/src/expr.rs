//! Scalar expressions in one free variable `t`.
//!
//! Every coefficient and nonlinearity of a problem (a₁, p₁, f₁, h₁, φ̄₁, …)
//! is written as an expression string and parsed into an [`Expr`]. The
//! grammar is
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;            (* right-associative *)
//! primary = number | "t" | "N" | call | "(" expr ")" ;
//! call    = func "(" expr [ "," expr ] ")" ;
//! func    = "sqrt" | "exp" | "ln" | "abs" | "pow" | "min" | "max" ;
//! number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ]
//!         | "." digit { digit } [ exponent ] ;
//! ```
//!
//! Whitespace is insignificant. There is no implicit multiplication: `2t`
//! is a syntax error.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {op} of {arg}")]
    Domain { op: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Abs,
    Pow,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

/// Abstract syntax tree of a scalar expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// The free variable `t`.
    Var,
    /// The dimension constant `N`.
    Dim,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Value with first and second derivative with respect to `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    fn constant(value: f64) -> Self {
        Jet { value, d1: 0.0, d2: 0.0 }
    }

    fn is_constant(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0
    }
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    Parser::new(source).parse()
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Num(value)
    }

    /// Evaluates with `t` bound to `t` and `N` bound to `n`.
    pub fn eval(&self, t: f64, n: u32) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var => Ok(t),
            Expr::Dim => Ok(n as f64),
            Expr::Neg(e) => Ok(-e.eval(t, n)?),
            Expr::Binary(op, l, r) => {
                let x = l.eval(t, n)?;
                let y = r.eval(t, n)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div => divide(x, y),
                    BinOp::Pow => power(x, y),
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(t, n)?;
                match f {
                    Func::Sqrt => sqrt(x),
                    Func::Exp => Ok(x.exp()),
                    Func::Ln => ln(x),
                    Func::Abs => Ok(x.abs()),
                    Func::Pow => power(x, args[1].eval(t, n)?),
                    Func::Min => Ok(x.min(args[1].eval(t, n)?)),
                    Func::Max => Ok(x.max(args[1].eval(t, n)?)),
                }
            }
        }
    }

    /// Forward-mode evaluation of the value and its first two derivatives
    /// in `t`. Domain rules match [`Expr::eval`].
    pub fn eval_jet(&self, t: f64, n: u32) -> Result<Jet, EvalError> {
        match self {
            Expr::Num(v) => Ok(Jet::constant(*v)),
            Expr::Var => Ok(Jet { value: t, d1: 1.0, d2: 0.0 }),
            Expr::Dim => Ok(Jet::constant(n as f64)),
            Expr::Neg(e) => {
                let u = e.eval_jet(t, n)?;
                Ok(Jet { value: -u.value, d1: -u.d1, d2: -u.d2 })
            }
            Expr::Binary(op, l, r) => {
                let u = l.eval_jet(t, n)?;
                let v = r.eval_jet(t, n)?;
                match op {
                    BinOp::Add => Ok(Jet { value: u.value + v.value, d1: u.d1 + v.d1, d2: u.d2 + v.d2 }),
                    BinOp::Sub => Ok(Jet { value: u.value - v.value, d1: u.d1 - v.d1, d2: u.d2 - v.d2 }),
                    BinOp::Mul => Ok(jet_mul(u, v)),
                    BinOp::Div => jet_div(u, v),
                    BinOp::Pow => jet_pow(u, v),
                }
            }
            Expr::Call(f, args) => {
                let u = args[0].eval_jet(t, n)?;
                match f {
                    Func::Sqrt => {
                        let s = sqrt(u.value)?;
                        if s == 0.0 {
                            if u.is_constant() {
                                return Ok(Jet::constant(0.0));
                            }
                            return Err(EvalError::DivisionByZero);
                        }
                        Ok(Jet {
                            value: s,
                            d1: u.d1 / (2.0 * s),
                            d2: u.d2 / (2.0 * s) - u.d1 * u.d1 / (4.0 * s * s * s),
                        })
                    }
                    Func::Exp => {
                        let e = u.value.exp();
                        Ok(Jet { value: e, d1: e * u.d1, d2: e * (u.d2 + u.d1 * u.d1) })
                    }
                    Func::Ln => {
                        let value = ln(u.value)?;
                        let x = u.value;
                        Ok(Jet { value, d1: u.d1 / x, d2: u.d2 / x - u.d1 * u.d1 / (x * x) })
                    }
                    Func::Abs => {
                        let s = if u.value < 0.0 { -1.0 } else { 1.0 };
                        Ok(Jet { value: u.value.abs(), d1: s * u.d1, d2: s * u.d2 })
                    }
                    Func::Pow => jet_pow(u, args[1].eval_jet(t, n)?),
                    Func::Min => {
                        let v = args[1].eval_jet(t, n)?;
                        Ok(if v.value < u.value { v } else { u })
                    }
                    Func::Max => {
                        let v = args[1].eval_jet(t, n)?;
                        Ok(if v.value > u.value { v } else { u })
                    }
                }
            }
        }
    }

    /// True when the tree does not mention `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Dim => true,
            Expr::Var => false,
            Expr::Neg(e) => e.is_constant(),
            Expr::Binary(_, l, r) => l.is_constant() && r.is_constant(),
            Expr::Call(_, args) => args.iter().all(Expr::is_constant),
        }
    }
}

fn divide(x: f64, y: f64) -> Result<f64, EvalError> {
    if y == 0.0 {
        Err(EvalError::DivisionByZero)
    } else {
        Ok(x / y)
    }
}

fn sqrt(x: f64) -> Result<f64, EvalError> {
    if x < 0.0 {
        Err(EvalError::Domain { op: "sqrt", arg: x })
    } else {
        Ok(x.sqrt())
    }
}

fn ln(x: f64) -> Result<f64, EvalError> {
    if x <= 0.0 {
        Err(EvalError::Domain { op: "ln", arg: x })
    } else {
        Ok(x.ln())
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::Domain { op: "non-integer power", arg: base });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    Ok(base.powf(exponent))
}

fn jet_mul(u: Jet, v: Jet) -> Jet {
    Jet {
        value: u.value * v.value,
        d1: u.d1 * v.value + u.value * v.d1,
        d2: u.d2 * v.value + 2.0 * u.d1 * v.d1 + u.value * v.d2,
    }
}

fn jet_div(u: Jet, v: Jet) -> Result<Jet, EvalError> {
    let q = divide(u.value, v.value)?;
    let d1 = (u.d1 - q * v.d1) / v.value;
    let d2 = (u.d2 - 2.0 * d1 * v.d1 - q * v.d2) / v.value;
    Ok(Jet { value: q, d1, d2 })
}

fn jet_pow(u: Jet, v: Jet) -> Result<Jet, EvalError> {
    let value = power(u.value, v.value)?;
    if v.is_constant() {
        let c = v.value;
        if u.is_constant() {
            return Ok(Jet::constant(value));
        }
        if c == 0.0 {
            return Ok(Jet::constant(1.0));
        }
        // u^(c-1) and u^(c-2) through powf keep integer exponents exact at u = 0
        let p1 = power(u.value, c - 1.0)?;
        let d1 = c * p1 * u.d1;
        let d2 = if c == 1.0 {
            u.d2
        } else {
            c * (c - 1.0) * power(u.value, c - 2.0)? * u.d1 * u.d1 + c * p1 * u.d2
        };
        return Ok(Jet { value, d1, d2 });
    }
    // u^v = exp(v ln u) for a varying exponent
    let x = u.value;
    let l = Jet { value: ln(x)?, d1: u.d1 / x, d2: u.d2 / x - u.d1 * u.d1 / (x * x) };
    let w = jet_mul(v, l);
    Ok(Jet { value, d1: value * w.d1, d2: value * (w.d2 + w.d1 * w.d1) })
}

impl fmt::Display for Expr {
    /// Fully parenthesized rendering; re-parsing yields an identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var => f.write_str("t"),
            Expr::Dim => f.write_str("N"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
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
    Comma,
    End,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    tok: Tok,
    tok_start: usize,
}

impl<'a> Parser<'a> {
    fn new(source: &'a str) -> Self {
        Parser { src: source.as_bytes(), pos: 0, tok: Tok::End, tok_start: 0 }
    }

    fn parse(mut self) -> Result<Expr, ParseError> {
        self.advance()?;
        let e = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.expected("operator or end of input"));
        }
        Ok(e)
    }

    fn expected(&self, what: &str) -> ParseError {
        ParseError::Syntax { offset: self.tok_start, expected: what.to_string() }
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            self.tok = t;
            return Ok(());
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
            self.tok = Tok::Ident(name.to_string());
            return Ok(());
        }
        Err(ParseError::Syntax { offset: self.pos, expected: "a number, identifier, operator or parenthesis".into() })
    }

    fn number(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            return Err(ParseError::Syntax { offset: start, expected: "digits".into() });
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return Err(ParseError::Syntax { offset: self.pos, expected: "exponent digits".into() });
            }
            debug_assert!(self.pos > save);
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        let value = text
            .parse::<f64>()
            .map_err(|_| ParseError::Syntax { offset: start, expected: "a numeric literal".into() })?;
        self.tok = Tok::Num(value);
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.expected("`)`"));
                }
                self.advance()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let offset = self.tok_start;
                self.advance()?;
                match name.as_str() {
                    "t" => return Ok(Expr::Var),
                    "N" => return Ok(Expr::Dim),
                    _ => {}
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError::UnknownIdentifier { name, offset });
                };
                if self.tok != Tok::LParen {
                    return Err(self.expected("`(` after function name"));
                }
                self.advance()?;
                let mut args = vec![self.expr()?];
                while args.len() < func.arity() {
                    if self.tok != Tok::Comma {
                        return Err(self.expected("`,`"));
                    }
                    self.advance()?;
                    args.push(self.expr()?);
                }
                if self.tok != Tok::RParen {
                    return Err(self.expected("`)`"));
                }
                self.advance()?;
                Ok(Expr::Call(func, args))
            }
            _ => Err(self.expected("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(s: &str, t: f64) -> f64 {
        parse(s).unwrap().eval(t, 3).unwrap()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("2*(t+3)^2", 1.0), 32.0);
        assert_eq!(ev("t", 7.5), 7.5);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0), -4.0);
        assert_eq!(ev("-t*3", 2.0), -6.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("  1 +\t2 * 3 ", 0.0), 7.0);
        assert_eq!(ev("10 - 4 - 3", 0.0), 3.0);
        assert_eq!(ev("12 / 3 / 2", 0.0), 2.0);
        assert_eq!(ev("min(t, 2) + max(t, 2) + pow(t, 2)", 3.0), 2.0 + 3.0 + 9.0);
        assert_eq!(ev("1.5e1 + .5", 0.0), 15.5);
        assert_eq!(ev("abs(-t)", 2.0), 2.0);
    }

    #[test]
    fn closed_form_example_p1() {
        let p1 = parse("4*(t^3+(N+2)*t^2)/sqrt(t^2+1)").unwrap();
        let v = p1.eval(1.0, 3).unwrap();
        assert!((v - 24.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((v - 16.970_562_748_477_14).abs() < 1e-12);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse("sqrt(").unwrap_err();
        assert_eq!(err.offset(), 5);
        assert!(matches!(err, ParseError::Syntax { .. }));
        assert_eq!(parse("2t").unwrap_err().offset(), 1);
        assert_eq!(parse("").unwrap_err().offset(), 0);
        assert_eq!(parse("(1+2").unwrap_err().offset(), 4);
        assert_eq!(parse("1 $ 2").unwrap_err().offset(), 2);
        assert_eq!(parse("pow(1)").unwrap_err().offset(), 5);
        assert_eq!(parse("1e+").unwrap_err().offset(), 3);
    }

    #[test]
    fn unknown_identifiers() {
        assert_eq!(
            parse("x + 1").unwrap_err(),
            ParseError::UnknownIdentifier { name: "x".into(), offset: 0 }
        );
        assert!(matches!(parse("sin(t)"), Err(ParseError::UnknownIdentifier { .. })));
    }

    #[test]
    fn domain_errors() {
        let e = parse("ln(t)").unwrap();
        assert!(matches!(e.eval(-1.0, 3), Err(EvalError::Domain { op: "ln", .. })));
        assert!(matches!(parse("sqrt(t)").unwrap().eval(-1.0, 3), Err(EvalError::Domain { .. })));
        assert_eq!(parse("1/t").unwrap().eval(0.0, 3), Err(EvalError::DivisionByZero));
        assert!(matches!(parse("t^0.5").unwrap().eval(-4.0, 3), Err(EvalError::Domain { .. })));
        assert_eq!(parse("t^-1").unwrap().eval(0.0, 3), Err(EvalError::DivisionByZero));
        assert_eq!(parse("t^3").unwrap().eval(-2.0, 3).unwrap(), -8.0);
    }

    #[test]
    fn jets_match_hand_derivatives() {
        let cases: &[(&str, fn(f64) -> (f64, f64, f64))] = &[
            ("t^4+1", |t| (t.powi(4) + 1.0, 4.0 * t.powi(3), 12.0 * t * t)),
            ("sqrt(t^2+1)", |t| {
                let s = (t * t + 1.0).sqrt();
                (s, t / s, 1.0 / (s * s * s))
            }),
            ("exp(2*t)/t", |t| {
                let e = (2.0 * t).exp();
                (e / t, e * (2.0 * t - 1.0) / (t * t), e * (4.0 * t * t - 4.0 * t + 2.0) / t.powi(3))
            }),
            ("ln(t)*t", |t| (t.ln() * t, t.ln() + 1.0, 1.0 / t)),
            ("t^t", |t| {
                let v = t.powf(t);
                let l = t.ln() + 1.0;
                (v, v * l, v * (l * l + 1.0 / t))
            }),
        ];
        for (src, exact) in cases {
            let e = parse(src).unwrap();
            for &t in &[0.3, 1.0, 2.7] {
                let j = e.eval_jet(t, 3).unwrap();
                let (v, d1, d2) = exact(t);
                assert!((j.value - v).abs() <= 1e-12 * v.abs().max(1.0), "{src} value at {t}");
                assert!((j.d1 - d1).abs() <= 1e-11 * d1.abs().max(1.0), "{src} d1 at {t}");
                assert!((j.d2 - d2).abs() <= 1e-10 * d2.abs().max(1.0), "{src} d2 at {t}");
                assert_eq!(j.value, e.eval(t, 3).unwrap());
            }
        }
        let j = parse("t^2").unwrap().eval_jet(0.0, 3).unwrap();
        assert_eq!((j.value, j.d1, j.d2), (0.0, 0.0, 2.0));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::Var),
            Just(Expr::Dim),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Expr::Binary(op, Box::new(l), Box::new(r))),
                inner.clone().prop_map(|e| Expr::Call(Func::Exp, vec![e])),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Max, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn unparse_reparse_is_identity(e in arb_expr(), t in -5.0f64..5.0) {
            let again = parse(&e.to_string()).unwrap();
            prop_assert_eq!(&again, &e);
            let a = e.eval(t, 3);
            let b = again.eval(t, 3);
            match (a, b) {
                (Ok(x), Ok(y)) => prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan())),
                (Err(x), Err(y)) => prop_assert_eq!(x, y),
                _ => prop_assert!(false),
            }
        }

        #[test]
        fn product_binds_tighter_than_sum(a in 0.0f64..1e3, b in 0.0f64..1e3, c in 0.0f64..1e3) {
            let lhs = parse(&format!("{a:?}+{b:?}*{c:?}")).unwrap().eval(0.0, 3).unwrap();
            let rhs = parse(&format!("{a:?}+({b:?}*{c:?})")).unwrap().eval(0.0, 3).unwrap();
            prop_assert_eq!(lhs.to_bits(), rhs.to_bits());
        }

        #[test]
        fn evaluation_is_pure(e in arb_expr(), t in -5.0f64..5.0) {
            let a = e.eval(t, 4).map(f64::to_bits);
            let b = e.eval(t, 4).map(f64::to_bits);
            prop_assert_eq!(a, b);
        }
    }
}
