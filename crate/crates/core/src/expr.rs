//! The two input languages: polynomials in the index variable `n`, and
//! constant expressions over rationals, `pi`, and `sqrt`.
//!
//! Both share one tokenizer. Error positions are 0-based character offsets
//! into the source text.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' unary)?
//! atom   := INTEGER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! Exponents must fold to integer constants; in polynomials they must also
//! be nonnegative.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::numerics::{BigRational, NumericsError, PrecisionReal, MIN_PRECISION_BITS};
use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at offset {pos}")]
    UnknownSymbol { pos: usize, name: String },
    #[error("not a polynomial at offset {pos}: {msg}")]
    NonPolynomial { pos: usize, msg: String },
    #[error("division by zero at offset {pos}")]
    DivisionByZero { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownSymbol { pos, .. }
            | ParseError::NonPolynomial { pos, .. }
            | ParseError::DivisionByZero { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative value")]
    NegativeSqrt,
    #[error("precision must be at least {MIN_PRECISION_BITS} bits, got {0}")]
    PrecisionTooSmall(u32),
    #[error("exponent {0} out of range")]
    ExponentOutOfRange(i64),
}

impl From<NumericsError> for EvalError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::NegativeSqrt => EvalError::NegativeSqrt,
            NumericsError::PrecisionTooSmall(p) => EvalError::PrecisionTooSmall(p),
            _ => EvalError::DivisionByZero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
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

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push((Tok::Int(text.parse().expect("digits")), start));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), start));
                continue;
            }
            '+' => Tok::Plus,
            // U+2212 MINUS SIGN is accepted as a plain minus
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Cursor {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Cursor {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Self {
            toks: tokenize(src)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {want}")))
        }
    }

    fn unexpected(&self, ctx: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            msg: format!("{ctx}, found {}", self.peek()),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::End => Ok(()),
            _ => Err(self.unexpected("expected operator or end of input")),
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomials

pub fn parse_polynomial(source: &str) -> Result<Polynomial, ParseError> {
    let mut cur = Cursor::new(source)?;
    let p = poly_expr(&mut cur)?;
    cur.finish()?;
    Ok(p)
}

fn poly_expr(cur: &mut Cursor) -> Result<Polynomial, ParseError> {
    let mut acc = poly_term(cur)?;
    loop {
        match cur.peek() {
            Tok::Plus => {
                cur.bump();
                acc = &acc + &poly_term(cur)?;
            }
            Tok::Minus => {
                cur.bump();
                acc = &acc - &poly_term(cur)?;
            }
            _ => return Ok(acc),
        }
    }
}

fn poly_term(cur: &mut Cursor) -> Result<Polynomial, ParseError> {
    let mut acc = poly_unary(cur)?;
    loop {
        match cur.peek() {
            Tok::Star => {
                cur.bump();
                acc = &acc * &poly_unary(cur)?;
            }
            Tok::Slash => {
                let pos = cur.bump().1;
                let rhs_pos = cur.pos();
                let rhs = poly_unary(cur)?;
                let k = rhs.as_constant().ok_or_else(|| ParseError::NonPolynomial {
                    pos: rhs_pos,
                    msg: "division by an expression containing n".into(),
                })?;
                if k.is_zero() {
                    return Err(ParseError::DivisionByZero { pos });
                }
                acc = acc.scale(&k.recip());
            }
            _ => return Ok(acc),
        }
    }
}

fn poly_unary(cur: &mut Cursor) -> Result<Polynomial, ParseError> {
    match cur.peek() {
        Tok::Minus => {
            cur.bump();
            Ok(-&poly_unary(cur)?)
        }
        Tok::Plus => {
            cur.bump();
            poly_unary(cur)
        }
        _ => poly_power(cur),
    }
}

fn poly_power(cur: &mut Cursor) -> Result<Polynomial, ParseError> {
    let base = poly_atom(cur)?;
    if *cur.peek() != Tok::Caret {
        return Ok(base);
    }
    cur.bump();
    let pos = cur.pos();
    let e = poly_unary(cur)?;
    let k = e.as_constant().ok_or_else(|| ParseError::NonPolynomial {
        pos,
        msg: "exponent contains n".into(),
    })?;
    if !k.is_integer() {
        return Err(ParseError::NonPolynomial {
            pos,
            msg: format!("non-integer exponent {k}"),
        });
    }
    if k.is_negative() {
        return Err(ParseError::NonPolynomial {
            pos,
            msg: format!("negative exponent {k}"),
        });
    }
    let k = k
        .to_integer()
        .to_u32()
        .filter(|k| *k <= 4096)
        .ok_or_else(|| ParseError::Syntax {
            pos,
            msg: "exponent too large".into(),
        })?;
    Ok(base.pow(k))
}

fn poly_atom(cur: &mut Cursor) -> Result<Polynomial, ParseError> {
    let pos = cur.pos();
    match cur.peek().clone() {
        Tok::Int(i) => {
            cur.bump();
            Ok(Polynomial::constant(BigRational::from_integer(i)))
        }
        Tok::Ident(name) => {
            cur.bump();
            if name == "n" {
                Ok(Polynomial::identity())
            } else {
                Err(ParseError::UnknownSymbol { pos, name })
            }
        }
        Tok::LParen => {
            cur.bump();
            let inner = poly_expr(cur)?;
            cur.expect(Tok::RParen)?;
            Ok(inner)
        }
        _ => Err(cur.unexpected("expected a number, `n`, or `(`")),
    }
}

// ---------------------------------------------------------------------------
// Constant expressions

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstExpr {
    Int(BigInt),
    Pi,
    Neg(Box<ConstExpr>),
    Add(Box<ConstExpr>, Box<ConstExpr>),
    Sub(Box<ConstExpr>, Box<ConstExpr>),
    Mul(Box<ConstExpr>, Box<ConstExpr>),
    Div(Box<ConstExpr>, Box<ConstExpr>),
    Pow(Box<ConstExpr>, i64),
    Sqrt(Box<ConstExpr>),
}

impl ConstExpr {
    pub fn int(i: i64) -> Self {
        ConstExpr::Int(i.into())
    }

    fn precedence(&self) -> u8 {
        match self {
            ConstExpr::Add(..) | ConstExpr::Sub(..) => 1,
            ConstExpr::Mul(..) | ConstExpr::Div(..) => 2,
            ConstExpr::Neg(..) => 3,
            ConstExpr::Pow(..) => 4,
            ConstExpr::Int(_) | ConstExpr::Pi | ConstExpr::Sqrt(_) => 5,
        }
    }

    fn node_count(&self) -> u32 {
        match self {
            ConstExpr::Int(_) | ConstExpr::Pi => 1,
            ConstExpr::Neg(a) | ConstExpr::Sqrt(a) | ConstExpr::Pow(a, _) => 1 + a.node_count(),
            ConstExpr::Add(a, b) | ConstExpr::Sub(a, b) | ConstExpr::Mul(a, b) | ConstExpr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &ConstExpr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for ConstExpr {
    /// Minimal-parenthesis rendering that reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConstExpr::*;
        let p = self.precedence();
        match self {
            Int(i) => write!(f, "{i}"),
            Pi => write!(f, "pi"),
            Sqrt(a) => write!(f, "sqrt({a})"),
            Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                let op = match self {
                    Add(..) => " + ",
                    Sub(..) => " - ",
                    Mul(..) => "*",
                    _ => "/",
                };
                write_operand(f, a, a.precedence() < p)?;
                write!(f, "{op}")?;
                write_operand(f, b, b.precedence() <= p)
            }
            Pow(a, e) => {
                write_operand(f, a, a.precedence() <= p)?;
                write!(f, "^{e}")
            }
        }
    }
}

pub fn parse_const_expr(source: &str) -> Result<ConstExpr, ParseError> {
    let mut cur = Cursor::new(source)?;
    let e = const_expr(&mut cur)?;
    cur.finish()?;
    Ok(e)
}

fn const_expr(cur: &mut Cursor) -> Result<ConstExpr, ParseError> {
    let mut acc = const_term(cur)?;
    loop {
        match cur.peek() {
            Tok::Plus => {
                cur.bump();
                acc = ConstExpr::Add(Box::new(acc), Box::new(const_term(cur)?));
            }
            Tok::Minus => {
                cur.bump();
                acc = ConstExpr::Sub(Box::new(acc), Box::new(const_term(cur)?));
            }
            _ => return Ok(acc),
        }
    }
}

fn const_term(cur: &mut Cursor) -> Result<ConstExpr, ParseError> {
    let mut acc = const_unary(cur)?;
    loop {
        match cur.peek() {
            Tok::Star => {
                cur.bump();
                acc = ConstExpr::Mul(Box::new(acc), Box::new(const_unary(cur)?));
            }
            Tok::Slash => {
                cur.bump();
                acc = ConstExpr::Div(Box::new(acc), Box::new(const_unary(cur)?));
            }
            _ => return Ok(acc),
        }
    }
}

fn const_unary(cur: &mut Cursor) -> Result<ConstExpr, ParseError> {
    match cur.peek() {
        Tok::Minus => {
            cur.bump();
            Ok(ConstExpr::Neg(Box::new(const_unary(cur)?)))
        }
        Tok::Plus => {
            cur.bump();
            const_unary(cur)
        }
        _ => const_power(cur),
    }
}

fn const_power(cur: &mut Cursor) -> Result<ConstExpr, ParseError> {
    let base = const_atom(cur)?;
    if *cur.peek() != Tok::Caret {
        return Ok(base);
    }
    cur.bump();
    let pos = cur.pos();
    let e = const_unary(cur)?;
    let not_int = || ParseError::Syntax {
        pos,
        msg: "exponent must be an integer constant".into(),
    };
    let k = fold_exact(&e).ok_or_else(not_int)?;
    if !k.is_integer() {
        return Err(not_int());
    }
    let k = k
        .to_integer()
        .to_i64()
        .filter(|k| k.abs() <= 1 << 20)
        .ok_or_else(|| ParseError::Syntax {
            pos,
            msg: "exponent too large".into(),
        })?;
    Ok(ConstExpr::Pow(Box::new(base), k))
}

fn const_atom(cur: &mut Cursor) -> Result<ConstExpr, ParseError> {
    let pos = cur.pos();
    match cur.peek().clone() {
        Tok::Int(i) => {
            cur.bump();
            Ok(ConstExpr::Int(i))
        }
        Tok::Ident(name) => {
            cur.bump();
            match name.to_ascii_lowercase().as_str() {
                "pi" => Ok(ConstExpr::Pi),
                "sqrt" if name == "sqrt" => {
                    cur.expect(Tok::LParen)?;
                    let inner = const_expr(cur)?;
                    cur.expect(Tok::RParen)?;
                    Ok(ConstExpr::Sqrt(Box::new(inner)))
                }
                _ => Err(ParseError::UnknownSymbol { pos, name }),
            }
        }
        Tok::LParen => {
            cur.bump();
            let inner = const_expr(cur)?;
            cur.expect(Tok::RParen)?;
            Ok(inner)
        }
        _ => Err(cur.unexpected("expected a number, `pi`, `sqrt(`, or `(`")),
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// Exact value when the tree avoids `pi` and irrational square roots.
fn fold_exact(e: &ConstExpr) -> Option<BigRational> {
    use ConstExpr::*;
    Some(match e {
        Int(i) => BigRational::from_integer(i.clone()),
        Pi => return None,
        Neg(a) => -fold_exact(a)?,
        Add(a, b) => fold_exact(a)? + fold_exact(b)?,
        Sub(a, b) => fold_exact(a)? - fold_exact(b)?,
        Mul(a, b) => fold_exact(a)? * fold_exact(b)?,
        Div(a, b) => {
            let d = fold_exact(b)?;
            if d.is_zero() {
                return None;
            }
            fold_exact(a)? / d
        }
        Pow(a, k) => {
            let base = fold_exact(a)?;
            if base.is_zero() && *k < 0 {
                return None;
            }
            num_traits::pow::Pow::pow(base, *k as i32)
        }
        Sqrt(a) => rational_sqrt(&fold_exact(a)?)?,
    })
}

#[derive(Clone)]
enum Value {
    Exact(BigRational),
    Approx(PrecisionReal),
}

impl Value {
    fn real(&self, w: u32) -> PrecisionReal {
        match self {
            Value::Exact(q) => PrecisionReal::from_rational(q, w),
            Value::Approx(x) => x.clone(),
        }
    }
}

fn eval_value(e: &ConstExpr, w: u32) -> Result<Value, EvalError> {
    use ConstExpr::*;
    use Value::*;
    Ok(match e {
        Int(i) => Exact(BigRational::from_integer(i.clone())),
        Pi => Approx(PrecisionReal::pi(w)),
        Neg(a) => match eval_value(a, w)? {
            Exact(q) => Exact(-q),
            Approx(x) => Approx(x.neg()),
        },
        Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
            let (x, y) = (eval_value(a, w)?, eval_value(b, w)?);
            if let (Exact(p), Exact(q)) = (&x, &y) {
                return Ok(Exact(match e {
                    Add(..) => p + q,
                    Sub(..) => p - q,
                    Mul(..) => p * q,
                    _ => {
                        if q.is_zero() {
                            return Err(EvalError::DivisionByZero);
                        }
                        p / q
                    }
                }));
            }
            let (rx, ry) = (x.real(w), y.real(w));
            Approx(match e {
                Add(..) => rx.add(&ry, w),
                Sub(..) => rx.sub(&ry, w),
                Mul(..) => rx.mul(&ry, w),
                _ => rx.div(&ry, w).map_err(|_| EvalError::DivisionByZero)?,
            })
        }
        Pow(a, k) => match eval_value(a, w)? {
            Exact(q) => {
                if q.is_zero() && *k < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                Exact(num_traits::pow::Pow::pow(q, *k as i32))
            }
            Approx(x) => {
                if x.is_zero() && *k < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                Approx(x.powi(*k, w)?)
            }
        },
        Sqrt(a) => match eval_value(a, w)? {
            Exact(q) => {
                if q.is_negative() {
                    return Err(EvalError::NegativeSqrt);
                }
                match rational_sqrt(&q) {
                    Some(r) => Exact(r),
                    None => Approx(PrecisionReal::from_rational(&q, w + 2).sqrt(w)?),
                }
            }
            Approx(x) => Approx(x.sqrt(w)?),
        },
    })
}

/// Evaluates to `precision_bits` bits. Subtrees free of `pi` and irrational
/// roots are folded exactly; the rest is evaluated at increasing working
/// precision until two consecutive evaluations agree to the requested width.
pub fn eval_const_expr(expr: &ConstExpr, precision_bits: u32) -> Result<PrecisionReal, EvalError> {
    if precision_bits < MIN_PRECISION_BITS {
        return Err(EvalError::PrecisionTooSmall(precision_bits));
    }
    let guard = 32 + 2 * expr.node_count();
    let mut w = precision_bits + guard;
    let mut prev = match eval_value(expr, w)? {
        Value::Exact(q) => return Ok(PrecisionReal::from_rational(&q, precision_bits)),
        Value::Approx(x) => x,
    };
    for _ in 0..12 {
        w *= 2;
        let next = eval_value(expr, w)?.real(w);
        let diff = next.sub(&prev, w);
        let settled = match (diff.magnitude_exponent(), next.magnitude_exponent()) {
            (None, _) => true,
            (Some(d), Some(v)) => d <= v - precision_bits as i64 - 4,
            (Some(_), None) => false,
        };
        if settled {
            return Ok(next.with_precision(precision_bits));
        }
        prev = next;
    }
    Ok(prev.with_precision(precision_bits))
}
