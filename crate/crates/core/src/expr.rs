//! Expression trees for rational functions with rational constants.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' uint)?
//! base   := number | ident | '(' expr ')'
//! number := uint | decimal
//! ```
//!
//! Binary operators are left associative and `^` binds tighter than unary
//! minus, so `-x^2` is `-(x^2)`. A quotient of two literals (`3/7`) and a
//! negated literal (`-2`) are folded into a single rational constant.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ffield::{ArithError, Ring};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(BigRational),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at column {column}")]
pub struct ParseError {
    /// 1-based character column within the parsed text.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl EvalError {
    /// True when a denominator vanished at the evaluation point, i.e. the
    /// caller should pick another point.
    pub fn is_resample(&self) -> bool {
        matches!(self, EvalError::Arith(ArithError::NotInvertible))
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
        }
    }

    /// Replaces variable names according to `map`; unmapped names are kept.
    pub fn rename(&self, map: &HashMap<String, String>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Var(v) => Expr::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Expr::Add(a, b) => Expr::Add(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.rename(map))),
            Expr::Pow(a, e) => Expr::Pow(Box::new(a.rename(map)), *e),
        }
    }

    /// Number of nodes; the length of the straight-line program that
    /// evaluates this tree without sharing.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Expr::Neg(a) | Expr::Pow(a, _) => 1 + a.size(),
        }
    }

    /// Evaluates with one ring operation per node (`pow` by repeated
    /// squaring).
    pub fn evaluate<R: Ring>(
        &self,
        ring: &R,
        assignment: &HashMap<String, R::Elem>,
    ) -> Result<R::Elem, EvalError> {
        Ok(match self {
            Expr::Const(c) => ring.constant(c)?,
            Expr::Var(v) => assignment
                .get(v)
                .cloned()
                .ok_or_else(|| EvalError::Unassigned(v.clone()))?,
            Expr::Add(a, b) => ring.add(&a.evaluate(ring, assignment)?, &b.evaluate(ring, assignment)?),
            Expr::Sub(a, b) => ring.sub(&a.evaluate(ring, assignment)?, &b.evaluate(ring, assignment)?),
            Expr::Mul(a, b) => ring.mul(&a.evaluate(ring, assignment)?, &b.evaluate(ring, assignment)?),
            Expr::Div(a, b) => {
                let num = a.evaluate(ring, assignment)?;
                let den = b.evaluate(ring, assignment)?;
                ring.div(&num, &den)?
            }
            Expr::Neg(a) => ring.neg(&a.evaluate(ring, assignment)?),
            Expr::Pow(a, e) => ring.pow(&a.evaluate(ring, assignment)?, *e),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if !c.is_integer() => 2,
            Expr::Const(c) if c.is_negative() => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        let prec = self.precedence();
        match self {
            Expr::Const(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                child(f, a, a.precedence() < prec)?;
                f.write_str(op)?;
                child(f, b, b.precedence() <= prec)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                // `--x` is fine, but a negative literal needs parentheses to
                // stay a separate node.
                let paren = a.precedence() < prec || matches!(**a, Expr::Const(_));
                child(f, a, paren)
            }
            Expr::Pow(a, e) => {
                child(f, a, a.precedence() <= prec)?;
                write!(f, "^{e}")
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end_column: text.chars().count() + 1,
    };
    if p.tokens.is_empty() {
        return Err(ParseError {
            column: 1,
            message: "empty expression".into(),
        });
    }
    let e = p.expr()?;
    if let Some(tok) = p.peek() {
        return Err(p.error_at(tok.column, format!("unexpected {}", tok.kind.describe())));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(BigRational, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(q, _) => format!("number `{q}`"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Caret => "`^`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '/' => Some(TokenKind::Slash),
            '^' => Some(TokenKind::Caret),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token { kind, column });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let mut frac_part = String::new();
            let mut is_decimal = false;
            if i < chars.len() && chars[i] == '.' {
                is_decimal = true;
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = chars[fs..i].iter().collect();
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(ParseError {
                    column,
                    message: "malformed number".into(),
                });
            }
            let digits = format!("{int_part}{frac_part}");
            let num: BigInt = digits.parse().expect("digit string");
            let den = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push(Token {
                kind: TokenKind::Number(BigRational::new(num, den), is_decimal),
                column,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else if c == '\'' {
            return Err(ParseError {
                column,
                message: "derivatives are not allowed in expressions".into(),
            });
        } else {
            return Err(ParseError {
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn column(&self) -> usize {
        self.peek().map_or(self.end_column, |t| t.column)
    }

    fn error_at(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            column,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Plus) => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(TokenKind::Minus) => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Star) => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(TokenKind::Slash) => {
                    self.next();
                    let col = self.column();
                    let rhs = self.unary()?;
                    lhs = match (lhs, rhs) {
                        (_, Expr::Const(d)) if d.is_zero() => {
                            return Err(self.error_at(col, "division by the constant zero"));
                        }
                        (Expr::Const(n), Expr::Const(d)) => Expr::Const(n / d),
                        (n, d) => Expr::Div(Box::new(n), Box::new(d)),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(TokenKind::Minus) = self.peek_kind() {
            self.next();
            return Ok(match self.unary()? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if let Some(TokenKind::Caret) = self.peek_kind() {
            self.next();
            let col = self.column();
            let exp = self.exponent(col)?;
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn exponent(&mut self, col: usize) -> Result<u32, ParseError> {
        let negative = "negative exponent";
        let non_integer = "exponent must be a nonnegative integer";
        match self.next().map(|t| t.kind) {
            Some(TokenKind::Number(q, is_decimal)) => {
                if is_decimal && !q.is_integer() {
                    return Err(self.error_at(col, non_integer));
                }
                let n = q.to_integer();
                u32::try_from(n).map_err(|_| self.error_at(col, "exponent too large"))
            }
            Some(TokenKind::Minus) => Err(self.error_at(col, negative)),
            Some(TokenKind::LParen) => {
                // Accept `x^(3)`, diagnose `x^(-1)` and friends.
                let inner = self.expr()?;
                match self.next().map(|t| t.kind) {
                    Some(TokenKind::RParen) => {}
                    _ => return Err(self.error_at(col, "unclosed parenthesis in exponent")),
                }
                match inner {
                    Expr::Const(q) if q.is_negative() => Err(self.error_at(col, negative)),
                    Expr::Neg(_) => Err(self.error_at(col, negative)),
                    Expr::Const(q) if q.is_integer() => u32::try_from(q.to_integer())
                        .map_err(|_| self.error_at(col, "exponent too large")),
                    _ => Err(self.error_at(col, non_integer)),
                }
            }
            _ => Err(self.error_at(col, non_integer)),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let col = self.column();
        match self.next().map(|t| t.kind) {
            Some(TokenKind::Number(q, _)) => Ok(Expr::Const(q)),
            Some(TokenKind::Ident(name)) => Ok(Expr::Var(name)),
            Some(TokenKind::LParen) => {
                let e = self.expr()?;
                let close = self.column();
                match self.next().map(|t| t.kind) {
                    Some(TokenKind::RParen) => Ok(e),
                    _ => Err(self.error_at(close, "expected `)`")),
                }
            }
            Some(tok) => Err(self.error_at(col, format!("unexpected {}", tok.describe()))),
            None => Err(self.error_at(col, "unexpected end of expression")),
        }
    }
}

/// `BigRational` from a small fraction; handy in tests and generators.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
