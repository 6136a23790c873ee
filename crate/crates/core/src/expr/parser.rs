//! Tokenizer and recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-q^2`
//! is `-(q^2)` and `2^-1` is `0.5`. Implicit multiplication is rejected.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts;
use core::fmt;

// core's inherent float math is unstable, so the lint misreports this import.
#[allow(unused_imports)]
use num_traits::Float;


use super::{integer_exponent, BinaryOp, Expr, ParsedPotential, UnaryOp};

#[derive(Clone, Debug, PartialEq)]
pub enum ParseError {
    /// Unexpected token at a byte offset.
    Syntax {
        offset: usize,
        expected: &'static str,
        found: String,
    },
    UnknownIdentifier { name: String, offset: usize },
    /// A known function was called with the wrong number of arguments.
    Arity {
        function: &'static str,
        expected: usize,
        found: usize,
        offset: usize,
    },
    /// The declared variable list is empty, has duplicates or invalid names.
    InvalidVariables(String),
    EmptySource,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax {
                offset,
                expected,
                found,
            } => write!(f, "syntax error at byte {offset}: expected {expected}, found {found}"),
            ParseError::UnknownIdentifier { name, offset } => {
                write!(f, "unknown identifier `{name}` at byte {offset}")
            }
            ParseError::Arity {
                function,
                expected,
                found,
                offset,
            } => write!(
                f,
                "function `{function}` at byte {offset} takes {expected} argument(s), got {found}"
            ),
            ParseError::InvalidVariables(msg) => write!(f, "invalid variable list: {msg}"),
            ParseError::EmptySource => f.write_str("empty source"),
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok<'s> {
    Num(f64),
    Ident(&'s str),
    Op(u8),
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Op(c) => write!(f, "`{}`", *c as char),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

pub(crate) fn valid_identifier(s: &str) -> bool {
    let b = s.as_bytes();
    !b.is_empty() && is_ident_start(b[0]) && b[1..].iter().all(|&c| is_ident_continue(c))
}

fn tokenize(src: &str) -> Result<Vec<(Tok<'_>, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                expected: "a number",
                found: text.to_owned(),
            })?;
            out.push((Tok::Num(value), start));
            continue;
        }
        if is_ident_start(c) {
            while i < bytes.len() && is_ident_continue(bytes[i]) {
                i += 1;
            }
            out.push((Tok::Ident(&src[start..i]), start));
            continue;
        }
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: "an operator, number, identifier or parenthesis",
                    found: alloc::format!("`{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'s, 'v> {
    toks: Vec<(Tok<'s>, usize)>,
    pos: usize,
    vars: &'v [String],
}

impl<'s> Parser<'s, '_> {
    fn peek(&self) -> &Tok<'s> {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok<'s>, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok<'static>, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op(b'+') => BinaryOp::Add,
                Tok::Op(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = build(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op(b'*') => BinaryOp::Mul,
                Tok::Op(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = build(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op(b'-') => {
                self.bump();
                let inner = self.unary()?;
                Ok(match inner {
                    Expr::Const(c) => Expr::Const(-c),
                    e => Expr::Unary(UnaryOp::Neg, Box::new(e)),
                })
            }
            Tok::Op(b'+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op(b'^') {
            self.bump();
            let exponent = self.unary()?;
            Ok(build(BinaryOp::Pow, base, exponent))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(i) = self.vars.iter().position(|v| v == name) {
                    return Ok(Expr::Var(i));
                }
                if let Some(op) = UnaryOp::from_name(name) {
                    return self.call(op, offset);
                }
                match name {
                    "pi" => Ok(Expr::Const(consts::PI)),
                    "e" => Ok(Expr::Const(consts::E)),
                    _ => Err(ParseError::UnknownIdentifier {
                        name: name.to_owned(),
                        offset,
                    }),
                }
            }
            _ => {
                self.pos -= usize::from(!matches!(tok, Tok::End));
                Err(self.error("a number, identifier or `(`"))
            }
        }
    }

    fn call(&mut self, op: UnaryOp, offset: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(` after function name")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.expr()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.expr()?);
            }
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        if args.len() != 1 {
            return Err(ParseError::Arity {
                function: op.name(),
                expected: 1,
                found: args.len(),
                offset,
            });
        }
        let arg = args.pop().unwrap_or(Expr::Const(0.0));
        Ok(match arg.as_const().and_then(|c| op.apply(c)) {
            Some(v) => Expr::Const(v),
            None => Expr::Unary(op, Box::new(arg)),
        })
    }
}

/// Node construction for parsed sources: folds constant operands but applies
/// no algebraic identities, so domain errors in the source are preserved.
fn build(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    if op == BinaryOp::Pow {
        if let Some(k) = b.as_const().and_then(integer_exponent) {
            return match a.as_const() {
                Some(c) if c.powi(k).is_finite() => Expr::Const(c.powi(k)),
                _ => Expr::Powi(Box::new(a), k),
            };
        }
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Some(v) = op.apply(x, y) {
            return Expr::Const(v);
        }
    }
    Expr::Binary(op, Box::new(a), Box::new(b))
}

fn check_variables<S: AsRef<str>>(vars: &[S]) -> Result<Vec<String>, ParseError> {
    if vars.is_empty() {
        return Err(ParseError::InvalidVariables("no variables declared".into()));
    }
    let mut out: Vec<String> = Vec::with_capacity(vars.len());
    for v in vars {
        let v = v.as_ref();
        if !valid_identifier(v) {
            return Err(ParseError::InvalidVariables(alloc::format!(
                "`{v}` is not a valid identifier"
            )));
        }
        if UnaryOp::from_name(v).is_some() {
            return Err(ParseError::InvalidVariables(alloc::format!(
                "`{v}` is a reserved function name"
            )));
        }
        if out.iter().any(|o| o == v) {
            return Err(ParseError::InvalidVariables(alloc::format!("`{v}` declared twice")));
        }
        out.push(v.to_owned());
    }
    Ok(out)
}

/// Parses a bare expression over the given variable names.
pub fn parse_expr<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Expr, ParseError> {
    let vars = check_variables(variables)?;
    parse_with(source, &vars)
}

fn parse_with(source: &str, vars: &[String]) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::EmptySource);
    }
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0, vars };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("an operator or end of input"));
    }
    Ok(e)
}

/// Parses `source` into a potential over `variables`, precomputing its
/// gradient and Hessian trees.
pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<ParsedPotential, ParseError> {
    let vars = check_variables(variables)?;
    let body = parse_with(source, &vars)?;
    Ok(ParsedPotential::new(vars, body))
}
