//! Expression language for potentials `U(q)`.
//!
//! Sources are parsed by a small recursive-descent parser into an immutable
//! [`Expr`] tree. Trees can be evaluated pointwise and differentiated exactly;
//! [`ParsedPotential`] bundles a tree with its variable names and the eagerly
//! computed first and second derivative trees.

mod derive;
mod parser;
mod potential;
mod render;

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

// core's inherent float math is unstable, so the lint misreports this import.
#[allow(unused_imports)]
use num_traits::Float;


pub use parser::{parse, parse_expr, ParseError};
pub use potential::ParsedPotential;
pub use render::Rendered;

/// Elementary functions of one argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Atan,
    Asin,
    Acos,
    Sinh,
    Cosh,
    Tanh,
}

impl UnaryOp {
    /// Name as written in sources. `Neg` has no function form.
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Atan => "atan",
            UnaryOp::Asin => "asin",
            UnaryOp::Acos => "acos",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "atan" => UnaryOp::Atan,
            "asin" => UnaryOp::Asin,
            "acos" => UnaryOp::Acos,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> Option<f64> {
        let y = match self {
            UnaryOp::Neg => -x,
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Tan => x.tan(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Ln if x > 0.0 => x.ln(),
            UnaryOp::Sqrt if x >= 0.0 => x.sqrt(),
            UnaryOp::Atan => x.atan(),
            UnaryOp::Asin if (-1.0..=1.0).contains(&x) => x.asin(),
            UnaryOp::Acos if (-1.0..=1.0).contains(&x) => x.acos(),
            UnaryOp::Sinh => x.sinh(),
            UnaryOp::Cosh => x.cosh(),
            UnaryOp::Tanh => x.tanh(),
            _ => return None,
        };
        y.is_finite().then_some(y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    /// General power `a^b`, evaluated as `exp(b ln a)` and defined for `a > 0`.
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn apply(self, a: f64, b: f64) -> Option<f64> {
        let y = match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div if b != 0.0 => a / b,
            BinaryOp::Pow if a > 0.0 => a.powf(b),
            _ => return None,
        };
        y.is_finite().then_some(y)
    }
}

/// Immutable expression tree.
///
/// Variables are referenced by index into the owning potential's name list.
/// Powers with a constant integer exponent are stored as [`Expr::Powi`] so
/// they evaluate for any base and differentiate by the plain power rule.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Powi(Box<Expr>, i32),
}

/// Evaluation left the domain of a partial function.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainError {
    /// Offending function or operator (`ln`, `sqrt`, `/`, `^`, ...).
    pub function: &'static str,
    /// Argument value that was rejected (first operand for binary ops).
    pub argument: f64,
    /// Canonical rendering of the offending sub-expression; unnamed variables show as `x{i}`.
    pub expression: String,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "domain error in `{}` at argument {:?} (sub-expression {})",
            self.function, self.argument, self.expression
        )
    }
}

impl core::error::Error for DomainError {}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Unary(_, a) | Expr::Powi(a, _) => a.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) | Expr::Powi(a, _) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Evaluates the tree at `x`. Panics if a variable index is out of range.
    pub fn eval(&self, x: &[f64]) -> Result<f64, DomainError> {
        self.eval_named::<&str>(x, &[])
    }

    /// Like [`Expr::eval`], with domain errors rendered using `names`.
    pub fn eval_named<S: AsRef<str>>(&self, x: &[f64], names: &[S]) -> Result<f64, DomainError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(i) => Ok(x[*i]),
            Expr::Unary(op, a) => {
                let v = a.eval_named(x, names)?;
                op.apply(v).ok_or_else(|| DomainError {
                    function: op.name(),
                    argument: v,
                    expression: alloc::format!("{}", self.rendered(names)),
                })
            }
            Expr::Binary(op, a, b) => {
                let u = a.eval_named(x, names)?;
                let v = b.eval_named(x, names)?;
                op.apply(u, v).ok_or_else(|| DomainError {
                    function: match op {
                        BinaryOp::Add => "+",
                        BinaryOp::Sub => "-",
                        BinaryOp::Mul => "*",
                        BinaryOp::Div => "/",
                        BinaryOp::Pow => "^",
                    },
                    argument: if *op == BinaryOp::Div { v } else { u },
                    expression: alloc::format!("{}", self.rendered(names)),
                })
            }
            Expr::Powi(a, k) => {
                let v = a.eval_named(x, names)?;
                let y = v.powi(*k);
                if y.is_finite() {
                    Ok(y)
                } else {
                    Err(DomainError {
                        function: "^",
                        argument: v,
                        expression: alloc::format!("{}", self.rendered(names)),
                    })
                }
            }
        }
    }

    // Simplifying constructors: constant folding plus the 0/1 identities.

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, inner) => *inner,
            a => Expr::Unary(UnaryOp::Neg, Box::new(a)),
        }
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if op == UnaryOp::Neg {
            return Expr::neg(a);
        }
        if let Some(c) = a.as_const() {
            if let Some(v) = op.apply(c) {
                return Expr::Const(v);
            }
        }
        Expr::Unary(op, Box::new(a))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        fold(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        fold(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::Const(0.0);
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if a.as_const() == Some(-1.0) {
            return Expr::neg(b);
        }
        if b.as_const() == Some(-1.0) {
            return Expr::neg(a);
        }
        fold(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            return a;
        }
        if a.is_zero() && b.as_const().is_some_and(|c| c != 0.0) {
            return Expr::Const(0.0);
        }
        fold(BinaryOp::Div, a, b)
    }

    pub fn powi(a: Expr, k: i32) -> Expr {
        match k {
            0 => Expr::Const(1.0),
            1 => a,
            _ => match a.as_const() {
                Some(c) if c.powi(k).is_finite() => Expr::Const(c.powi(k)),
                _ => Expr::Powi(Box::new(a), k),
            },
        }
    }

    /// `a^b`; integer-valued constant exponents become [`Expr::Powi`].
    pub fn pow(a: Expr, b: Expr) -> Expr {
        if let Some(k) = b.as_const().and_then(integer_exponent) {
            return Expr::powi(a, k);
        }
        fold(BinaryOp::Pow, a, b)
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => Expr::add(a, b),
            BinaryOp::Sub => Expr::sub(a, b),
            BinaryOp::Mul => Expr::mul(a, b),
            BinaryOp::Div => Expr::div(a, b),
            BinaryOp::Pow => Expr::pow(a, b),
        }
    }
}

pub(crate) fn integer_exponent(c: f64) -> Option<i32> {
    (c.fract() == 0.0 && c.abs() <= 1024.0).then_some(c as i32)
}

fn fold(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Some(v) = op.apply(x, y) {
            return Expr::Const(v);
        }
    }
    Expr::Binary(op, Box::new(a), Box::new(b))
}
