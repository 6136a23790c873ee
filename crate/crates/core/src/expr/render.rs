use core::fmt;

use super::{Expr, UnaryOp};

/// Canonical, fully parenthesized rendering of an [`Expr`].
///
/// The output re-parses to a tree with identical evaluation. Variables print
/// by name when names are supplied, otherwise as `x0`, `x1`, ...
pub struct Rendered<'a, S: AsRef<str> = alloc::string::String> {
    expr: &'a Expr,
    names: &'a [S],
}

impl Expr {
    pub fn rendered<'a, S: AsRef<str>>(&'a self, names: &'a [S]) -> Rendered<'a, S> {
        Rendered { expr: self, names }
    }
}

impl<S: AsRef<str>> fmt::Display for Rendered<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.names)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.is_sign_negative() {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

fn write_expr<S: AsRef<str>>(f: &mut fmt::Formatter<'_>, e: &Expr, names: &[S]) -> fmt::Result {
    match e {
        Expr::Const(c) => write_const(f, *c),
        Expr::Var(i) => match names.get(*i) {
            Some(name) => f.write_str(name.as_ref()),
            None => write!(f, "x{i}"),
        },
        Expr::Unary(UnaryOp::Neg, a) => {
            f.write_str("(-")?;
            write_expr(f, a, names)?;
            f.write_str(")")
        }
        Expr::Unary(op, a) => {
            write!(f, "{}(", op.name())?;
            write_expr(f, a, names)?;
            f.write_str(")")
        }
        Expr::Binary(op, a, b) => {
            f.write_str("(")?;
            write_expr(f, a, names)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, b, names)?;
            f.write_str(")")
        }
        Expr::Powi(a, k) => {
            f.write_str("(")?;
            write_expr(f, a, names)?;
            if *k < 0 {
                write!(f, "^(-{}))", -(*k as i64))
            } else {
                write!(f, "^{k})")
            }
        }
    }
}
