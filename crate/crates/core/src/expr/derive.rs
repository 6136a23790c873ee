use super::{BinaryOp, Expr, UnaryOp};

impl Expr {
    /// Exact partial derivative with respect to variable `var`.
    ///
    /// The result is built with the simplifying constructors, so constant
    /// subtrees fold and `x+0`, `x*1`, `x*0`, `x^1` collapse.
    pub fn differentiate(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(i) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
            Expr::Unary(op, a) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Expr::Const(0.0);
                }
                let u = || (**a).clone();
                let outer = match op {
                    UnaryOp::Neg => return Expr::neg(da),
                    UnaryOp::Sin => Expr::unary(UnaryOp::Cos, u()),
                    UnaryOp::Cos => Expr::neg(Expr::unary(UnaryOp::Sin, u())),
                    UnaryOp::Tan => Expr::div(
                        Expr::Const(1.0),
                        Expr::powi(Expr::unary(UnaryOp::Cos, u()), 2),
                    ),
                    UnaryOp::Exp => Expr::unary(UnaryOp::Exp, u()),
                    UnaryOp::Ln => return Expr::div(da, u()),
                    UnaryOp::Sqrt => {
                        return Expr::div(
                            da,
                            Expr::mul(Expr::Const(2.0), Expr::unary(UnaryOp::Sqrt, u())),
                        )
                    }
                    UnaryOp::Atan => {
                        return Expr::div(
                            da,
                            Expr::add(Expr::Const(1.0), Expr::powi(u(), 2)),
                        )
                    }
                    UnaryOp::Asin | UnaryOp::Acos => {
                        let d = Expr::div(
                            da,
                            Expr::unary(
                                UnaryOp::Sqrt,
                                Expr::sub(Expr::Const(1.0), Expr::powi(u(), 2)),
                            ),
                        );
                        return if *op == UnaryOp::Acos { Expr::neg(d) } else { d };
                    }
                    UnaryOp::Sinh => Expr::unary(UnaryOp::Cosh, u()),
                    UnaryOp::Cosh => Expr::unary(UnaryOp::Sinh, u()),
                    UnaryOp::Tanh => Expr::div(
                        Expr::Const(1.0),
                        Expr::powi(Expr::unary(UnaryOp::Cosh, u()), 2),
                    ),
                };
                Expr::mul(outer, da)
            }
            Expr::Binary(op, a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                let (a, b) = (&**a, &**b);
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(
                        Expr::mul(da, b.clone()),
                        Expr::mul(a.clone(), db),
                    ),
                    BinaryOp::Div => {
                        if db.is_zero() {
                            return Expr::div(da, b.clone());
                        }
                        Expr::div(
                            Expr::sub(
                                Expr::mul(da, b.clone()),
                                Expr::mul(a.clone(), db),
                            ),
                            Expr::powi(b.clone(), 2),
                        )
                    }
                    BinaryOp::Pow => {
                        // d(a^b) = a^b * (b' ln a + b a'/a), valid for a > 0
                        let log_term = if db.is_zero() {
                            Expr::Const(0.0)
                        } else {
                            Expr::mul(db, Expr::unary(UnaryOp::Ln, a.clone()))
                        };
                        let base_term = if da.is_zero() {
                            Expr::Const(0.0)
                        } else {
                            Expr::div(Expr::mul(b.clone(), da), a.clone())
                        };
                        let inner = Expr::add(log_term, base_term);
                        if inner.is_zero() {
                            return inner;
                        }
                        Expr::mul(self.clone(), inner)
                    }
                }
            }
            Expr::Powi(a, k) => {
                let da = a.differentiate(var);
                if da.is_zero() {
                    return Expr::Const(0.0);
                }
                let outer = Expr::mul(Expr::Const(f64::from(*k)), Expr::powi((**a).clone(), k - 1));
                Expr::mul(outer, da)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expr;
    use super::*;
    use alloc::format;

    const VARS: [&str; 2] = ["q1", "q2"];

    fn d(src: &str, var: usize) -> Expr {
        parse_expr(src, &VARS).unwrap().differentiate(var)
    }

    #[test]
    fn power_rule() {
        let e = d("q1^2*q2", 0);
        assert_eq!(format!("{}", e.rendered(&VARS)), "((2.0 * q1) * q2)");
        assert_eq!(e.eval(&[1.5, -2.0]).unwrap(), 2.0 * 1.5 * -2.0);
    }

    #[test]
    fn table_rule() {
        let e = d("sin(q1)", 0);
        assert_eq!(e, Expr::Unary(UnaryOp::Cos, alloc::boxed::Box::new(Expr::Var(0))));
    }

    #[test]
    fn sawada_kotera_partial() {
        let e = d("0.5*(q1^2+q2^2) + q1^2*q2 + (1/3)*q2^3", 1);
        // q2 + q1^2 + q2^2 at (1, 0)
        assert!((e.eval(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((e.eval(&[0.5, 2.0]).unwrap() - (2.0 + 0.25 + 4.0)).abs() < 1e-14);
    }

    #[test]
    fn independent_variable_gives_zero() {
        assert_eq!(d("exp(q1)*sin(q1)", 1), Expr::Const(0.0));
        assert_eq!(d("q1^q1", 1), Expr::Const(0.0));
    }

    #[test]
    fn general_power() {
        // d/dq1 q1^q2 = q2 q1^(q2-1)
        let e = d("q1^q2", 0);
        let (x, y) = (1.7_f64, 0.3_f64);
        let expect = y * x.powf(y - 1.0);
        assert!((e.eval(&[x, y]).unwrap() - expect).abs() < 1e-14);
        // d/dq2 q1^q2 = ln(q1) q1^q2
        let e = d("q1^q2", 1);
        let expect = x.ln() * x.powf(y);
        assert!((e.eval(&[x, y]).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn unary_rules_against_closed_forms() {
        let x = 0.37_f64;
        let cases: [(&str, f64); 11] = [
            ("tan(q1)", 1.0 / x.cos().powi(2)),
            ("ln(q1)", 1.0 / x),
            ("sqrt(q1)", 0.5 / x.sqrt()),
            ("atan(q1)", 1.0 / (1.0 + x * x)),
            ("asin(q1)", 1.0 / (1.0 - x * x).sqrt()),
            ("acos(q1)", -1.0 / (1.0 - x * x).sqrt()),
            ("sinh(q1)", x.cosh()),
            ("cosh(q1)", x.sinh()),
            ("tanh(q1)", 1.0 / x.cosh().powi(2)),
            ("cos(q1)", -x.sin()),
            ("-exp(2*q1)", -2.0 * (2.0 * x).exp()),
        ];
        for (src, want) in cases {
            let got = d(src, 0).eval(&[x, 0.0]).unwrap();
            assert!((got - want).abs() < 1e-14, "{src}: {got} vs {want}");
        }
        let got = d("q1/(1+q1^2)", 0).eval(&[x, 0.0]).unwrap();
        let want = (1.0 - x * x) / (1.0 + x * x).powi(2);
        assert!((got - want).abs() < 1e-14);
    }
}
