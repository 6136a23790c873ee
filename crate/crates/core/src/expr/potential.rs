use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{DomainError, Expr, ParseError};
use crate::linalg::Matrix;

/// A potential `U(q)` over named coordinates, with memoized derivative trees.
///
/// First and second partial derivatives are computed once at construction;
/// afterwards the value is immutable and can be shared freely across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedPotential {
    names: Vec<String>,
    body: Expr,
    gradient: Vec<Expr>,
    /// Upper triangle `(i, j), i <= j`, row by row.
    hessian: Vec<Expr>,
}

impl ParsedPotential {
    pub(crate) fn new(names: Vec<String>, body: Expr) -> Self {
        let n = names.len();
        let gradient: Vec<Expr> = (0..n).map(|i| body.differentiate(i)).collect();
        let mut hessian = Vec::with_capacity(n * (n + 1) / 2);
        for (i, gi) in gradient.iter().enumerate() {
            for j in i..n {
                hessian.push(gi.differentiate(j));
            }
        }
        ParsedPotential {
            names,
            body,
            gradient,
            hessian,
        }
    }

    /// Wraps an already built tree. Fails if the tree references a variable
    /// outside `names` or the names are invalid.
    pub fn from_expr<S: AsRef<str>>(names: &[S], body: Expr) -> Result<Self, ParseError> {
        let owned: Vec<String> = names.iter().map(|s| String::from(s.as_ref())).collect();
        if owned.is_empty()
            || owned.iter().any(|s| !super::parser::valid_identifier(s))
            || (1..owned.len()).any(|i| owned[..i].contains(&owned[i]))
        {
            return Err(ParseError::InvalidVariables("bad variable list".into()));
        }
        if let Some(m) = body.max_var() {
            if m >= owned.len() {
                return Err(ParseError::InvalidVariables(alloc::format!(
                    "expression references variable #{m} but only {} declared",
                    owned.len()
                )));
            }
        }
        Ok(ParsedPotential::new(owned, body))
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    /// Derivative tree `∂U/∂q_i`.
    pub fn partial(&self, i: usize) -> &Expr {
        &self.gradient[i]
    }

    /// Derivative tree `∂²U/∂q_i∂q_j`.
    pub fn second_partial(&self, i: usize, j: usize) -> &Expr {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.dim();
        &self.hessian[i * n - i * (i + 1) / 2 + j]
    }

    /// Canonical parenthesized source of the body.
    pub fn render(&self) -> String {
        alloc::format!("{}", self.body.rendered(&self.names))
    }

    fn check_dim(&self, q: &[f64]) {
        assert_eq!(q.len(), self.dim(), "point dimension");
    }

    pub fn value(&self, q: &[f64]) -> Result<f64, DomainError> {
        self.check_dim(q);
        self.body.eval_named(q, &self.names)
    }

    pub fn gradient(&self, q: &[f64]) -> Result<Vec<f64>, DomainError> {
        self.check_dim(q);
        self.gradient.iter().map(|g| g.eval_named(q, &self.names)).collect()
    }

    /// Symbolic Hessian; the result is exactly symmetric.
    pub fn hessian(&self, q: &[f64]) -> Result<Matrix, DomainError> {
        self.check_dim(q);
        let n = self.dim();
        let mut h = Matrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let v = self.hessian[k].eval_named(q, &self.names)?;
                h[(i, j)] = v;
                h[(j, i)] = v;
                k += 1;
            }
        }
        Ok(h)
    }

    /// Central-difference Hessian with step `h`, symmetrized.
    ///
    /// Entry `(i, j)` is `(U(q+he_i+he_j) − U(q+he_i−he_j) − U(q−he_i+he_j) + U(q−he_i−he_j)) / 4h²`.
    pub fn fd_hessian(&self, q: &[f64], h: f64) -> Result<Matrix, DomainError> {
        assert!(h > 0.0, "finite-difference step must be positive");
        self.check_dim(q);
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        let mut x = q.to_vec();
        for i in 0..n {
            for j in i..n {
                let mut stencil = |si: f64, sj: f64| -> Result<f64, DomainError> {
                    x.copy_from_slice(q);
                    x[i] += si * h;
                    x[j] += sj * h;
                    self.body.eval_named(&x, &self.names)
                };
                let v = (stencil(1.0, 1.0)? - stencil(1.0, -1.0)? - stencil(-1.0, 1.0)?
                    + stencil(-1.0, -1.0)?)
                    / (4.0 * h * h);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    /// Central-difference gradient with step `h`.
    pub fn fd_gradient(&self, q: &[f64], h: f64) -> Result<Vec<f64>, DomainError> {
        assert!(h > 0.0, "finite-difference step must be positive");
        self.check_dim(q);
        let mut x = q.to_vec();
        let mut g = vec![0.0; q.len()];
        for i in 0..q.len() {
            x[i] = q[i] + h;
            let up = self.body.eval_named(&x, &self.names)?;
            x[i] = q[i] - h;
            let down = self.body.eval_named(&x, &self.names)?;
            x[i] = q[i];
            g[i] = (up - down) / (2.0 * h);
        }
        Ok(g)
    }
}
