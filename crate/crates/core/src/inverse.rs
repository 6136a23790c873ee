//! Separability of `Σ_j A_ij q̈_j + ∂_iŨ = 0` for a constant invertible,
//! possibly non-symmetric `A`.
//!
//! The system is equivalent to the separated `q̈_i + f_i'(q_i) = 0` exactly
//! when `∇Ũ = A·(f_1'(q_1), …, f_n'(q_n))`. Conservativity of that field
//! requires `A_ik f_k'' = A_ki f_i''` for `i ≠ k`, which pins `f_k''` to a
//! constant only for coordinates `k` that some other row actually couples
//! to. With quadratic `f_i = α_i q_i² + β_i q_i` the admissible `Ũ` is
//! `Σ_ij (α_j A_ij q_i q_j + β_j A_ij q_i)` under `A_ij α_j = A_ji α_i`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::expr::{DomainError, Expr, ParsedPotential};
use crate::linalg::{self, LinalgError, Lu, Matrix};

/// Off-diagonal entries at most this times `‖A‖∞` count as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-13;
/// Allowed violation of `A_ij α_j = A_ji α_i`, relative to `max(1, ‖A‖∞‖α‖∞)`.
pub const COMPATIBILITY_TOL: f64 = 1e-10;
pub const DEFAULT_SEPARABILITY_TOL: f64 = 1e-8;
/// Step of the central differences of `A⁻¹∇Ũ`.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub enum InverseError {
    NotSquare,
    /// `A` must be invertible.
    Singular(LinalgError),
    Incompatible { residual: f64 },
    ShapeMismatch(&'static str),
    Domain { point: usize, error: DomainError },
}

impl fmt::Display for InverseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InverseError::NotSquare => f.write_str("kinetic matrix must be square"),
            InverseError::Singular(e) => write!(f, "kinetic matrix must be invertible: {e}"),
            InverseError::Incompatible { residual } => {
                write!(f, "alpha violates A_ij alpha_j = A_ji alpha_i (residual {residual:e})")
            }
            InverseError::ShapeMismatch(what) => write!(f, "shape mismatch: {what}"),
            InverseError::Domain { point, error } => write!(f, "evaluation failed at point {point}: {error}"),
        }
    }
}

impl core::error::Error for InverseError {}

fn factor(a: &Matrix) -> Result<Lu, InverseError> {
    if !a.is_square() {
        return Err(InverseError::NotSquare);
    }
    Lu::factor(a).map_err(InverseError::Singular)
}

fn coupled(a: &Matrix, i: usize, k: usize, zero_tol: f64) -> bool {
    a[(i, k)].abs() > zero_tol * a.inf_norm()
}

/// Indices `k` (0-based) with `A_ik ≠ 0` for some `i ≠ k`; their `f_k''` is
/// forced to be constant. Fails for a singular `A`.
pub fn forced_quadratic_set(a: &Matrix, zero_tol: f64) -> Result<Vec<usize>, InverseError> {
    factor(a)?;
    let n = a.rows();
    Ok((0..n)
        .filter(|&k| (0..n).any(|i| i != k && coupled(a, i, k, zero_tol)))
        .collect())
}

/// Rows `A_ij α_j − A_ji α_i` for `i < j`.
fn compatibility_system(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut m = Matrix::zeros(n * (n - 1) / 2, n);
    let mut row = 0;
    for i in 0..n {
        for j in i + 1..n {
            m[(row, j)] += a[(i, j)];
            m[(row, i)] -= a[(j, i)];
            row += 1;
        }
    }
    m
}

/// Orthonormal basis of `{α : A_ij α_j = A_ji α_i for all i ≠ j}`.
pub fn solve_alpha_constraints(a: &Matrix) -> Result<Vec<Vec<f64>>, InverseError> {
    if !a.is_square() {
        return Err(InverseError::NotSquare);
    }
    let n = a.rows();
    let system = compatibility_system(a);
    if system.rows() == 0 || system.max_abs() == 0.0 {
        return Ok((0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect());
    }
    Ok(linalg::nullspace(&system, 1e-10))
}

/// Largest `|A_ij α_j − A_ji α_i|`, divided by `max(1, ‖A‖∞‖α‖∞)`.
pub fn compatibility_residual(a: &Matrix, alpha: &[f64]) -> f64 {
    let r = linalg::norm_inf(&compatibility_system(a).matvec(alpha));
    r / (a.inf_norm() * linalg::norm_inf(alpha)).max(1.0)
}

fn coordinate_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("q{i}")).collect()
}

/// `Ũ(q) = Σ_ij (α_j A_ij q_i q_j + β_j A_ij q_i)` with `Ũ(0) = 0`, over
/// coordinates named `q1..qn`.
pub fn build_tilde_potential(a: &Matrix, alpha: &[f64], beta: &[f64]) -> Result<ParsedPotential, InverseError> {
    if !a.is_square() {
        return Err(InverseError::NotSquare);
    }
    let n = a.rows();
    if alpha.len() != n || beta.len() != n {
        return Err(InverseError::ShapeMismatch("alpha and beta need one entry per coordinate"));
    }
    let residual = compatibility_residual(a, alpha);
    if residual > COMPATIBILITY_TOL {
        return Err(InverseError::Incompatible { residual });
    }
    let mut body = Expr::constant(0.0);
    let mut term = |c: f64, e: Expr| {
        if c != 0.0 {
            body = Expr::add(core::mem::replace(&mut body, Expr::constant(0.0)), Expr::mul(Expr::constant(c), e));
        }
    };
    for i in 0..n {
        term(alpha[i] * a[(i, i)], Expr::powi(Expr::var(i), 2));
        for j in i + 1..n {
            term(
                alpha[j] * a[(i, j)] + alpha[i] * a[(j, i)],
                Expr::mul(Expr::var(i), Expr::var(j)),
            );
        }
    }
    for i in 0..n {
        let c: f64 = (0..n).map(|j| beta[j] * a[(i, j)]).sum();
        term(c, Expr::var(i));
    }
    ParsedPotential::from_expr(&coordinate_names(n), body)
        .map_err(|_| InverseError::ShapeMismatch("coordinate names"))
}

/// `(f_i'(t), f_i''(t))` sampled along the `q_i` axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisProfile {
    pub index: usize,
    pub points: Vec<(f64, f64)>,
    /// Spread `max − min` of the finite-difference `f_i''` along the axis.
    pub second_derivative_spread: f64,
    pub second_derivative_mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparabilityCheck {
    pub separated: bool,
    /// Largest `|∂g_i/∂q_j|`, `i ≠ j`, of `g = A⁻¹∇Ũ`.
    pub residual: f64,
    /// Present when separated.
    pub profiles: Vec<AxisProfile>,
}

fn at(point: usize) -> impl FnOnce(DomainError) -> InverseError {
    move |error| InverseError::Domain { point, error }
}

/// Checks that each component of `g = A⁻¹∇Ũ` depends on its own coordinate
/// only, and if so samples `f_i' = g_i` along the axes over `axis_grid`.
pub fn check_inverse_separability(
    a: &Matrix,
    mut grad_tilde: impl FnMut(&[f64]) -> Result<Vec<f64>, DomainError>,
    samples: &[Vec<f64>],
    tol: f64,
    axis_grid: &[f64],
) -> Result<SeparabilityCheck, InverseError> {
    let lu = factor(a)?;
    let n = a.rows();
    let mut g = |q: &[f64]| -> Result<Vec<f64>, DomainError> { Ok(lu.solve(&grad_tilde(q)?)) };
    let h = FD_STEP;
    let mut residual: f64 = 0.0;
    for (s, q) in samples.iter().enumerate() {
        if q.len() != n {
            return Err(InverseError::ShapeMismatch("sample dimension"));
        }
        let mut x = q.clone();
        for j in 0..n {
            x[j] = q[j] + h;
            let up = g(&x).map_err(at(s))?;
            x[j] = q[j] - h;
            let down = g(&x).map_err(at(s))?;
            x[j] = q[j];
            for i in (0..n).filter(|&i| i != j) {
                residual = residual.max(((up[i] - down[i]) / (2.0 * h)).abs());
            }
        }
    }
    let separated = residual <= tol;
    let mut profiles = Vec::new();
    if separated {
        for i in 0..n {
            let mut points = Vec::with_capacity(axis_grid.len());
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut sum = 0.0;
            let mut x = vec![0.0; n];
            for (s, &t) in axis_grid.iter().enumerate() {
                x[i] = t;
                let first = g(&x).map_err(at(s))?[i];
                x[i] = t + h;
                let up = g(&x).map_err(at(s))?[i];
                x[i] = t - h;
                let down = g(&x).map_err(at(s))?[i];
                let second = (up - down) / (2.0 * h);
                lo = lo.min(second);
                hi = hi.max(second);
                sum += second;
                points.push((t, first));
            }
            let count = axis_grid.len().max(1) as f64;
            profiles.push(AxisProfile {
                index: i,
                points,
                second_derivative_spread: if axis_grid.is_empty() { 0.0 } else { hi - lo },
                second_derivative_mean: sum / count,
            });
        }
    }
    Ok(SeparabilityCheck { separated, residual, profiles })
}

/// Acceleration of the separated system `q̈_i = −2α_i q_i − β_i`.
pub fn separated_acceleration(alpha: &[f64], beta: &[f64], q: &[f64]) -> Vec<f64> {
    q.iter()
        .zip(alpha.iter().zip(beta))
        .map(|(x, (a, b))| -2.0 * a * x - b)
        .collect()
}
