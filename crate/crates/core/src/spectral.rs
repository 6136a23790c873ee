//! Spectral coordinates `x = Qᵀq` for a symmetric kinetic matrix `A = Q Λ Qᵀ`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;

use crate::expr::{DomainError, ParsedPotential};
use crate::linalg::{self, cluster_eigenvalues, orthonormalize_columns, LinalgError, Matrix};

/// Default relative tolerance for grouping eigenvalues into blocks.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Orthogonal diagonalizer of `A` with eigenvalues grouped into blocks.
///
/// Within a block of repeated eigenvalues the basis is whatever Jacobi
/// produced, re-orthonormalized; only block-level quantities are canonical.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFrame {
    a: Matrix,
    q: Matrix,
    values: Vec<f64>,
    blocks: Vec<Range<usize>>,
    cluster_tol: f64,
}

pub fn build_frame(a: &Matrix, cluster_tol: f64) -> Result<SpectralFrame, LinalgError> {
    let eig = linalg::sym_eigen(a)?;
    let blocks = cluster_eigenvalues(&eig.values, cluster_tol);
    let mut q = eig.vectors;
    for b in &blocks {
        if b.len() > 1 {
            orthonormalize_columns(&mut q, b.clone());
        }
    }
    Ok(SpectralFrame {
        a: a.clone(),
        q,
        values: eig.values,
        blocks,
        cluster_tol,
    })
}

impl SpectralFrame {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// The orthogonal matrix `Q`; column `k` is the `k`-th eigenvector.
    pub fn rotation(&self) -> &Matrix {
        &self.q
    }

    /// Eigenvalues in ascending order, with repetitions.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Mean eigenvalue of each block.
    pub fn block_eigenvalues(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| self.values[b.clone()].iter().sum::<f64>() / b.len() as f64)
            .collect()
    }

    /// Index of the block containing spectral coordinate `k`.
    pub fn block_of(&self, k: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&k)).expect("index within frame")
    }

    /// `x = Qᵀq`.
    pub fn to_spectral(&self, q: &[f64]) -> Vec<f64> {
        self.q.tr_matvec(q)
    }

    /// `q = Qx`.
    pub fn from_spectral(&self, x: &[f64]) -> Vec<f64> {
        self.q.matvec(x)
    }

    /// `‖QᵀAQ − diag(λ)‖F`.
    pub fn diagonalization_residual(&self) -> f64 {
        let d = self.q.transpose().matmul(&self.a).matmul(&self.q);
        d.sub(&Matrix::diag(&self.values)).frobenius_norm()
    }

    /// `‖QᵀQ − I‖F`.
    pub fn orthogonality_residual(&self) -> f64 {
        self.q
            .transpose()
            .matmul(&self.q)
            .sub(&Matrix::identity(self.dim()))
            .frobenius_norm()
    }

    /// Point `x` with `xi` placed in block `k` and zeros elsewhere.
    pub fn embed(&self, k: usize, xi: &[f64]) -> Vec<f64> {
        let b = &self.blocks[k];
        assert_eq!(xi.len(), b.len(), "block dimension");
        let mut x = vec![0.0; self.dim()];
        x[b.clone()].copy_from_slice(xi);
        x
    }

    pub fn pullback<'a>(&'a self, p: &'a ParsedPotential) -> SpectralPotential<'a> {
        assert_eq!(p.dim(), self.dim(), "potential and frame dimension");
        SpectralPotential { potential: p, frame: self }
    }
}

/// `U ∘ Q`, evaluated in spectral coordinates.
#[derive(Clone, Copy, Debug)]
pub struct SpectralPotential<'a> {
    potential: &'a ParsedPotential,
    frame: &'a SpectralFrame,
}

impl<'a> SpectralPotential<'a> {
    pub fn potential(&self) -> &'a ParsedPotential {
        self.potential
    }

    pub fn frame(&self) -> &'a SpectralFrame {
        self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, DomainError> {
        self.potential.value(&self.frame.from_spectral(x))
    }

    /// `Qᵀ∇U(Qx)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, DomainError> {
        let g = self.potential.gradient(&self.frame.from_spectral(x))?;
        Ok(self.frame.to_spectral(&g))
    }

    /// `Qᵀ ∂²U(Qx) Q`.
    pub fn hessian(&self, x: &[f64]) -> Result<Matrix, DomainError> {
        let h = self.potential.hessian(&self.frame.from_spectral(x))?;
        let q = self.frame.rotation();
        Ok(q.transpose().matmul(&h).matmul(q).symmetrized())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointwiseError {
    TooFewCoordinates(usize),
    /// `β + 6b·q_n = 0`.
    Pole { q_n: f64 },
    ZeroTransverse,
}

impl fmt::Display for PointwiseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointwiseError::TooFewCoordinates(n) => write!(f, "pointwise frame needs n >= 3, got {n}"),
            PointwiseError::Pole { q_n } => write!(f, "mu has a pole at q_n = {q_n}"),
            PointwiseError::ZeroTransverse => f.write_str("transverse coordinates q_1..q_{n-1} vanish"),
        }
    }
}

impl core::error::Error for PointwiseError {}

/// Coefficients of `α/2 Σ_{i<n} q_i² + β/2 q_n² + a q_n Σ_{i<n} q_i² + b q_n³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HenonHeilesParams {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

/// The configuration-dependent kinetic matrix commuting with the Hénon–Heiles
/// Hessian at a single point, and its closed-form spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseSpectrum {
    /// `[[dI, μq'], [μq'ᵀ, d]]` with `q' = q_{1:n−1}`.
    pub matrix: Matrix,
    pub mu: f64,
    /// `d` repeated `n−2` times, then `d − μ‖q'‖`, `d + μ‖q'‖`.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix,
}

/// `μ(q_n) = 2ad / (β + 6b q_n)`.
pub fn hh_mu(params: &HenonHeilesParams, d: f64, q_n: f64) -> Result<f64, PointwiseError> {
    let den = params.beta + 6.0 * params.b * q_n;
    if den == 0.0 {
        return Err(PointwiseError::Pole { q_n });
    }
    Ok(2.0 * params.a * d / den)
}

pub fn hh_pointwise_frame(params: &HenonHeilesParams, d: f64, q: &[f64]) -> Result<PointwiseSpectrum, PointwiseError> {
    let n = q.len();
    if n < 3 {
        return Err(PointwiseError::TooFewCoordinates(n));
    }
    let qt = &q[..n - 1];
    let r = linalg::norm2(qt);
    if r == 0.0 {
        return Err(PointwiseError::ZeroTransverse);
    }
    let mu = hh_mu(params, d, q[n - 1])?;

    let mut matrix = Matrix::identity(n).scale(d);
    for (i, &qi) in qt.iter().enumerate() {
        matrix[(i, n - 1)] = mu * qi;
        matrix[(n - 1, i)] = mu * qi;
    }

    let mut values = vec![d; n - 2];
    values.push(d - mu * r);
    values.push(d + mu * r);

    // eigenspace of d: vectors (y, 0) with y ⊥ q'; complete q'/r to a basis
    let unit: Vec<f64> = qt.iter().map(|x| x / r).collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut kept: Vec<Vec<f64>> = vec![unit.clone()];
    for e in 0..n - 1 {
        if kept.len() == n - 1 {
            break;
        }
        let mut y = vec![0.0; n - 1];
        y[e] = 1.0;
        for _ in 0..2 {
            for k in &kept {
                let c = linalg::dot(&y, k);
                y.iter_mut().zip(k).for_each(|(a, b)| *a -= c * b);
            }
        }
        let ny = linalg::norm2(&y);
        if ny > 1e-8 {
            y.iter_mut().for_each(|a| *a /= ny);
            kept.push(y);
        }
    }
    for y in &kept[1..] {
        let mut c = y.clone();
        c.push(0.0);
        columns.push(c);
    }
    let s = core::f64::consts::FRAC_1_SQRT_2;
    for sign in [-1.0, 1.0] {
        // h± = (q', ±‖q'‖) normalized
        let mut h: Vec<f64> = unit.iter().map(|u| s * u).collect();
        h.push(sign * s);
        columns.push(h);
    }
    Ok(PointwiseSpectrum {
        matrix,
        mu,
        values,
        vectors: Matrix::from_columns(&columns),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    const SK: &str = "0.5*(q1^2+q2^2) + q1^2*q2 + (1/3)*q2^3";

    fn exchange() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    #[test]
    fn exchange_frame() {
        let f = build_frame(&exchange(), DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(f.blocks(), &[0..1, 1..2]);
        assert!((f.eigenvalues()[0] + 1.0).abs() < 1e-15);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let q = f.rotation();
        assert!((q[(0, 0)] - h).abs() < 1e-15 && (q[(1, 0)] + h).abs() < 1e-15);
        assert!((q[(0, 1)] - h).abs() < 1e-15 && (q[(1, 1)] - h).abs() < 1e-15);
        assert!(f.diagonalization_residual() < 1e-14);
    }

    #[test]
    fn degenerate_blocks() {
        assert_eq!(build_frame(&Matrix::identity(3), 1e-8).unwrap().block_sizes(), vec![3]);
        let f = build_frame(&Matrix::diag(&[1.0, 2.0, 2.0]), 1e-8).unwrap();
        assert_eq!(f.block_sizes(), vec![1, 2]);
        assert_eq!(f.block_of(2), 1);
        assert!(f.orthogonality_residual() < 1e-14);
        let asym = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(build_frame(&asym, 1e-8).is_err());
    }

    #[test]
    fn sawada_kotera_coordinates() {
        let f = build_frame(&exchange(), DEFAULT_CLUSTER_TOL).unwrap();
        let x = f.to_spectral(&[1.0, 1.0]);
        // λ = −1 pairs with (q1 − q2)/√2, λ = 1 with (q1 + q2)/√2
        assert!(x[0].abs() < 1e-15);
        assert!((x[1] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.to_spectral(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn sawada_kotera_pullback() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let f = build_frame(&exchange(), DEFAULT_CLUSTER_TOL).unwrap();
        let sp = f.pullback(&p);
        // the cubic part is (s³ − d³)/6 in s = q1 + q2, d = q1 − q2, and s = √2·x
        let c = 2f64.sqrt() / 3.0;
        for xi in [-0.8, 0.3, 1.7] {
            let v = sp.value(&[0.0, xi]).unwrap();
            assert!((v - (0.5 * xi * xi + c * xi * xi * xi)).abs() < 1e-13);
            let v = sp.value(&[xi, 0.0]).unwrap();
            assert!((v - (0.5 * xi * xi - c * xi * xi * xi)).abs() < 1e-13);
        }
        let h = sp.hessian(&[0.4, -0.9]).unwrap();
        assert!(h[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn pullback_of_isotropic_potential() {
        let p = parse("0.5*(x^2+y^2+z^2)", &["x", "y", "z"]).unwrap();
        let a = Matrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]).unwrap();
        let f = build_frame(&a, 1e-8).unwrap();
        let x = [0.3, -1.2, 0.8];
        let want = 0.5 * x.iter().map(|v| v * v).sum::<f64>();
        assert!((f.pullback(&p).value(&x).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn spectral_euler_lagrange_residuals_are_rotated() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let f = build_frame(&exchange(), DEFAULT_CLUSTER_TOL).unwrap();
        let sp = f.pullback(&p);
        let q = [0.3, -0.45];
        let acc = [1.1, 0.2];
        let rq: Vec<f64> = p.gradient(&q).unwrap().iter().zip(&acc).map(|(g, a)| a + g).collect();
        let x = f.to_spectral(&q);
        let ax = f.to_spectral(&acc);
        let rx: Vec<f64> = sp.gradient(&x).unwrap().iter().zip(&ax).map(|(g, a)| a + g).collect();
        let back = f.from_spectral(&rx);
        for (u, v) in back.iter().zip(&rq) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn pointwise_spectrum_example() {
        // n = 3, d = 1, μ‖q'‖ = 0.5 with μ = 2ad/β = 0.5, ‖q'‖ = 1
        let params = HenonHeilesParams { alpha: 1.0, beta: 1.0, a: 0.25, b: 0.0 };
        let s = hh_pointwise_frame(&params, 1.0, &[0.6, 0.8, 0.3]).unwrap();
        assert!((s.mu - 0.5).abs() < 1e-15);
        let want = [1.0, 0.5, 1.5];
        for (v, w) in s.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-15);
        }
        let back = s.vectors.matmul(&Matrix::diag(&s.values)).matmul(&s.vectors.transpose());
        assert!(back.sub(&s.matrix).max_abs() < 1e-14);
        let hp = s.vectors.column(2);
        let hm = s.vectors.column(1);
        assert!(linalg::dot(&hp, &hm).abs() < 1e-15);
    }

    #[test]
    fn pointwise_without_coupling_is_scalar() {
        let params = HenonHeilesParams { alpha: 1.0, beta: 2.0, a: 0.0, b: 1.0 };
        let s = hh_pointwise_frame(&params, 3.0, &[0.1, -0.2, 0.5, 0.9]).unwrap();
        assert!(s.values.iter().all(|&v| v == 3.0));
        assert_eq!(s.matrix, Matrix::identity(4).scale(3.0));
    }

    #[test]
    fn pointwise_errors() {
        let params = HenonHeilesParams { alpha: 1.0, beta: 3.0, a: 1.0, b: 1.0 };
        assert_eq!(
            hh_pointwise_frame(&params, 1.0, &[1.0, 0.0, -0.5]),
            Err(PointwiseError::Pole { q_n: -0.5 })
        );
        assert_eq!(
            hh_pointwise_frame(&params, 1.0, &[0.0, 0.0, 0.5]),
            Err(PointwiseError::ZeroTransverse)
        );
        assert!(matches!(
            hh_pointwise_frame(&params, 1.0, &[1.0, 0.5]),
            Err(PointwiseError::TooFewCoordinates(2))
        ));
    }
}
