//! Small dense real linear algebra.
//!
//! Everything here is sized for kinetic matrices and commutant systems of a
//! few dozen unknowns: cyclic Jacobi for symmetric eigenproblems, one-sided
//! Jacobi for singular values and nullspaces, and LU with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;
use core::ops::{Index, IndexMut, Range};


#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    NotSquare { rows: usize, cols: usize },
    /// `‖M − Mᵀ‖F` exceeded the symmetry tolerance.
    Asymmetric { deviation: f64, norm: f64 },
    /// A pivot fell below `1e-13·‖A‖∞`: the matrix is not invertible.
    Singular { column: usize, pivot: f64 },
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "expected a square matrix, got {rows}x{cols}")
            }
            LinalgError::Asymmetric { deviation, norm } => write!(
                f,
                "matrix is not symmetric: |M - M^T|_F = {deviation:e} with |M|_F = {norm:e}"
            ),
            LinalgError::Singular { column, pivot } => write!(
                f,
                "singular matrix: pivot {pivot:e} in column {column} is below tolerance"
            ),
            LinalgError::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
        }
    }
}

impl core::error::Error for LinalgError {}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::ShapeMismatch {
                    expected: (rows.len(), cols),
                    found: (rows.len(), r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Self {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, &v) in c.as_ref().iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Mᵀx`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "tr_matvec shape");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + s * b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `tr(AᵀB)`.
    pub fn frobenius_dot(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `‖M − Mᵀ‖F`; panics for non-square input.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self[(i, j)] - self[(j, i)];
                s += d * d;
            }
        }
        s.sqrt()
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.is_square() && self.asymmetry() <= rel_tol * self.frobenius_norm()
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetrized(&self) -> Matrix {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a.matmul(b).sub(&b.matmul(a))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Flips `v` so its first component of magnitude above `1e-12` is positive.
fn fix_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `Q·diag(λ)·Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let q = &self.vectors;
        q.matmul(&Matrix::diag(&self.values)).matmul(&q.transpose())
    }
}

const EIGEN_SYMMETRY_TOL: f64 = 1e-10;
const EIGEN_OFF_TOL: f64 = 1e-14;
const EIGEN_MAX_SWEEPS: usize = 50;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized first. Eigenvalues come back ascending and each
/// eigenvector is oriented so its first non-negligible component is positive.
pub fn sym_eigen(m: &Matrix) -> Result<EigenDecomposition, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let norm = m.frobenius_norm();
    let deviation = m.asymmetry();
    if deviation > EIGEN_SYMMETRY_TOL * norm {
        return Err(LinalgError::Asymmetric { deviation, norm });
    }
    let n = m.rows;
    let mut a = m.symmetrized();
    let mut v = Matrix::identity(n);

    for _ in 0..EIGEN_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
        }
        if off.sqrt() <= EIGEN_OFF_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_p = c * akp - s * akq;
                    let new_q = s * akp + c * akq;
                    a[(k, p)] = new_p;
                    a[(p, k)] = new_p;
                    a[(k, q)] = new_q;
                    a[(q, k)] = new_q;
                }
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let columns: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let mut c = v.column(i);
            fix_sign(&mut c);
            c
        })
        .collect();
    Ok(EigenDecomposition {
        values,
        vectors: Matrix::from_columns(&columns),
    })
}

/// Right singular system of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RightSingular {
    /// Singular values, descending.
    pub values: Vec<f64>,
    /// Columns are the matching right singular vectors.
    pub vectors: Matrix,
}

const SVD_MAX_SWEEPS: usize = 60;

/// Singular values and right singular vectors by one-sided (Hestenes) Jacobi.
///
/// Column pairs of the working copy are rotated until mutually orthogonal;
/// the column norms are then the singular values. Small singular values come
/// out with absolute error near `ε·σ_max`, unlike eigenvalues of `MᵀM`.
pub fn right_singular(m: &Matrix) -> RightSingular {
    let k = m.cols;
    let rows = m.rows.max(k);
    let mut u = Matrix::zeros(rows, k);
    for i in 0..m.rows {
        for j in 0..k {
            u[(i, j)] = m[(i, j)];
        }
    }
    // column-major copy for cache-friendly column rotations
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| u.column(j)).collect();
    let mut v = Matrix::identity(k);

    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                };
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
                for r in 0..k {
                    let (vp, vq) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * vp - s * vq;
                    v[(r, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let columns: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let mut c = v.column(i);
            fix_sign(&mut c);
            c
        })
        .collect();
    RightSingular {
        values: order.iter().map(|&i| sigma[i]).collect(),
        vectors: Matrix::from_columns(&columns),
    }
}

/// Orthonormal basis of the numerical nullspace of `m`: right singular
/// vectors with `σ ≤ rel_tol·σ_max`. A zero matrix yields the full space.
pub fn nullspace(m: &Matrix, rel_tol: f64) -> Vec<Vec<f64>> {
    let svd = right_singular(m);
    let sigma_max = svd.values.first().copied().unwrap_or(0.0);
    svd.values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rel_tol * sigma_max)
        .map(|(j, _)| svd.vectors.column(j))
        .collect()
}

const PIVOT_TOL: f64 = 1e-13;

/// LU factorization with partial pivoting, `PA = LU`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                rows: a.rows,
                cols: a.cols,
            });
        }
        let n = a.rows;
        let threshold = PIVOT_TOL * a.inf_norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, lu[(r, col)]))
                .fold((col, 0.0), |best, (r, v)| {
                    if v.abs() > best.1.abs() {
                        (r, v)
                    } else {
                        best
                    }
                });
            if pivot.abs() < threshold || pivot == 0.0 {
                return Err(LinalgError::Singular { column: col, pivot });
            }
            if pivot_row != col {
                perm.swap(col, pivot_row);
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
            }
            for r in col + 1..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                if factor != 0.0 {
                    for j in col + 1..n {
                        lu[(r, j)] -= factor * lu[(col, j)];
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length");
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

/// Solves `Ax = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows != b.len() {
        return Err(LinalgError::ShapeMismatch {
            expected: (a.rows, 1),
            found: (b.len(), 1),
        });
    }
    Ok(Lu::factor(a)?.solve(b))
}

/// Greedy left-to-right grouping of ascending values: a value joins the
/// current cluster iff it lies within `tol·max(1, |leader|)` of the cluster's
/// first element.
pub fn cluster_eigenvalues(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let leader = values[start];
            (values[i] - leader).abs() > tol * leader.abs().max(1.0)
        };
        if split {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Modified Gram–Schmidt on the columns `range` of `m`, in place.
pub fn orthonormalize_columns(m: &mut Matrix, range: Range<usize>) {
    for j in range.clone() {
        let mut c = m.column(j);
        for k in range.start..j {
            let prev = m.column(k);
            let proj = dot(&c, &prev);
            c.iter_mut().zip(&prev).for_each(|(x, p)| *x -= proj * p);
        }
        let nrm = norm2(&c);
        if nrm > 0.0 {
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x / nrm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_exchange_matrix() {
        let m = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vector(0);
        let v1 = e.vector(1);
        assert!((v0[0] - h).abs() < 1e-15 && (v0[1] + h).abs() < 1e-15);
        assert!((v1[0] - h).abs() < 1e-15 && (v1[1] - h).abs() < 1e-15);
    }

    #[test]
    fn eigen_of_identity_is_identity() {
        let e = sym_eigen(&Matrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.vectors, Matrix::identity(3));
    }

    #[test]
    fn eigen_rejects_bad_input() {
        assert!(matches!(
            sym_eigen(&Matrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
        let m = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eigen(&m), Err(LinalgError::Asymmetric { .. })));
    }

    #[test]
    fn nullspace_examples() {
        let m = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let ns = nullspace(&m, 1e-8);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0]).abs() < 1e-15 && (ns[0][1] - 1.0).abs() < 1e-15);
        assert_eq!(nullspace(&Matrix::zeros(3, 3), 1e-8).len(), 3);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        // one row, three unknowns
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let ns = nullspace(&m, 1e-8);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(&v[..], &[1.0, 2.0, 3.0]).abs() < 1e-14);
        }
        assert!(dot(&ns[0], &ns[1]).abs() < 1e-14);
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve_linear(&Matrix::identity(2), &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        let d = Matrix::diag(&[2.0, 4.0]);
        assert_eq!(solve_linear(&d, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
        let s = Matrix::from_rows(&[
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(matches!(
            solve_linear(&s, &[1.0, 2.0, 3.0, 4.0]),
            Err(LinalgError::Singular { .. })
        ));
        assert!(matches!(
            solve_linear(&Matrix::zeros(2, 3), &[1.0, 2.0]),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn solve_needs_pivoting() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(solve_linear(&a, &[5.0, 7.0]).unwrap(), vec![7.0, 5.0]);
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(cluster_eigenvalues(&[-1.0, 1.0], 1e-8), vec![0..1, 1..2]);
        assert_eq!(cluster_eigenvalues(&[2.0, 2.0 + 1e-12, 5.0], 1e-8), vec![0..2, 2..3]);
        let mu_q = 0.3;
        let d = 1.0;
        let vals = [d - mu_q, d, d, d, d + mu_q];
        let sizes: Vec<usize> = cluster_eigenvalues(&vals, 1e-8).iter().map(|r| r.len()).collect();
        assert_eq!(sizes, vec![1, 3, 1]);
        assert!(cluster_eigenvalues(&[], 1e-8).is_empty());
    }

    #[test]
    fn gram_schmidt_restores_orthonormality() {
        let mut m = Matrix::from_rows(&[[1.0, 1.0], [0.0, 1e-3], [0.0, 0.0]]).unwrap();
        orthonormalize_columns(&mut m, 0..2);
        let g = m.transpose().matmul(&m);
        assert!(g.sub(&Matrix::identity(2)).max_abs() < 1e-12);
    }
}
