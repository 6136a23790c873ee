//! Constant symmetric matrices commuting with the Hessian of a potential.
//!
//! The condition `[∂²U(q), A] = 0` for all `q` is discretized over a seeded
//! random sample of configurations. Each sample contributes the strictly
//! upper entries of the (antisymmetric) commutator as linear constraints on
//! the upper triangle of `A`; the nullspace of the stacked system is the
//! commutant. Off-diagonal unknowns carry a `√2` weight so the unknown vector
//! has the Frobenius norm of `A`, which makes the singular-value threshold
//! scale-free.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::expr::{DomainError, ParsedPotential};
use crate::linalg::{self, cluster_eigenvalues, commutator, EigenDecomposition, Matrix};

/// Default singular-value threshold relative to `σ_max`.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Validation points drawn when re-checking a computed basis.
pub const VALIDATION_POINTS: usize = 10;
/// Random combinations tried by [`select_generic_element`].
pub const GENERIC_DRAWS: usize = 16;

const VALIDATION_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq)]
pub enum CommutantError {
    EmptySample,
    InvalidBox(&'static str),
    /// Hessian evaluation failed at a sample point.
    Domain { sample: usize, error: DomainError },
    EmptyBasis,
}

impl fmt::Display for CommutantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommutantError::EmptySample => f.write_str("sample count must be at least 1"),
            CommutantError::InvalidBox(why) => write!(f, "invalid sampling box: {why}"),
            CommutantError::Domain { sample, error } => {
                write!(f, "Hessian evaluation failed at sample {sample}: {error}")
            }
            CommutantError::EmptyBasis => f.write_str("commutant basis is empty"),
        }
    }
}

impl core::error::Error for CommutantError {}

/// Per-coordinate sampling bounds `[lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, CommutantError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(CommutantError::InvalidBox("bounds must be nonempty and equal length"));
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(CommutantError::InvalidBox("bounds must be finite"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(CommutantError::InvalidBox("each lower bound must be below its upper bound"));
        }
        Ok(SampleBox { lo, hi })
    }

    /// The cube `[lo, hi]ⁿ`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self, CommutantError> {
        SampleBox::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.dim() && q.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }
}

/// Seeded uniform stream, identical across platforms for a given seed.
#[derive(Clone, Debug)]
pub struct UniformStream(Xoshiro256PlusPlus);

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        UniformStream(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub bounds: SampleBox,
    pub seed: u64,
    /// Fewer points than the `n(n+1)/2` unknowns of a symmetric matrix.
    pub below_recommended: bool,
}

/// `max(20, n(n+1))`.
pub fn default_sample_count(n: usize) -> usize {
    (n * (n + 1)).max(20)
}

pub fn sample_points(bounds: &SampleBox, count: usize, seed: u64) -> Result<SampleSet, CommutantError> {
    if count == 0 {
        return Err(CommutantError::EmptySample);
    }
    let mut rng = UniformStream::new(seed);
    let points = (0..count)
        .map(|_| {
            bounds
                .lo
                .iter()
                .zip(&bounds.hi)
                .map(|(&l, &h)| rng.next_in(l, h))
                .collect()
        })
        .collect();
    let n = bounds.dim();
    Ok(SampleSet {
        points,
        bounds: bounds.clone(),
        seed,
        below_recommended: count < n * (n + 1) / 2,
    })
}

/// Number of unknowns in the upper triangle of an `n×n` symmetric matrix.
pub fn unknown_count(n: usize) -> usize {
    n * (n + 1) / 2
}

fn unknown_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
}

/// Maps the isometric parameter vector back to a symmetric matrix.
pub fn symmetric_from_params(n: usize, u: &[f64]) -> Matrix {
    assert_eq!(u.len(), unknown_count(n));
    let mut a = Matrix::zeros(n, n);
    for ((i, j), &v) in unknown_pairs(n).zip(u) {
        if i == j {
            a[(i, i)] = v;
        } else {
            let w = v * core::f64::consts::FRAC_1_SQRT_2;
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    a
}

/// Inverse of [`symmetric_from_params`] (reads the upper triangle).
pub fn params_from_symmetric(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    unknown_pairs(n)
        .map(|(i, j)| if i == j { a[(i, i)] } else { a[(i, j)] * core::f64::consts::SQRT_2 })
        .collect()
}

/// Rows `(i<k)` of `[H, A]` as linear functionals of the isometric unknowns.
fn commutator_rows(h: &Matrix, out: &mut Matrix, first_row: usize) {
    let n = h.rows();
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut row = first_row;
    for i in 0..n {
        for k in i + 1..n {
            for (col, (p, q)) in unknown_pairs(n).enumerate() {
                // (H E)_ik − (E H)_ik for the basis element E of unknown (p, q)
                let v = if p == q {
                    (if k == p { h[(i, p)] } else { 0.0 }) - (if i == p { h[(p, k)] } else { 0.0 })
                } else {
                    let he = (if k == q { h[(i, p)] } else { 0.0 }) + (if k == p { h[(i, q)] } else { 0.0 });
                    let eh = (if i == p { h[(q, k)] } else { 0.0 }) + (if i == q { h[(p, k)] } else { 0.0 });
                    s * (he - eh)
                };
                out[(row, col)] = v;
            }
            row += 1;
        }
    }
}

/// Stacks the commutator constraints of every sample into one matrix with
/// `|samples|·n(n−1)/2` rows and `n(n+1)/2` columns. Sample `s` owns rows
/// `s·n(n−1)/2 ..`, independent of evaluation order.
pub fn assemble_commutant_system(p: &ParsedPotential, samples: &SampleSet) -> Result<Matrix, CommutantError> {
    let n = p.dim();
    let per_sample = n * (n - 1) / 2;
    let mut system = Matrix::zeros(samples.points.len() * per_sample, unknown_count(n));
    for (s, q) in samples.points.iter().enumerate() {
        let h = p
            .hessian(q)
            .map_err(|error| CommutantError::Domain { sample: s, error })?;
        commutator_rows(&h, &mut system, s * per_sample);
    }
    Ok(system)
}

/// Orthonormal (Frobenius) basis of the computed commutant plus diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutantBasis {
    pub n: usize,
    pub basis: Vec<Matrix>,
    /// Singular values of the constraint system, descending.
    pub singular_values: Vec<f64>,
    pub rel_tol: f64,
    /// The system had no constraining rows (`n = 1` or no samples).
    pub unconstrained: bool,
    /// Max `‖[H(q), B]‖F` over validation points and basis elements.
    pub validation_residual: Option<f64>,
    /// Max `‖H(q)‖F` over the validation points.
    pub validation_hessian_scale: Option<f64>,
}

impl CommutantBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Only multiples of the identity commute (and `n > 1`).
    pub fn is_trivial(&self) -> bool {
        self.n > 1 && self.dim() <= 1
    }

    /// Number of singular values above the threshold.
    pub fn rank(&self) -> usize {
        self.singular_values.len() - self.nullity_in_system()
    }

    fn nullity_in_system(&self) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s <= self.rel_tol * smax)
            .count()
    }

    /// Smallest kept singular value.
    pub fn sigma_kept(&self) -> Option<f64> {
        let r = self.rank();
        (r > 0).then(|| self.singular_values[r - 1])
    }

    /// Largest dropped singular value.
    pub fn sigma_dropped(&self) -> Option<f64> {
        self.singular_values.get(self.rank()).copied()
    }

    /// `σ_kept / σ_dropped`; infinite when the dropped value is exactly zero.
    pub fn gap_ratio(&self) -> Option<f64> {
        match (self.sigma_kept(), self.sigma_dropped()) {
            (Some(k), Some(d)) => Some(if d == 0.0 { f64::INFINITY } else { k / d }),
            _ => None,
        }
    }

    /// Consecutive ratios `σ_k / σ_{k+1}` of the singular spectrum.
    pub fn gap_report(&self) -> Vec<f64> {
        self.singular_values
            .windows(2)
            .map(|w| if w[1] == 0.0 { f64::INFINITY } else { w[0] / w[1] })
            .collect()
    }

    /// Frobenius distance from `m` to its projection onto the span, divided by `‖m‖F`.
    pub fn projection_residual(&self, m: &Matrix) -> f64 {
        let mut r = m.clone();
        for b in &self.basis {
            r = r.axpy(-b.frobenius_dot(m), b);
        }
        let norm = m.frobenius_norm();
        if norm == 0.0 {
            0.0
        } else {
            r.frobenius_norm() / norm
        }
    }

    /// `validation_residual / validation_hessian_scale` (0 for a zero Hessian).
    pub fn relative_validation_residual(&self) -> Option<f64> {
        let res = self.validation_residual?;
        let scale = self.validation_hessian_scale?;
        Some(if scale == 0.0 { if res == 0.0 { 0.0 } else { f64::INFINITY } } else { res / scale })
    }

    /// Re-checks every basis element against fresh configurations and
    /// records the worst commutator norm.
    pub fn validate(&mut self, p: &ParsedPotential, samples: &SampleSet) -> Result<f64, CommutantError> {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (s, q) in samples.points.iter().enumerate() {
            let h = p
                .hessian(q)
                .map_err(|error| CommutantError::Domain { sample: s, error })?;
            scale = scale.max(h.frobenius_norm());
            for b in &self.basis {
                worst = worst.max(commutator(&h, b).frobenius_norm() / b.frobenius_norm());
            }
        }
        self.validation_residual = Some(worst);
        self.validation_hessian_scale = Some(scale);
        Ok(worst)
    }
}

/// Nullspace of an assembled system, mapped back to symmetric matrices.
pub fn solve_commutant(system: &Matrix, n: usize, rel_tol: f64) -> CommutantBasis {
    assert_eq!(system.cols(), unknown_count(n), "system width");
    let unconstrained = system.rows() == 0;
    let svd = linalg::right_singular(system);
    let smax = svd.values.first().copied().unwrap_or(0.0);
    let basis = svd
        .values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rel_tol * smax)
        .map(|(j, _)| symmetric_from_params(n, &svd.vectors.column(j)))
        .collect();
    CommutantBasis {
        n,
        basis,
        singular_values: svd.values,
        rel_tol,
        unconstrained,
        validation_residual: None,
        validation_hessian_scale: None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutantConfig {
    pub bounds: SampleBox,
    pub count: usize,
    pub seed: u64,
    pub rel_tol: f64,
}

impl CommutantConfig {
    /// Cube `[-1, 1]ⁿ`, default sample count, seed 42, default threshold.
    pub fn for_dim(n: usize) -> Self {
        CommutantConfig {
            bounds: SampleBox::cube(n, -1.0, 1.0).expect("unit cube"),
            count: default_sample_count(n),
            seed: 42,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutantAnalysis {
    pub basis: CommutantBasis,
    pub samples: SampleSet,
    /// Dimension obtained again with twice as many samples.
    pub doubled_sample_dim: usize,
}

impl CommutantAnalysis {
    pub fn stable(&self) -> bool {
        self.doubled_sample_dim == self.basis.dim()
    }
}

/// Seed for a sample that shares no points with the one drawn from `seed`.
pub fn validation_seed(seed: u64) -> u64 {
    seed ^ VALIDATION_SEED_MIX
}

/// Sample, assemble, solve, validate on fresh points and re-check the
/// dimension at twice the sample count.
pub fn compute_commutant(p: &ParsedPotential, cfg: &CommutantConfig) -> Result<CommutantAnalysis, CommutantError> {
    let n = p.dim();
    let samples = sample_points(&cfg.bounds, cfg.count, cfg.seed)?;
    let system = assemble_commutant_system(p, &samples)?;
    let mut basis = solve_commutant(&system, n, cfg.rel_tol);
    let fresh = sample_points(&cfg.bounds, VALIDATION_POINTS, validation_seed(cfg.seed))?;
    basis.validate(p, &fresh)?;

    let doubled = sample_points(&cfg.bounds, 2 * cfg.count, cfg.seed.wrapping_add(1))?;
    let doubled_sample_dim = solve_commutant(&assemble_commutant_system(p, &doubled)?, n, cfg.rel_tol).dim();
    Ok(CommutantAnalysis {
        basis,
        samples,
        doubled_sample_dim,
    })
}

/// Elements of the span commuting with every basis element.
///
/// For a commutative commutant this is the whole span. Otherwise it is the
/// center of the commutant algebra, whose eigenspaces are the isotypic
/// blocks shared by every compatible `A`.
pub fn commutant_center(basis: &[Matrix], rel_tol: f64) -> Vec<Matrix> {
    let d = basis.len();
    if d == 0 {
        return Vec::new();
    }
    let n = basis[0].rows();
    let per_pair = n * (n - 1) / 2;
    let mut system = Matrix::zeros(d * per_pair, d);
    for (j, bj) in basis.iter().enumerate() {
        for (i, bi) in basis.iter().enumerate() {
            let c = commutator(bi, bj);
            let mut row = j * per_pair;
            for r in 0..n {
                for s in r + 1..n {
                    system[(row, i)] = c[(r, s)];
                    row += 1;
                }
            }
        }
    }
    // The basis is orthonormal, so commutators are O(1); a numerically zero
    // system means the whole commutant is central.
    let svd = linalg::right_singular(&system);
    let floor = rel_tol * svd.values.first().copied().unwrap_or(0.0).max(1.0);
    svd.values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= floor)
        .map(|(j, _)| svd.vectors.column(j))
        .map(|coeffs| {
            coeffs
                .iter()
                .zip(basis)
                .fold(Matrix::zeros(n, n), |acc, (&c, b)| acc.axpy(c, b))
        })
        .collect()
}

/// A drawn element of the commutant with its spectral structure.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericElement {
    pub matrix: Matrix,
    pub eigen: EigenDecomposition,
    pub clusters: Vec<Range<usize>>,
    /// Smallest gap between adjacent clusters (0 with a single cluster).
    pub min_gap: f64,
    /// Index of the winning draw.
    pub draw: usize,
}

fn min_cluster_gap(values: &[f64], clusters: &[Range<usize>]) -> f64 {
    clusters
        .windows(2)
        .map(|w| values[w[1].start] - values[w[0].end - 1])
        .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.min(g))))
        .unwrap_or(0.0)
}

fn describe(matrix: Matrix, cluster_tol: f64, draw: usize) -> GenericElement {
    let eigen = linalg::sym_eigen(&matrix).expect("commutant elements are symmetric");
    let clusters = cluster_eigenvalues(&eigen.values, cluster_tol);
    let min_gap = min_cluster_gap(&eigen.values, &clusters);
    GenericElement {
        matrix,
        eigen,
        clusters,
        min_gap,
        draw,
    }
}

/// Draws seeded unit combinations of `basis` and keeps the one with the
/// most eigenvalue clusters, then the widest minimum gap, then the earliest.
pub fn select_generic_element(basis: &[Matrix], seed: u64, cluster_tol: f64) -> Result<GenericElement, CommutantError> {
    let first = basis.first().ok_or(CommutantError::EmptyBasis)?;
    if basis.len() == 1 {
        let sign = if (0..first.rows()).map(|i| first[(i, i)]).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        return Ok(describe(first.scale(sign), cluster_tol, 0));
    }
    let n = first.rows();
    let mut rng = UniformStream::new(seed);
    let mut best: Option<GenericElement> = None;
    for draw in 0..GENERIC_DRAWS {
        let mut coeffs: Vec<f64> = basis.iter().map(|_| rng.next_in(-1.0, 1.0)).collect();
        let norm = linalg::norm2(&coeffs);
        if norm == 0.0 {
            continue;
        }
        coeffs.iter_mut().for_each(|c| *c /= norm);
        let m = coeffs
            .iter()
            .zip(basis)
            .fold(Matrix::zeros(n, n), |acc, (&c, b)| acc.axpy(c, b));
        let cand = describe(m, cluster_tol, draw);
        let better = match &best {
            None => true,
            Some(b) => {
                cand.clusters.len() > b.clusters.len()
                    || (cand.clusters.len() == b.clusters.len() && cand.min_gap > b.min_gap)
            }
        };
        if better {
            best = Some(cand);
        }
    }
    best.ok_or(CommutantError::EmptyBasis)
}

/// Shifts a commutant element by a multiple of the identity so its smallest
/// eigenvalue is 1. Eigenvectors and cluster gaps are unchanged and the
/// result is a positive-definite kinetic matrix. Returns `(A, shift)`.
pub fn positive_kinetic(element: &GenericElement) -> (Matrix, f64) {
    let n = element.matrix.rows();
    let lambda_min = element.eigen.values.first().copied().unwrap_or(0.0);
    let shift = 1.0 - lambda_min;
    (element.matrix.axpy(shift, &Matrix::identity(n)), shift)
}
