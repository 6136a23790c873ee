//! Block and full separation of a potential in spectral coordinates, and the
//! companion potential `Ũ` with `∇Ũ = A∇U`.
//!
//! All separated pieces are normalized to vanish at the origin: `H_k(0) = 0`,
//! `Ũ(0) = 0`, and `U(0)` is reported separately.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::commutant::{sample_points, CommutantError, SampleBox};
use crate::expr::{DomainError, ParsedPotential};
use crate::linalg::{self, commutator, Matrix};
use crate::spectral::{SpectralFrame, SpectralPotential};

pub const DEFAULT_SEP_TOL: f64 = 1e-8;
pub const DEFAULT_RECON_TOL: f64 = 1e-8;
/// Fresh points used to validate the block-sum identity.
pub const IDENTITY_POINTS: usize = 50;
/// Points per exported one-dimensional profile.
pub const GRID_POINTS: usize = 512;
/// Step of the central differences in [`verify_gradient_relation`].
pub const GRADIENT_FD_STEP: f64 = 1e-5;

const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_MAX_DEPTH: u32 = 40;
/// Cap on subdivisions per integral, so rough integrands stay bounded in cost.
const QUAD_MAX_SPLITS: usize = 2048;
const IDENTITY_SEED_MIX: u64 = 0xD1B5_4A32_D192_ED03;

#[derive(Clone, Debug, PartialEq)]
pub enum SeparationError {
    /// Evaluation failed at validation or sample point `point`.
    Domain { point: usize, error: DomainError },
    /// The block-sum identity failed although mixed derivatives looked clean.
    Unsound { residual: f64, tol: f64 },
    /// A block has more than one coordinate.
    DegenerateSpectrum { sizes: Vec<usize> },
    /// The straight and axis-polyline line integrals of `A∇U` disagree.
    NotConservative { straight: f64, polyline: f64 },
    Sampling(CommutantError),
}

impl fmt::Display for SeparationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeparationError::Domain { point, error } => write!(f, "evaluation failed at point {point}: {error}"),
            SeparationError::Unsound { residual, tol } => write!(
                f,
                "separation unsound: block-sum identity residual {residual:e} exceeds {tol:e}"
            ),
            SeparationError::DegenerateSpectrum { sizes } => {
                write!(f, "degenerate spectrum, block sizes {sizes:?}; only block separation is available")
            }
            SeparationError::NotConservative { straight, polyline } => write!(
                f,
                "field not conservative: straight path gives {straight:e}, axis path gives {polyline:e}"
            ),
            SeparationError::Sampling(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SeparationError {}

impl From<CommutantError> for SeparationError {
    fn from(e: CommutantError) -> Self {
        SeparationError::Sampling(e)
    }
}

impl From<DomainError> for SeparationError {
    fn from(error: DomainError) -> Self {
        SeparationError::Domain { point: 0, error }
    }
}

fn at(point: usize) -> impl FnOnce(DomainError) -> SeparationError {
    move |error| SeparationError::Domain { point, error }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    /// Every block is a single coordinate.
    Full,
    /// At least two blocks, some with several coordinates.
    Block,
    None,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Block => "block",
            Mode::None => "none",
        }
    }

    pub fn classify(verdict: bool, block_sizes: &[usize]) -> Mode {
        if block_sizes.iter().all(|&m| m == 1) {
            // includes n = 1, where separation is vacuous
            return if verdict { Mode::Full } else { Mode::None };
        }
        if verdict && block_sizes.len() >= 2 {
            Mode::Block
        } else {
            Mode::None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockVerdict {
    pub separated: bool,
    /// Largest `|∂²U/∂x_α∂x_β|` with `α`, `β` in different blocks.
    pub residual: f64,
    /// Largest `‖∂²U‖∞` seen, the scale the tolerance is measured against.
    pub hessian_scale: f64,
}

/// Checks that the pullback Hessian has no cross-block entries at the given
/// spectral points. A single block passes vacuously.
pub fn verify_block_separation(sp: &SpectralPotential<'_>, points: &[Vec<f64>], tol: f64) -> Result<BlockVerdict, SeparationError> {
    let frame = sp.frame();
    let n = frame.dim();
    let owner: Vec<usize> = (0..n).map(|k| frame.block_of(k)).collect();
    let mut residual: f64 = 0.0;
    let mut hessian_scale: f64 = 0.0;
    let mut separated = true;
    if frame.blocks().len() < 2 {
        return Ok(BlockVerdict { separated, residual, hessian_scale });
    }
    for (s, x) in points.iter().enumerate() {
        let h = sp.hessian(x).map_err(at(s))?;
        let mut local: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                if owner[i] != owner[j] {
                    local = local.max(h[(i, j)].abs());
                }
            }
        }
        let scale = h.inf_norm();
        separated &= local <= tol * scale.max(1.0);
        residual = residual.max(local);
        hessian_scale = hessian_scale.max(scale);
    }
    Ok(BlockVerdict { separated, residual, hessian_scale })
}

/// `U = Σ_k H_k(x_(k)) + U(0)` over the blocks of a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPotentials {
    potential: ParsedPotential,
    frame: SpectralFrame,
    constant: f64,
}

impl BlockPotentials {
    pub fn frame(&self) -> &SpectralFrame {
        &self.frame
    }

    /// `U(0)`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn block_count(&self) -> usize {
        self.frame.blocks().len()
    }

    /// `H_k(ξ) = U(Q·embed_k(ξ)) − U(0)`.
    pub fn block_value(&self, k: usize, xi: &[f64]) -> Result<f64, DomainError> {
        let q = self.frame.from_spectral(&self.frame.embed(k, xi));
        Ok(self.potential.value(&q)? - self.constant)
    }

    /// `H_k` on the block coordinates of a full spectral point.
    pub fn block_value_at(&self, k: usize, x: &[f64]) -> Result<f64, DomainError> {
        self.block_value(k, &x[self.frame.blocks()[k].clone()])
    }

    /// `Σ_k H_k(x_(k)) + U(0)`.
    pub fn sum(&self, x: &[f64]) -> Result<f64, DomainError> {
        let mut total = self.constant;
        for k in 0..self.block_count() {
            total += self.block_value_at(k, x)?;
        }
        Ok(total)
    }

    /// Largest `|Σ H_k + U(0) − U(Qx)| / (1 + |U(Qx)|)` over `points`.
    pub fn identity_residual(&self, points: &[Vec<f64>]) -> Result<f64, SeparationError> {
        let mut worst: f64 = 0.0;
        for (s, x) in points.iter().enumerate() {
            let u = self.potential.value(&self.frame.from_spectral(x)).map_err(at(s))?;
            let sum = self.sum(x).map_err(at(s))?;
            worst = worst.max((sum - u).abs() / (1.0 + u.abs()));
        }
        Ok(worst)
    }

    /// One-dimensional `f_k(ξ)` when block `k` is a singleton.
    pub fn profile(&self, k: usize, xi: f64) -> Result<f64, DomainError> {
        self.block_value(k, &[xi])
    }
}

/// Spectral images of `count` fresh points drawn from `bounds`.
pub fn spectral_points(frame: &SpectralFrame, bounds: &SampleBox, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, SeparationError> {
    let s = sample_points(bounds, count, seed)?;
    Ok(s.points.iter().map(|q| frame.to_spectral(q)).collect())
}

/// Builds `H_k` and checks the block-sum identity at [`IDENTITY_POINTS`]
/// fresh points from `bounds`. Returns the potentials and the residual.
pub fn extract_block_potentials(
    sp: &SpectralPotential<'_>,
    bounds: &SampleBox,
    seed: u64,
    tol: f64,
) -> Result<(BlockPotentials, f64), SeparationError> {
    let frame = sp.frame();
    let zero = alloc::vec![0.0; frame.dim()];
    let constant = sp.potential().value(&zero).map_err(at(0))?;
    let blocks = BlockPotentials {
        potential: sp.potential().clone(),
        frame: frame.clone(),
        constant,
    };
    let points = spectral_points(frame, bounds, IDENTITY_POINTS, seed ^ IDENTITY_SEED_MIX)?;
    let residual = blocks.identity_residual(&points)?;
    if residual > tol {
        return Err(SeparationError::Unsound { residual, tol });
    }
    Ok((blocks, residual))
}

/// A sampled one-dimensional separated potential.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    /// Spectral coordinate index.
    pub index: usize,
    pub eigenvalue: f64,
    /// `(ξ, f_k(ξ))` on a uniform grid including both endpoints.
    pub grid: Vec<(f64, f64)>,
}

/// Uniform grid of `count ≥ 2` points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2, "grid needs two endpoints");
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| if i == count - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Samples every `f_k` on [`GRID_POINTS`] points over `[lo_k, hi_k]` of `bounds`.
pub fn full_separation(blocks: &BlockPotentials, bounds: &SampleBox) -> Result<Vec<Profile>, SeparationError> {
    let frame = blocks.frame();
    let sizes = frame.block_sizes();
    if sizes.iter().any(|&m| m != 1) {
        return Err(SeparationError::DegenerateSpectrum { sizes });
    }
    let mut out = Vec::with_capacity(sizes.len());
    for k in 0..sizes.len() {
        let mut grid = Vec::with_capacity(GRID_POINTS);
        for (i, xi) in uniform_grid(bounds.lo()[k], bounds.hi()[k], GRID_POINTS).into_iter().enumerate() {
            grid.push((xi, blocks.profile(k, xi).map_err(at(i))?));
        }
        out.push(Profile {
            index: k,
            eigenvalue: frame.eigenvalues()[k],
            grid,
        });
    }
    Ok(out)
}

// 8-point Gauss–Legendre on [-1, 1]
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Returns `(∫, Σ|w·f|)` of `f` over `[a, b]`.
fn gauss_legendre<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<(f64, f64), E> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    let mut abs = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let l = f(mid - half * x)?;
        let r = f(mid + half * x)?;
        sum += w * (l + r);
        abs += w * (l.abs() + r.abs());
    }
    Ok((half * sum, half.abs() * abs))
}

fn adaptive<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    whole: f64,
    depth: u32,
    splits: &mut usize,
) -> Result<f64, E> {
    *splits += 1;
    let mid = 0.5 * (a + b);
    let (left, labs) = gauss_legendre(f, a, mid)?;
    let (right, rabs) = gauss_legendre(f, mid, b)?;
    let split = left + right;
    let diff = (split - whole).abs();
    if depth >= QUAD_MAX_DEPTH
        || *splits >= QUAD_MAX_SPLITS
        || diff <= QUAD_REL_TOL * split.abs()
        || diff <= 64.0 * f64::EPSILON * (labs + rabs)
    {
        return Ok(split);
    }
    Ok(adaptive(f, a, mid, left, depth + 1, splits)? + adaptive(f, mid, b, right, depth + 1, splits)?)
}

/// Adaptive Gauss–Legendre quadrature of `f` over `[a, b]`.
pub fn integrate<E>(mut f: impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<f64, E> {
    let (whole, _) = gauss_legendre(&mut f, a, b)?;
    adaptive(&mut f, a, b, whole, 0, &mut 0)
}

/// `Ũ` defined by `∇Ũ = A∇U` and `Ũ(0) = 0`, computed by line integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct CompanionPotential {
    potential: ParsedPotential,
    a: Matrix,
}

impl CompanionPotential {
    pub fn new(potential: ParsedPotential, a: Matrix) -> Self {
        assert_eq!(a.rows(), potential.dim(), "kinetic matrix dimension");
        assert!(a.is_square(), "kinetic matrix must be square");
        CompanionPotential { potential, a }
    }

    pub fn potential(&self) -> &ParsedPotential {
        &self.potential
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// `A∇U(q)`, the exact gradient of `Ũ`.
    pub fn gradient(&self, q: &[f64]) -> Result<Vec<f64>, DomainError> {
        Ok(self.a.matvec(&self.potential.gradient(q)?))
    }

    /// `∫ A∇U · dq` along the straight segment from `from` to `to`.
    pub fn segment(&self, from: &[f64], to: &[f64]) -> Result<f64, DomainError> {
        let d: Vec<f64> = to.iter().zip(from).map(|(t, f)| t - f).collect();
        if d.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let mut point = from.to_vec();
        integrate(
            |t| {
                for ((p, f), dv) in point.iter_mut().zip(from).zip(&d) {
                    *p = f + t * dv;
                }
                Ok(linalg::dot(&self.gradient(&point)?, &d))
            },
            0.0,
            1.0,
        )
    }

    /// Line integral from the origin along the straight segment.
    pub fn straight(&self, q: &[f64]) -> Result<f64, DomainError> {
        self.segment(&alloc::vec![0.0; q.len()], q)
    }

    /// Line integral from the origin along `0 → (q1,0,…) → (q1,q2,0,…) → … → q`.
    pub fn polyline(&self, q: &[f64]) -> Result<f64, DomainError> {
        let mut from = alloc::vec![0.0; q.len()];
        let mut total = 0.0;
        for i in 0..q.len() {
            let mut to = from.clone();
            to[i] = q[i];
            total += self.segment(&from, &to)?;
            from = to;
        }
        Ok(total)
    }

    /// Both path integrals, without judging them.
    pub fn paths(&self, q: &[f64]) -> Result<(f64, f64), DomainError> {
        Ok((self.straight(q)?, self.polyline(q)?))
    }

    /// `Ũ(q)` along the straight path, audited against the axis polyline.
    pub fn value(&self, q: &[f64]) -> Result<f64, SeparationError> {
        let (straight, polyline) = self.paths(q).map_err(at(0))?;
        if (straight - polyline).abs() > DEFAULT_RECON_TOL * straight.abs().max(1.0) {
            return Err(SeparationError::NotConservative { straight, polyline });
        }
        Ok(straight)
    }
}

/// `Ũ(q)` for the kinetic matrix `a`, with the path-independence audit.
pub fn reconstruct_tilde(p: &ParsedPotential, a: &Matrix, q: &[f64]) -> Result<f64, SeparationError> {
    CompanionPotential::new(p.clone(), a.clone()).value(q)
}

/// Largest `‖∇Ũ − A∇U‖∞` over `points`, with `∇Ũ` from central differences of
/// the supplied callable.
pub fn verify_gradient_relation<E>(
    p: &ParsedPotential,
    mut tilde: impl FnMut(&[f64]) -> Result<f64, E>,
    a: &Matrix,
    points: &[Vec<f64>],
    h: f64,
) -> Result<f64, SeparationError>
where
    E: Into<SeparationError>,
{
    let mut worst: f64 = 0.0;
    for (s, q) in points.iter().enumerate() {
        let exact = a.matvec(&p.gradient(q).map_err(at(s))?);
        let mut x = q.clone();
        for i in 0..q.len() {
            x[i] = q[i] + h;
            let up = tilde(&x).map_err(Into::into)?;
            x[i] = q[i] - h;
            let down = tilde(&x).map_err(Into::into)?;
            x[i] = q[i];
            worst = worst.max(((up - down) / (2.0 * h) - exact[i]).abs());
        }
    }
    Ok(worst)
}

/// Measurements for a kinetic matrix that need not satisfy the commutation
/// condition.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticDiagnostic {
    /// Whether `A` can be factored for the weighted equations of motion.
    pub invertible: bool,
    /// Largest `‖[∂²U(q), A]‖F`.
    pub commutation_residual: f64,
    /// Largest `|straight − polyline|` of the line integrals of `A∇U`.
    pub path_disagreement: f64,
}

pub fn diagnose_kinetic(p: &ParsedPotential, a: &Matrix, points: &[Vec<f64>]) -> Result<KineticDiagnostic, SeparationError> {
    let companion = CompanionPotential::new(p.clone(), a.clone());
    let mut commutation_residual: f64 = 0.0;
    let mut path_disagreement: f64 = 0.0;
    for (s, q) in points.iter().enumerate() {
        let h = p.hessian(q).map_err(at(s))?;
        commutation_residual = commutation_residual.max(commutator(&h, a).frobenius_norm());
        let (straight, polyline) = companion.paths(q).map_err(at(s))?;
        path_disagreement = path_disagreement.max((straight - polyline).abs());
    }
    Ok(KineticDiagnostic {
        invertible: linalg::Lu::factor(a).is_ok(),
        commutation_residual,
        path_disagreement,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationConfig {
    pub bounds: SampleBox,
    pub seed: u64,
    pub sep_tol: f64,
    pub recon_tol: f64,
}

/// Outcome of checking a potential against a spectral frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub mode: Mode,
    pub verdict: BlockVerdict,
    /// Present when the verdict holds and the block-sum identity was checked.
    pub blocks: Option<BlockPotentials>,
    pub identity_residual: Option<f64>,
    /// `U(0)`.
    pub constant: f64,
}

/// Cross-block check at `points` (spectral coordinates), then extraction.
pub fn separate(
    p: &ParsedPotential,
    frame: &SpectralFrame,
    points: &[Vec<f64>],
    cfg: &SeparationConfig,
) -> Result<SeparationReport, SeparationError> {
    let sp = frame.pullback(p);
    let verdict = verify_block_separation(&sp, points, cfg.sep_tol)?;
    let constant = p.value(&alloc::vec![0.0; p.dim()]).map_err(at(0))?;
    let (blocks, identity_residual) = if verdict.separated {
        let (b, r) = extract_block_potentials(&sp, &cfg.bounds, cfg.seed, cfg.recon_tol)?;
        (Some(b), Some(r))
    } else {
        (None, None)
    };
    Ok(SeparationReport {
        mode: Mode::classify(verdict.separated, &frame.block_sizes()),
        verdict,
        blocks,
        identity_residual,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::spectral::build_frame;
    use alloc::vec;

    const SK: &str = "0.5*(q1^2+q2^2) + q1^2*q2 + (1/3)*q2^3";

    fn exchange() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    fn unit_box(n: usize) -> SampleBox {
        SampleBox::cube(n, -1.0, 1.0).unwrap()
    }

    fn sk_profiles(xi: f64) -> (f64, f64) {
        let c = 2f64.sqrt() / 3.0;
        (0.5 * xi * xi - c * xi * xi * xi, 0.5 * xi * xi + c * xi * xi * xi)
    }

    #[test]
    fn sawada_kotera_blocks_separate() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let f = build_frame(&exchange(), 1e-8).unwrap();
        let pts = spectral_points(&f, &unit_box(2), 20, 42).unwrap();
        let v = verify_block_separation(&f.pullback(&p), &pts, DEFAULT_SEP_TOL).unwrap();
        assert!(v.separated && v.residual <= 1e-10);
    }

    #[test]
    fn bilinear_term_survives_diagonal_frame() {
        let p = parse("q1*q2", &["q1", "q2"]).unwrap();
        let f = build_frame(&Matrix::diag(&[1.0, 2.0]), 1e-8).unwrap();
        let v = verify_block_separation(&f.pullback(&p), &[vec![0.2, 0.3]], DEFAULT_SEP_TOL).unwrap();
        assert!(!v.separated);
        assert!((v.residual - 1.0).abs() < 1e-15);
        let single = build_frame(&Matrix::identity(2), 1e-8).unwrap();
        let v = verify_block_separation(&single.pullback(&p), &[vec![0.2, 0.3]], DEFAULT_SEP_TOL).unwrap();
        assert!(v.separated && v.residual == 0.0);
    }

    #[test]
    fn sawada_kotera_profiles() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let f = build_frame(&exchange(), 1e-8).unwrap();
        let (blocks, r) = extract_block_potentials(&f.pullback(&p), &unit_box(2), 1, 1e-8).unwrap();
        assert!(r < 1e-13);
        assert_eq!(blocks.constant(), 0.0);
        let profiles = full_separation(&blocks, &unit_box(2)).unwrap();
        assert_eq!(profiles.len(), 2);
        for pr in &profiles {
            assert_eq!(pr.grid.len(), GRID_POINTS);
            assert_eq!(pr.grid[0].0, -1.0);
            assert_eq!(pr.grid[GRID_POINTS - 1].0, 1.0);
            for &(xi, v) in &pr.grid {
                let want = if pr.index == 0 { sk_profiles(xi).0 } else { sk_profiles(xi).1 };
                assert!((v - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn isotropic_blocks_are_half_squares() {
        let p = parse("0.5*(x^2+y^2+z^2)", &["x", "y", "z"]).unwrap();
        let f = build_frame(&Matrix::diag(&[1.0, 3.0, 3.0]), 1e-8).unwrap();
        let (blocks, _) = extract_block_potentials(&f.pullback(&p), &unit_box(3), 1, 1e-8).unwrap();
        assert!((blocks.block_value(1, &[0.6, -0.8]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            full_separation(&blocks, &unit_box(3)),
            Err(SeparationError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn constant_is_subtracted() {
        let p = parse("exp(q1) + q2^2", &["q1", "q2"]).unwrap();
        let f = build_frame(&Matrix::diag(&[1.0, 2.0]), 1e-8).unwrap();
        let (blocks, _) = extract_block_potentials(&f.pullback(&p), &unit_box(2), 1, 1e-8).unwrap();
        assert_eq!(blocks.constant(), 1.0);
        assert!((blocks.profile(0, 0.7).unwrap() - (0.7f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn mis_declared_blocks_are_unsound() {
        // q1·q2 in a frame that claims two blocks, validated without the cross check
        let p = parse("q1*q2", &["q1", "q2"]).unwrap();
        let f = build_frame(&Matrix::diag(&[1.0, 2.0]), 1e-8).unwrap();
        assert!(matches!(
            extract_block_potentials(&f.pullback(&p), &unit_box(2), 1, 1e-8),
            Err(SeparationError::Unsound { .. })
        ));
    }

    #[test]
    fn companion_of_sawada_kotera() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let a = Matrix::identity(2).add(&exchange());
        let f = build_frame(&exchange(), 1e-8).unwrap();
        for q in [[0.3, -0.6], [1.2, 0.4], [-0.9, -0.2]] {
            let x = f.to_spectral(&q);
            // Ũ = 2·f1(x at λ = 1), the λ = 0 block drops out
            let want = 2.0 * sk_profiles(x[1]).1;
            let got = reconstruct_tilde(&p, &a, &q).unwrap();
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn identity_kinetic_recovers_potential() {
        let p = parse("exp(q1)*cos(q2) + q2^4", &["q1", "q2"]).unwrap();
        let q = [0.4, -1.1];
        let got = reconstruct_tilde(&p, &Matrix::identity(2), &q).unwrap();
        let want = p.value(&q).unwrap() - p.value(&[0.0, 0.0]).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn quadratic_companion_closed_form() {
        // U = ½qᵀMq with M = 2I + J, A = I + 3J commutes with M: Ũ = ½qᵀAMq
        let p = parse("q1^2 + q1*q2 + q2^2", &["q1", "q2"]).unwrap();
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let a = Matrix::from_rows(&[[1.0, 3.0], [3.0, 1.0]]).unwrap();
        let am = a.matmul(&m);
        for q in [[0.5, -0.25], [2.0, 1.0]] {
            let want = 0.5 * linalg::dot(&q, &am.matvec(&q));
            assert!((reconstruct_tilde(&p, &a, &q).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn non_commuting_kinetic_is_rejected() {
        let p = parse("q1^2*q2", &["q1", "q2"]).unwrap();
        let a = Matrix::diag(&[1.0, 2.0]);
        assert!(matches!(
            reconstruct_tilde(&p, &a, &[1.0, 1.0]),
            Err(SeparationError::NotConservative { .. })
        ));
    }

    #[test]
    fn gradient_relation_residuals() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let c = CompanionPotential::new(p.clone(), a.clone());
        let pts = sample_points(&unit_box(2), 10, 5).unwrap().points;
        let r = verify_gradient_relation(&p, |q| c.value(q), &a, &pts, GRADIENT_FD_STEP).unwrap();
        assert!(r <= 1e-6, "{r}");
        let id = Matrix::identity(2);
        let r = verify_gradient_relation(&p, |q| p.value(q), &id, &pts, GRADIENT_FD_STEP).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    #[test]
    fn quadrature_is_accurate() {
        let v: Result<f64, ()> = integrate(|t| Ok(t.exp()), 0.0, 2.0);
        assert!((v.unwrap() - (2f64.exp() - 1.0)).abs() < 1e-13);
        let v: Result<f64, ()> = integrate(|t| Ok(1.0 / (1e-3 + t * t)), -1.0, 1.0);
        let want = 2.0 * (1.0 / 1e-3f64.sqrt()).atan() / 1e-3f64.sqrt();
        assert!(((v.unwrap() - want) / want).abs() < 1e-9);
    }

    #[test]
    fn mode_classification() {
        assert_eq!(Mode::classify(true, &[1, 1]), Mode::Full);
        assert_eq!(Mode::classify(true, &[1]), Mode::Full);
        assert_eq!(Mode::classify(true, &[2, 1]), Mode::Block);
        assert_eq!(Mode::classify(true, &[3]), Mode::None);
        assert_eq!(Mode::classify(false, &[1, 1]), Mode::None);
        assert_eq!(Mode::classify(false, &[2, 1]), Mode::None);
    }

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(-2.0, 3.0, 6);
        assert_eq!(g, vec![-2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    }
}
