//! Velocity-Verlet integration of `q̈ = −∇U` and `Aq̈ = −∇Ũ`, with energy
//! bookkeeping.

use alloc::vec::Vec;
use core::fmt;

use crate::expr::{DomainError, ParsedPotential};
use crate::linalg::{self, LinalgError, Lu, Matrix};
use crate::separation::BlockPotentials;

/// Recording stops being every step beyond this many records.
pub const MAX_RECORDS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn new(q: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(q.len(), v.len(), "position and velocity dimension");
        State { t: 0.0, q, v }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    /// `q̈ = −∇U`.
    Canonical,
    /// `Aq̈ = −∇Ũ`.
    Weighted,
    /// Any other acceleration field.
    Custom,
}

impl Integrator {
    pub fn as_str(self) -> &'static str {
        match self {
            Integrator::Canonical => "canonical",
            Integrator::Weighted => "weighted",
            Integrator::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub h: f64,
    /// Steps between consecutive records.
    pub stride: usize,
    pub integrator: Integrator,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory holds the initial state")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DynamicsError {
    InvalidStep(f64),
    NoSteps,
    /// Evaluation failed at `step`; `partial` holds the states recorded so far.
    Domain { step: usize, error: DomainError, partial: Trajectory },
    /// The kinetic matrix cannot be inverted; the weighted equations need it.
    SingularKinetic(LinalgError),
    ShapeMismatch(&'static str),
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::InvalidStep(h) => write!(f, "step size must be positive and finite, got {h}"),
            DynamicsError::NoSteps => f.write_str("at least one step is required"),
            DynamicsError::Domain { step, error, .. } => write!(f, "integration stopped at step {step}: {error}"),
            DynamicsError::SingularKinetic(e) => {
                write!(f, "kinetic matrix must be invertible for the weighted equations: {e}")
            }
            DynamicsError::ShapeMismatch(what) => write!(f, "shape mismatch: {what}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

/// Every step up to [`MAX_RECORDS`] steps, otherwise evenly decimated.
pub fn default_stride(steps: usize) -> usize {
    steps.div_ceil(MAX_RECORDS).max(1)
}

/// Velocity Verlet for an arbitrary acceleration field, recording every
/// `stride`-th state and always the last one.
pub fn integrate_with(
    mut accel: impl FnMut(&[f64]) -> Result<Vec<f64>, DomainError>,
    s0: &State,
    h: f64,
    steps: usize,
    stride: usize,
    integrator: Integrator,
) -> Result<Trajectory, DynamicsError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(DynamicsError::InvalidStep(h));
    }
    if steps == 0 {
        return Err(DynamicsError::NoSteps);
    }
    let stride = stride.max(1);
    let mut traj = Trajectory {
        states: Vec::with_capacity(steps / stride + 2),
        h,
        stride,
        integrator,
    };
    let t0 = s0.t;
    traj.states.push(s0.clone());
    let mut q = s0.q.clone();
    let mut v = s0.v.clone();
    let mut a = match accel(&q) {
        Ok(a) => a,
        Err(error) => return Err(DynamicsError::Domain { step: 0, error, partial: traj }),
    };
    let half = 0.5 * h;
    for step in 1..=steps {
        for ((vi, qi), ai) in v.iter_mut().zip(q.iter_mut()).zip(&a) {
            *vi += half * ai;
            *qi += h * *vi;
        }
        a = match accel(&q) {
            Ok(a) => a,
            Err(error) => return Err(DynamicsError::Domain { step, error, partial: traj }),
        };
        for (vi, ai) in v.iter_mut().zip(&a) {
            *vi += half * ai;
        }
        if step % stride == 0 || step == steps {
            traj.states.push(State {
                t: t0 + h * step as f64,
                q: q.clone(),
                v: v.clone(),
            });
        }
    }
    Ok(traj)
}

/// `q̈ = −∇U(q)`.
pub fn integrate_canonical(p: &ParsedPotential, s0: &State, h: f64, steps: usize) -> Result<Trajectory, DynamicsError> {
    if s0.dim() != p.dim() {
        return Err(DynamicsError::ShapeMismatch("initial state and potential"));
    }
    integrate_with(
        |q| Ok(p.gradient(q)?.into_iter().map(|g| -g).collect()),
        s0,
        h,
        steps,
        default_stride(steps),
        Integrator::Canonical,
    )
}

/// `A q̈ = −∇Ũ(q)`, with `A` factored once.
pub fn integrate_weighted(
    a: &Matrix,
    mut grad_tilde: impl FnMut(&[f64]) -> Result<Vec<f64>, DomainError>,
    s0: &State,
    h: f64,
    steps: usize,
) -> Result<Trajectory, DynamicsError> {
    if !a.is_square() || a.rows() != s0.dim() {
        return Err(DynamicsError::ShapeMismatch("kinetic matrix and initial state"));
    }
    let lu = Lu::factor(a).map_err(DynamicsError::SingularKinetic)?;
    integrate_with(
        |q| {
            let g: Vec<f64> = grad_tilde(q)?.into_iter().map(|g| -g).collect();
            Ok(lu.solve(&g))
        },
        s0,
        h,
        steps,
        default_stride(steps),
        Integrator::Weighted,
    )
}

/// Largest `|X(t) − X(0)| / max(1, |X(0)|)` over a trace.
pub fn relative_drift(values: &[f64]) -> f64 {
    let Some(&x0) = values.first() else { return 0.0 };
    let worst = values.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max);
    worst / x0.abs().max(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTrace {
    /// `½|v|² + U(q)`.
    pub e: Vec<f64>,
    /// `½vᵀAv + Ũ(q)`.
    pub e_tilde: Vec<f64>,
    /// `I_k = ½|ẋ_(k)|² + H_k(x_(k))`, one trace per block.
    pub blocks: Vec<Vec<f64>>,
}

impl EnergyTrace {
    pub fn e_drift(&self) -> f64 {
        relative_drift(&self.e)
    }

    pub fn e_tilde_drift(&self) -> f64 {
        relative_drift(&self.e_tilde)
    }

    pub fn block_drifts(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| relative_drift(b)).collect()
    }
}

/// Energies along a trajectory. `tilde` evaluates `Ũ`; `blocks`, when given,
/// adds the per-block integrals.
pub fn energies<E>(
    traj: &Trajectory,
    p: &ParsedPotential,
    a: &Matrix,
    mut tilde: impl FnMut(&[f64]) -> Result<f64, E>,
    blocks: Option<&BlockPotentials>,
) -> Result<EnergyTrace, E>
where
    E: From<DomainError>,
{
    let len = traj.len();
    let mut out = EnergyTrace {
        e: Vec::with_capacity(len),
        e_tilde: Vec::with_capacity(len),
        blocks: blocks.map_or(Vec::new(), |b| (0..b.block_count()).map(|_| Vec::with_capacity(len)).collect()),
    };
    for s in &traj.states {
        let kinetic = 0.5 * linalg::dot(&s.v, &s.v);
        out.e.push(kinetic + p.value(&s.q)?);
        out.e_tilde.push(0.5 * linalg::dot(&s.v, &a.matvec(&s.v)) + tilde(&s.q)?);
        if let Some(b) = blocks {
            let frame = b.frame();
            let x = frame.to_spectral(&s.q);
            let xd = frame.to_spectral(&s.v);
            for (k, range) in frame.blocks().iter().enumerate() {
                let vk = &xd[range.clone()];
                out.blocks[k].push(0.5 * linalg::dot(vk, vk) + b.block_value_at(k, &x)?);
            }
        }
    }
    Ok(out)
}

/// Largest `‖q₁ − q₂‖∞ + ‖v₁ − v₂‖∞` over matching records.
pub fn equivalence_gap(t1: &Trajectory, t2: &Trajectory) -> Result<f64, DynamicsError> {
    if t1.len() != t2.len() || t1.h != t2.h || t1.stride != t2.stride {
        return Err(DynamicsError::ShapeMismatch("trajectories differ in length or step"));
    }
    let mut worst: f64 = 0.0;
    for (a, b) in t1.states.iter().zip(&t2.states) {
        if a.dim() != b.dim() {
            return Err(DynamicsError::ShapeMismatch("state dimension"));
        }
        let dq = a.q.iter().zip(&b.q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let dv = a.v.iter().zip(&b.v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(dq + dv);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use alloc::vec;

    const SK: &str = "0.5*(q1^2+q2^2) + q1^2*q2 + (1/3)*q2^3";

    #[test]
    fn harmonic_oscillator_period() {
        let p = parse("0.5*q^2", &["q"]).unwrap();
        let h = 1e-3;
        let steps = (2.0 * core::f64::consts::PI / h).round() as usize;
        let t = integrate_canonical(&p, &State::new(vec![1.0], vec![0.0]), h, steps).unwrap();
        let end = t.last();
        assert!((end.q[0] - 1.0).abs() <= 1e-5);
        assert!(end.v[0].abs() <= 1e-3);
        assert_eq!(t.len(), steps + 1);
    }

    #[test]
    fn free_particle_is_exact() {
        let p = parse("0", &["x", "y"]).unwrap();
        let t = integrate_canonical(&p, &State::new(vec![1.0, -2.0], vec![0.5, 0.25]), 0.125, 16).unwrap();
        let end = t.last();
        assert_eq!(end.q, vec![2.0, -1.5]);
        assert_eq!(end.t, 2.0);
        let e = energies(&t, &p, &Matrix::identity(2), |q| p.value(q), None).unwrap();
        assert_eq!(e.e_drift(), 0.0);
    }

    #[test]
    fn sawada_kotera_energy_drift() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let t = integrate_canonical(&p, &State::new(vec![0.1, 0.2], vec![0.0, 0.0]), 1e-3, 50_000).unwrap();
        let e = energies(&t, &p, &Matrix::identity(2), |q| p.value(q), None).unwrap();
        assert!(e.e_drift() <= 1e-6, "{}", e.e_drift());
    }

    #[test]
    fn identity_weighting_is_bitwise_canonical() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let s0 = State::new(vec![0.1, 0.2], vec![0.05, 0.0]);
        let c = integrate_canonical(&p, &s0, 1e-2, 500).unwrap();
        let w = integrate_weighted(&Matrix::identity(2), |q| p.gradient(q), &s0, 1e-2, 500).unwrap();
        assert_eq!(equivalence_gap(&c, &w).unwrap(), 0.0);
        let w2 = integrate_weighted(
            &Matrix::identity(2).scale(2.0),
            |q| Ok(p.gradient(q)?.iter().map(|g| 2.0 * g).collect()),
            &s0,
            1e-2,
            500,
        )
        .unwrap();
        assert_eq!(equivalence_gap(&c, &w2).unwrap(), 0.0);
    }

    #[test]
    fn singular_kinetic_is_rejected() {
        let p = parse(SK, &["q1", "q2"]).unwrap();
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let s0 = State::new(vec![0.1, 0.2], vec![0.0, 0.0]);
        assert!(matches!(
            integrate_weighted(&a, |q| p.gradient(q), &s0, 1e-3, 10),
            Err(DynamicsError::SingularKinetic(_))
        ));
    }

    #[test]
    fn domain_error_keeps_partial_trajectory() {
        // q̈ = 1/(2√q) pushes q outward; starting at q = 1 with v = −3 crosses zero
        let p = parse("-sqrt(q)", &["q"]).unwrap();
        let err = integrate_canonical(&p, &State::new(vec![1.0], vec![-3.0]), 0.1, 100).unwrap_err();
        match err {
            DynamicsError::Domain { step, partial, .. } => {
                assert!(step > 0);
                assert_eq!(partial.len(), step);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_arguments() {
        let p = parse("q^2", &["q"]).unwrap();
        let s0 = State::new(vec![1.0], vec![0.0]);
        assert!(matches!(integrate_canonical(&p, &s0, 0.0, 1), Err(DynamicsError::InvalidStep(_))));
        assert!(matches!(integrate_canonical(&p, &s0, 0.1, 0), Err(DynamicsError::NoSteps)));
        let two = State::new(vec![1.0, 0.0], vec![0.0, 0.0]);
        assert!(integrate_canonical(&p, &two, 0.1, 1).is_err());
    }

    #[test]
    fn decimated_recording() {
        assert_eq!(default_stride(100_000), 1);
        assert_eq!(default_stride(100_001), 2);
        let t = integrate_with(
            |q| Ok(vec![-q[0]]),
            &State::new(vec![1.0], vec![0.0]),
            0.01,
            10,
            3,
            Integrator::Custom,
        )
        .unwrap();
        let times: Vec<f64> = t.states.iter().map(|s| (s.t * 100.0).round()).collect();
        assert_eq!(times, vec![0.0, 3.0, 6.0, 9.0, 10.0]);
    }

    #[test]
    fn drift_statistic() {
        assert_eq!(relative_drift(&[2.0, 2.5, 1.0]), 0.5);
        assert!((relative_drift(&[0.1, 0.3]) - 0.2).abs() < 1e-16);
        assert_eq!(relative_drift(&[]), 0.0);
    }

    #[test]
    fn gap_shape_mismatch() {
        let p = parse("0.5*q^2", &["q"]).unwrap();
        let s0 = State::new(vec![1.0], vec![0.0]);
        let a = integrate_canonical(&p, &s0, 0.1, 10).unwrap();
        let b = integrate_canonical(&p, &s0, 0.1, 11).unwrap();
        assert!(equivalence_gap(&a, &b).is_err());
        assert_eq!(equivalence_gap(&a, &a).unwrap(), 0.0);
    }
}
