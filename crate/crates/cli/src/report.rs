//! Serialized report layouts. Field order is declaration order, maps are
//! `BTreeMap`, and nothing time-dependent is recorded, so equal requests give
//! byte-identical files.

use std::collections::BTreeMap;

use quadsep_core::linalg::Matrix;
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.to_rows()
}

/// `None` for non-finite values, which JSON cannot carry.
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialInfo {
    pub source: String,
    pub variables: Vec<String>,
    pub model: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub description: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingInfo {
    pub count: usize,
    pub seed: u64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub below_recommended: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancesInfo {
    pub commutant: f64,
    pub cluster: f64,
    pub separation: f64,
    pub reconstruction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutantInfo {
    pub dimension: usize,
    pub trivial: bool,
    pub unconstrained: bool,
    pub stable: bool,
    pub doubled_sample_dimension: usize,
    pub singular_values: Vec<f64>,
    /// `σ_kept / σ_dropped`; `null` when infinite or undefined.
    pub gap_ratio: Option<f64>,
    pub gap_report: Vec<Option<f64>>,
    pub validation_residual: Option<f64>,
    pub relative_validation_residual: Option<f64>,
    pub basis: Vec<Vec<Vec<f64>>>,
    pub center_dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticInfo {
    pub matrix: Vec<Vec<f64>>,
    /// Multiple of the identity added to make the drawn element positive definite.
    pub shift: f64,
    pub draw: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameInfo {
    pub eigenvalues: Vec<f64>,
    /// Coordinate indices (1-based) of each block.
    pub blocks: Vec<Vec<usize>>,
    pub block_sizes: Vec<usize>,
    pub rotation: Vec<Vec<f64>>,
    pub diagonalization_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileInfo {
    /// Spectral coordinate (1-based).
    pub index: usize,
    pub eigenvalue: f64,
    pub file: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationInfo {
    pub mode: String,
    pub verdict: bool,
    pub cross_block_residual: f64,
    pub hessian_scale: f64,
    pub identity_residual: Option<f64>,
    /// `U(0)`.
    pub constant: f64,
    /// `Ũ(0)`, fixed by normalization.
    pub tilde_constant: f64,
    pub profiles: Vec<ProfileInfo>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TildeInfo {
    pub gradient_relation_residual: f64,
    pub path_disagreement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsInfo {
    pub h: f64,
    pub steps: usize,
    pub records: usize,
    pub q0: Vec<f64>,
    pub v0: Vec<f64>,
    /// Drift statistics are `null` when a trace overflowed.
    pub e_drift: Option<f64>,
    pub e_tilde_drift: Option<f64>,
    pub block_drifts: Vec<Option<f64>>,
    pub equivalence_gap: Option<f64>,
    /// Set when a trajectory left the potential's domain; the statistics
    /// then cover the recorded prefix.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticDiagnosticInfo {
    pub matrix: Vec<Vec<f64>>,
    pub invertible: bool,
    pub commutation_residual: f64,
    pub path_disagreement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictInfo {
    pub exit_code: i32,
    pub commutant_trivial: bool,
    pub mode: String,
    pub separated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub potential: PotentialInfo,
    pub sampling: SamplingInfo,
    pub tolerances: TolerancesInfo,
    pub commutant: CommutantInfo,
    pub kinetic: KineticInfo,
    pub frame: FrameInfo,
    pub separation: SeparationInfo,
    pub tilde: TildeInfo,
    pub dynamics: DynamicsInfo,
    /// Measurements for a kinetic matrix proposed by the model, if any.
    pub proposed_kinetic: Option<KineticDiagnosticInfo>,
    pub verdict: VerdictInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema: u32,
    pub potential: PotentialInfo,
    pub kinetic: Vec<Vec<f64>>,
    pub dynamics: DynamicsInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatedEquation {
    /// 1-based coordinate.
    pub coordinate: usize,
    /// `2α_i` in `q̈_i + 2α_i q_i + β_i = 0`.
    pub stiffness: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseReport {
    pub schema: u32,
    pub matrix: Vec<Vec<f64>>,
    pub symmetric: bool,
    pub note: Option<String>,
    /// 1-based indices whose `f_k''` must be constant.
    pub forced_quadratic: Vec<usize>,
    pub alpha_space_dimension: usize,
    pub alpha_space: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub compatibility_residual: f64,
    pub tilde_potential: String,
    pub separated_equations: Vec<SeparatedEquation>,
    pub separable: bool,
    pub separability_residual: f64,
    /// Spread of the recovered `f_i''` along each axis.
    pub second_derivative_spread: Vec<f64>,
    pub trajectory_gap: f64,
    pub h: f64,
    pub steps: usize,
}
