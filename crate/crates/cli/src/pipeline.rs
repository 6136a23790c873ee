use anyhow::{anyhow, bail, Result};
use quadsep_core::commutant::{
    self, commutant_center, compute_commutant, positive_kinetic, select_generic_element, CommutantAnalysis,
    CommutantConfig, SampleBox,
};
use quadsep_core::dynamics::{
    self, energies, equivalence_gap, integrate_canonical, integrate_weighted, integrate_with, EnergyTrace, Integrator,
    State, Trajectory,
};
use quadsep_core::expr::{DomainError, ParsedPotential};
use quadsep_core::inverse;
use quadsep_core::linalg::{self, Matrix};
use quadsep_core::models::ModelSpec;
use quadsep_core::separation::{
    self, diagnose_kinetic, full_separation, separate, verify_gradient_relation, BlockPotentials, CompanionPotential,
    Profile, SeparationConfig,
};
use quadsep_core::spectral::{build_frame, SpectralFrame};

use crate::report::*;
use crate::request::{AnalysisRequest, DynamicsOptions, InverseRequest, PotentialSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_TRIVIAL: i32 = 2;

const TILDE_CHECK_POINTS: usize = 10;
const TILDE_SEED_OFFSET: u64 = 2;
const INVERSE_AXIS_POINTS: usize = 65;

/// Column names and rows of a trajectory table.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisOutcome {
    pub report: AnalysisReport,
    pub trace: Trace,
    pub weighted_trace: Trace,
    pub profiles: Vec<Profile>,
}

impl AnalysisOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.verdict.exit_code
    }

    /// File name of the `k`-th (0-based) profile.
    pub fn profile_file(k: usize) -> String {
        format!("f_{}.csv", k + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseOutcome {
    pub report: InverseReport,
    pub trace: Trace,
}

fn potential_info(source: &PotentialSource, p: &ParsedPotential, model: Option<&ModelSpec>) -> PotentialInfo {
    PotentialInfo {
        source: match source {
            PotentialSource::Inline { source, .. } => source.clone(),
            PotentialSource::Model { .. } => p.render(),
        },
        variables: p.names().to_vec(),
        model: model.map(|m| m.name.to_string()),
        params: model.map(|m| m.params.clone()).unwrap_or_default(),
        description: model.map(|m| m.description.clone()),
    }
}

/// Exact image of the box `[lo, hi]` under `x = Qᵀq`, coordinate by coordinate.
fn spectral_box(frame: &SpectralFrame, bounds: &SampleBox) -> Result<SampleBox> {
    let q = frame.rotation();
    let n = frame.dim();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for k in 0..n {
        for i in 0..n {
            let a = q[(i, k)] * bounds.lo()[i];
            let b = q[(i, k)] * bounds.hi()[i];
            lo[k] += a.min(b);
            hi[k] += a.max(b);
        }
    }
    SampleBox::new(lo, hi).map_err(|e| anyhow!("separation: {e}"))
}

fn trace_header(n: usize, blocks: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("q_{i}")));
    h.extend((1..=n).map(|i| format!("v_{i}")));
    h.push("E".to_string());
    h.push("Etilde".to_string());
    h.extend((1..=blocks).map(|k| format!("I_{k}")));
    h
}

fn trace_table(traj: &Trajectory, en: &EnergyTrace) -> Trace {
    let n = traj.states.first().map_or(0, State::dim);
    let rows = traj
        .states
        .iter()
        .enumerate()
        .map(|(r, s)| {
            let mut row = Vec::with_capacity(2 * n + 3 + en.blocks.len());
            row.push(s.t);
            row.extend_from_slice(&s.q);
            row.extend_from_slice(&s.v);
            row.push(en.e[r]);
            row.push(en.e_tilde[r]);
            row.extend(en.blocks.iter().map(|b| b[r]));
            row
        })
        .collect();
    Trace {
        header: trace_header(n, en.blocks.len()),
        rows,
    }
}

fn dynamics_err(e: dynamics::DynamicsError) -> anyhow::Error {
    anyhow!("dynamics: {e}")
}

fn domain_err(e: DomainError) -> anyhow::Error {
    anyhow!("dynamics: {e}")
}

struct DynamicsRun {
    info: DynamicsInfo,
    trace: Trace,
    weighted_trace: Trace,
}

/// Keeps the recorded prefix of a trajectory that left the potential's domain.
fn completed(res: Result<Trajectory, dynamics::DynamicsError>, label: &str) -> Result<(Trajectory, Option<String>)> {
    match res {
        Ok(t) => Ok((t, None)),
        Err(dynamics::DynamicsError::Domain { step, error, partial }) => {
            Ok((partial, Some(format!("{label} integration stopped at step {step}: {error}"))))
        }
        Err(e) => Err(dynamics_err(e)),
    }
}

fn truncated(t: &Trajectory, len: usize) -> Trajectory {
    let mut t = t.clone();
    t.states.truncate(len);
    t
}

fn run_dynamics(
    p: &ParsedPotential,
    a: &Matrix,
    companion: &CompanionPotential,
    blocks: Option<&BlockPotentials>,
    opts: &DynamicsOptions,
) -> Result<DynamicsRun> {
    let n = p.dim();
    let (q0, v0) = opts.initial(n)?;
    let s0 = State::new(q0.clone(), v0.clone());
    let (canonical, e1) = completed(integrate_canonical(p, &s0, opts.h, opts.steps), "canonical")?;
    let (weighted, e2) = completed(
        integrate_weighted(a, |q| companion.gradient(q), &s0, opts.h, opts.steps),
        "weighted",
    )?;
    let error = match (e1, e2) {
        (Some(a), Some(b)) => Some(format!("{a}; {b}")),
        (a, b) => a.or(b),
    };
    let common = canonical.len().min(weighted.len());
    let gap = equivalence_gap(&truncated(&canonical, common), &truncated(&weighted, common)).map_err(dynamics_err)?;
    let tilde = |q: &[f64]| companion.straight(q);
    let en = energies(&canonical, p, a, tilde, blocks).map_err(domain_err)?;
    let en_w = energies(&weighted, p, a, tilde, blocks).map_err(domain_err)?;
    Ok(DynamicsRun {
        info: DynamicsInfo {
            h: opts.h,
            steps: opts.steps,
            records: canonical.len(),
            q0,
            v0,
            e_drift: finite(en.e_drift()),
            e_tilde_drift: finite(en.e_tilde_drift()),
            block_drifts: en.block_drifts().into_iter().map(finite).collect(),
            equivalence_gap: finite(gap),
            error,
        },
        trace: trace_table(&canonical, &en),
        weighted_trace: trace_table(&weighted, &en_w),
    })
}

fn commutant_info(analysis: &CommutantAnalysis, center_dimension: usize) -> CommutantInfo {
    let b = &analysis.basis;
    CommutantInfo {
        dimension: b.dim(),
        trivial: b.is_trivial(),
        unconstrained: b.unconstrained,
        stable: analysis.stable(),
        doubled_sample_dimension: analysis.doubled_sample_dim,
        singular_values: b.singular_values.clone(),
        gap_ratio: b.gap_ratio().and_then(finite),
        gap_report: b.gap_report().into_iter().map(finite).collect(),
        validation_residual: b.validation_residual,
        relative_validation_residual: b.relative_validation_residual(),
        basis: b.basis.iter().map(matrix_rows).collect(),
        center_dimension,
    }
}

/// Runs the full analysis: commutant, kinetic matrix, spectral frame,
/// separation, companion potential and dynamics.
pub fn analyze(req: &AnalysisRequest) -> Result<AnalysisOutcome> {
    req.tol.validate()?;
    let (p, model) = req.potential.load()?;
    let n = p.dim();
    let bounds = req.sample_box(n)?;
    let count = req.samples.unwrap_or_else(|| commutant::default_sample_count(n));
    let cfg = CommutantConfig {
        bounds: bounds.clone(),
        count,
        seed: req.seed,
        rel_tol: req.tol.commutant,
    };
    let comm = compute_commutant(&p, &cfg).map_err(|e| anyhow!("commutant: {e}"))?;
    let center = commutant_center(&comm.basis.basis, req.tol.commutant);
    let element = select_generic_element(&center, req.seed, req.tol.cluster).map_err(|e| anyhow!("commutant: {e}"))?;
    let (a, shift) = positive_kinetic(&element);
    let frame = build_frame(&a, req.tol.cluster).map_err(|e| anyhow!("spectral: {e}"))?;

    let points_x: Vec<Vec<f64>> = comm.samples.points.iter().map(|q| frame.to_spectral(q)).collect();
    let sep_cfg = SeparationConfig {
        bounds: bounds.clone(),
        seed: req.seed,
        sep_tol: req.tol.separation,
        recon_tol: req.tol.reconstruction,
    };
    let sep = separate(&p, &frame, &points_x, &sep_cfg).map_err(|e| anyhow!("separation: {e}"))?;
    let (profiles, spectral_bounds) = match (&sep.blocks, sep.mode) {
        (Some(blocks), separation::Mode::Full) => {
            let sb = spectral_box(&frame, &bounds)?;
            let profiles = full_separation(blocks, &sb).map_err(|e| anyhow!("separation: {e}"))?;
            (profiles, Some(sb))
        }
        _ => (Vec::new(), None),
    };

    let companion = CompanionPotential::new(p.clone(), a.clone());
    let tilde_points = commutant::sample_points(&bounds, TILDE_CHECK_POINTS, req.seed.wrapping_add(TILDE_SEED_OFFSET))
        .map_err(|e| anyhow!("separation: {e}"))?;
    let gradient_relation_residual = verify_gradient_relation(
        &p,
        |q| companion.straight(q),
        &a,
        &tilde_points.points,
        separation::GRADIENT_FD_STEP,
    )
    .map_err(|e| anyhow!("separation: {e}"))?;
    let mut path_disagreement: f64 = 0.0;
    for q in &tilde_points.points {
        let (s, l) = companion.paths(q).map_err(|e| anyhow!("separation: {e}"))?;
        path_disagreement = path_disagreement.max((s - l).abs());
    }

    let dyn_run = run_dynamics(&p, &a, &companion, sep.blocks.as_ref(), &req.dynamics)?;

    let proposed_kinetic = match model.as_ref().and_then(|m| m.kinetic.as_ref()) {
        Some(k) => {
            let d = diagnose_kinetic(&p, k, &comm.samples.points).map_err(|e| anyhow!("separation: {e}"))?;
            Some(KineticDiagnosticInfo {
                matrix: matrix_rows(k),
                invertible: d.invertible,
                commutation_residual: d.commutation_residual,
                path_disagreement: d.path_disagreement,
            })
        }
        None => None,
    };

    let trivial = comm.basis.is_trivial();
    let exit_code = if dyn_run.info.error.is_some() {
        EXIT_ERROR
    } else if trivial {
        EXIT_TRIVIAL
    } else {
        EXIT_OK
    };
    let profile_info = match &spectral_bounds {
        Some(sb) => profiles
            .iter()
            .map(|pr| ProfileInfo {
                index: pr.index + 1,
                eigenvalue: pr.eigenvalue,
                file: AnalysisOutcome::profile_file(pr.index),
                lo: sb.lo()[pr.index],
                hi: sb.hi()[pr.index],
            })
            .collect(),
        None => Vec::new(),
    };

    let report = AnalysisReport {
        schema: SCHEMA,
        potential: potential_info(&req.potential, &p, model.as_ref()),
        sampling: SamplingInfo {
            count,
            seed: req.seed,
            lo: bounds.lo().to_vec(),
            hi: bounds.hi().to_vec(),
            below_recommended: comm.samples.below_recommended,
        },
        tolerances: TolerancesInfo {
            commutant: req.tol.commutant,
            cluster: req.tol.cluster,
            separation: req.tol.separation,
            reconstruction: req.tol.reconstruction,
        },
        commutant: commutant_info(&comm, center.len()),
        kinetic: KineticInfo {
            matrix: matrix_rows(&a),
            shift,
            draw: element.draw,
        },
        frame: FrameInfo {
            eigenvalues: frame.eigenvalues().to_vec(),
            blocks: frame.blocks().iter().map(|b| b.clone().map(|k| k + 1).collect()).collect(),
            block_sizes: frame.block_sizes(),
            rotation: matrix_rows(frame.rotation()),
            diagonalization_residual: frame.diagonalization_residual(),
        },
        separation: SeparationInfo {
            mode: sep.mode.as_str().to_string(),
            verdict: sep.verdict.separated,
            cross_block_residual: sep.verdict.residual,
            hessian_scale: sep.verdict.hessian_scale,
            identity_residual: sep.identity_residual,
            constant: sep.constant,
            tilde_constant: 0.0,
            profiles: profile_info,
        },
        tilde: TildeInfo {
            gradient_relation_residual,
            path_disagreement,
        },
        dynamics: dyn_run.info,
        proposed_kinetic,
        verdict: VerdictInfo {
            exit_code,
            commutant_trivial: trivial,
            mode: sep.mode.as_str().to_string(),
            separated: sep.verdict.separated,
        },
    };
    Ok(AnalysisOutcome {
        report,
        trace: dyn_run.trace,
        weighted_trace: dyn_run.weighted_trace,
        profiles,
    })
}

/// Integrates the canonical and weighted systems for the kinetic matrix the
/// analysis selects, and summarizes both.
pub fn simulate(req: &AnalysisRequest) -> Result<(SimulationReport, Trace, Trace)> {
    let out = analyze(req)?;
    let r = out.report;
    Ok((
        SimulationReport {
            schema: SCHEMA,
            potential: r.potential,
            kinetic: r.kinetic.matrix,
            dynamics: r.dynamics,
        },
        out.trace,
        out.weighted_trace,
    ))
}

/// Sum of the basis vectors scaled to unit max-norm with a positive leading entry.
pub fn default_alpha(basis: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut alpha = vec![0.0; n];
    for v in basis {
        let lead = v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
        for (a, x) in alpha.iter_mut().zip(v) {
            *a += x * lead.signum();
        }
    }
    let m = linalg::norm_inf(&alpha);
    if m > 0.0 {
        alpha.iter_mut().for_each(|a| *a /= m);
    }
    alpha
}

fn inverse_err(e: inverse::InverseError) -> anyhow::Error {
    anyhow!("inverse: {e}")
}

/// Forced set, α-space, constructed `Ũ`, separability check and the
/// weighted-versus-separated trajectory gap for a constant kinetic matrix.
pub fn run_inverse(req: &InverseRequest) -> Result<InverseOutcome> {
    let a = Matrix::from_rows(&req.matrix).map_err(|e| anyhow!("inverse: {e}"))?;
    if !a.is_square() {
        bail!("inverse: kinetic matrix must be square");
    }
    if !a.is_finite() {
        bail!("inverse: kinetic matrix has non-finite entries");
    }
    let n = a.rows();
    let forced = inverse::forced_quadratic_set(&a, req.zero_tol).map_err(inverse_err)?;
    let space = inverse::solve_alpha_constraints(&a).map_err(inverse_err)?;
    let alpha = match &req.alpha {
        Some(v) => v.clone(),
        None => default_alpha(&space, n),
    };
    let beta = req.beta.clone().unwrap_or_else(|| vec![0.0; n]);
    if alpha.len() != n || beta.len() != n {
        bail!("inverse: --alpha and --beta need {n} components");
    }
    let tilde = inverse::build_tilde_potential(&a, &alpha, &beta).map_err(inverse_err)?;

    let pairs: Vec<(f64, f64)> = match req.boxes.len() {
        0 => vec![(-1.0, 1.0); n],
        1 => vec![req.boxes[0]; n],
        k if k == n => req.boxes.clone(),
        k => bail!("--box given {k} times; expected 1 or {n}"),
    };
    let (lo, hi): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let bounds = SampleBox::new(lo, hi).map_err(|e| anyhow!("inverse: {e}"))?;
    let samples = commutant::sample_points(&bounds, commutant::default_sample_count(n), req.seed)
        .map_err(|e| anyhow!("inverse: {e}"))?;
    let axis = separation::uniform_grid(bounds.lo()[0], bounds.hi()[0], INVERSE_AXIS_POINTS);
    let check = inverse::check_inverse_separability(&a, |q| tilde.gradient(q), &samples.points, req.sep_tol, &axis)
        .map_err(inverse_err)?;

    let (q0, v0) = req.dynamics.initial(n)?;
    let s0 = State::new(q0, v0);
    let (h, steps) = (req.dynamics.h, req.dynamics.steps);
    let weighted = integrate_weighted(&a, |q| tilde.gradient(q), &s0, h, steps).map_err(dynamics_err)?;
    let separated = integrate_with(
        |q| Ok(inverse::separated_acceleration(&alpha, &beta, q)),
        &s0,
        h,
        steps,
        dynamics::default_stride(steps),
        Integrator::Custom,
    )
    .map_err(dynamics_err)?;
    let gap = equivalence_gap(&weighted, &separated).map_err(dynamics_err)?;

    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("q_{i}")));
    header.extend((1..=n).map(|i| format!("v_{i}")));
    let rows = weighted
        .states
        .iter()
        .map(|s| {
            let mut row = vec![s.t];
            row.extend_from_slice(&s.q);
            row.extend_from_slice(&s.v);
            row
        })
        .collect();

    let symmetric = a.asymmetry() == 0.0;
    let report = InverseReport {
        schema: SCHEMA,
        matrix: matrix_rows(&a),
        symmetric,
        note: symmetric.then(|| "A is symmetric: run `analyze` for the commutant-based spectral separation".to_string()),
        forced_quadratic: forced.iter().map(|k| k + 1).collect(),
        alpha_space_dimension: space.len(),
        alpha_space: space,
        compatibility_residual: inverse::compatibility_residual(&a, &alpha),
        tilde_potential: tilde.render(),
        separated_equations: alpha
            .iter()
            .zip(&beta)
            .enumerate()
            .map(|(i, (al, be))| SeparatedEquation {
                coordinate: i + 1,
                stiffness: 2.0 * al,
                beta: *be,
            })
            .collect(),
        alpha,
        beta,
        separable: check.separated,
        separability_residual: check.residual,
        second_derivative_spread: check.profiles.iter().map(|p| p.second_derivative_spread).collect(),
        trajectory_gap: gap,
        h,
        steps,
    };
    Ok(InverseOutcome {
        report,
        trace: Trace { header, rows },
    })
}
