use proptest::prelude::*;
use quadsep_core::commutant::{
    commutant_center, compute_commutant, positive_kinetic, select_generic_element, CommutantConfig,
};
use quadsep_core::dynamics::{energies, integrate_canonical, integrate_weighted, equivalence_gap, State};
use quadsep_core::expr::{parse, DomainError, ParsedPotential};
use quadsep_core::linalg::Matrix;
use quadsep_core::separation::{separate, BlockPotentials, CompanionPotential, SeparationConfig};
use quadsep_core::spectral::build_frame;

const SK: &str = "0.5*(q1^2 + q2^2) + q1^2*q2 + (1/3)*q2^3";

fn potential(src: &str) -> ParsedPotential {
    parse(src, &["q1", "q2"]).unwrap()
}

/// Kinetic matrix and block potentials found by the commutant pipeline.
fn separated(p: &ParsedPotential) -> (Matrix, BlockPotentials) {
    let cfg = CommutantConfig::for_dim(p.dim());
    let comm = compute_commutant(p, &cfg).unwrap();
    let center = commutant_center(&comm.basis.basis, 1e-8);
    let (a, _) = positive_kinetic(&select_generic_element(&center, 42, 1e-8).unwrap());
    let frame = build_frame(&a, 1e-8).unwrap();
    let pts: Vec<Vec<f64>> = comm.samples.points.iter().map(|x| frame.to_spectral(x)).collect();
    let sep_cfg = SeparationConfig { bounds: cfg.bounds.clone(), seed: 1, sep_tol: 1e-8, recon_tol: 1e-8 };
    let report = separate(p, &frame, &pts, &sep_cfg).unwrap();
    (a, report.blocks.unwrap())
}

#[test]
fn verlet_is_second_order() {
    let p = parse("0.5*q^2", &["q"]).unwrap();
    let s0 = State::new(vec![1.0], vec![0.0]);
    let error = |steps: usize| {
        let t = integrate_canonical(&p, &s0, 1.0 / steps as f64, steps).unwrap();
        (t.last().q[0] - 1f64.cos()).abs()
    };
    let ratios: Vec<f64> = [50, 100, 200].windows(2).map(|w| error(w[0]) / error(w[1])).collect();
    for r in ratios {
        assert!((r - 4.0).abs() < 0.05, "{r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn verlet_is_time_reversible(q in [-0.3..0.3f64, -0.3..0.3f64], v in [-0.3..0.3f64, -0.3..0.3f64]) {
        let p = potential(SK);
        let fwd = integrate_canonical(&p, &State::new(q.to_vec(), v.to_vec()), 0.01, 500).unwrap();
        let end = fwd.last();
        let back_v: Vec<f64> = end.v.iter().map(|x| -x).collect();
        let back = integrate_canonical(&p, &State::new(end.q.clone(), back_v), 0.01, 500).unwrap();
        let last = back.last();
        for i in 0..2 {
            prop_assert!((last.q[i] - q[i]).abs() <= 1e-11);
            prop_assert!((last.v[i] + v[i]).abs() <= 1e-11);
        }
    }
}

#[test]
fn block_integrals_are_conserved() {
    let p = potential(SK);
    let (a, blocks) = separated(&p);
    assert_eq!(blocks.block_count(), 2);
    let companion = CompanionPotential::new(p.clone(), a.clone());
    let s0 = State::new(vec![0.1, 0.05], vec![0.2, -0.1]);
    let traj = integrate_canonical(&p, &s0, 0.01, 5000).unwrap();
    let e = energies::<DomainError>(&traj, &p, &a, |q| companion.straight(q), Some(&blocks)).unwrap();
    assert!(e.e_drift() <= 1e-4, "{}", e.e_drift());
    assert!(e.e_tilde_drift() <= 1e-4, "{}", e.e_tilde_drift());
    for d in e.block_drifts() {
        assert!(d <= 1e-4, "{d}");
    }

    // The weighted system with Ũ traces the same path.
    let weighted = integrate_weighted(&a, |q| companion.gradient(q), &s0, 0.01, 5000).unwrap();
    assert!(equivalence_gap(&traj, &weighted).unwrap() <= 1e-8);
}

#[test]
fn block_integrals_drift_for_a_coupled_perturbation() {
    let p = potential(SK);
    let (a, blocks) = separated(&p);
    let perturbed = potential(&format!("{SK} + 0.5*q1^2*q2^2"));
    let s0 = State::new(vec![0.3, 0.2], vec![0.2, -0.1]);
    let traj = integrate_canonical(&perturbed, &s0, 0.01, 5000).unwrap();
    let companion = CompanionPotential::new(perturbed.clone(), a.clone());
    let e = energies::<DomainError>(&traj, &perturbed, &a, |q| companion.straight(q), Some(&blocks)).unwrap();
    assert!(e.e_drift() <= 1e-4);
    let worst = e.block_drifts().into_iter().fold(0.0, f64::max);
    assert!(worst >= 1e-3, "{worst}");
}
