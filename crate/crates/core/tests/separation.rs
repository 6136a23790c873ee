use proptest::prelude::*;
use quadsep_core::commutant::{
    commutant_center, compute_commutant, positive_kinetic, sample_points, select_generic_element, CommutantConfig,
    SampleBox,
};
use quadsep_core::expr::{parse, ParsedPotential};
use quadsep_core::linalg::{commutator, sym_eigen, Matrix};
use quadsep_core::separation::{full_separation, separate, CompanionPotential, Mode, SeparationConfig};
use quadsep_core::spectral::build_frame;

/// One-dimensional profiles `f(ξ)` written in terms of `{}`.
const PROFILES: [&str; 4] = ["0.5*({})^2 + ({})^3", "cos({})", "({})^4 - ({})^2", "exp(0.5*({}))"];

fn profile_value(k: usize, t: f64) -> f64 {
    match k {
        0 => 0.5 * t * t + t.powi(3),
        1 => t.cos(),
        2 => t.powi(4) - t * t,
        _ => (0.5 * t).exp(),
    }
}

fn rotation(seed: &[f64]) -> Matrix {
    let n = (seed.len() as f64).sqrt() as usize;
    let m = Matrix::from_vec(n, n, seed.to_vec());
    sym_eigen(&m.add(&m.transpose())).unwrap().vectors
}

/// `U(q) = Σ_k f_k((Qᵀq)_k)` over `q1..qn`.
fn rotated_separable(q: &Matrix, which: &[usize]) -> ParsedPotential {
    let n = q.rows();
    let names: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
    let terms: Vec<String> = which
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let x = (0..n).map(|i| format!("({:?})*q{}", q[(i, k)], i + 1)).collect::<Vec<_>>().join(" + ");
            PROFILES[f].replace("{}", &x)
        })
        .collect();
    parse(&terms.join(" + "), &names).unwrap()
}

fn case() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    (2usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0..1.0f64, n * n),
            prop::collection::vec(0usize..4, n).prop_filter("distinct profiles", |v| {
                (1..v.len()).all(|i| !v[..i].contains(&v[i]))
            }),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn commutant_of_rotated_separable_potential((seed, which) in case()) {
        let q = rotation(&seed);
        let n = q.rows();
        let p = rotated_separable(&q, &which);
        let cfg = CommutantConfig::for_dim(n);
        let comm = compute_commutant(&p, &cfg).unwrap();

        // Q diag(d) Qᵀ commutes with every Hessian and must lie in the span.
        let d: Vec<f64> = (0..n).map(|k| 1.0 + k as f64).collect();
        let a = q.matmul(&Matrix::diag(&d)).matmul(&q.transpose());
        prop_assert!(comm.basis.projection_residual(&a) <= 1e-8, "dim {} res {:e} {}", comm.basis.basis.len(), comm.basis.projection_residual(&a), p.render());

        // Soundness at 50 fresh points.
        let fresh = sample_points(&cfg.bounds, 50, 1234).unwrap();
        for x in &fresh.points {
            let h = p.hessian(x).unwrap();
            for b in &comm.basis.basis {
                prop_assert!(commutator(&h, b).frobenius_norm() <= 1e-8 * (1.0 + h.frobenius_norm()));
            }
        }

        // Selection, frame and extraction recover the profiles up to sign and order.
        let center = commutant_center(&comm.basis.basis, 1e-8);
        let element = select_generic_element(&center, 42, 1e-8).unwrap();
        let (kin, _) = positive_kinetic(&element);
        let frame = build_frame(&kin, 1e-8).unwrap();
        prop_assert!(frame.orthogonality_residual() <= 1e-12);
        let probe = [0.3, -0.2, 0.7, 0.1];
        let back = frame.from_spectral(&frame.to_spectral(&probe[..n]));
        for (a, b) in back.iter().zip(&probe[..n]) {
            prop_assert!((a - b).abs() <= 1e-14);
        }

        let pts: Vec<Vec<f64>> = comm.samples.points.iter().map(|x| frame.to_spectral(x)).collect();
        let sep_cfg = SeparationConfig { bounds: cfg.bounds.clone(), seed: 9, sep_tol: 1e-8, recon_tol: 1e-8 };
        let report = separate(&p, &frame, &pts, &sep_cfg).unwrap();
        prop_assert_eq!(report.mode, Mode::Full);
        let blocks = report.blocks.unwrap();
        let profiles = full_separation(&blocks, &SampleBox::cube(n, -1.0, 1.0).unwrap()).unwrap();
        for pr in &profiles {
            let col = frame.rotation().column(pr.index);
            // Which original axis, and with what sign, this spectral axis is.
            let dots: Vec<f64> = (0..n).map(|k| (0..n).map(|i| q[(i, k)] * col[i]).sum()).collect();
            let k = (0..n).max_by(|&a, &b| dots[a].abs().total_cmp(&dots[b].abs())).unwrap();
            let s = dots[k].signum();
            let f0 = profile_value(which[k], 0.0);
            for &(xi, f) in pr.grid.iter().step_by(37) {
                let want = profile_value(which[k], s * xi) - f0;
                prop_assert!((f - want).abs() <= 1e-9, "{} vs {}", f, want);
            }
        }

        // ∇Ũ = A∇U through the line integral.
        let companion = CompanionPotential::new(p.clone(), kin.clone());
        let x = &fresh.points[0];
        let h = 1e-5;
        let exact = kin.matvec(&p.gradient(x).unwrap());
        for i in 0..n {
            let mut up = x.clone();
            up[i] += h;
            let mut down = x.clone();
            down[i] -= h;
            let fd = (companion.straight(&up).unwrap() - companion.straight(&down).unwrap()) / (2.0 * h);
            prop_assert!((fd - exact[i]).abs() <= 1e-7 * (1.0 + exact[i].abs()));
        }
    }
}

#[test]
fn coupled_potential_is_not_separated_in_a_fixed_frame() {
    let p = parse("0.5*(q1^2 + q2^2) + q1^2*q2 + (1/3)*q2^3 + 0.3*q1^3", &["q1", "q2"]).unwrap();
    let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
    let frame = build_frame(&a, 1e-8).unwrap();
    let bounds = SampleBox::cube(2, -1.0, 1.0).unwrap();
    let pts: Vec<Vec<f64>> = sample_points(&bounds, 20, 3).unwrap().points.iter().map(|x| frame.to_spectral(x)).collect();
    let cfg = SeparationConfig { bounds, seed: 3, sep_tol: 1e-8, recon_tol: 1e-8 };
    let r = separate(&p, &frame, &pts, &cfg).unwrap();
    assert!(!r.verdict.separated);
    assert_eq!(r.mode, Mode::None);
    assert!(r.verdict.residual > 1e-2);
}
