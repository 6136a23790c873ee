use quadsep_core::commutant::{sample_points, SampleBox};
use quadsep_core::models::{by_name, henon_heiles, r4_transcendental, sawada_kotera, HenonHeilesCase};
use quadsep_core::models::ModelSpec;
use std::collections::BTreeMap;

type Oracle = Box<dyn Fn(&[f64]) -> Vec<f64>>;

fn sk_gradient(q: &[f64]) -> Vec<f64> {
    let (x, y) = (q[0], q[1]);
    vec![x + 2.0 * x * y, y + x * x + y * y]
}

fn hh_gradient(q: &[f64], alpha: f64, beta: f64, a: f64, b: f64) -> Vec<f64> {
    let n = q.len();
    let z = q[n - 1];
    let t: f64 = q[..n - 1].iter().map(|x| x * x).sum();
    let mut g: Vec<f64> = q[..n - 1].iter().map(|x| alpha * x + 2.0 * a * z * x).collect();
    g.push(beta * z + a * t + 3.0 * b * z * z);
    g
}

fn r4_gradient(q: &[f64]) -> Vec<f64> {
    vec![
        q[0].exp() * q[1].sin() + q[2],
        q[0].exp() * q[1].cos() + q[3],
        1.0 / (1.0 + q[2] * q[2]) + q[0],
        2.0 * q[3] / (1.0 + q[3] * q[3]) + q[1],
    ]
}

fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol * (1.0 + w.abs()), "{got:?} vs {want:?}");
    }
}

#[test]
fn built_in_gradients_match_hand_derivatives_and_differences() {
    let hh = [(2, 1.0, 1.0, 1.0, -1.0 / 3.0), (3, 0.5, 2.0, 0.0, 1.0), (4, 1.0, 16.0, 1.0, 6.0)];
    let mut cases: Vec<(ModelSpec, Oracle)> = vec![
        (sawada_kotera(), Box::new(sk_gradient)),
        (r4_transcendental(), Box::new(r4_gradient)),
    ];
    for (n, al, be, a, b) in hh {
        cases.push((henon_heiles(n, al, be, a, b).unwrap(), Box::new(move |q| hh_gradient(q, al, be, a, b))));
    }
    for (model, oracle) in &cases {
        let n = model.dim();
        let pts = sample_points(&SampleBox::cube(n, -1.0, 1.0).unwrap(), 20, 17).unwrap();
        for q in &pts.points {
            let g = model.potential.gradient(q).unwrap();
            assert_close(&g, &oracle(q), 1e-14);
            assert_close(&model.potential.fd_gradient(q, 1e-5).unwrap(), &g, 1e-8);
        }
    }
}

#[test]
fn henon_heiles_defaults_and_lookup() {
    let m = by_name("henon-heiles", &BTreeMap::new()).unwrap();
    assert_eq!(m.dim(), 2);
    assert_eq!(m.params["b"], -1.0 / 3.0);
    let mut p = BTreeMap::new();
    p.insert("n".to_string(), 2.5);
    assert!(by_name("henon-heiles", &p).is_err());
    assert!(henon_heiles(1, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(henon_heiles(2, f64::NAN, 1.0, 1.0, 1.0).is_err());
}

#[test]
fn case_classification() {
    use HenonHeilesCase::*;
    for (a, b, want) in [(0.0, 0.0, Quadratic), (1.0, 0.0, I), (0.0, -2.0, II), (1.0, 1.0, III), (-0.5, 6.0, III)] {
        assert_eq!(HenonHeilesCase::classify(a, b), want, "a = {a}, b = {b}");
    }
}
