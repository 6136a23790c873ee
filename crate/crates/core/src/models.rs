//! Built-in example potentials.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::expr::{parse, ParsedPotential};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    UnknownModel(String),
    UnknownParameter { model: &'static str, name: String },
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::UnknownModel(m) => write!(f, "unknown model '{m}' (expected one of {})", MODEL_NAMES.join(", ")),
            ModelError::UnknownParameter { model, name } => write!(f, "model {model} has no parameter '{name}'"),
            ModelError::InvalidParameter { name, value, reason } => write!(f, "parameter {name} = {value}: {reason}"),
        }
    }
}

impl core::error::Error for ModelError {}

pub const MODEL_NAMES: [&str; 3] = ["sawada-kotera", "henon-heiles", "r4"];

/// Separation class of the generalized Hénon–Heiles family under
/// configuration-dependent kinetic matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HenonHeilesCase {
    /// `a = b = 0`: uncoupled harmonic oscillators.
    Quadratic,
    /// `a ≠ 0, b = 0`.
    I,
    /// `a = 0, b ≠ 0`.
    II,
    /// `a ≠ 0, b ≠ 0`.
    III,
}

impl HenonHeilesCase {
    pub fn classify(a: f64, b: f64) -> Self {
        match (a != 0.0, b != 0.0) {
            (false, false) => HenonHeilesCase::Quadratic,
            (true, false) => HenonHeilesCase::I,
            (false, true) => HenonHeilesCase::II,
            (true, true) => HenonHeilesCase::III,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HenonHeilesCase::Quadratic => "quadratic: independent harmonic oscillators",
            HenonHeilesCase::I => "case I: integrable Henon-Heiles plus n-2 harmonic oscillators",
            HenonHeilesCase::II => "case II: harmonic oscillators only, trivial",
            HenonHeilesCase::III => "case III: non-separable, x_i coupled to x_+-",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: &'static str,
    pub params: BTreeMap<String, f64>,
    pub potential: ParsedPotential,
    pub description: String,
    /// A kinetic matrix proposed alongside the model, if any.
    pub kinetic: Option<Matrix>,
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        self.potential.dim()
    }
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("q{i}")).collect()
}

fn build(source: &str, n: usize) -> ParsedPotential {
    let names = names(n);
    parse(source, &names).expect("built-in model source parses")
}

/// `U = ½(q1² + q2²) + q1²q2 + ⅓q2³`.
pub fn sawada_kotera() -> ModelSpec {
    ModelSpec {
        name: "sawada-kotera",
        params: BTreeMap::new(),
        potential: build("0.5*(q1^2 + q2^2) + q1^2*q2 + (1/3)*q2^3", 2),
        description: "Sawada-Kotera cubic potential in the plane".to_string(),
        kinetic: None,
    }
}

fn literal(v: f64) -> String {
    format!("({v:?})")
}

/// `U = α/2 Σ_{i<n} q_i² + β/2 q_n² + a q_n Σ_{i<n} q_i² + b q_n³`, `n ≥ 2`.
pub fn henon_heiles(n: usize, alpha: f64, beta: f64, a: f64, b: f64) -> Result<ModelSpec, ModelError> {
    if n < 2 {
        return Err(ModelError::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "dimension must be at least 2",
        });
    }
    for (name, v) in [("alpha", alpha), ("beta", beta), ("a", a), ("b", b)] {
        if !v.is_finite() {
            return Err(ModelError::InvalidParameter { name, value: v, reason: "must be finite" });
        }
    }
    let transverse = (1..n).map(|i| format!("q{i}^2")).collect::<Vec<_>>().join(" + ");
    let source = format!(
        "0.5*{al}*({t}) + 0.5*{be}*q{n}^2 + {a}*q{n}*({t}) + {b}*q{n}^3",
        al = literal(alpha),
        be = literal(beta),
        a = literal(a),
        b = literal(b),
        t = transverse,
    );
    let mut params = BTreeMap::new();
    params.insert("n".to_string(), n as f64);
    params.insert("alpha".to_string(), alpha);
    params.insert("beta".to_string(), beta);
    params.insert("a".to_string(), a);
    params.insert("b".to_string(), b);
    Ok(ModelSpec {
        name: "henon-heiles",
        params,
        potential: build(&source, n),
        description: HenonHeilesCase::classify(a, b).label().to_string(),
        kinetic: None,
    })
}

/// `U = e^{q1} sin q2 + atan q3 + ln(1 + q4²) + q1q3 + q2q4` with the kinetic
/// matrix pairing `(q1, q3)` and `(q2, q4)`: ones on the diagonal and on
/// those couplings. That matrix has eigenvalues `(2, 2, 0, 0)`.
pub fn r4_transcendental() -> ModelSpec {
    let a = Matrix::from_rows(&[
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
    ])
    .expect("square literal");
    ModelSpec {
        name: "r4",
        params: BTreeMap::new(),
        potential: build("exp(q1)*sin(q2) + atan(q3) + ln(1 + q4^2) + q1*q3 + q2*q4", 4),
        description: "transcendental potential on R^4 with a singular proposed kinetic matrix".to_string(),
        kinetic: Some(a),
    }
}

/// Looks a model up by CLI name. Hénon–Heiles defaults to the classical
/// planar system `n = 2, α = β = 1, a = 1, b = −1/3`.
pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec, ModelError> {
    let reject_all = |model: &'static str| match params.keys().next() {
        Some(k) => Err(ModelError::UnknownParameter { model, name: k.clone() }),
        None => Ok(()),
    };
    match name {
        "sawada-kotera" => {
            reject_all("sawada-kotera")?;
            Ok(sawada_kotera())
        }
        "r4" => {
            reject_all("r4")?;
            Ok(r4_transcendental())
        }
        "henon-heiles" => {
            if let Some(k) = params.keys().find(|k| !["n", "alpha", "beta", "a", "b"].contains(&k.as_str())) {
                return Err(ModelError::UnknownParameter {
                    model: "henon-heiles",
                    name: k.clone(),
                });
            }
            let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
            let n = get("n", 2.0);
            if n.fract() != 0.0 || !(2.0..=64.0).contains(&n) {
                return Err(ModelError::InvalidParameter {
                    name: "n",
                    value: n,
                    reason: "dimension must be an integer between 2 and 64",
                });
            }
            henon_heiles(n as usize, get("alpha", 1.0), get("beta", 1.0), get("a", 1.0), get("b", -1.0 / 3.0))
        }
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigen;

    #[test]
    fn sawada_kotera_values() {
        let m = sawada_kotera();
        assert!((m.potential.value(&[1.0, 1.0]).unwrap() - 7.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.potential.value(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(m.potential.hessian(&[0.0, 0.0]).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn henon_heiles_values() {
        let m = henon_heiles(2, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((m.potential.value(&[1.0, 1.0]).unwrap() - 3.0).abs() < 1e-15);
        let m = henon_heiles(4, 2.0, 3.0, 0.0, 0.0).unwrap();
        let q = [0.5, -1.0, 2.0, 0.25];
        let want = 0.5 * (2.0 * (0.25 + 1.0 + 4.0) + 3.0 * 0.0625);
        assert!((m.potential.value(&q).unwrap() - want).abs() < 1e-14);
        assert!(henon_heiles(1, 1.0, 1.0, 1.0, 1.0).is_err());
        assert_eq!(m.potential.names()[3], "q4");
    }

    #[test]
    fn henon_heiles_negative_parameters() {
        let m = henon_heiles(3, -1.5, 1.0, -2.0, -1e-20).unwrap();
        let q = [0.3, 0.4, -0.5];
        let s = 0.09 + 0.16;
        let want = 0.5 * -1.5 * s + 0.5 * 0.25 - 2.0 * -0.5 * s + -1e-20 * -0.125;
        assert!((m.potential.value(&q).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn case_tags() {
        assert_eq!(HenonHeilesCase::classify(1.0, 1.0), HenonHeilesCase::III);
        assert_eq!(HenonHeilesCase::classify(1.0, 0.0), HenonHeilesCase::I);
        assert_eq!(HenonHeilesCase::classify(0.0, 2.0), HenonHeilesCase::II);
        assert_eq!(HenonHeilesCase::classify(0.0, 0.0), HenonHeilesCase::Quadratic);
        assert!(henon_heiles(3, 1.0, 1.0, 1.0, 1.0).unwrap().description.contains("non-separable"));
    }

    #[test]
    fn r4_model() {
        let m = r4_transcendental();
        assert_eq!(m.potential.value(&[0.0; 4]).unwrap(), 0.0);
        let e = sym_eigen(m.kinetic.as_ref().unwrap()).unwrap();
        let want = [0.0, 0.0, 2.0, 2.0];
        for (v, w) in e.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn lookup() {
        let mut p = BTreeMap::new();
        assert_eq!(by_name("sawada-kotera", &p).unwrap().dim(), 2);
        assert_eq!(by_name("henon-heiles", &p).unwrap().dim(), 2);
        p.insert("n".to_string(), 5.0);
        assert_eq!(by_name("henon-heiles", &p).unwrap().dim(), 5);
        assert!(by_name("sawada-kotera", &p).is_err());
        p.insert("n".to_string(), 2.5);
        assert!(by_name("henon-heiles", &p).is_err());
        p.clear();
        p.insert("gamma".to_string(), 1.0);
        assert!(matches!(by_name("henon-heiles", &p), Err(ModelError::UnknownParameter { .. })));
        assert!(matches!(by_name("kepler", &BTreeMap::new()), Err(ModelError::UnknownModel(_))));
    }
}
