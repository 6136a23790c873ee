use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use quadsep_core::commutant::{self, SampleBox};
use quadsep_core::expr::{parse, ParsedPotential};
use quadsep_core::models::{self, ModelSpec};
use quadsep_core::{inverse, separation, spectral};

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSource {
    Model { name: String, params: BTreeMap<String, f64> },
    Inline { source: String, vars: Vec<String> },
}

impl PotentialSource {
    /// Parses the potential; built-in models also return their spec.
    pub fn load(&self) -> Result<(ParsedPotential, Option<ModelSpec>)> {
        match self {
            PotentialSource::Model { name, params } => {
                let m = models::by_name(name, params).map_err(|e| anyhow!("models: {e}"))?;
                Ok((m.potential.clone(), Some(m)))
            }
            PotentialSource::Inline { source, vars } => {
                let p = parse(source, vars).map_err(|e| anyhow!("expr: {e}"))?;
                Ok((p, None))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub commutant: f64,
    pub cluster: f64,
    pub separation: f64,
    pub reconstruction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            commutant: commutant::DEFAULT_REL_TOL,
            cluster: spectral::DEFAULT_CLUSTER_TOL,
            separation: separation::DEFAULT_SEP_TOL,
            reconstruction: separation::DEFAULT_RECON_TOL,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("commutant-tol", self.commutant),
            ("cluster-tol", self.cluster),
            ("sep-tol", self.separation),
            ("reconstruction tolerance", self.reconstruction),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsOptions {
    pub h: f64,
    pub steps: usize,
    /// Defaults to `0.1` in every coordinate.
    pub q0: Option<Vec<f64>>,
    /// Defaults to rest.
    pub v0: Option<Vec<f64>>,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions {
            h: 1e-3,
            steps: 10_000,
            q0: None,
            v0: None,
        }
    }
}

impl DynamicsOptions {
    pub fn initial(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let q0 = self.q0.clone().unwrap_or_else(|| vec![0.1; n]);
        let v0 = self.v0.clone().unwrap_or_else(|| vec![0.0; n]);
        if q0.len() != n || v0.len() != n {
            bail!("--q0 and --v0 need {n} components");
        }
        Ok((q0, v0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRequest {
    pub potential: PotentialSource,
    /// One `(lo, hi)` per coordinate, or a single pair for all of them.
    /// Empty means `[-1, 1]`.
    pub boxes: Vec<(f64, f64)>,
    /// Defaults to `max(20, n(n+1))`.
    pub samples: Option<usize>,
    pub seed: u64,
    pub tol: Tolerances,
    pub dynamics: DynamicsOptions,
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

impl AnalysisRequest {
    pub fn new(potential: PotentialSource) -> Self {
        AnalysisRequest {
            potential,
            boxes: Vec::new(),
            samples: None,
            seed: 42,
            tol: Tolerances::default(),
            dynamics: DynamicsOptions::default(),
            out: None,
            verbose: false,
        }
    }

    pub fn model(name: &str) -> Self {
        AnalysisRequest::new(PotentialSource::Model {
            name: name.to_string(),
            params: BTreeMap::new(),
        })
    }

    pub fn sample_box(&self, n: usize) -> Result<SampleBox> {
        let pairs: Vec<(f64, f64)> = match self.boxes.len() {
            0 => vec![(-1.0, 1.0); n],
            1 => vec![self.boxes[0]; n],
            k if k == n => self.boxes.clone(),
            k => bail!("--box given {k} times; expected 1 or {n}"),
        };
        let (lo, hi) = pairs.into_iter().unzip();
        SampleBox::new(lo, hi).map_err(|e| anyhow!("commutant: {e}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseRequest {
    pub matrix: Vec<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub zero_tol: f64,
    pub sep_tol: f64,
    pub boxes: Vec<(f64, f64)>,
    pub seed: u64,
    pub dynamics: DynamicsOptions,
    pub out: Option<PathBuf>,
}

impl InverseRequest {
    pub fn new(matrix: Vec<Vec<f64>>) -> Self {
        InverseRequest {
            matrix,
            alpha: None,
            beta: None,
            zero_tol: inverse::DEFAULT_ZERO_TOL,
            sep_tol: inverse::DEFAULT_SEPARABILITY_TOL,
            boxes: Vec::new(),
            seed: 42,
            dynamics: DynamicsOptions::default(),
            out: None,
        }
    }
}

/// Parses `lo:hi`.
pub fn parse_box(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| anyhow!("box '{s}' is not of the form lo:hi"))?;
    let lo: f64 = lo.trim().parse().with_context(|| format!("box lower bound '{lo}'"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("box upper bound '{hi}'"))?;
    Ok((lo, hi))
}

/// Parses `name=value`.
pub fn parse_param(s: &str) -> Result<(String, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("parameter '{s}' is not of the form name=value"))?;
    let v: f64 = v.trim().parse().with_context(|| format!("value of parameter '{k}'"))?;
    Ok((k.trim().to_string(), v))
}

/// Parses a comma-separated vector such as `0.1,0.2`.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("component '{t}' of '{s}'")))
        .collect()
}

/// Reads an `n×n` matrix stored as a JSON array of arrays.
pub fn read_matrix(path: &std::path::Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        bail!("{} must hold a nonempty square array of arrays", path.display());
    }
    Ok(rows)
}
