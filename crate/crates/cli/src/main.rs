use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use quadsep::output;
use quadsep::pipeline::{self, EXIT_ERROR};
use quadsep::request::{
    parse_box, parse_param, parse_vector, read_matrix, AnalysisRequest, DynamicsOptions, InverseRequest,
    PotentialSource, Tolerances,
};
use quadsep_core::{commutant, inverse, separation, spectral};

/// Spectral separation of natural Lagrangians through commuting kinetic matrices.
#[derive(Parser, Debug)]
#[command(name = "quadsep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a compatible kinetic matrix, separate the potential and validate the dynamics.
    Analyze(AnalyzeArgs),
    /// Integrate the canonical and weighted equations of motion.
    Simulate(AnalyzeArgs),
    /// Build separable potentials for a given constant kinetic matrix.
    Inverse(InverseArgs),
}

#[derive(Args, Debug)]
struct DynamicsArgs {
    /// Time step.
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Initial position, comma separated (default 0.1 in every coordinate).
    #[arg(long, allow_hyphen_values = true)]
    q0: Option<String>,
    /// Initial velocity, comma separated (default 0).
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
}

impl DynamicsArgs {
    fn options(&self) -> Result<DynamicsOptions> {
        Ok(DynamicsOptions {
            h: self.h,
            steps: self.steps,
            q0: self.q0.as_deref().map(parse_vector).transpose()?,
            v0: self.v0.as_deref().map(parse_vector).transpose()?,
        })
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Built-in model: sawada-kotera, henon-heiles or r4.
    #[arg(long, conflicts_with_all = ["potential", "vars"], required_unless_present = "potential")]
    model: Option<String>,
    /// Model parameter `name=value`; repeatable.
    #[arg(long = "param", requires = "model", allow_hyphen_values = true)]
    params: Vec<String>,
    /// Potential expression, e.g. "0.5*(x^2+y^2) + x^2*y".
    #[arg(long, requires = "vars")]
    potential: Option<String>,
    /// Comma-separated variable names in coordinate order.
    #[arg(long)]
    vars: Option<String>,
    /// Sampling interval `lo:hi`, once for all coordinates or once per coordinate.
    #[arg(long = "box", allow_hyphen_values = true)]
    boxes: Vec<String>,
    /// Number of sample points (default max(20, n(n+1))).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = commutant::DEFAULT_REL_TOL)]
    commutant_tol: f64,
    #[arg(long, default_value_t = spectral::DEFAULT_CLUSTER_TOL)]
    cluster_tol: f64,
    #[arg(long, default_value_t = separation::DEFAULT_SEP_TOL)]
    sep_tol: f64,
    #[command(flatten)]
    dynamics: DynamicsArgs,
    /// Output directory; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the singular values of the commutant system to stderr.
    #[arg(long)]
    verbose: bool,
}

impl AnalyzeArgs {
    fn request(&self) -> Result<AnalysisRequest> {
        let potential = match (&self.model, &self.potential, &self.vars) {
            (Some(name), None, None) => {
                let mut params = BTreeMap::new();
                for s in &self.params {
                    let (k, v) = parse_param(s)?;
                    params.insert(k, v);
                }
                PotentialSource::Model { name: name.clone(), params }
            }
            (None, Some(source), Some(vars)) => PotentialSource::Inline {
                source: source.clone(),
                vars: vars.split(',').map(|v| v.trim().to_string()).collect(),
            },
            _ => bail!("give exactly one of --model or --potential with --vars"),
        };
        let mut req = AnalysisRequest::new(potential);
        req.boxes = self.boxes.iter().map(|s| parse_box(s)).collect::<Result<_>>()?;
        req.samples = self.samples;
        req.seed = self.seed;
        req.tol = Tolerances {
            commutant: self.commutant_tol,
            cluster: self.cluster_tol,
            separation: self.sep_tol,
            ..Tolerances::default()
        };
        req.dynamics = self.dynamics.options()?;
        req.out = self.out.clone();
        req.verbose = self.verbose;
        Ok(req)
    }
}

#[derive(Args, Debug)]
struct InverseArgs {
    /// JSON file holding the kinetic matrix as an array of rows.
    #[arg(long)]
    matrix: PathBuf,
    /// Comma-separated α (default: the normalized sum of the α-space basis).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Comma-separated β (default 0).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, default_value_t = inverse::DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    #[arg(long, default_value_t = inverse::DEFAULT_SEPARABILITY_TOL)]
    sep_tol: f64,
    /// Interval `lo:hi` for the separability samples, once or once per coordinate
    #[arg(long = "box", allow_hyphen_values = true)]
    boxes: Vec<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    dynamics: DynamicsArgs,
    /// Output directory; without it the report goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

impl InverseArgs {
    fn request(&self) -> Result<InverseRequest> {
        let mut req = InverseRequest::new(read_matrix(&self.matrix)?);
        req.alpha = self.alpha.as_deref().map(parse_vector).transpose()?;
        req.beta = self.beta.as_deref().map(parse_vector).transpose()?;
        req.zero_tol = self.zero_tol;
        req.sep_tol = self.sep_tol;
        req.boxes = self.boxes.iter().map(|s| parse_box(s)).collect::<Result<_>>()?;
        req.seed = self.seed;
        req.dynamics = self.dynamics.options()?;
        req.out = self.out.clone();
        Ok(req)
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<i32> {
    let req = args.request()?;
    let out = pipeline::analyze(&req)?;
    if req.verbose {
        eprintln!("commutant singular values:");
        for (k, s) in out.report.commutant.singular_values.iter().enumerate() {
            eprintln!("  sigma_{} = {s:e}", k + 1);
        }
    }
    let r = &out.report;
    if let Some(e) = &r.dynamics.error {
        eprintln!("error: dynamics: {e}");
    }
    match &req.out {
        Some(dir) => {
            output::write_analysis(dir, &out)?;
            println!(
                "commutant dimension {}, mode {}, blocks {:?}",
                r.commutant.dimension, r.separation.mode, r.frame.block_sizes
            );
        }
        None => print!("{}", output::to_json(r)?),
    }
    Ok(out.exit_code())
}

fn simulate(args: &AnalyzeArgs) -> Result<i32> {
    let req = args.request()?;
    let (report, canonical, weighted) = pipeline::simulate(&req)?;
    match &req.out {
        Some(dir) => output::write_simulation(dir, &report, &canonical, &weighted)?,
        None => print!("{}", output::to_json(&report)?),
    }
    match &report.dynamics.error {
        Some(e) => {
            eprintln!("error: dynamics: {e}");
            Ok(EXIT_ERROR)
        }
        None => Ok(pipeline::EXIT_OK),
    }
}

fn inverse(args: &InverseArgs) -> Result<i32> {
    let req = args.request()?;
    let out = pipeline::run_inverse(&req)?;
    match &req.out {
        Some(dir) => {
            output::write_inverse(dir, &out)?;
            println!(
                "alpha-space dimension {}, forced {:?}, separable {}",
                out.report.alpha_space_dimension, out.report.forced_quadratic, out.report.separable
            );
        }
        None => print!("{}", output::to_json(&out.report)?),
    }
    Ok(pipeline::EXIT_OK)
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for a trivial commutant.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Inverse(a) => inverse(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
