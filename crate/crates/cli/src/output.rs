use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use quadsep_core::separation::Profile;
use serde::Serialize;

use crate::pipeline::{AnalysisOutcome, InverseOutcome, Trace};
use crate::report::SimulationReport;

fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?).with_context(|| format!("writing {}", path.display()))
}

pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&trace.header)?;
    for row in &trace.rows {
        w.write_record(row.iter().map(|&v| number(v)))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn write_profile(path: &Path, profile: &Profile) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["xi", &format!("f_{}(xi)", profile.index + 1)])?;
    for &(xi, f) in &profile.grid {
        w.write_record([number(xi), number(f)])?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// `report.json`, `trace.csv` and one `f_k.csv` per profile.
pub fn write_analysis(dir: &Path, out: &AnalysisOutcome) -> Result<()> {
    ensure_dir(dir)?;
    write_json(&dir.join("report.json"), &out.report)?;
    write_trace(&dir.join("trace.csv"), &out.trace)?;
    for p in &out.profiles {
        write_profile(&dir.join(AnalysisOutcome::profile_file(p.index)), p)?;
    }
    Ok(())
}

/// `simulation.json`, `trace.csv` (canonical) and `trace_weighted.csv`.
pub fn write_simulation(dir: &Path, report: &SimulationReport, canonical: &Trace, weighted: &Trace) -> Result<()> {
    ensure_dir(dir)?;
    write_json(&dir.join("simulation.json"), report)?;
    write_trace(&dir.join("trace.csv"), canonical)?;
    write_trace(&dir.join("trace_weighted.csv"), weighted)
}

/// `inverse.json` and the weighted trajectory in `trace.csv`.
pub fn write_inverse(dir: &Path, out: &InverseOutcome) -> Result<()> {
    ensure_dir(dir)?;
    write_json(&dir.join("inverse.json"), &out.report)?;
    write_trace(&dir.join("trace.csv"), &out.trace)
}
