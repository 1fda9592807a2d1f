//! Convergence, pollution and hp studies on the disk examples, with
//! CSV and SVG output.

pub mod config;
pub mod output;
pub mod runs;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Example, HpConfig, OutputConfig, StudyConfig};
pub use output::{
    emit_csv, emit_svg, parse_csv, read_csv, reference_line, render_svg, write_csv, write_elastic_csv, write_hp_csv,
    write_solution_csv, write_symbol_csv, CSV_HEADER,
};
pub use runs::{
    example_solution, hp_degree, run_convergence, run_hp_study, run_pollution, solve_example, space_for, HpRecord,
    HpStudy, PollutionReport, QUASI_OPTIMALITY_BOUND,
};

/// Errors below this are treated as round-off and excluded from fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Consecutive error ratios must be within this fraction of `2^rate` to
/// count as asymptotic.
pub const ASYMPTOTIC_TOLERANCE: f64 = 0.3;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("need at least 3 records, have {0}")]
    InsufficientData(usize),
    #[error("fewer than 3 records above the round-off floor")]
    RoundoffFloor,
    #[error("target N_lambda = {target} unreachable for p = {p}, k = {k} within level {max_level}")]
    TargetUnreachable { p: usize, k: f64, target: f64, max_level: usize },
    #[error("nothing to write")]
    Empty,
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error(transparent)]
    Fem(#[from] crate::femcore::FemError),
    #[error(transparent)]
    Exact(#[from] crate::exact::ExactError),
    #[error(transparent)]
    Boundary(#[from] crate::boundary::BoundaryError),
    #[error(transparent)]
    Solve(#[from] crate::linsolve::SolveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for StudyError {
    fn from(e: csv::Error) -> Self {
        StudyError::Csv(e.to_string())
    }
}

/// One solve of one example. Failed solves keep `error` set and NaN errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub example: String,
    pub p: usize,
    pub level: usize,
    pub h_max: f64,
    pub n_dof: usize,
    pub k: f64,
    pub n_lambda: f64,
    pub err_l2_rel: f64,
    pub err_energy_rel: f64,
    pub wall_time_ms: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

/// Which error column a rate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    L2,
    Energy,
}

impl ConvergenceRecord {
    pub fn error_value(&self, kind: ErrorKind) -> f64 {
        match kind {
            ErrorKind::L2 => self.err_l2_rel,
            ErrorKind::Energy => self.err_energy_rel,
        }
    }
}

/// Degrees of freedom per wavelength, `2 pi DOF^{1/d} / (k |Omega|^{1/d})`.
pub fn compute_n_lambda(dof: f64, k: f64, area: f64, d: u32) -> f64 {
    let inv = 1.0 / d as f64;
    2.0 * std::f64::consts::PI * dof.powf(inv) / (k * area.powf(inv))
}

/// Least-squares slope of `log err` against `log h` over the finest three
/// records; records sit in the order produced by refinement.
pub fn estimate_rate(records: &[ConvergenceRecord], kind: ErrorKind) -> Result<f64, StudyError> {
    if records.len() < 3 {
        return Err(StudyError::InsufficientData(records.len()));
    }
    let usable: Vec<&ConvergenceRecord> =
        records.iter().filter(|r| r.error_value(kind) >= ROUNDOFF_FLOOR && r.error.is_none()).collect();
    if usable.len() < 3 {
        return Err(StudyError::RoundoffFloor);
    }
    let mut last: Vec<&ConvergenceRecord> = usable.clone();
    last.sort_by(|a, b| b.h_max.total_cmp(&a.h_max));
    let tail = &last[last.len() - 3..];
    let pts: Vec<(f64, f64)> = tail.iter().map(|r| (r.h_max.ln(), r.error_value(kind).ln())).collect();
    Ok(slope(&pts))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Finest three consecutive records whose error ratios are within 30% of
/// `(h_coarse / h_fine)^expected`; the finest three if no window qualifies.
pub fn asymptotic_window(
    records: &[ConvergenceRecord],
    kind: ErrorKind,
    expected: f64,
) -> Vec<ConvergenceRecord> {
    let mut rs: Vec<ConvergenceRecord> = records
        .iter()
        .filter(|r| r.error_value(kind) >= ROUNDOFF_FLOOR && r.error.is_none())
        .cloned()
        .collect();
    rs.sort_by(|a, b| b.h_max.total_cmp(&a.h_max));
    if rs.len() <= 3 {
        return rs;
    }
    let ok = |a: &ConvergenceRecord, b: &ConvergenceRecord| {
        let want = (a.h_max / b.h_max).powf(expected);
        let got = a.error_value(kind) / b.error_value(kind);
        (got / want - 1.0).abs() <= ASYMPTOTIC_TOLERANCE
    };
    for end in (3..=rs.len()).rev() {
        let w = &rs[end - 3..end];
        if ok(&w[0], &w[1]) && ok(&w[1], &w[2]) {
            return w.to_vec();
        }
    }
    rs[rs.len() - 3..].to_vec()
}

/// Rate fitted over the asymptotic window.
pub fn asymptotic_rate(records: &[ConvergenceRecord], kind: ErrorKind, expected: f64) -> Result<f64, StudyError> {
    estimate_rate(&asymptotic_window(records, kind, expected), kind)
}
