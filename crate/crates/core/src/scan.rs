//! Phase-diagram scans over any observable backend.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::ExactSolver;
use crate::metrology::to_db;
use crate::model::ModelSpec;
use crate::report::ObservableReport;

/// A solver that maps (g, T) to observables for a fixed geometry.
pub trait ObservableBackend: Sync {
    fn name(&self) -> &str;
    fn observables(&self, g: f64, temperature: f64) -> Result<ObservableReport, String>;
}

/// Dense exact diagonalization as a backend.
#[derive(Debug, Clone)]
pub struct OracleBackend {
    pub spec: ModelSpec,
}

impl ObservableBackend for OracleBackend {
    fn name(&self) -> &str {
        "oracle"
    }

    fn observables(&self, g: f64, temperature: f64) -> Result<ObservableReport, String> {
        let spec = self.spec.with_g(g).with_temperature(temperature);
        ExactSolver::new(&spec).and_then(|s| s.observables(temperature)).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub g: f64,
    pub temperature: f64,
    pub report: Result<ObservableReport, String>,
    /// 10·log10 ξ_R^{-2}.
    pub inverse_xi_db: Option<f64>,
    /// ξ_R^{-2} ≤ 1: no squeezing.
    pub no_squeezing: Option<bool>,
}

impl ScanPoint {
    pub fn new(g: f64, temperature: f64, report: Result<ObservableReport, String>) -> Self {
        let inv = report.as_ref().ok().map(|r| r.inverse_xi_sq().value);
        ScanPoint {
            g,
            temperature,
            inverse_xi_db: inv.map(to_db),
            no_squeezing: inv.map(|x| x <= 1.0),
            report,
        }
    }
}

/// Evaluates `backend` on the grid g × T. Failures are recorded per point.
/// Rows are ordered by g, then T, independently of the execution order.
pub fn scan_phase_diagram(backend: &dyn ObservableBackend, g_grid: &[f64], t_grid: &[f64]) -> Vec<ScanPoint> {
    let jobs: Vec<(f64, f64)> = g_grid.iter().flat_map(|&g| t_grid.iter().map(move |&t| (g, t))).collect();
    jobs.par_iter().map(|&(g, t)| ScanPoint::new(g, t, backend.observables(g, t))).collect()
}
