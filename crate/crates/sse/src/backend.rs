//! Both representations combined into the shared observable record.

use tfim_core::metrology::squeezing_parameter;
use tfim_core::{Dimension, Estimate, Flag, ModelSpec, ObservableBackend, ObservableReport, SubsystemGeometry};

use crate::chain::Representation;
use crate::error::{Result, SseError};
use crate::run::{run_sse, QmcReport, SseParams};

/// Reports of the two runs behind one observable record.
#[derive(Debug, Clone, PartialEq)]
pub struct SseObservables {
    pub report: ObservableReport,
    pub x_basis: QmcReport,
    pub z_basis: QmcReport,
}

fn estimate(r: &QmcReport, name: &str) -> Estimate {
    r.get(name).map(|e| e.estimate()).unwrap_or_default()
}

/// ⟨J^x⟩, Var(J^y) from the x basis and Var(J^z), QV from the z basis.
pub fn sse_observables(spec: &ModelSpec, params: &SseParams, subsystems: &[SubsystemGeometry]) -> Result<SseObservables> {
    let (x, z) = rayon::join(
        || run_sse(spec, Representation::XBasis, params, subsystems),
        || run_sse(spec, Representation::ZBasis, params, &[]),
    );
    combine_reports(spec, x?, z?)
}

/// Merges finished x- and z-basis runs of `spec` into one observable record.
pub fn combine_reports(spec: &ModelSpec, x: QmcReport, z: QmcReport) -> Result<SseObservables> {
    if x.representation != Representation::XBasis || z.representation != Representation::ZBasis {
        return Err(SseError::InvalidSetup("expected one x-basis and one z-basis report".into()));
    }
    let n = spec.n_sites();
    let jx = estimate(&x, "jx_mean");
    let var_jy = estimate(&x, "var_jy");
    let qv = estimate(&z, "qv_jz");
    let mut flags: Vec<Flag> = Vec::new();
    for f in x.flags.iter().chain(&z.flags) {
        if !flags.contains(f) {
            flags.push(f.clone());
        }
    }
    let xi_r_sq = match x.xi_r_sq {
        Some(xi) => {
            let sq = squeezing_parameter(jx, var_jy, n)?;
            if sq.division_hazard {
                flags.push(Flag::DivisionHazard);
            }
            xi
        }
        None => {
            flags.push(Flag::DivisionHazard);
            Estimate::new(f64::INFINITY, 0.0)
        }
    };
    let inv_xi = 1.0 / xi_r_sq.value;
    let inv_xi_err = xi_r_sq.error / (xi_r_sq.value * xi_r_sq.value);
    let bound = 12.0 * qv.value / n as f64;
    let bound_err = 12.0 * qv.error / n as f64;
    if inv_xi - bound > 3.0 * inv_xi_err.hypot(bound_err) {
        flags.push(Flag::SandwichViolation);
    }
    let report = ObservableReport {
        n_sites: n,
        g: spec.g,
        temperature: spec.temperature,
        jx_mean: jx,
        var_jy,
        var_jz: estimate(&z, "var_jz"),
        qv_jz: qv,
        qfi_jz: None,
        xi_r_sq,
        chi_sq: None,
        energy: Some(estimate(&x, "energy")),
        flags,
    };
    Ok(SseObservables { report, x_basis: x, z_basis: z })
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of a grid point, derived from the base seed and (g, T).
pub fn point_seed(seed: u64, g: f64, temperature: f64) -> u64 {
    mix(seed ^ mix(g.to_bits()) ^ mix(temperature.to_bits()).rotate_left(17))
}

/// QMC backend on an L^d periodic lattice.
#[derive(Debug, Clone)]
pub struct SseBackend {
    pub d: u8,
    pub l: usize,
    pub params: SseParams,
    pub subsystems: Vec<SubsystemGeometry>,
}

impl SseBackend {
    pub fn new(d: u8, l: usize, params: SseParams) -> Self {
        SseBackend { d, l, params, subsystems: Vec::new() }
    }

    pub fn spec(&self, g: f64, temperature: f64) -> ModelSpec {
        ModelSpec::hypercubic(self.d, self.l, g, temperature)
    }
}

impl ObservableBackend for SseBackend {
    fn name(&self) -> &str {
        "qmc"
    }

    fn observables(&self, g: f64, temperature: f64) -> std::result::Result<ObservableReport, String> {
        let spec = self.spec(g, temperature);
        debug_assert!(matches!(spec.dimension, Dimension::Finite(_)));
        let params = SseParams { seed: point_seed(self.params.seed, g, temperature), ..self.params };
        sse_observables(&spec, &params, &self.subsystems).map(|o| o.report).map_err(|e| e.to_string())
    }
}
