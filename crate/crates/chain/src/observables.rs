//! Assembly of chain results into the shared report.

use tfim_core::metrology::{chi_squared, squeezing_parameter};
use tfim_core::{Estimate, Flag, ObservableBackend, ObservableReport};

use crate::correlators::{transverse_magnetization, var_jy, var_jz};
use crate::dynamic::{qfi_from_dsf, qv_jz, QfiParams};
use crate::error::Result;
use crate::solution::{solve_chain, FermionSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    /// Skip the real-time QFI integral at T > 0 (QFI is then reported as absent).
    pub compute_qfi: bool,
    pub qfi: QfiParams,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { compute_qfi: true, qfi: QfiParams::default() }
    }
}

pub fn chain_observables(sol: &FermionSolution, options: &ChainOptions) -> Result<ObservableReport> {
    let n = sol.n;
    let jx = transverse_magnetization(sol);
    let vy = var_jy(sol);
    let vz = var_jz(sol);
    let qv = qv_jz(sol)?;
    let mut flags = Vec::new();
    if qv.degenerate_ground {
        flags.push(Flag::DegenerateGround);
    }
    if !qv.converged {
        flags.push(Flag::QuadratureUnconverged);
    }
    let qfi = if sol.temperature == 0.0 {
        Some(Estimate::exact(4.0 * vz))
    } else if options.compute_qfi {
        let q = qfi_from_dsf(sol, &options.qfi)?;
        if q.truncated {
            flags.push(Flag::TruncatedWindow);
        }
        if q.ill_conditioned {
            flags.push(Flag::IllConditioned);
        }
        Some(Estimate::new(q.qfi, q.error))
    } else {
        None
    };
    let xi = match squeezing_parameter(Estimate::exact(jx), Estimate::exact(vy), n) {
        Ok(s) => s.xi_r_sq,
        Err(_) => {
            flags.push(Flag::DivisionHazard);
            Estimate::exact(f64::INFINITY)
        }
    };
    Ok(ObservableReport {
        n_sites: n,
        g: sol.g,
        temperature: sol.temperature,
        jx_mean: Estimate::exact(jx),
        var_jy: Estimate::exact(vy),
        var_jz: Estimate::exact(vz),
        qv_jz: Estimate::new(qv.qv, qv.quadrature_error),
        qfi_jz: qfi,
        xi_r_sq: xi,
        chi_sq: qfi.map(|q| chi_squared(q, n)),
        energy: Some(Estimate::exact(sol.energy())),
        flags,
    })
}

/// Open chain of fixed length evaluated by the free-fermion solution.
#[derive(Debug, Clone)]
pub struct ChainBackend {
    pub n: usize,
    pub options: ChainOptions,
}

impl ChainBackend {
    pub fn new(n: usize) -> Self {
        ChainBackend { n, options: ChainOptions::default() }
    }
}

impl ObservableBackend for ChainBackend {
    fn name(&self) -> &str {
        "chain"
    }

    fn observables(&self, g: f64, temperature: f64) -> std::result::Result<ObservableReport, String> {
        let sol = solve_chain(self.n, g, temperature).map_err(|e| e.to_string())?;
        chain_observables(&sol, &self.options).map_err(|e| e.to_string())
    }
}
