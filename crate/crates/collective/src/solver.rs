//! Thermal observables of the infinite-range model summed over total-spin sectors.

use faer::{Mat, Side};
use rayon::prelude::*;
use tfim_core::metrology::{chi_squared, squeezing_parameter};
use tfim_core::spectral::{qfi_pair, tau_average_pair, DEGENERACY_TOL};
use tfim_core::{Estimate, Flag, ModelError, ObservableBackend, ObservableReport, Result};

use crate::sector::{sector_hamiltonian, sector_jx, SpinSectorBasis, SymTridiagonal};

/// Sectors whose total Boltzmann weight bound falls below this fraction are skipped.
pub const SECTOR_CUTOFF: f64 = 1e-12;

/// Dense eigen-solution of one sector.
#[derive(Debug, Clone)]
pub struct SectorSolution {
    pub basis: SpinSectorBasis,
    pub energies: Vec<f64>,
    pub vectors: Mat<f64>,
}

pub fn solve_sector(basis: SpinSectorBasis, g: f64, coupling: f64) -> Result<SectorSolution> {
    let h = sector_hamiltonian(basis, g, coupling).to_dense();
    let eig = h.self_adjoint_eigen(Side::Lower).map_err(|e| ModelError::Eigen(format!("{e:?}")))?;
    let energies = eig.S().column_vector().iter().copied().collect();
    Ok(SectorSolution { basis, energies, vectors: eig.U().to_owned() })
}

fn tridiagonal_apply(t: &SymTridiagonal, v: &[f64]) -> Vec<f64> {
    let d = t.dim();
    (0..d)
        .map(|i| {
            let mut y = t.diag[i] * v[i];
            if i > 0 {
                y += t.off[i - 1] * v[i - 1];
            }
            if i + 1 < d {
                y += t.off[i] * v[i + 1];
            }
            y
        })
        .collect()
}

/// Per-state expectation values inside a sector.
struct StateData {
    jx: f64,
    jx_sq: f64,
    jz_sq: f64,
}

fn state_data(basis: SpinSectorBasis, jx_op: &SymTridiagonal, v: &[f64]) -> StateData {
    let jv = tridiagonal_apply(jx_op, v);
    StateData {
        jx: v.iter().zip(&jv).map(|(a, b)| a * b).sum(),
        jx_sq: jv.iter().map(|x| x * x).sum(),
        jz_sq: v.iter().enumerate().map(|(m, x)| basis.m_value(m).powi(2) * x * x).sum(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    z: f64,
    energy: f64,
    jx: f64,
    jy_sq: f64,
    jz_sq: f64,
    qfi: f64,
    tau_avg: f64,
}

impl std::ops::Add for Sums {
    type Output = Sums;
    fn add(self, o: Sums) -> Sums {
        Sums {
            z: self.z + o.z,
            energy: self.energy + o.energy,
            jx: self.jx + o.jx,
            jy_sq: self.jy_sq + o.jy_sq,
            jz_sq: self.jz_sq + o.jz_sq,
            qfi: self.qfi + o.qfi,
            tau_avg: self.tau_avg + o.tau_avg,
        }
    }
}

/// Exact solver for N spins with all-to-all coupling, H = −(J/N)((J^z)² − N/4) − Γ J^x.
#[derive(Debug, Clone)]
pub struct CollectiveSolver {
    pub n: usize,
    pub g: f64,
    pub coupling: f64,
    sectors: Vec<SpinSectorBasis>,
    lowest: Vec<f64>,
    ground_energy: f64,
}

impl CollectiveSolver {
    pub fn new(n: usize, g: f64) -> Result<Self> {
        Self::with_coupling(n, g, 1.0)
    }

    pub fn with_coupling(n: usize, g: f64, coupling: f64) -> Result<Self> {
        if n == 0 || !(g >= 0.0) || !g.is_finite() || !(coupling > 0.0) {
            return Err(ModelError::InvalidSpec(format!("need N >= 1, g >= 0, J > 0 (N={n}, g={g}, J={coupling})")));
        }
        let sectors = SpinSectorBasis::all(n);
        let lowest: Vec<f64> = sectors
            .par_iter()
            .map(|&s| sector_hamiltonian(s, g, coupling).lowest_eigenvalue(1e-13 * coupling * n as f64))
            .collect();
        let ground_energy = lowest.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(CollectiveSolver { n, g, coupling, sectors, lowest, ground_energy })
    }

    pub fn sectors(&self) -> &[SpinSectorBasis] {
        &self.sectors
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    /// Sectors contributing at temperature T > 0 with their log-weight shift.
    fn kept_sectors(&self, beta: f64) -> (Vec<usize>, f64) {
        let e0 = self.ground_energy;
        let lead: Vec<f64> =
            self.sectors.iter().zip(&self.lowest).map(|(s, &e)| s.ln_degeneracy() - beta * (e - e0)).collect();
        let reference = lead.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let keep = (0..self.sectors.len())
            .filter(|&a| lead[a] + (self.sectors[a].dim() as f64).ln() - reference >= SECTOR_CUTOFF.ln())
            .collect();
        (keep, reference)
    }

    /// ln Z at temperature T > 0 (absolute energies).
    pub fn log_partition(&self, temperature: f64) -> Result<f64> {
        let beta = 1.0 / temperature;
        let (keep, reference) = self.kept_sectors(beta);
        let parts: Vec<f64> = keep
            .par_iter()
            .map(|&a| {
                let s = self.sectors[a];
                let sol = solve_sector(s, self.g, self.coupling)?;
                let ln_d = s.ln_degeneracy();
                Ok(sol.energies.iter().map(|&e| (ln_d - beta * (e - self.ground_energy) - reference).exp()).sum())
            })
            .collect::<Result<_>>()?;
        Ok(parts.iter().sum::<f64>().ln() + reference - beta * self.ground_energy)
    }

    pub fn observables(&self, temperature: f64) -> Result<ObservableReport> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(ModelError::InvalidSpec(format!("temperature must be non-negative, got {temperature}")));
        }
        if temperature == 0.0 {
            return self.ground_state_observables();
        }
        let beta = 1.0 / temperature;
        let e0 = self.ground_energy;
        let (keep, reference) = self.kept_sectors(beta);
        let sums = keep
            .par_iter()
            .map(|&a| {
                let s = self.sectors[a];
                let sol = solve_sector(s, self.g, self.coupling)?;
                let ln_d = s.ln_degeneracy();
                let w: Vec<f64> = sol.energies.iter().map(|&e| (ln_d - beta * (e - e0) - reference).exp()).collect();
                Ok(self.sector_sums(&sol, &w, beta))
            })
            .collect::<Result<Vec<Sums>>>()?
            .into_iter()
            .fold(Sums::default(), |a, b| a + b);
        let z = sums.z;
        let jz_sq = sums.jz_sq / z;
        Ok(self.report(
            temperature,
            sums.jx / z,
            sums.jy_sq / z,
            jz_sq,
            (jz_sq - sums.tau_avg / z).max(0.0),
            sums.qfi / z,
            sums.energy / z,
            Vec::new(),
        ))
    }

    fn sector_sums(&self, sol: &SectorSolution, w: &[f64], beta: f64) -> Sums {
        let basis = sol.basis;
        let d = basis.dim();
        let jx_op = sector_jx(basis);
        let s = basis.spin();
        let mut out = Sums::default();
        let live: Vec<usize> = (0..d).filter(|&k| w[k] > 0.0).collect();
        for &k in &live {
            let v: Vec<f64> = (0..d).map(|m| sol.vectors[(m, k)]).collect();
            let st = state_data(basis, &jx_op, &v);
            out.z += w[k];
            out.energy += w[k] * sol.energies[k];
            out.jx += w[k] * st.jx;
            out.jy_sq += w[k] * (s * (s + 1.0) - st.jx_sq - st.jz_sq);
            out.jz_sq += w[k] * st.jz_sq;
        }
        if live.is_empty() {
            return out;
        }
        // ⟨m|J^z|n⟩ for the states carrying weight against all states
        let mz = Mat::<f64>::from_fn(d, live.len(), |m, c| basis.m_value(m) * sol.vectors[(m, live[c])]);
        let elems = sol.vectors.transpose() * &mz;
        for (c, &k) in live.iter().enumerate() {
            for m in 0..d {
                let o2 = elems[(m, c)].powi(2);
                if o2 == 0.0 {
                    continue;
                }
                let (ek, em) = (sol.energies[k], sol.energies[m]);
                out.tau_avg += o2 * tau_average_pair(w[k], w[m], ek, em, beta);
                // each unordered pair with both weights live is visited twice
                out.qfi += o2 * qfi_pair(w[k], w[m]) * if w[m] > 0.0 { 1.0 } else { 2.0 };
                if w[m] == 0.0 {
                    out.tau_avg += o2 * tau_average_pair(w[m], w[k], em, ek, beta);
                }
            }
        }
        out
    }

    fn ground_state_observables(&self) -> Result<ObservableReport> {
        let e0 = self.ground_energy;
        let tol = DEGENERACY_TOL * self.coupling;
        let mut degenerate = 0.0;
        let mut ground_sector = None;
        for (a, s) in self.sectors.iter().enumerate() {
            if self.lowest[a] - e0 < tol {
                let h = sector_hamiltonian(*s, self.g, self.coupling);
                degenerate += h.count_below(e0 + tol) as f64 * s.ln_degeneracy().exp();
                ground_sector.get_or_insert(a);
            }
        }
        let basis = self.sectors[ground_sector.expect("some sector holds the ground state")];
        let sol = solve_sector(basis, self.g, self.coupling)?;
        let v = flip_symmetric_ground(&sol, tol);
        let st = state_data(basis, &sector_jx(basis), &v);
        let s = basis.spin();
        let mut flags = Vec::new();
        if degenerate > 1.5 {
            flags.push(Flag::DegenerateGround);
        }
        let jz: f64 = (0..basis.dim()).map(|m| basis.m_value(m) * v[m] * v[m]).sum();
        Ok(self.report(
            0.0,
            st.jx,
            s * (s + 1.0) - st.jx_sq - st.jz_sq,
            st.jz_sq,
            (st.jz_sq - jz * jz).max(0.0),
            4.0 * st.jz_sq,
            sol.energies[0],
            flags,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        temperature: f64,
        jx: f64,
        var_jy: f64,
        var_jz: f64,
        qv: f64,
        qfi: f64,
        energy: f64,
        mut flags: Vec<Flag>,
    ) -> ObservableReport {
        let n = self.n;
        let xi = match squeezing_parameter(Estimate::exact(jx), Estimate::exact(var_jy), n) {
            Ok(s) => s.xi_r_sq,
            Err(_) => {
                flags.push(Flag::DivisionHazard);
                Estimate::exact(f64::INFINITY)
            }
        };
        let qfi = Estimate::exact(qfi);
        ObservableReport {
            n_sites: n,
            g: self.g,
            temperature,
            jx_mean: Estimate::exact(jx),
            var_jy: Estimate::exact(var_jy),
            var_jz: Estimate::exact(var_jz),
            qv_jz: Estimate::exact(qv),
            qfi_jz: Some(qfi),
            xi_r_sq: xi,
            chi_sq: Some(chi_squared(qfi, n)),
            energy: Some(Estimate::exact(energy)),
            flags,
        }
    }
}

/// Lowest eigenvector, made even under M → −M when the lowest level is degenerate.
fn flip_symmetric_ground(sol: &SectorSolution, tol: f64) -> Vec<f64> {
    let d = sol.basis.dim();
    let col = |k: usize| -> Vec<f64> { (0..d).map(|m| sol.vectors[(m, k)]).collect() };
    let v0 = col(0);
    if d < 2 || sol.energies[1] - sol.energies[0] >= tol {
        return v0;
    }
    for k in 0..2 {
        let v = col(k);
        let sym: Vec<f64> = (0..d).map(|m| v[m] + v[d - 1 - m]).collect();
        let norm = sym.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return sym.into_iter().map(|x| x / norm).collect();
        }
    }
    v0
}

/// All observables of the infinite-range model at (N, g, T).
pub fn collective_observables(n: usize, g: f64, temperature: f64) -> Result<ObservableReport> {
    CollectiveSolver::new(n, g)?.observables(temperature)
}

/// Infinite-range model of fixed size as a scan backend.
#[derive(Debug, Clone)]
pub struct CollectiveBackend {
    pub n: usize,
}

impl ObservableBackend for CollectiveBackend {
    fn name(&self) -> &str {
        "collective"
    }

    fn observables(&self, g: f64, temperature: f64) -> std::result::Result<ObservableReport, String> {
        collective_observables(self.n, g, temperature).map_err(|e| e.to_string())
    }
}
