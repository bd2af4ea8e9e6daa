//! Jordan–Wigner solution of the open transverse-field Ising chain
//! H = −J Σ S^z_i S^z_{i+1} − Γ Σ S^x_i.
//!
//! Majoranas a_{o,i} = S_i σ^z_i and a_{e,i} = S_i σ^y_i with the string
//! S_i = Π_{l<i} σ^x_l give σ^x_i = i a_{o,i} a_{e,i} and
//! σ^z_i σ^z_{i+1} = i a_{e,i} a_{o,i+1}, so H = (i/2) a_oᵀ M a_e with
//! M = −Γ·1 + (J/2)·(subdiagonal). The SVD M = Φ Λ Ψᵀ yields the modes.

use faer::Mat;

use crate::error::{ChainError, Result};
use crate::pfaffian::Square;

#[derive(Debug, Clone)]
pub struct FermionSolution {
    pub n: usize,
    pub g: f64,
    pub coupling: f64,
    pub temperature: f64,
    /// Single-particle energies Λ_k ≥ 0, ascending.
    pub energies: Vec<f64>,
    /// Φ_{ik}: odd Majoranas a_{o,i} = Σ_k Φ_{ik} b_{o,k}.
    pub phi: Square<f64>,
    /// Ψ_{ik}: even Majoranas a_{e,i} = Σ_k Ψ_{ik} b_{e,k}.
    pub psi: Square<f64>,
    /// tanh(βΛ_k/2), equal to 1 at T = 0.
    pub occupation: Vec<f64>,
}

/// Diagonalizes the open chain of `n` spins at field ratio g = Γ/J and temperature T (units of J = 1).
pub fn solve_chain(n: usize, g: f64, temperature: f64) -> Result<FermionSolution> {
    solve_chain_with_coupling(n, 1.0, g, temperature)
}

pub fn solve_chain_with_coupling(n: usize, coupling: f64, g: f64, temperature: f64) -> Result<FermionSolution> {
    if n < 2 {
        return Err(ChainError::InvalidInput(format!("chain needs at least 2 sites, got {n}")));
    }
    if !(g >= 0.0) || !(temperature >= 0.0) || !(coupling > 0.0) {
        return Err(ChainError::InvalidInput(format!("need J > 0, g >= 0, T >= 0 (J={coupling}, g={g}, T={temperature})")));
    }
    let field = g * coupling;
    let m = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            -field
        } else if i == j + 1 {
            coupling / 2.0
        } else {
            0.0
        }
    });
    let svd = m.svd().map_err(|e| ChainError::Svd(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap());
    let energies: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    let phi = Square::from_fn(n, |i, k| u[(i, order[k])]);
    let psi = Square::from_fn(n, |i, k| v[(i, order[k])]);
    let occupation = energies
        .iter()
        .map(|&e| if temperature == 0.0 { 1.0 } else { (e / (2.0 * temperature)).tanh() })
        .collect();
    Ok(FermionSolution { n, g, coupling, temperature, energies, phi, psi, occupation })
}

impl FermionSolution {
    pub fn beta(&self) -> f64 {
        if self.temperature == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.temperature
        }
    }

    /// Same modes at a different temperature.
    pub fn at_temperature(&self, temperature: f64) -> Self {
        let mut out = self.clone();
        out.temperature = temperature;
        out.occupation = self
            .energies
            .iter()
            .map(|&e| if temperature == 0.0 { 1.0 } else { (e / (2.0 * temperature)).tanh() })
            .collect();
        out
    }

    /// E_0 = −Σ_k Λ_k / 2.
    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.energies.iter().sum::<f64>()
    }

    /// Thermal energy Σ_k Λ_k (f_k − 1/2) = −Σ_k Λ_k tanh(βΛ_k/2)/2.
    pub fn energy(&self) -> f64 {
        -0.5 * self.energies.iter().zip(&self.occupation).map(|(e, t)| e * t).sum::<f64>()
    }

    /// All 2^N many-body energies, ascending (small N only).
    pub fn many_body_spectrum(&self) -> Vec<f64> {
        assert!(self.n <= 20, "many-body spectrum only for N <= 20");
        let e0 = self.ground_energy();
        let mut out: Vec<f64> = (0u32..1 << self.n)
            .map(|mask| e0 + (0..self.n).filter(|k| mask >> k & 1 == 1).map(|k| self.energies[k]).sum::<f64>())
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// G_{ij} with ⟨a_{o,i} a_{e,j}⟩ = i G_{ij}: G = Φ tanh(βΛ/2) Ψᵀ.
    pub fn odd_even_correlator(&self) -> Square<f64> {
        let n = self.n;
        Square::from_fn(n, |i, j| (0..n).map(|k| self.phi.get(i, k) * self.occupation[k] * self.psi.get(j, k)).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_band_at_large_field() {
        let sol = solve_chain(6, 1e4, 0.0).unwrap();
        for e in &sol.energies {
            assert!((e / 1e4 - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn modes_are_orthogonal() {
        let sol = solve_chain(7, 0.8, 0.3).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                let pp: f64 = (0..7).map(|i| sol.phi.get(i, a) * sol.phi.get(i, b)).sum();
                let qq: f64 = (0..7).map(|i| sol.psi.get(i, a) * sol.psi.get(i, b)).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((pp - want).abs() < 1e-12 && (qq - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_site_energies() {
        // M = [[-Γ, 0], [J/2, -Γ]]: Λ² are the eigenvalues of MᵀM
        let g = 0.7;
        let sol = solve_chain(2, g, 0.0).unwrap();
        let (a, b) = (g * g + 0.25, g * g);
        let c = 0.5 * g;
        let tr = a + b;
        let det = a * b - c * c;
        let disc = (tr * tr / 4.0 - det).sqrt();
        let want = [(tr / 2.0 - disc).sqrt(), (tr / 2.0 + disc).sqrt()];
        assert!((sol.energies[0] - want[0]).abs() < 1e-14);
        assert!((sol.energies[1] - want[1]).abs() < 1e-14);
    }

    #[test]
    fn rejects_single_site() {
        assert!(solve_chain(1, 1.0, 0.0).is_err());
    }
}
