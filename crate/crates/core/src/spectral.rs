//! Spectral (Lehmann) formulas for the quantum Fisher information and the quantum variance.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;

use crate::error::{ModelError, Result};

/// Energies closer than this (in units of J) are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Weight pairs with p_n + p_m below this are dropped from the QFI sum.
pub const WEIGHT_FLOOR: f64 = 1e-14;

/// Coefficient of |O_nm|² in the QFI: 2 (p_n − p_m)²/(p_n + p_m).
#[inline]
pub fn qfi_pair(pn: f64, pm: f64) -> f64 {
    let s = pn + pm;
    if s < WEIGHT_FLOOR {
        0.0
    } else {
        let d = pn - pm;
        2.0 * d * d / s
    }
}

/// Coefficient of |O_nm|² (n ≠ m) in (1/β)∫₀^β ⟨O(τ)O⟩ dτ: (p_n − p_m)/(β(E_m − E_n)),
/// or p_n for degenerate pairs. `beta = ∞` is the T = 0 limit of the single
/// lowest state, where no transition survives.
#[inline]
pub fn tau_average_pair(pn: f64, pm: f64, en: f64, em: f64, beta: f64) -> f64 {
    if beta.is_infinite() {
        return 0.0;
    }
    let de = em - en;
    if de.abs() < DEGENERACY_TOL {
        return pn;
    }
    let x = beta * de;
    if x.abs() < 1e-4 {
        // p_m = p_n e^{-x}
        pn * (1.0 - x / 2.0 + x * x / 6.0)
    } else {
        (pn - pm) / x
    }
}

/// Normalized Boltzmann weights of ascending `energies`; T = 0 puts all weight on the first state.
pub fn thermal_weights(energies: &[f64], temperature: f64) -> Vec<f64> {
    let mut w = vec![0.0; energies.len()];
    if energies.is_empty() {
        return w;
    }
    if temperature == 0.0 {
        w[0] = 1.0;
        return w;
    }
    let e0 = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let beta = 1.0 / temperature;
    let mut z = 0.0;
    for (wi, &e) in w.iter_mut().zip(energies) {
        *wi = (-(e - e0) * beta).exp();
        z += *wi;
    }
    w.iter_mut().for_each(|x| *x /= z);
    w
}

/// Eigen-decomposition of a Hermitian matrix together with thermal weights.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub energies: Vec<f64>,
    /// Columns are eigenvectors, ordered like `energies`.
    pub vectors: Mat<C64>,
    pub weights: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn from_hamiltonian(h: MatRef<'_, C64>, temperature: f64) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(ModelError::Numerical("Hamiltonian must be square".into()));
        }
        let eig = h.self_adjoint_eigen(Side::Lower).map_err(|e| ModelError::Eigen(format!("{e:?}")))?;
        let energies: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
        let vectors = eig.U().to_owned();
        let weights = thermal_weights(&energies, temperature);
        Ok(SpectralDecomposition { energies, vectors, weights })
    }

    pub fn from_real_hamiltonian(h: MatRef<'_, f64>, temperature: f64) -> Result<Self> {
        let eig = h.self_adjoint_eigen(Side::Lower).map_err(|e| ModelError::Eigen(format!("{e:?}")))?;
        let energies: Vec<f64> = eig.S().column_vector().iter().copied().collect();
        let u = eig.U();
        let vectors = Mat::<C64>::from_fn(u.nrows(), u.ncols(), |i, j| C64::new(u[(i, j)], 0.0));
        let weights = thermal_weights(&energies, temperature);
        Ok(SpectralDecomposition { energies, vectors, weights })
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.weights = thermal_weights(&self.energies, temperature);
        self
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// ⟨m|O|n⟩ for all pairs.
    pub fn matrix_elements(&self, o: MatRef<'_, C64>) -> Result<Mat<C64>> {
        if o.nrows() != self.dim() || o.ncols() != self.dim() {
            return Err(ModelError::Numerical(format!(
                "operator shape {}x{} does not match spectrum of dimension {}",
                o.nrows(),
                o.ncols(),
                self.dim()
            )));
        }
        Ok(self.vectors.adjoint() * o * &self.vectors)
    }

    /// Thermal expectation value Tr(ρ O) (real part).
    pub fn expectation(&self, o: MatRef<'_, C64>) -> Result<f64> {
        let m = self.matrix_elements(o)?;
        Ok(self.weights.iter().enumerate().map(|(n, p)| p * m[(n, n)].re).sum())
    }

    pub fn variance(&self, o: MatRef<'_, C64>) -> Result<f64> {
        let m = self.matrix_elements(o)?;
        let d = self.dim();
        let mut sq = 0.0;
        let mut mean = 0.0;
        for n in 0..d {
            let p = self.weights[n];
            if p == 0.0 {
                continue;
            }
            mean += p * m[(n, n)].re;
            for k in 0..d {
                sq += p * m[(k, n)].norm_sqr();
            }
        }
        Ok(sq - mean * mean)
    }
}

/// QFI = Σ_{nm} 2 (p_n − p_m)²/(p_n + p_m) |⟨m|O|n⟩|².
pub fn qfi_spectral(dec: &SpectralDecomposition, o: MatRef<'_, C64>) -> Result<f64> {
    let m = dec.matrix_elements(o)?;
    let d = dec.dim();
    let mut q = 0.0;
    for n in 0..d {
        for k in 0..d {
            q += qfi_pair(dec.weights[n], dec.weights[k]) * m[(k, n)].norm_sqr();
        }
    }
    Ok(q)
}

/// QV = ⟨O²⟩ − (1/β)∫₀^β ⟨O(τ)O⟩ dτ; T = 0 is the exact β → ∞ limit.
pub fn qv_spectral(dec: &SpectralDecomposition, o: MatRef<'_, C64>, temperature: f64) -> Result<f64> {
    let m = dec.matrix_elements(o)?;
    let d = dec.dim();
    let beta = if temperature == 0.0 { f64::INFINITY } else { 1.0 / temperature };
    let mut qv = 0.0;
    for n in 0..d {
        for k in 0..d {
            let a = m[(k, n)].norm_sqr();
            if a == 0.0 {
                continue;
            }
            let pn = dec.weights[n];
            let tau = if n == k { pn } else { tau_average_pair(pn, dec.weights[k], dec.energies[n], dec.energies[k], beta) };
            qv += a * (pn - tau);
        }
    }
    Ok(qv.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level(p: (f64, f64), c: f64) -> (SpectralDecomposition, Mat<C64>) {
        let dec = SpectralDecomposition {
            energies: vec![0.0, 1.0],
            vectors: Mat::<C64>::identity(2, 2),
            weights: vec![p.0, p.1],
        };
        let o = Mat::<C64>::from_fn(2, 2, |i, j| if i != j { C64::new(c, 0.0) } else { C64::new(0.0, 0.0) });
        (dec, o)
    }

    #[test]
    fn two_level_qfi() {
        let (dec, o) = two_level((0.9, 0.1), 0.7);
        let q = qfi_spectral(&dec, o.as_ref()).unwrap();
        assert!((q - 2.56 * 0.49).abs() < 1e-14);
    }

    #[test]
    fn pure_state_qfi_is_four_variance() {
        let (dec, o) = two_level((1.0, 0.0), 0.3);
        let q = qfi_spectral(&dec, o.as_ref()).unwrap();
        let v = dec.variance(o.as_ref()).unwrap();
        assert!((q - 4.0 * v).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed() {
        let (dec, o) = two_level((0.5, 0.5), 1.0);
        assert_eq!(qfi_spectral(&dec, o.as_ref()).unwrap(), 0.0);
    }

    #[test]
    fn conserved_operator_has_no_qv() {
        let h = Mat::<C64>::from_fn(3, 3, |i, j| C64::new(if i == j { i as f64 } else { 0.0 }, 0.0));
        let dec = SpectralDecomposition::from_hamiltonian(h.as_ref(), 0.7).unwrap();
        assert!(qv_spectral(&dec, h.as_ref(), 0.7).unwrap().abs() < 1e-14);
    }

    #[test]
    fn tau_average_is_continuous() {
        let (pn, en, beta) = (0.3f64, 0.2f64, 2.0f64);
        for de in [1e-3f64, 1e-5, 1e-7] {
            let pm = pn * (-beta * de).exp();
            let exact = (pn - pm) / (beta * de);
            assert!((tau_average_pair(pn, pm, en, en + de, beta) - exact).abs() < 1e-9);
        }
    }
}
