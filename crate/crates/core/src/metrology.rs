//! Metrological figures of merit assembled from backend observables.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::Dimension;
use crate::report::{Estimate, ObservableReport};

/// Upper critical dimension of the transverse-field Ising QPT.
pub const UPPER_CRITICAL_DIMENSION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeezing {
    pub xi_r_sq: Estimate,
    /// |⟨J^x⟩| below three of its standard errors.
    pub division_hazard: bool,
}

/// ξ_R² = N·Var(J^y)/⟨J^x⟩² with first-order error propagation.
pub fn squeezing_parameter(jx_mean: Estimate, var_jy: Estimate, n: usize) -> Result<Squeezing> {
    let x = jx_mean.value;
    if x == 0.0 || !x.is_finite() {
        return Err(ModelError::Numerical("squeezing parameter undefined for <J^x> = 0".into()));
    }
    let n = n as f64;
    let value = n * var_jy.value / (x * x);
    let d_var = n / (x * x) * var_jy.error;
    let d_x = 2.0 * n * var_jy.value / (x * x * x).abs() * jx_mean.error;
    Ok(Squeezing {
        xi_r_sq: Estimate::new(value, d_var.hypot(d_x)),
        division_hazard: x.abs() < 3.0 * jx_mean.error,
    })
}

/// χ² = N/QFI.
pub fn chi_squared(qfi: Estimate, n: usize) -> Estimate {
    let n = n as f64;
    if qfi.value == 0.0 {
        return Estimate::new(f64::INFINITY, 0.0);
    }
    Estimate::new(n / qfi.value, n * qfi.error / (qfi.value * qfi.value))
}

/// Quantum Cramér–Rao bound (δφ)² ≥ 1/(k·QFI) for k repetitions.
pub fn cramer_rao(k: usize, qfi: f64) -> f64 {
    1.0 / (k as f64 * qfi)
}

/// Lower bound ⟨J^x⟩²/(4 Var(J^z)) on Var(J^y).
pub fn heisenberg_lower_bound(jx_mean: f64, var_jz: f64) -> f64 {
    if var_jz.is_infinite() {
        return 0.0;
    }
    jx_mean * jx_mean / (4.0 * var_jz)
}

/// Admissible interval [4 QV/N, 12 QV/N] for χ^{-2}.
pub fn qv_sandwich(qv: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    (4.0 * qv / n, 12.0 * qv / n)
}

/// Default correlation-function exponent η per dimension.
pub fn default_eta(d: Dimension) -> f64 {
    match d {
        Dimension::Finite(1) => 0.25,
        Dimension::Finite(2) => 0.0364,
        _ => 0.0,
    }
}

/// ζ = (1 − η)/min(d, d_c).
pub fn zeta_prediction(d: Dimension, eta: f64) -> f64 {
    let d_eff = d.finite().unwrap_or(UPPER_CRITICAL_DIMENSION).min(UPPER_CRITICAL_DIMENSION);
    (1.0 - eta) / d_eff as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    pub eta: f64,
    pub z_dyn: f64,
    pub d_c: usize,
    pub zeta: f64,
    /// Fitted squeezing exponent with its standard error.
    pub zeta_prime: Option<(f64, f64)>,
}

impl ScalingExponents {
    pub fn predicted(d: Dimension) -> Self {
        let eta = default_eta(d);
        ScalingExponents { eta, z_dyn: 1.0, d_c: UPPER_CRITICAL_DIMENSION, zeta: zeta_prediction(d, eta), zeta_prime: None }
    }

    pub fn with_fit(mut self, exponent: f64, error: f64) -> Self {
        self.zeta_prime = Some((exponent, error));
        self
    }
}

/// 10·log10(x).
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub sigma: f64,
}

/// Checks ξ^{-2} ≤ χ^{-2} ≤ 12 QV/N, 4 QV/N ≤ χ^{-2} (χ when available), ξ^{-2} ≤ 12 QV/N
/// and the Heisenberg product, allowing `k` combined standard errors plus a relative slack.
pub fn check_inequality_chain(r: &ObservableReport, k: f64, rel_tol: f64) -> Vec<Violation> {
    let n = r.n_sites as f64;
    let mut out = Vec::new();
    let mut le = |relation: &'static str, a: Estimate, b: Estimate| {
        let sigma = a.error.hypot(b.error);
        let scale = a.value.abs().max(b.value.abs());
        if a.value > b.value + k * sigma + rel_tol * scale {
            out.push(Violation { relation, lhs: a.value, rhs: b.value, sigma });
        }
    };
    let xi_inv = r.inverse_xi_sq();
    let qv_lo = Estimate::new(4.0 * r.qv_jz.value / n, 4.0 * r.qv_jz.error / n);
    let qv_hi = Estimate::new(12.0 * r.qv_jz.value / n, 12.0 * r.qv_jz.error / n);
    if let Some(chi_inv) = r.inverse_chi_sq() {
        le("xi^-2 <= chi^-2", xi_inv, chi_inv);
        le("chi^-2 <= 12 QV/N", chi_inv, qv_hi);
        le("4 QV/N <= chi^-2", qv_lo, chi_inv);
    }
    le("xi^-2 <= 12 QV/N", xi_inv, qv_hi);
    let bound = r.jx_mean.value * r.jx_mean.value / 4.0;
    let bound_err = (r.jx_mean.value * r.jx_mean.error / 2.0).abs();
    let prod = r.var_jy.value * r.var_jz.value;
    let prod_err = (r.var_jy.error * r.var_jz.value).hypot(r.var_jz.error * r.var_jy.value);
    le("<J^x>^2/4 <= Var(J^y) Var(J^z)", Estimate::new(bound, bound_err), Estimate::new(prod, prod_err));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_state_is_unsqueezed() {
        let n = 40;
        let s = squeezing_parameter(Estimate::exact(20.0), Estimate::exact(10.0), n).unwrap();
        assert!((s.xi_r_sq.value - 1.0).abs() < 1e-15);
        assert_eq!(s.xi_r_sq.error, 0.0);
        let zero = squeezing_parameter(Estimate::exact(3.0), Estimate::exact(0.0), 8).unwrap();
        assert_eq!(zero.xi_r_sq.value, 0.0);
        assert!(squeezing_parameter(Estimate::exact(0.0), Estimate::exact(1.0), 8).is_err());
    }

    #[test]
    fn division_hazard() {
        let s = squeezing_parameter(Estimate::new(0.1, 0.05), Estimate::exact(1.0), 4).unwrap();
        assert!(s.division_hazard);
    }

    #[test]
    fn chi_and_cramer_rao() {
        assert_eq!(chi_squared(Estimate::exact(50.0), 50).value, 1.0);
        assert!((cramer_rao(1, 100.0 * 100.0) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn heisenberg_bound() {
        assert_eq!(heisenberg_lower_bound(5.0, 2.5), 2.5);
        assert_eq!(heisenberg_lower_bound(5.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn sandwich() {
        assert_eq!(qv_sandwich(0.0, 10), (0.0, 0.0));
        assert_eq!(qv_sandwich(2.5, 10), (1.0, 3.0));
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_prediction(Dimension::Finite(1), 0.25) - 0.75).abs() < 1e-15);
        assert!((zeta_prediction(Dimension::Finite(2), 0.0364) - 0.4818).abs() < 1e-12);
        assert!((zeta_prediction(Dimension::Finite(3), 0.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((zeta_prediction(Dimension::Infinite, 0.0) - 1.0 / 3.0).abs() < 1e-15);
        let d2 = ScalingExponents::predicted(Dimension::Finite(2));
        let d3 = ScalingExponents::predicted(Dimension::Finite(3));
        assert!(d2.zeta > d3.zeta);
    }

    #[test]
    fn db_is_monotone() {
        let xs = [0.5, 1.0, 1.5, 3.0];
        let db: Vec<f64> = xs.iter().map(|&x| to_db(x)).collect();
        assert!(db.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(to_db(1.0), 0.0);
    }
}
