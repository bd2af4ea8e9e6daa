//! Large-S Holstein–Primakoff predictions and the strong-field expansion.

use std::f64::consts::FRAC_PI_2;

use tfim_core::{Dimension, ModelError, Result};

/// Leading-order HP quantities for N = 2S spins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpPrediction {
    pub n: usize,
    pub g: f64,
    /// Classical polar angle measured from the z axis.
    pub theta: f64,
    pub omega_sq: f64,
    pub prefactor: f64,
    /// Classical energy in units of J.
    pub classical_energy: f64,
    pub jx_mean: f64,
    pub var_jy: f64,
    pub var_jz: f64,
}

impl HpPrediction {
    /// 4 Var(J^y) Var(J^z) / ⟨J^x⟩².
    pub fn uncertainty_ratio(&self) -> f64 {
        4.0 * self.var_jy * self.var_jz / (self.jx_mean * self.jx_mean)
    }
}

/// Distance from g = 1 inside which the expansion is refused.
pub const CRITICAL_EXCLUSION: f64 = 1e-3;

pub fn hp_predictions(n: usize, g: f64) -> Result<HpPrediction> {
    if !(g >= 0.0) || !g.is_finite() || n == 0 {
        return Err(ModelError::InvalidSpec(format!("need N >= 1 and finite g >= 0, got N={n}, g={g}")));
    }
    if (g - 1.0).abs() < CRITICAL_EXCLUSION {
        return Err(ModelError::InvalidSpec(format!("HP expansion breaks down at the critical point (g = {g})")));
    }
    let s = n as f64 / 2.0;
    let (theta, omega_sq, prefactor) = if g <= 1.0 { (g.asin(), 1.0 - g * g, 1.0) } else { (FRAC_PI_2, 1.0 - 1.0 / g, g) };
    let sin = theta.sin();
    let cos = theta.cos();
    Ok(HpPrediction {
        n,
        g,
        theta,
        omega_sq,
        prefactor,
        classical_energy: -(s / 2.0) * (cos * cos + 2.0 * g * sin) + 0.25,
        jx_mean: s * sin,
        var_jy: s / 2.0,
        var_jz: sin * sin * s / 2.0,
    })
}

/// First-order strong-field squeezing ξ_R² = 1 − z/(4g) for coordination number z.
pub fn perturbative_xi(g: f64, z: f64) -> f64 {
    1.0 - z / (4.0 * g)
}

/// Strong-field squeezing for a lattice dimension; d = ∞ uses z = N with g → N g, i.e. 1 − 1/(4g).
pub fn perturbative_xi_for(dimension: Dimension, g: f64) -> f64 {
    match dimension {
        Dimension::Finite(d) => perturbative_xi(g, 2.0 * d as f64),
        Dimension::Infinite => perturbative_xi(g, 1.0),
    }
}
