//! Weighted power-law fits y = a·x^b in log-log space.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub x: f64,
    pub y: f64,
    pub error: f64,
}

impl FitPoint {
    pub fn new(x: f64, y: f64, error: f64) -> Self {
        FitPoint { x, y, error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub exponent_error: f64,
    /// χ² per degree of freedom (weighted fits) or residual variance (unweighted).
    pub residual: f64,
    pub points: Vec<FitPoint>,
    /// False when the x values span less than one decade.
    pub spans_decade: bool,
}

pub const MIN_FIT_POINTS: usize = 4;

/// Least squares on (ln x, ln y). Points are weighted by (y/σ_y)² when every
/// point carries a positive error; otherwise the fit is unweighted and the
/// exponent error comes from the residual scatter.
pub fn fit_power_law(points: &[FitPoint]) -> Result<ScalingFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(ModelError::InvalidSpec(format!(
            "power-law fit needs at least {MIN_FIT_POINTS} points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !(p.x > 0.0) || !(p.y > 0.0) || !p.x.is_finite() || !p.y.is_finite()) {
        return Err(ModelError::InvalidSpec("power-law fit needs positive finite data".into()));
    }
    let weighted = points.iter().all(|p| p.error > 0.0);
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let w = if weighted { (p.y / p.error).powi(2) } else { 1.0 };
        let (u, v) = (p.x.ln(), p.y.ln());
        s += w;
        sx += w * u;
        sy += w * v;
        sxx += w * u * u;
        sxy += w * u * v;
    }
    let delta = s * sxx - sx * sx;
    if delta.abs() <= 1e-300 {
        return Err(ModelError::Numerical("degenerate x values in power-law fit".into()));
    }
    let b = (s * sxy - sx * sy) / delta;
    let a = (sxx * sy - sx * sxy) / delta;
    let mut chi2 = 0.0;
    for p in points {
        let w = if weighted { (p.y / p.error).powi(2) } else { 1.0 };
        let r = p.y.ln() - a - b * p.x.ln();
        chi2 += w * r * r;
    }
    let dof = (points.len() - 2) as f64;
    let reduced = chi2 / dof;
    let var_b = if weighted { s / delta * reduced.max(1.0) } else { s / delta * reduced };
    let (xmin, xmax) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    Ok(ScalingFit {
        amplitude: a.exp(),
        exponent: b,
        exponent_error: var_b.sqrt(),
        residual: reduced,
        points: points.to_vec(),
        spans_decade: xmax / xmin >= 10.0,
    })
}
