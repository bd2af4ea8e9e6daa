//! Time-displaced correlators, quantum variance and quantum Fisher information of J^z.
//!
//! σ^z_i = i^i a_0 a_1 … a_{2i} in the interleaved Majorana labelling, so
//! ⟨σ^z_i(z) σ^z_j⟩ = i^{i+j} Pf(Q) with Q built from equal-time contractions
//! within each string and two-time contractions ⟨a_k(z) a_l⟩ across them.
//! Complex times z cover real time (z = t) and imaginary time (z = −iτ).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::correlators::{var_jz, MajoranaCorrelators};
use crate::error::{ChainError, Result};
use crate::pfaffian::{pfaffian_consistency, pfaffian_unchecked, Square};
use crate::quadrature::{integrate_gl, simpson};
use crate::solution::FermionSolution;

/// Pfaffian conditioning threshold on | |Pf|² − |det| | / |det|.
pub const CONDITIONING_TOL: f64 = 1e-6;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => I,
        2 => C64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// Majorana contractions at equal time and across a time displacement z.
#[derive(Debug, Clone)]
pub struct TwoTimeCorrelators {
    pub n: usize,
    pub z: C64,
    /// ⟨a_k a_l⟩ for k ≠ l.
    pub equal: Square<C64>,
    /// ⟨a_k(z) a_l⟩.
    pub displaced: Square<C64>,
}

impl TwoTimeCorrelators {
    pub fn new(sol: &FermionSolution, statics: &MajoranaCorrelators, z: C64) -> Self {
        let n = sol.n;
        let beta = sol.beta();
        // mode factors A_k = e^{−iεz}(1 − f_k), B_k = e^{iεz} f_k
        let (sum, diff): (Vec<C64>, Vec<C64>) = sol
            .energies
            .iter()
            .map(|&e| {
                let (a, b) = if beta.is_infinite() {
                    ((-I * e * z).exp(), C64::new(0.0, 0.0))
                } else {
                    let norm = 1.0 + (-beta * e).exp();
                    ((-I * e * z).exp() / norm, (I * e * z - beta * e).exp() / norm)
                };
                (a + b, a - b)
            })
            .unzip();
        let mode_sum = |u: &Square<f64>, v: &Square<f64>, f: &[C64], i: usize, j: usize| -> C64 {
            (0..n).map(|k| f[k] * (u.get(i, k) * v.get(j, k))).sum()
        };
        let mut displaced = Square::zeros(2 * n);
        for i in 0..n {
            for j in 0..n {
                let (o_i, e_i, o_j, e_j) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
                displaced.set(o_i, o_j, mode_sum(&sol.phi, &sol.phi, &sum, i, j));
                displaced.set(e_i, e_j, mode_sum(&sol.psi, &sol.psi, &sum, i, j));
                displaced.set(o_i, e_j, I * mode_sum(&sol.phi, &sol.psi, &diff, i, j));
                displaced.set(e_i, o_j, -I * mode_sum(&sol.psi, &sol.phi, &diff, i, j));
            }
        }
        let equal = Square::from_fn(2 * n, |k, l| I * statics.g.get(k, l));
        TwoTimeCorrelators { n, z, equal, displaced }
    }

    fn string_matrix(&self, i: usize, j: usize) -> Square<C64> {
        let (l1, l2) = (2 * i + 1, 2 * j + 1);
        let idx = |p: usize| if p < l1 { p } else { p - l1 };
        Square::from_fn(l1 + l2, |p, q| {
            if p == q {
                return C64::new(0.0, 0.0);
            }
            let (a, b, sign) = if p < q { (p, q, 1.0) } else { (q, p, -1.0) };
            let v = if b < l1 || a >= l1 { self.equal.get(idx(a), idx(b)) } else { self.displaced.get(a, idx(b)) };
            v * sign
        })
    }

    /// ⟨σ^z_i(z) σ^z_j⟩ and the Pfaffian conditioning measure (only when `check`).
    pub fn sigma_zz(&self, i: usize, j: usize, check: bool) -> (C64, f64) {
        let n = self.n;
        // reflection i → N−1−i is a symmetry; use the shorter strings
        let (i, j) = if i + j + 1 > 2 * n - 1 - i - j { (n - 1 - i, n - 1 - j) } else { (i, j) };
        let q = self.string_matrix(i, j);
        let cond_src = if check { Some(q.clone()) } else { None };
        let pf = pfaffian_unchecked(q);
        let cond = cond_src.map_or(0.0, |m| pfaffian_consistency(&m, pf));
        (i_pow(i + j) * pf, cond)
    }

    /// Σ_{ij} ⟨S^z_i(z) S^z_j⟩, with the worst conditioning seen.
    pub fn jz_autocorrelation(&self, check: bool) -> (C64, f64) {
        let n = self.n;
        // canonical pairs i ≤ j modulo reflection (i, j) → (N−1−j, N−1−i), with multiplicities
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i..n {
                let r = (n - 1 - j, n - 1 - i);
                if r < (i, j) {
                    continue;
                }
                let sym = if i == j { 1.0 } else { 2.0 };
                let refl = if r == (i, j) { 1.0 } else { 2.0 };
                pairs.push((i, j, sym * refl));
            }
        }
        let (total, cond) = pairs
            .par_iter()
            .map(|&(i, j, w)| {
                let (v, c) = self.sigma_zz(i, j, check && i + j + 2 >= n);
                (v * w, c)
            })
            .reduce(|| (C64::new(0.0, 0.0), 0.0), |a, b| (a.0 + b.0, a.1.max(b.1)));
        (total / 4.0, cond)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicCorrelation {
    pub value: C64,
    /// | |Pf|² − |det| | / |det| of the string matrix.
    pub conditioning: f64,
    pub ill_conditioned: bool,
}

/// ⟨S^z_i(t) S^z_j(0)⟩ at real time t.
pub fn dynamic_zz_correlation(sol: &FermionSolution, i: usize, j: usize, t: f64) -> Result<DynamicCorrelation> {
    complex_time_zz(sol, i, j, C64::new(t, 0.0))
}

/// ⟨S^z_i(z) S^z_j⟩ for complex z (z = −iτ for imaginary time).
pub fn complex_time_zz(sol: &FermionSolution, i: usize, j: usize, z: C64) -> Result<DynamicCorrelation> {
    if i >= sol.n || j >= sol.n {
        return Err(ChainError::InvalidInput(format!("site index out of range for N = {}", sol.n)));
    }
    let statics = MajoranaCorrelators::new(sol);
    let tt = TwoTimeCorrelators::new(sol, &statics, z);
    let (v, cond) = tt.sigma_zz(i, j, true);
    Ok(DynamicCorrelation { value: v / 4.0, conditioning: cond, ill_conditioned: cond > CONDITIONING_TOL })
}

/// C(z) = ⟨J^z(z) J^z⟩ on a list of times.
pub fn jz_correlation(sol: &FermionSolution, times: &[C64]) -> Vec<C64> {
    let statics = MajoranaCorrelators::new(sol);
    times.iter().map(|&z| TwoTimeCorrelators::new(sol, &statics, z).jz_autocorrelation(false).0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvEstimate {
    pub qv: f64,
    /// |QV(64 nodes) − QV(32 nodes)|.
    pub quadrature_error: f64,
    pub converged: bool,
    pub degenerate_ground: bool,
}

/// Gauss–Legendre nodes used on [0, β/2].
pub const QV_NODES: usize = 64;
/// Relative tolerance of the 64- vs 32-node comparison.
pub const QV_TOL: f64 = 1e-6;
/// Single-particle energies below this are treated as degenerate at T = 0.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// QV(J^z) = ⟨(J^z)²⟩ − (2/β) ∫_0^{β/2} ⟨J^z(−iτ) J^z⟩ dτ.
pub fn qv_jz(sol: &FermionSolution) -> Result<QvEstimate> {
    let statics = MajoranaCorrelators::new(sol);
    let g_tau = |tau: f64| TwoTimeCorrelators::new(sol, &statics, C64::new(0.0, -tau)).jz_autocorrelation(false).0.re;
    let c0 = var_jz(sol);
    let beta = sol.beta();
    if beta.is_infinite() {
        // pure lowest state: no transition survives the τ average
        let degenerate_ground = sol.energies[0] < DEGENERACY_TOL;
        return Ok(QvEstimate { qv: c0, quadrature_error: 0.0, converged: true, degenerate_ground });
    }
    let fine = 2.0 / beta * integrate_gl(QV_NODES, 0.0, beta / 2.0, g_tau);
    let coarse = 2.0 / beta * integrate_gl(QV_NODES / 2, 0.0, beta / 2.0, g_tau);
    let err = (fine - coarse).abs();
    Ok(QvEstimate {
        qv: (c0 - fine).max(0.0),
        quadrature_error: err,
        converged: err <= QV_TOL * c0.abs().max(1e-12),
        degenerate_ground: false,
    })
}

/// Controls for the real-time fluctuation–dissipation integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiParams {
    /// Largest time step in units of 1/J.
    pub max_step: f64,
    /// Window length in units of β.
    pub window_betas: f64,
    /// Tail bound relative to the result above which the window counts as truncated.
    pub truncation_tol: f64,
}

impl Default for QfiParams {
    fn default() -> Self {
        QfiParams { max_step: 0.05, window_betas: 12.0, truncation_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiEstimate {
    pub qfi: f64,
    /// Step-doubling estimate of the discretization error.
    pub error: f64,
    pub samples: usize,
    pub truncated: bool,
    pub ill_conditioned: bool,
}

/// FDT kernel K(t) = 2t / (β² sinh(πt/β)), the Fourier image of sech²(βω/2)/(2π).
pub fn fdt_kernel(t: f64, beta: f64) -> f64 {
    let x = PI * t / beta;
    if x < 1e-6 {
        2.0 / (PI * beta) * (1.0 - x * x / 6.0)
    } else if x > 700.0 {
        0.0
    } else {
        2.0 * t / (beta * beta * x.sinh())
    }
}

/// QFI(J^z) = 4 ∫ dω tanh²(βω/2) S(ω), evaluated in the time domain as
/// 4 C(0) − 8 ∫_0^∞ K(t) Re C(t) dt with C(t) = ⟨J^z(t) J^z⟩.
pub fn qfi_from_dsf(sol: &FermionSolution, params: &QfiParams) -> Result<QfiEstimate> {
    let beta = sol.beta();
    let c0 = var_jz(sol);
    if beta.is_infinite() {
        return Ok(QfiEstimate { qfi: 4.0 * c0, error: 0.0, samples: 0, truncated: false, ill_conditioned: false });
    }
    if !(params.max_step > 0.0) || !(params.window_betas > 0.0) {
        return Err(ChainError::InvalidInput("QFI window and step must be positive".into()));
    }
    let omega_max = 2.0 * sol.energies.last().copied().unwrap_or(1.0);
    let step = params.max_step.min(0.3 / omega_max.max(1e-12));
    let t_max = params.window_betas * beta;
    let mut m = ((t_max / step).ceil() as usize).max(64);
    m += (4 - m % 4) % 4;
    let h = t_max / m as f64;
    let statics = MajoranaCorrelators::new(sol);
    let samples: Vec<(f64, f64)> = (0..=m)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * h;
            let tt = TwoTimeCorrelators::new(sol, &statics, C64::new(t, 0.0));
            let (c, cond) = tt.jz_autocorrelation(k == m);
            (fdt_kernel(t, beta) * c.re, cond)
        })
        .collect();
    let f: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let cond = samples.iter().fold(0.0f64, |a, s| a.max(s.1));
    let fine = simpson(&f, h);
    let coarse: Vec<f64> = f.iter().step_by(2).copied().collect();
    let coarse = simpson(&coarse, 2.0 * h);
    let qfi = 4.0 * c0 - 8.0 * fine;
    // |C(t)| ≤ C(0) and ∫_T^∞ K ≤ K(T)(T + β/π)·β/(πT) for the tail beyond the window
    let tail = 8.0 * c0 * fdt_kernel(t_max, beta) * (t_max + beta / PI) * beta / (PI * t_max);
    Ok(QfiEstimate {
        qfi: qfi.max(0.0),
        error: 8.0 * (fine - coarse).abs() / 15.0,
        samples: m + 1,
        truncated: tail > params.truncation_tol * qfi.abs().max(1e-12),
        ill_conditioned: cond > CONDITIONING_TOL,
    })
}

/// Windowed real-time sampling for the dynamical structure factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsfWindow {
    pub t_max: f64,
    pub samples: usize,
    /// Gaussian window width σ_t.
    pub sigma: f64,
}

impl Default for DsfWindow {
    fn default() -> Self {
        DsfWindow { t_max: 40.0, samples: 4096, sigma: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureFactor {
    /// Frequencies in ascending order.
    pub omega: Vec<f64>,
    /// S(ω) = (1/2π) ∫ dt e^{iωt} C(t) w(t).
    pub s: Vec<f64>,
    pub truncated: bool,
}

impl StructureFactor {
    pub fn d_omega(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }

    /// 4 Σ tanh²(βω/2) S(ω) Δω.
    pub fn qfi(&self, beta: f64) -> f64 {
        let dw = self.d_omega();
        4.0 * self.omega.iter().zip(&self.s).map(|(&w, &s)| (beta * w / 2.0).tanh().powi(2) * s).sum::<f64>() * dw
    }
}

/// S(ω) of J^z from a Gaussian-windowed FFT of C(t) over [−t_max, t_max].
pub fn dynamical_structure_factor(sol: &FermionSolution, window: &DsfWindow) -> Result<StructureFactor> {
    if window.samples < 8 || !(window.t_max > 0.0) || !(window.sigma > 0.0) {
        return Err(ChainError::InvalidInput("DSF window needs t_max > 0, sigma > 0 and at least 8 samples".into()));
    }
    let m = window.samples;
    let dt = window.t_max / m as f64;
    let times: Vec<C64> = (0..m).map(|k| C64::new(k as f64 * dt, 0.0)).collect();
    let c = jz_correlation(sol, &times);
    let w = |t: f64| (-0.5 * (t / window.sigma).powi(2)).exp();
    let len = 2 * m;
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for k in 0..m {
        let t = k as f64 * dt;
        buf[k] = c[k] * w(t);
        if k > 0 {
            buf[len - k] = c[k].conj() * w(t);
        }
    }
    let edge = c[m - 1].norm() * w(window.t_max);
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let dw = 2.0 * PI / (len as f64 * dt);
    let mut pairs: Vec<(f64, f64)> = (0..len)
        .map(|k| {
            let idx = if k < m { k as f64 } else { k as f64 - len as f64 };
            (idx * dw, buf[k].re * dt / (2.0 * PI))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(StructureFactor {
        omega: pairs.iter().map(|p| p.0).collect(),
        s: pairs.iter().map(|p| p.1).collect(),
        truncated: edge > 1e-3 * c[0].norm(),
    })
}
