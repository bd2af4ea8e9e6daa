//! Equal-time spin correlators of the chain from Majorana Pfaffians.
//!
//! Majoranas are interleaved as a_{2i} = a_{o,i}, a_{2i+1} = a_{e,i} (sites from 0).
//! For distinct indices ⟨a_k a_l⟩ = i G_{kl} with G real antisymmetric, so the
//! expectation of a string of 2m distinct Majoranas is i^m Pf(G_sub).

use rayon::prelude::*;

use crate::pfaffian::{pfaffian_unchecked, Square};
use crate::solution::FermionSolution;

#[inline]
pub(crate) fn odd(i: usize) -> usize {
    2 * i
}

#[inline]
pub(crate) fn even(i: usize) -> usize {
    2 * i + 1
}

/// Equal-time Majorana correlations ⟨a_k a_l⟩ = δ_kl + i G_kl.
#[derive(Debug, Clone)]
pub struct MajoranaCorrelators {
    pub n: usize,
    /// 2N × 2N real antisymmetric G.
    pub g: Square<f64>,
}

impl MajoranaCorrelators {
    pub fn new(sol: &FermionSolution) -> Self {
        let goe = sol.odd_even_correlator();
        let n = sol.n;
        let mut g = Square::zeros(2 * n);
        for i in 0..n {
            for j in 0..n {
                let v = goe.get(i, j);
                g.set(odd(i), even(j), v);
                g.set(even(j), odd(i), -v);
            }
        }
        MajoranaCorrelators { n, g }
    }

    /// Pf of G restricted to `idx` (distinct indices, even count).
    pub fn string_pfaffian(&self, idx: &[usize]) -> f64 {
        let sub = Square::from_fn(idx.len(), |p, q| self.g.get(idx[p], idx[q]));
        pfaffian_unchecked(sub)
    }

    /// ⟨σ^x_i⟩ = ⟨i a_{o,i} a_{e,i}⟩ = −G_{o_i e_i}.
    pub fn sigma_x(&self, i: usize) -> f64 {
        -self.g.get(odd(i), even(i))
    }

    /// ⟨S^y_i S^y_j⟩.
    pub fn yy(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.25;
        }
        let (i, j) = (i.min(j), i.max(j));
        // σ^y_i σ^y_j = −i^{j−i} a_{o,i} (a_{o,i+1} a_{e,i+1}) … (a_{o,j−1} a_{e,j−1}) a_{e,j}
        let mut idx = Vec::with_capacity(2 * (j - i));
        idx.push(odd(i));
        for l in i + 1..j {
            idx.push(odd(l));
            idx.push(even(l));
        }
        idx.push(even(j));
        let sign = if (j - i) % 2 == 0 { -1.0 } else { 1.0 };
        sign * self.string_pfaffian(&idx) / 4.0
    }

    /// ⟨S^z_i S^z_j⟩.
    pub fn zz(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.25;
        }
        let (i, j) = (i.min(j), i.max(j));
        // σ^z_i σ^z_j = Π_{l=i}^{j−1} i a_{e,l} a_{o,l+1}
        let mut idx = Vec::with_capacity(2 * (j - i));
        for l in i..j {
            idx.push(even(l));
            idx.push(odd(l + 1));
        }
        let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.string_pfaffian(&idx) / 4.0
    }
}

/// ⟨J^x⟩ = Σ_i ⟨σ^x_i⟩/2, positive for Γ > 0.
pub fn transverse_magnetization(sol: &FermionSolution) -> f64 {
    let goe = sol.odd_even_correlator();
    -0.5 * (0..sol.n).map(|i| goe.get(i, i)).sum::<f64>()
}

/// ⟨S^y_i S^y_j⟩.
pub fn yy_correlation(sol: &FermionSolution, i: usize, j: usize) -> f64 {
    MajoranaCorrelators::new(sol).yy(i, j)
}

/// ⟨S^z_i S^z_j⟩.
pub fn zz_correlation(sol: &FermionSolution, i: usize, j: usize) -> f64 {
    MajoranaCorrelators::new(sol).zz(i, j)
}

fn symmetric_matrix(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Square<f64> {
    // reflection i → N−1−i maps (i, j) onto (N−1−j, N−1−i)
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).filter(|&(i, j)| (i, j) <= (n - 1 - j, n - 1 - i)).collect();
    let values: Vec<f64> = pairs.par_iter().map(|&(i, j)| f(i, j)).collect();
    let mut m = Square::zeros(n);
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        for (a, b) in [(i, j), (j, i), (n - 1 - j, n - 1 - i), (n - 1 - i, n - 1 - j)] {
            m.set(a, b, v);
        }
    }
    m
}

/// Matrix of ⟨S^y_i S^y_j⟩.
pub fn yy_matrix(sol: &FermionSolution) -> Square<f64> {
    let c = MajoranaCorrelators::new(sol);
    symmetric_matrix(sol.n, |i, j| c.yy(i, j))
}

/// Matrix of ⟨S^z_i S^z_j⟩.
pub fn zz_matrix(sol: &FermionSolution) -> Square<f64> {
    let c = MajoranaCorrelators::new(sol);
    symmetric_matrix(sol.n, |i, j| c.zz(i, j))
}

/// Var(J^y) = Σ_{ij} ⟨S^y_i S^y_j⟩ (⟨J^y⟩ = 0).
pub fn var_jy(sol: &FermionSolution) -> f64 {
    yy_matrix(sol).data.iter().sum()
}

/// Var(J^z) = Σ_{ij} ⟨S^z_i S^z_j⟩ (⟨J^z⟩ = 0).
pub fn var_jz(sol: &FermionSolution) -> f64 {
    zz_matrix(sol).data.iter().sum()
}

/// Var(J^y_A) for a set of sites A.
pub fn var_jy_subsystem(sol: &FermionSolution, sites: &[usize]) -> f64 {
    let m = yy_matrix(sol);
    sites.iter().flat_map(|&i| sites.iter().map(move |&j| (i, j))).map(|(i, j)| m.get(i, j)).sum()
}
