//! Abelian symmetry groups (lattice translations × global spin flip) and the
//! corresponding block decomposition of the 2^N product basis.

use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{ModelError, Result};
use crate::model::{coords, index, Lattice};
use crate::operator::SpinOperator;

/// Group generated by a set of site permutations (translations) and the global flip Π X.
/// Element `e` encodes translation `e / 2` followed by a flip when `e` is odd.
#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    n: usize,
    perms: Vec<Vec<usize>>,
    shifts: Vec<Vec<usize>>,
    extent: usize,
}

/// Irreducible representation: lattice momentum (in units of 2π/L) and flip parity ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SectorLabel {
    pub momentum: Vec<usize>,
    pub parity: i8,
}

impl SymmetryGroup {
    pub fn parity_only(n: usize) -> Self {
        SymmetryGroup { n, perms: vec![(0..n).collect()], shifts: vec![Vec::new()], extent: 1 }
    }

    /// Translations of a periodic hypercube combined with the spin flip.
    pub fn translations(lattice: &Lattice) -> Result<Self> {
        let (d, l) = lattice
            .periodic_extent()
            .ok_or_else(|| ModelError::Symmetry("translations need a periodic hypercube".into()))?;
        let n = lattice.n_sites;
        let mut perms = Vec::with_capacity(n);
        let mut shifts = Vec::with_capacity(n);
        for t in 0..n {
            perms.push((0..n).map(|i| lattice.translate(i, t)).collect());
            shifts.push(coords(t, d, l));
        }
        Ok(SymmetryGroup { n, perms, shifts, extent: l })
    }

    pub fn order(&self) -> usize {
        2 * self.perms.len()
    }

    pub fn has_translations(&self) -> bool {
        self.perms.len() > 1
    }

    #[inline]
    pub fn apply(&self, e: usize, s: u32) -> u32 {
        let perm = &self.perms[e >> 1];
        let mut out = 0u32;
        let mut bits = s;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            out |= 1 << perm[i];
            bits &= bits - 1;
        }
        if e & 1 == 1 {
            out ^= if self.n == 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        }
        out
    }

    pub fn character(&self, label: &SectorLabel, e: usize) -> C64 {
        let shift = &self.shifts[e >> 1];
        let phase: usize = label.momentum.iter().zip(shift).map(|(k, x)| k * x).sum();
        let mut c = if self.extent > 1 {
            C64::from_polar(1.0, TAU * (phase % self.extent) as f64 / self.extent as f64)
        } else {
            C64::new(1.0, 0.0)
        };
        if e & 1 == 1 && label.parity < 0 {
            c = -c;
        }
        c
    }

    /// Sector labels with their multiplicity: momenta k and −k give complex-conjugate
    /// blocks with identical spectra, so only one of each pair is kept (multiplicity 2).
    pub fn sectors(&self) -> Vec<(SectorLabel, usize)> {
        let d = self.shifts[0].len();
        let l = self.extent;
        let count = if d == 0 { 1 } else { l.pow(d as u32) };
        let mut out = Vec::new();
        for parity in [1i8, -1] {
            for ki in 0..count {
                let k = if d == 0 { Vec::new() } else { coords(ki, d, l) };
                let minus: Vec<usize> = k.iter().map(|&x| (l - x) % l).collect();
                let kid = index(&k, l.max(1));
                let mid = index(&minus, l.max(1));
                if mid < kid {
                    continue;
                }
                let mult = if mid == kid { 1 } else { 2 };
                out.push((SectorLabel { momentum: k, parity }, mult));
            }
        }
        out
    }

    /// True when every character of the sector is real (k ≡ −k).
    pub fn is_real(&self, label: &SectorLabel) -> bool {
        label.momentum.iter().all(|&k| (2 * k) % self.extent.max(1) == 0)
    }
}

/// Orbit decomposition of the product basis under a symmetry group.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    pub group: SymmetryGroup,
    /// Representative index of each basis state.
    rep_of: Vec<u32>,
    /// Group element mapping the representative onto the state.
    elem_of: Vec<u16>,
    /// Representative (smallest) state of each orbit.
    pub reps: Vec<u32>,
    stabilizers: Vec<Vec<u16>>,
}

impl OrbitTable {
    pub fn new(group: SymmetryGroup) -> Self {
        let n = group.n;
        let dim = 1usize << n;
        let mut rep_of = vec![u32::MAX; dim];
        let mut elem_of = vec![0u16; dim];
        let mut reps = Vec::new();
        let mut stabilizers = Vec::new();
        for s in 0..dim as u32 {
            if rep_of[s as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            let mut stab = Vec::new();
            for e in 0..group.order() {
                let t = group.apply(e, s);
                if t == s {
                    stab.push(e as u16);
                }
                if rep_of[t as usize] == u32::MAX {
                    rep_of[t as usize] = id;
                    elem_of[t as usize] = e as u16;
                }
            }
            reps.push(s);
            stabilizers.push(stab);
        }
        OrbitTable { group, rep_of, elem_of, reps, stabilizers }
    }

    pub fn n_sites(&self) -> usize {
        self.group.n
    }

    pub fn orbit_size(&self, rep: usize) -> usize {
        self.group.order() / self.stabilizers[rep].len()
    }

    /// Basis of one symmetry sector: the representatives compatible with its character.
    pub fn sector(&self, label: &SectorLabel) -> SectorBasis {
        let mut reps = Vec::new();
        let mut position = vec![u32::MAX; self.reps.len()];
        for (r, stab) in self.stabilizers.iter().enumerate() {
            let sum: C64 = stab.iter().map(|&e| self.group.character(label, e as usize)).sum();
            if sum.re > 0.5 * stab.len() as f64 {
                position[r] = reps.len() as u32;
                reps.push(r as u32);
            }
        }
        let characters = (0..self.group.order()).map(|e| self.group.character(label, e)).collect();
        SectorBasis { label: label.clone(), reps, position, characters }
    }

    /// Sparse matrix of `op` from sector `from` to sector `to` as (row, col, value) triplets.
    pub fn triplets(&self, op: &SpinOperator, from: &SectorBasis, to: &SectorBasis) -> Result<Vec<(u32, u32, C64)>> {
        if self.group.has_translations() && !op.translation_invariant {
            return Err(ModelError::Symmetry("operator breaks translation invariance".into()));
        }
        let odd = op.flip_odd();
        if !odd && !op.flip_even() {
            return Err(ModelError::Symmetry("operator mixes flip-even and flip-odd terms".into()));
        }
        let expected = if odd { -from.label.parity } else { from.label.parity };
        if to.label.parity != expected || to.label.momentum != from.label.momentum {
            return Ok(Vec::new());
        }
        let mut out = Vec::with_capacity(from.dim() * op.terms.len());
        for (col, &r) in from.reps.iter().enumerate() {
            let state = self.reps[r as usize];
            let orb_r = self.orbit_size(r as usize) as f64;
            for term in &op.terms {
                let (s, amp) = term.apply(state);
                let r2 = self.rep_of[s as usize] as usize;
                let row = to.position[r2];
                if row == u32::MAX {
                    continue;
                }
                let h = self.elem_of[s as usize] as usize;
                let scale = (orb_r / self.orbit_size(r2) as f64).sqrt();
                out.push((row, col as u32, amp * to.characters[h] * scale));
            }
        }
        Ok(out)
    }

    /// Dense block of `op` inside a single sector.
    pub fn dense_block(&self, op: &SpinOperator, sector: &SectorBasis) -> Result<Mat<C64>> {
        let d = sector.dim();
        let mut m = Mat::<C64>::zeros(d, d);
        for (row, col, v) in self.triplets(op, sector, sector)? {
            m[(row as usize, col as usize)] += v;
        }
        Ok(m)
    }

    /// Expands a sector vector into the full 2^N product basis.
    pub fn expand(&self, sector: &SectorBasis, coeffs: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); 1 << self.group.n];
        for (s, slot) in out.iter_mut().enumerate() {
            let r = self.rep_of[s] as usize;
            let pos = sector.position[r];
            if pos == u32::MAX {
                continue;
            }
            let h = self.elem_of[s] as usize;
            let norm = (self.orbit_size(r) as f64).sqrt();
            *slot = coeffs[pos as usize] * sector.characters[h].conj() / norm;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub label: SectorLabel,
    /// Orbit indices spanning the sector.
    pub reps: Vec<u32>,
    position: Vec<u32>,
    characters: Vec<C64>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }
}

/// y = B x for a sparse triplet matrix and a dense column.
pub fn sparse_apply(triplets: &[(u32, u32, C64)], rows: usize, x: &[C64]) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); rows];
    for &(r, c, v) in triplets {
        y[r as usize] += v * x[c as usize];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;

    #[test]
    fn sector_dimensions_sum_to_hilbert_space() {
        let lat = Lattice::hypercubic(2, 3, Boundary::Periodic, 1.0);
        let table = OrbitTable::new(SymmetryGroup::translations(&lat).unwrap());
        let total: usize = table.group.sectors().iter().map(|(l, m)| m * table.sector(l).dim()).sum();
        assert_eq!(total, 1 << 9);
        let parity = OrbitTable::new(SymmetryGroup::parity_only(5));
        let total: usize = parity.group.sectors().iter().map(|(l, m)| m * parity.sector(l).dim()).sum();
        assert_eq!(total, 32);
    }

    #[test]
    fn sector_blocks_are_hermitian() {
        let lat = Lattice::hypercubic(1, 6, Boundary::Periodic, 1.0);
        let h = SpinOperator::hamiltonian_on(&lat, 0.8);
        let table = OrbitTable::new(SymmetryGroup::translations(&lat).unwrap());
        for (label, _) in table.group.sectors() {
            let sec = table.sector(&label);
            let m = table.dense_block(&h, &sec).unwrap();
            for i in 0..sec.dim() {
                for j in 0..sec.dim() {
                    assert!((m[(i, j)] - m[(j, i)].conj()).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn expanded_vectors_are_orthonormal() {
        let lat = Lattice::hypercubic(1, 4, Boundary::Periodic, 1.0);
        let table = OrbitTable::new(SymmetryGroup::translations(&lat).unwrap());
        let label = SectorLabel { momentum: vec![1], parity: -1 };
        let sec = table.sector(&label);
        let mut vecs = Vec::new();
        for i in 0..sec.dim() {
            let mut e = vec![C64::new(0.0, 0.0); sec.dim()];
            e[i] = C64::new(1.0, 0.0);
            vecs.push(table.expand(&sec, &e));
        }
        for a in 0..vecs.len() {
            for b in 0..vecs.len() {
                let dot: C64 = vecs[a].iter().zip(&vecs[b]).map(|(x, y)| x.conj() * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - C64::new(want, 0.0)).norm() < 1e-13);
            }
        }
    }
}
