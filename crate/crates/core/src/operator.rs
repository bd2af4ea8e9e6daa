//! Spin operators as sums of Pauli strings acting on the S^z product basis.
//!
//! Basis state bit `i` set means spin `i` points up (S^z = +1/2).

use num_complex::Complex64 as C64;

use crate::model::{Lattice, ModelSpec};

/// `coeff · Π X_i Π Y_j Π Z_k` with disjoint site masks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coeff: C64,
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

impl PauliTerm {
    /// Image of basis state `s`: returns the new state and its amplitude.
    #[inline]
    pub fn apply(&self, s: u32) -> (u32, C64) {
        let down_z = (self.z & !s).count_ones();
        let up_y = (self.y & s).count_ones();
        let down_y = (self.y & !s).count_ones();
        let mut amp = self.coeff;
        if down_z & 1 == 1 {
            amp = -amp;
        }
        // Y|up> = i|down>, Y|down> = -i|up>
        amp *= match (up_y + 3 * down_y) % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        (s ^ (self.x | self.y), amp)
    }

    /// Whether the term anticommutes with the global flip Π X.
    pub fn flip_odd(&self) -> bool {
        (self.y.count_ones() + self.z.count_ones()) % 2 == 1
    }
}

/// Sum of Pauli strings on `n` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperator {
    pub n: usize,
    pub terms: Vec<PauliTerm>,
    /// Invariant under lattice translations (needed in momentum sectors).
    pub translation_invariant: bool,
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    X,
    Y,
    Z,
}

fn single(n: usize, site: usize, axis: Axis, coeff: f64) -> PauliTerm {
    assert!(site < n && n <= 32);
    let bit = 1u32 << site;
    let c = C64::new(coeff, 0.0);
    match axis {
        Axis::X => PauliTerm { coeff: c, x: bit, y: 0, z: 0 },
        Axis::Y => PauliTerm { coeff: c, x: 0, y: bit, z: 0 },
        Axis::Z => PauliTerm { coeff: c, x: 0, y: 0, z: bit },
    }
}

fn pair(n: usize, i: usize, j: usize, axis: Axis, coeff: f64) -> PauliTerm {
    assert!(i != j);
    let a = single(n, i, axis, 1.0);
    let b = single(n, j, axis, 1.0);
    PauliTerm { coeff: C64::new(coeff, 0.0), x: a.x | b.x, y: a.y | b.y, z: a.z | b.z }
}

impl SpinOperator {
    pub fn zero(n: usize) -> Self {
        SpinOperator { n, terms: Vec::new(), translation_invariant: true }
    }

    /// −Σ_b K S^z_i S^z_j − Γ Σ_i S^x_i for the bond graph of `spec`.
    pub fn hamiltonian(spec: &ModelSpec) -> Self {
        Self::hamiltonian_on(&Lattice::for_spec(spec), spec.field())
    }

    pub fn hamiltonian_on(lattice: &Lattice, field: f64) -> Self {
        let n = lattice.n_sites;
        let mut terms = Vec::with_capacity(lattice.bonds.len() + n);
        for &(i, j) in &lattice.bonds {
            terms.push(pair(n, i, j, Axis::Z, -lattice.bond_coupling / 4.0));
        }
        for i in 0..n {
            terms.push(single(n, i, Axis::X, -field / 2.0));
        }
        SpinOperator { n, terms, translation_invariant: true }
    }

    fn collective(n: usize, axis: Axis) -> Self {
        SpinOperator { n, terms: (0..n).map(|i| single(n, i, axis, 0.5)).collect(), translation_invariant: true }
    }

    pub fn jx(n: usize) -> Self {
        Self::collective(n, Axis::X)
    }

    pub fn jy(n: usize) -> Self {
        Self::collective(n, Axis::Y)
    }

    pub fn jz(n: usize) -> Self {
        Self::collective(n, Axis::Z)
    }

    pub fn sz(n: usize, i: usize) -> Self {
        SpinOperator { n, terms: vec![single(n, i, Axis::Z, 0.5)], translation_invariant: false }
    }

    pub fn sx(n: usize, i: usize) -> Self {
        SpinOperator { n, terms: vec![single(n, i, Axis::X, 0.5)], translation_invariant: false }
    }

    /// S^y_i S^y_j (i ≠ j).
    pub fn sy_sy(n: usize, i: usize, j: usize) -> Self {
        SpinOperator { n, terms: vec![pair(n, i, j, Axis::Y, 0.25)], translation_invariant: false }
    }

    /// S^z_i S^z_j (i ≠ j).
    pub fn sz_sz(n: usize, i: usize, j: usize) -> Self {
        SpinOperator { n, terms: vec![pair(n, i, j, Axis::Z, 0.25)], translation_invariant: false }
    }

    /// (1/N) Σ_i S^y_i S^y_{i+r} on a periodic hypercube, r ≠ 0.
    pub fn translation_averaged_yy(lattice: &Lattice, r: usize) -> Self {
        let n = lattice.n_sites;
        let terms = (0..n).map(|i| pair(n, i, lattice.translate(i, r), Axis::Y, 0.25 / n as f64)).collect();
        SpinOperator { n, terms, translation_invariant: true }
    }

    /// True when every term commutes with the global spin flip.
    pub fn flip_even(&self) -> bool {
        self.terms.iter().all(|t| !t.flip_odd())
    }

    pub fn flip_odd(&self) -> bool {
        self.terms.iter().all(|t| t.flip_odd())
    }

    /// Full matrix in the 2^n product basis (small n only).
    pub fn dense(&self) -> faer::Mat<C64> {
        let dim = 1usize << self.n;
        let mut m = faer::Mat::<C64>::zeros(dim, dim);
        for s in 0..dim as u32 {
            for t in &self.terms {
                let (s2, a) = t.apply(s);
                m[(s2 as usize, s as usize)] += a;
            }
        }
        m
    }
}
