//! Exact-diagonalization oracle for up to 16 spins.
//!
//! The Hilbert space is split into blocks of the spin-flip parity and, on
//! periodic hypercubes, of the lattice momentum. Every block is diagonalized
//! densely, so results are exact to machine precision.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::metrology::{chi_squared, squeezing_parameter};
use crate::model::{coords, index, Boundary, Dimension, Lattice, ModelSpec};
use crate::operator::SpinOperator;
use crate::report::{Estimate, Flag, ObservableReport};
use crate::spectral::{qfi_pair, tau_average_pair, thermal_weights, SpectralDecomposition, DEGENERACY_TOL};
use crate::symmetry::{sparse_apply, OrbitTable, SectorBasis, SectorLabel, SymmetryGroup};

/// Largest system handled by the symmetry-resolved oracle.
pub const MAX_ORACLE_SITES: usize = 16;
/// Largest system for which the full 2^N matrix is materialized.
pub const MAX_DENSE_SITES: usize = 13;

/// Full Hamiltonian matrix in the S^z product basis.
pub fn build_dense_hamiltonian(spec: &ModelSpec) -> Result<Mat<f64>> {
    spec.validate()?;
    let n = spec.n_sites();
    if n > MAX_ORACLE_SITES {
        return Err(ModelError::TooLarge { n, max: MAX_ORACLE_SITES });
    }
    if n > MAX_DENSE_SITES {
        return Err(ModelError::TooLarge { n, max: MAX_DENSE_SITES });
    }
    let op = SpinOperator::hamiltonian(spec);
    let dim = 1usize << n;
    let mut h = Mat::<f64>::zeros(dim, dim);
    for s in 0..dim as u32 {
        for t in &op.terms {
            let (s2, a) = t.apply(s);
            h[(s2 as usize, s as usize)] += a.re;
        }
    }
    Ok(h)
}

/// All observables of `spec` from the oracle (uncertainties zero).
pub fn exact_observables(spec: &ModelSpec) -> Result<ObservableReport> {
    ExactSolver::new(spec)?.observables(spec.temperature)
}

/// One diagonalized symmetry block.
#[derive(Debug, Clone)]
pub struct Sector {
    pub label: SectorLabel,
    /// Number of symmetry blocks sharing this spectrum (conjugate momenta).
    pub multiplicity: usize,
    pub basis: SectorBasis,
    pub energies: Vec<f64>,
    pub vectors: Mat<C64>,
}

/// |⟨m|J^z|n⟩|² between a parity-even sector (columns n) and its partner (rows m).
#[derive(Debug, Clone)]
struct Transition {
    from: usize,
    to: usize,
    strength: Mat<f64>,
}

/// Per-state Boltzmann weights, indexed like the sectors.
#[derive(Debug, Clone)]
pub struct Weights {
    pub p: Vec<Vec<f64>>,
    pub beta: f64,
    pub degenerate_ground: bool,
}

#[derive(Debug, Clone)]
pub struct ExactSolver {
    spec: ModelSpec,
    lattice: Lattice,
    table: OrbitTable,
    sectors: Vec<Sector>,
    jx_diag: Vec<Vec<f64>>,
    jy_norm: Vec<Vec<f64>>,
    jz_norm: Vec<Vec<f64>>,
    jz_transitions: Vec<Transition>,
}

impl ExactSolver {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_sites();
        if n > MAX_ORACLE_SITES {
            return Err(ModelError::TooLarge { n, max: MAX_ORACLE_SITES });
        }
        let lattice = Lattice::for_spec(spec);
        let periodic = matches!(spec.dimension, Dimension::Finite(_)) && spec.boundary == Boundary::Periodic;
        let group = if periodic && n > 1 { SymmetryGroup::translations(&lattice)? } else { SymmetryGroup::parity_only(n) };
        let table = OrbitTable::new(group);
        let h = SpinOperator::hamiltonian_on(&lattice, spec.field());

        let labels = table.group.sectors();
        let sectors: Vec<Sector> = labels
            .par_iter()
            .map(|(label, mult)| diagonalize(&table, &h, label, *mult))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|s| s.basis.dim() > 0)
            .collect();

        let jx = SpinOperator::jx(n);
        let jy = SpinOperator::jy(n);
        let jz = SpinOperator::jz(n);
        let mut solver = ExactSolver {
            spec: *spec,
            lattice,
            table,
            sectors,
            jx_diag: Vec::new(),
            jy_norm: Vec::new(),
            jz_norm: Vec::new(),
            jz_transitions: Vec::new(),
        };
        solver.jx_diag = (0..solver.sectors.len()).map(|a| solver.diagonal(&jx, a)).collect::<Result<_>>()?;
        solver.jy_norm = (0..solver.sectors.len()).map(|a| solver.image_norms(&jy, a)).collect::<Result<_>>()?;
        solver.jz_norm = (0..solver.sectors.len()).map(|a| solver.image_norms(&jz, a)).collect::<Result<_>>()?;
        let mut transitions = Vec::new();
        for a in 0..solver.sectors.len() {
            if solver.sectors[a].label.parity < 0 {
                continue;
            }
            if let Some(b) = solver.partner(a) {
                let m = solver.block_elements(&jz, a, b)?;
                let strength = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].norm_sqr());
                transitions.push(Transition { from: a, to: b, strength });
            }
        }
        solver.jz_transitions = transitions;
        Ok(solver)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    /// Sector with the same momentum and opposite parity.
    fn partner(&self, a: usize) -> Option<usize> {
        let l = &self.sectors[a].label;
        self.sectors.iter().position(|s| s.label.momentum == l.momentum && s.label.parity == -l.parity)
    }

    /// All energies with multiplicities, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .sectors
            .iter()
            .flat_map(|s| s.energies.iter().flat_map(move |&x| std::iter::repeat(x).take(s.multiplicity)))
            .collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    pub fn ground_energy(&self) -> f64 {
        self.sectors.iter().map(|s| s.energies[0]).fold(f64::INFINITY, f64::min)
    }

    /// ln Z at temperature T > 0.
    pub fn log_partition(&self, temperature: f64) -> f64 {
        let beta = 1.0 / temperature;
        let e0 = self.ground_energy();
        let z: f64 = self
            .sectors
            .iter()
            .map(|s| s.multiplicity as f64 * s.energies.iter().map(|&e| (-(e - e0) * beta).exp()).sum::<f64>())
            .sum();
        z.ln() - beta * e0
    }

    pub fn weights(&self, temperature: f64) -> Weights {
        let e0 = self.ground_energy();
        let degenerate: usize = self
            .sectors
            .iter()
            .map(|s| s.multiplicity * s.energies.iter().filter(|&&e| e - e0 < DEGENERACY_TOL * self.spec.coupling).count())
            .sum();
        let mut p: Vec<Vec<f64>> = self.sectors.iter().map(|s| vec![0.0; s.energies.len()]).collect();
        if temperature == 0.0 {
            // first block in label order holding a ground state: parity +1 before −1, k = 0 first
            let a = self.sectors.iter().position(|s| s.energies[0] - e0 < DEGENERACY_TOL * self.spec.coupling).unwrap();
            p[a][0] = 1.0;
            return Weights { p, beta: f64::INFINITY, degenerate_ground: degenerate > 1 };
        }
        let beta = 1.0 / temperature;
        let mut z = 0.0;
        for (a, s) in self.sectors.iter().enumerate() {
            for (n, &e) in s.energies.iter().enumerate() {
                p[a][n] = (-(e - e0) * beta).exp();
                z += s.multiplicity as f64 * p[a][n];
            }
        }
        p.iter_mut().flatten().for_each(|x| *x /= z);
        Weights { p, beta, degenerate_ground: degenerate > 1 }
    }

    pub fn observables(&self, temperature: f64) -> Result<ObservableReport> {
        let w = self.weights(temperature);
        let n = self.spec.n_sites();
        let avg = |data: &[Vec<f64>]| -> f64 {
            self.sectors
                .iter()
                .enumerate()
                .map(|(a, s)| s.multiplicity as f64 * w.p[a].iter().zip(&data[a]).map(|(p, x)| p * x).sum::<f64>())
                .sum()
        };
        let jx = avg(&self.jx_diag);
        let var_jy = avg(&self.jy_norm);
        let var_jz = avg(&self.jz_norm);
        let energies: Vec<Vec<f64>> = self.sectors.iter().map(|s| s.energies.clone()).collect();
        let energy = avg(&energies);
        let (qfi, qv) = self.jz_fisher_and_variance(&w);

        let mut flags = Vec::new();
        if temperature == 0.0 && w.degenerate_ground {
            flags.push(Flag::DegenerateGround);
        }
        let sq = squeezing_parameter(Estimate::exact(jx), Estimate::exact(var_jy), n);
        let xi = match sq {
            Ok(s) => s.xi_r_sq,
            Err(_) => {
                flags.push(Flag::DivisionHazard);
                Estimate::exact(f64::INFINITY)
            }
        };
        let qfi_e = Estimate::exact(qfi);
        Ok(ObservableReport {
            n_sites: n,
            g: self.spec.g,
            temperature,
            jx_mean: Estimate::exact(jx),
            var_jy: Estimate::exact(var_jy),
            var_jz: Estimate::exact(var_jz),
            qv_jz: Estimate::exact(qv),
            qfi_jz: Some(qfi_e),
            xi_r_sq: xi,
            chi_sq: Some(chi_squared(qfi_e, n)),
            energy: Some(Estimate::exact(energy)),
            flags,
        })
    }

    fn jz_fisher_and_variance(&self, w: &Weights) -> (f64, f64) {
        let mut qfi = 0.0;
        let mut qv = 0.0;
        for t in &self.jz_transitions {
            let mult = self.sectors[t.from].multiplicity as f64;
            let (ea, eb) = (&self.sectors[t.from].energies, &self.sectors[t.to].energies);
            let (pa, pb) = (&w.p[t.from], &w.p[t.to]);
            for n in 0..ea.len() {
                for m in 0..eb.len() {
                    let s = t.strength[(m, n)];
                    if s == 0.0 {
                        continue;
                    }
                    qfi += mult * s * 2.0 * qfi_pair(pa[n], pb[m]);
                    let fwd = pa[n] - tau_average_pair(pa[n], pb[m], ea[n], eb[m], w.beta);
                    let bwd = pb[m] - tau_average_pair(pb[m], pa[n], eb[m], ea[n], w.beta);
                    qv += mult * s * (fwd + bwd);
                }
            }
        }
        (qfi, qv.max(0.0))
    }

    /// ⟨n|O|n⟩ for every eigenstate of sector `a` (O flip-even).
    fn diagonal(&self, op: &SpinOperator, a: usize) -> Result<Vec<f64>> {
        let sec = &self.sectors[a];
        let trip = self.table.triplets(op, &sec.basis, &sec.basis)?;
        let dim = sec.basis.dim();
        Ok((0..dim)
            .into_par_iter()
            .map(|n| {
                let v = column(&sec.vectors, n);
                trip.iter().map(|&(r, c, x)| (v[r as usize].conj() * x * v[c as usize]).re).sum()
            })
            .collect())
    }

    /// ‖O|n⟩‖² for every eigenstate of sector `a`.
    fn image_norms(&self, op: &SpinOperator, a: usize) -> Result<Vec<f64>> {
        let sec = &self.sectors[a];
        let Some(b) = self.target(op, a) else {
            return Ok(vec![0.0; sec.basis.dim()]);
        };
        let to = &self.sectors[b].basis;
        let trip = self.table.triplets(op, &sec.basis, to)?;
        Ok((0..sec.basis.dim())
            .into_par_iter()
            .map(|n| sparse_apply(&trip, to.dim(), column(&sec.vectors, n)).iter().map(|z| z.norm_sqr()).sum())
            .collect())
    }

    fn target(&self, op: &SpinOperator, a: usize) -> Option<usize> {
        if op.flip_odd() {
            self.partner(a)
        } else {
            Some(a)
        }
    }

    /// ⟨m|O|n⟩ with n in sector `a` (columns) and m in sector `b` (rows).
    pub fn block_elements(&self, op: &SpinOperator, a: usize, b: usize) -> Result<Mat<C64>> {
        let from = &self.sectors[a];
        let to = &self.sectors[b];
        let trip = self.table.triplets(op, &from.basis, &to.basis)?;
        let mut bv = Mat::<C64>::zeros(to.basis.dim(), from.basis.dim());
        for n in 0..from.basis.dim() {
            let y = sparse_apply(&trip, to.basis.dim(), column(&from.vectors, n));
            for (i, z) in y.into_iter().enumerate() {
                bv[(i, n)] = z;
            }
        }
        Ok(to.vectors.adjoint() * &bv)
    }

    /// Thermal expectation of a flip-even operator.
    pub fn expectation(&self, op: &SpinOperator, temperature: f64) -> Result<f64> {
        if !op.flip_even() {
            return Ok(0.0);
        }
        let w = self.weights(temperature);
        let mut total = 0.0;
        for a in 0..self.sectors.len() {
            let d = self.diagonal(op, a)?;
            total += self.sectors[a].multiplicity as f64 * w.p[a].iter().zip(&d).map(|(p, x)| p * x).sum::<f64>();
        }
        Ok(total)
    }

    /// ⟨S^y_0 S^y_r⟩ for every periodic displacement r (translation-invariant lattices).
    pub fn yy_by_displacement(&self, temperature: f64) -> Result<Vec<f64>> {
        let (d, l) = self
            .lattice
            .periodic_extent()
            .ok_or_else(|| ModelError::Symmetry("displacement correlations need a periodic hypercube".into()))?;
        let n = self.lattice.n_sites;
        let mut out = vec![0.0; n];
        out[0] = 0.25;
        let canonical = |r: usize| -> Vec<usize> {
            let mut x: Vec<usize> = coords(r, d, l).into_iter().map(|c| c.min(l - c)).collect();
            x.sort_unstable();
            x
        };
        let mut done: Vec<(Vec<usize>, f64)> = Vec::new();
        for r in 1..n {
            let key = canonical(r);
            if let Some((_, v)) = done.iter().find(|(k, _)| *k == key) {
                out[r] = *v;
                continue;
            }
            let op = SpinOperator::translation_averaged_yy(&self.lattice, index(&coords(r, d, l), l));
            let v = self.expectation(&op, temperature)?;
            done.push((key, v));
            out[r] = v;
        }
        Ok(out)
    }

    /// ⟨A(z) B⟩ = Tr(ρ e^{iHz} A e^{−iHz} B) for complex times z (z = −iτ gives imaginary time).
    pub fn correlation(&self, a_op: &SpinOperator, b_op: &SpinOperator, times: &[C64], temperature: f64) -> Result<Vec<C64>> {
        if self.sectors.iter().any(|s| s.multiplicity != 1) {
            return Err(ModelError::Symmetry("dynamic correlations need a parity-only decomposition".into()));
        }
        let w = self.weights(temperature);
        let mut out = vec![C64::new(0.0, 0.0); times.len()];
        for a in 0..self.sectors.len() {
            let Some(c) = self.target(b_op, a) else { continue };
            let b_elems = self.block_elements(b_op, a, c)?;
            let a_elems = self.block_elements(a_op, c, a)?;
            let (ea, ec) = (&self.sectors[a].energies, &self.sectors[c].energies);
            for n in 0..ea.len() {
                if w.p[a][n] == 0.0 {
                    continue;
                }
                let ln_p = w.p[a][n].ln();
                for m in 0..ec.len() {
                    let prod = a_elems[(n, m)] * b_elems[(m, n)];
                    if prod.norm() == 0.0 {
                        continue;
                    }
                    let de = ea[n] - ec[m];
                    for (slot, &z) in out.iter_mut().zip(times) {
                        let expo = C64::new(ln_p, 0.0) + C64::new(0.0, 1.0) * de * z;
                        *slot += prod * expo.exp();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dense decomposition in the full product basis (parity-only blocks).
    pub fn full_decomposition(&self, temperature: f64) -> Result<SpectralDecomposition> {
        if self.sectors.iter().any(|s| s.multiplicity != 1) {
            return Err(ModelError::Symmetry("full decomposition needs a parity-only decomposition".into()));
        }
        let dim = 1usize << self.spec.n_sites();
        let mut cols: Vec<(f64, Vec<C64>)> = Vec::with_capacity(dim);
        for s in &self.sectors {
            for n in 0..s.energies.len() {
                cols.push((s.energies[n], self.table.expand(&s.basis, column(&s.vectors, n))));
            }
        }
        cols.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let energies: Vec<f64> = cols.iter().map(|c| c.0).collect();
        let vectors = Mat::<C64>::from_fn(dim, dim, |i, j| cols[j].1[i]);
        let weights = thermal_weights(&energies, temperature);
        Ok(SpectralDecomposition { energies, vectors, weights })
    }
}

fn column(m: &Mat<C64>, j: usize) -> &[C64] {
    m.col(j).try_as_col_major().expect("owned matrices are column-major").as_slice()
}

fn diagonalize(table: &OrbitTable, h: &SpinOperator, label: &SectorLabel, mult: usize) -> Result<Sector> {
    let basis = table.sector(label);
    let dim = basis.dim();
    if dim == 0 {
        return Ok(Sector { label: label.clone(), multiplicity: mult, basis, energies: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    let block = table.dense_block(h, &basis)?;
    let err = |e| ModelError::Eigen(format!("{e:?}"));
    let (energies, vectors) = if table.group.is_real(label) {
        let real = Mat::<f64>::from_fn(dim, dim, |i, j| block[(i, j)].re);
        let eig = real.self_adjoint_eigen(Side::Lower).map_err(err)?;
        let u = eig.U();
        (eig.S().column_vector().iter().copied().collect(), Mat::<C64>::from_fn(dim, dim, |i, j| C64::new(u[(i, j)], 0.0)))
    } else {
        let eig = block.self_adjoint_eigen(Side::Lower).map_err(err)?;
        (eig.S().column_vector().iter().map(|z| z.re).collect(), eig.U().to_owned())
    };
    Ok(Sector { label: label.clone(), multiplicity: mult, basis, energies, vectors })
}
