//! One SSE Markov chain: diagonal update, vertex list, directed loops (x basis)
//! and multi-branch clusters (z basis).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfim_core::Lattice;

use crate::error::{Result, SseError};
use crate::string::{Op, OperatorString};
use crate::vertex::{BondWeights, ExitTable};

/// Quantization axis of the basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Field-diagonal: measures ⟨J^x⟩ and the S^y correlations.
    XBasis,
    /// Ising-diagonal: measures Var(J^z) and QV(J^z).
    ZBasis,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::XBasis => "x",
            Representation::ZBasis => "z",
        }
    }
}

/// Longest loop, in visited legs, before it is undone and discarded.
pub const MAX_LOOP_LEGS: usize = 1_000_000;
/// Largest operator string the chain will grow to.
pub const MAX_CUTOFF: usize = 1 << 26;

const NONE: u32 = u32::MAX;

/// Hamiltonian data shared by every update.
#[derive(Debug, Clone)]
pub struct SseModel {
    pub lattice: Lattice,
    pub field: f64,
    pub beta: f64,
    pub representation: Representation,
    tables: Vec<ExitTable>,
    bond_table: Vec<u32>,
    /// Per-site coordinates for periodic displacement lookups.
    coords: Option<(usize, Vec<Vec<usize>>)>,
}

impl SseModel {
    pub fn new(lattice: &Lattice, field: f64, beta: f64, representation: Representation) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(SseError::InvalidSetup(format!("inverse temperature must be positive and finite, got {beta}")));
        }
        if !(field >= 0.0) || !field.is_finite() || !(lattice.bond_coupling >= 0.0) {
            return Err(SseError::InvalidSetup("field and Ising coupling must be non-negative".into()));
        }
        if lattice.bonds.is_empty() {
            return Err(SseError::InvalidSetup("lattice has no bonds".into()));
        }
        let z = lattice.coordination();
        let mut tables: Vec<ExitTable> = Vec::new();
        let mut bond_table = Vec::with_capacity(lattice.bonds.len());
        if representation == Representation::XBasis {
            if z.contains(&0) {
                return Err(SseError::InvalidSetup("x-basis bond operators need every site on a bond".into()));
            }
            for &(i, j) in &lattice.bonds {
                let w = BondWeights::new(field / z[i] as f64, field / z[j] as f64, lattice.bond_coupling);
                let k = match tables.iter().position(|t| t.weights == w) {
                    Some(k) => k,
                    None => {
                        tables.push(ExitTable::new(w));
                        tables.len() - 1
                    }
                };
                bond_table.push(k as u32);
            }
        }
        let coords = lattice.periodic_extent().map(|(d, l)| (l, (0..lattice.n_sites).map(|i| tfim_core::model::coords(i, d, l)).collect()));
        Ok(SseModel { lattice: lattice.clone(), field, beta, representation, tables, bond_table, coords })
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.lattice.bonds
    }

    /// Constant C with H = C − Σ (operators of the expansion).
    pub fn energy_offset(&self) -> f64 {
        0.5 * self.field * self.n_sites() as f64 + 0.25 * self.lattice.bond_coupling * self.lattice.bonds.len() as f64
    }

    pub fn table(&self, bond: usize) -> &ExitTable {
        &self.tables[self.bond_table[bond] as usize]
    }

    pub fn is_periodic(&self) -> bool {
        self.coords.is_some()
    }

    /// Periodic displacement index from i to j.
    pub fn displacement(&self, i: usize, j: usize) -> usize {
        let (l, c) = self.coords.as_ref().expect("periodic lattice");
        let mut r = 0;
        for (x, y) in c[i].iter().zip(&c[j]).rev() {
            r = r * l + (y + l - x) % l;
        }
        r
    }
}

/// Loop statistics and the per-sweep S^y correlation accumulators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoopStats {
    pub loops: u64,
    pub legs: u64,
    pub aborted: u64,
}

/// ⟨S^y_0 S^y_r⟩ accumulated over the loops of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct YySample {
    pub loops: usize,
    /// Indexed by displacement on periodic lattices, otherwise only entry 0 is used.
    pub by_displacement: Vec<f64>,
    pub total: f64,
}

impl YySample {
    pub fn new(n: usize) -> Self {
        YySample { loops: 0, by_displacement: vec![0.0; n], total: 0.0 }
    }

    /// Σ_j ⟨S^y_i S^y_j⟩ averaged over loops.
    pub fn row_sum(&self) -> f64 {
        if self.loops == 0 {
            0.25
        } else {
            self.total / self.loops as f64
        }
    }

    pub fn correlation(&self, r: usize) -> f64 {
        if self.loops == 0 {
            if r == 0 {
                0.25
            } else {
                0.0
            }
        } else {
            self.by_displacement[r] / self.loops as f64
        }
    }
}

/// Markov chain state.
#[derive(Debug, Clone)]
pub struct SseChain {
    pub model: SseModel,
    pub string: OperatorString,
    pub rng: ChaCha8Rng,
    pub loops_per_sweep: usize,
    pub stats: LoopStats,
    pos: Vec<usize>,
    link: Vec<u32>,
    vconf: Vec<u8>,
    vsites: Vec<(u32, u32)>,
    first: Vec<u32>,
    site_vertices: Vec<Vec<u32>>,
}

impl SseChain {
    pub fn new(model: SseModel, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let n = model.n_sites();
        let state: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let cutoff = 16.max(n / 2);
        SseChain::from_parts(model, OperatorString::new(state, cutoff), rng, 1.max(n / 4))
    }

    pub fn from_parts(model: SseModel, string: OperatorString, rng: ChaCha8Rng, loops_per_sweep: usize) -> Self {
        let n = model.n_sites();
        SseChain {
            model,
            string,
            rng,
            loops_per_sweep,
            stats: LoopStats::default(),
            pos: Vec::new(),
            link: Vec::new(),
            vconf: Vec::new(),
            vsites: Vec::new(),
            first: vec![NONE; n],
            site_vertices: vec![Vec::new(); n],
        }
    }

    pub fn n_ops(&self) -> usize {
        self.string.n_ops
    }

    /// Energy estimator of the current configuration.
    pub fn energy(&self) -> f64 {
        self.model.energy_offset() - self.string.n_ops as f64 / self.model.beta
    }

    /// Grows the cutoff to at least 1.25·n_max.
    pub fn adjust_cutoff(&mut self, n_max: usize) -> Result<()> {
        let target = (1.25 * n_max as f64).ceil() as usize;
        if target > MAX_CUTOFF {
            return Err(SseError::CutoffOverflow(MAX_CUTOFF));
        }
        self.string.grow(target);
        Ok(())
    }

    /// One Monte Carlo sweep; fills `yy` with loop measurements in the x basis.
    pub fn sweep(&mut self, yy: Option<&mut YySample>) {
        self.diagonal_update();
        self.build_links();
        match self.model.representation {
            Representation::XBasis => self.directed_loops(yy),
            Representation::ZBasis => self.clusters(),
        }
        self.apply_links();
    }

    pub fn diagonal_update(&mut self) {
        let beta = self.model.beta;
        let n_sites = self.model.n_sites();
        let bonds = &self.model.lattice.bonds;
        let n_bonds = bonds.len();
        let lambda = self.string.cutoff();
        let mut s = self.string.state.clone();
        let mut n = self.string.n_ops;
        match self.model.representation {
            Representation::ZBasis => {
                let w_site = 0.5 * self.model.field * n_sites as f64;
                let w_bond = 0.5 * self.model.lattice.bond_coupling * n_bonds as f64;
                let w_tot = w_site + w_bond;
                for op in self.string.ops.iter_mut() {
                    match *op {
                        Op::Identity => {
                            if w_tot == 0.0 || n == lambda {
                                continue;
                            }
                            let accept = beta * w_tot / (lambda - n) as f64;
                            if self.rng.gen::<f64>() < accept {
                                if self.rng.gen::<f64>() * w_tot < w_site {
                                    *op = Op::SiteDiag(self.rng.gen_range(0..n_sites) as u32);
                                    n += 1;
                                } else {
                                    let b = self.rng.gen_range(0..n_bonds);
                                    let (i, j) = bonds[b];
                                    if s[i] == s[j] {
                                        *op = Op::BondDiag(b as u32);
                                        n += 1;
                                    }
                                }
                            }
                        }
                        Op::SiteDiag(_) | Op::BondDiag(_) => {
                            let accept = (lambda - n + 1) as f64 / (beta * w_tot);
                            if self.rng.gen::<f64>() < accept {
                                *op = Op::Identity;
                                n -= 1;
                            }
                        }
                        Op::SiteFlip(i) => s[i as usize] = !s[i as usize],
                        Op::BondFlip(_) => unreachable!("no bond flips in the z basis"),
                    }
                }
            }
            Representation::XBasis => {
                for op in self.string.ops.iter_mut() {
                    match *op {
                        Op::Identity => {
                            if n == lambda {
                                continue;
                            }
                            let b = self.rng.gen_range(0..n_bonds);
                            let (i, j) = bonds[b];
                            let w = self.model.tables[self.model.bond_table[b] as usize].weights.diagonal(s[i], s[j]);
                            let accept = beta * n_bonds as f64 * w / (lambda - n) as f64;
                            if self.rng.gen::<f64>() < accept {
                                *op = Op::BondDiag(b as u32);
                                n += 1;
                            }
                        }
                        Op::BondDiag(b) => {
                            let (i, j) = bonds[b as usize];
                            let w = self.model.tables[self.model.bond_table[b as usize] as usize].weights.diagonal(s[i], s[j]);
                            let accept = (lambda - n + 1) as f64 / (beta * n_bonds as f64 * w);
                            if self.rng.gen::<f64>() < accept {
                                *op = Op::Identity;
                                n -= 1;
                            }
                        }
                        Op::BondFlip(b) => {
                            let (i, j) = bonds[b as usize];
                            s[i] = !s[i];
                            s[j] = !s[j];
                        }
                        Op::SiteDiag(_) | Op::SiteFlip(_) => unreachable!("no site operators in the x basis"),
                    }
                }
            }
        }
        self.string.n_ops = n;
    }

    fn build_links(&mut self) {
        let n = self.string.n_ops;
        let n_sites = self.model.n_sites();
        self.pos.clear();
        self.vconf.clear();
        self.vsites.clear();
        self.link.clear();
        self.link.resize(4 * n, NONE);
        self.first.clear();
        self.first.resize(n_sites, NONE);
        for v in self.site_vertices.iter_mut() {
            v.clear();
        }
        let mut last = vec![NONE; n_sites];
        let mut s = self.string.state.clone();
        let bonds = &self.model.lattice.bonds;
        for (p, &op) in self.string.ops.iter().enumerate() {
            let Some((i, j)) = op.sites(bonds) else { continue };
            let v = self.pos.len();
            self.pos.push(p);
            let mut conf = s[i] as u8;
            if let Some(j) = j {
                conf |= (s[j] as u8) << 1;
            }
            op.act(bonds, &mut s);
            conf |= (s[i] as u8) << 2;
            if let Some(j) = j {
                conf |= (s[j] as u8) << 3;
            }
            self.vconf.push(conf);
            self.vsites.push((i as u32, j.map_or(NONE, |j| j as u32)));
            for (site, lower) in [(Some(i), 0u32), (j, 1)] {
                let Some(site) = site else { continue };
                let lo = 4 * v as u32 + lower;
                match last[site] {
                    NONE => self.first[site] = lo,
                    prev => {
                        self.link[prev as usize] = lo;
                        self.link[lo as usize] = prev;
                    }
                }
                last[site] = lo + 2;
                self.site_vertices[site].push(v as u32);
            }
        }
        for site in 0..n_sites {
            if self.first[site] != NONE {
                let (a, b) = (self.first[site], last[site]);
                self.link[a as usize] = b;
                self.link[b as usize] = a;
            }
        }
    }

    fn apply_links(&mut self) {
        for (v, &p) in self.pos.iter().enumerate() {
            let conf = self.vconf[v];
            let op = &mut self.string.ops[p];
            *op = match *op {
                Op::SiteDiag(i) | Op::SiteFlip(i) => {
                    if conf & 1 == (conf >> 2) & 1 {
                        Op::SiteDiag(i)
                    } else {
                        Op::SiteFlip(i)
                    }
                }
                Op::BondDiag(b) | Op::BondFlip(b) => {
                    if conf & 3 == (conf >> 2) & 3 {
                        Op::BondDiag(b)
                    } else {
                        Op::BondFlip(b)
                    }
                }
                Op::Identity => unreachable!(),
            };
        }
        for site in 0..self.model.n_sites() {
            match self.first[site] {
                NONE => {
                    if self.rng.gen::<bool>() {
                        self.string.state[site] = !self.string.state[site];
                    }
                }
                leg => self.string.state[site] = self.leg_spin(leg),
            }
        }
    }

    fn leg_spin(&self, leg: u32) -> bool {
        (self.vconf[(leg / 4) as usize] >> (leg % 4)) & 1 != 0
    }

    fn leg_site(&self, leg: u32) -> usize {
        let (i, j) = self.vsites[(leg / 4) as usize];
        if leg % 2 == 0 {
            i as usize
        } else {
            j as usize
        }
    }

    /// Lower and upper end legs of the link on `site` that spans the gap just below position `pt`.
    fn link_around(&self, site: usize, pt: usize) -> Option<(u32, u32)> {
        let verts = &self.site_vertices[site];
        if verts.is_empty() {
            return None;
        }
        let len = verts.len();
        let idx = verts.partition_point(|&v| self.pos[v as usize] < pt);
        let above = verts[idx % len];
        let below = verts[(idx + len - 1) % len];
        let side = |v: u32| if self.vsites[v as usize].0 as usize == site { 0 } else { 1 };
        Some((4 * below + 2 + side(below), 4 * above + side(above)))
    }

    fn directed_loops(&mut self, mut yy: Option<&mut YySample>) {
        let n = self.string.n_ops;
        let n_sites = self.model.n_sites();
        let periodic = self.model.is_periodic();
        let mut trail: Vec<u32> = Vec::new();
        let mut hits: Vec<(usize, f64)> = Vec::new();
        for _ in 0..self.loops_per_sweep {
            if n == 0 {
                break;
            }
            let i = self.rng.gen_range(0..n_sites);
            let pt = self.pos[self.rng.gen_range(0..n)];
            let up = self.rng.gen::<bool>();
            let Some((a_leg, b_leg)) = self.link_around(i, pt) else {
                if let Some(acc) = yy.as_deref_mut() {
                    acc.loops += 1;
                    acc.by_displacement[0] += 0.25;
                    acc.total += 0.25;
                }
                continue;
            };
            trail.clear();
            hits.clear();
            let mut enter = if up { b_leg } else { a_leg };
            let mut closed = false;
            while trail.len() < MAX_LOOP_LEGS {
                let v = (enter / 4) as usize;
                let l = (enter % 4) as usize;
                let conf = self.vconf[v];
                let bond = match self.string.ops[self.pos[v]] {
                    Op::BondDiag(b) | Op::BondFlip(b) => b as usize,
                    _ => unreachable!("x-basis vertices are bond operators"),
                };
                let e = self.model.table(bond).sample(conf, l, self.rng.gen());
                self.vconf[v] = conf ^ (1 << l) ^ (1 << e);
                trail.push(enter);
                let exit = 4 * v as u32 + e as u32;
                trail.push(exit);
                if exit == a_leg || exit == b_leg {
                    closed = true;
                    break;
                }
                if yy.is_some() {
                    let (lo, hi) = if e >= 2 { (exit, self.link[exit as usize]) } else { (self.link[exit as usize], exit) };
                    let (p_lo, p_hi) = (self.pos[(lo / 4) as usize], self.pos[(hi / 4) as usize]);
                    let spans = match p_lo.cmp(&p_hi) {
                        std::cmp::Ordering::Less => p_lo < pt && pt <= p_hi,
                        std::cmp::Ordering::Greater => pt > p_lo || pt <= p_hi,
                        std::cmp::Ordering::Equal => true,
                    };
                    if spans {
                        let phase = if self.leg_spin(lo) == self.leg_spin(a_leg) { -0.25 } else { 0.25 };
                        hits.push((self.leg_site(lo), phase));
                    }
                }
                enter = self.link[exit as usize];
            }
            self.stats.loops += 1;
            self.stats.legs += trail.len() as u64;
            if !closed {
                for &leg in trail.iter().rev() {
                    self.vconf[(leg / 4) as usize] ^= 1 << (leg % 4);
                }
                self.stats.aborted += 1;
                continue;
            }
            if let Some(acc) = yy.as_deref_mut() {
                acc.loops += 1;
                acc.by_displacement[0] += 0.25;
                acc.total += 0.25;
                for &(j, phase) in &hits {
                    acc.total += phase;
                    if periodic {
                        acc.by_displacement[self.model.displacement(i, j)] += phase;
                    }
                }
            }
        }
    }

    fn clusters(&mut self) {
        let n = self.string.n_ops;
        let mut visited = vec![false; 4 * n];
        for (v, &(_, j)) in self.vsites.iter().enumerate() {
            if j == NONE {
                visited[4 * v + 1] = true;
                visited[4 * v + 3] = true;
            }
        }
        let mut stack: Vec<u32> = Vec::new();
        for start in 0..4 * n {
            if visited[start] {
                continue;
            }
            let flip = self.rng.gen::<bool>();
            stack.push(start as u32);
            while let Some(leg) = stack.pop() {
                if visited[leg as usize] {
                    continue;
                }
                visited[leg as usize] = true;
                let v = (leg / 4) as usize;
                if flip {
                    self.vconf[v] ^= 1 << (leg % 4);
                }
                stack.push(self.link[leg as usize]);
                if self.vsites[v].1 != NONE {
                    for k in 0..4 {
                        stack.push(4 * v as u32 + k);
                    }
                }
            }
        }
        self.stats.loops += 1;
    }

    /// Operator-string invariants: propagation periodicity and the operator count.
    pub fn check_invariants(&self) -> bool {
        let count = self.string.ops.iter().filter(|op| !op.is_identity()).count();
        count == self.string.n_ops && count <= self.string.cutoff() && self.string.is_periodic(self.model.bonds())
    }

    /// ⟨J^x⟩ averaged over the propagated states (x basis).
    pub fn jx_sample(&self) -> f64 {
        let n = self.model.n_sites();
        let mag = |s: &[bool]| s.iter().filter(|&&b| b).count() as f64 - 0.5 * n as f64;
        if self.string.n_ops == 0 {
            return mag(&self.string.state);
        }
        let mut total = 0.0;
        self.string.for_each_propagated(self.model.bonds(), |s| total += mag(s));
        total / self.string.n_ops as f64
    }

    /// (⟨(J^z)²⟩ sample, (1/β)∫⟨J^z(τ)J^z⟩dτ sample) from the propagated states (z basis).
    pub fn jz_samples(&self) -> (f64, f64) {
        let n_sites = self.model.n_sites();
        let mag = |s: &[bool]| s.iter().filter(|&&b| b).count() as f64 - 0.5 * n_sites as f64;
        let n = self.string.n_ops;
        if n == 0 {
            let m = mag(&self.string.state);
            return (m * m, m * m);
        }
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        self.string.for_each_propagated(self.model.bonds(), |s| {
            let m = mag(s);
            sum += m;
            sum_sq += m * m;
        });
        let nf = n as f64;
        (sum_sq / nf, (sum * sum + sum_sq) / (nf * (nf + 1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tfim_core::{Boundary, Lattice};

    fn square(l: usize) -> Lattice {
        Lattice::hypercubic(2, l, Boundary::Periodic, 1.0)
    }

    #[test]
    fn updates_preserve_invariants() {
        for repr in [Representation::XBasis, Representation::ZBasis] {
            let model = SseModel::new(&square(4), 2.0, 2.0, repr).unwrap();
            let mut chain = SseChain::new(model, 11, 0);
            for _ in 0..200 {
                chain.sweep(None);
                chain.adjust_cutoff(chain.n_ops()).unwrap();
                assert!(chain.check_invariants(), "{repr:?}");
            }
            assert!(chain.n_ops() > 0);
        }
    }

    #[test]
    fn displacement_matches_lattice() {
        let lat = square(5);
        let model = SseModel::new(&lat, 1.0, 1.0, Representation::XBasis).unwrap();
        for (i, j) in [(0, 7), (13, 2), (24, 24), (6, 20)] {
            assert_eq!(model.displacement(i, j), lat.displacement(i, j));
        }
    }

    #[test]
    fn offsets_agree_between_bases() {
        let lat = square(3);
        let x = SseModel::new(&lat, 1.3, 1.0, Representation::XBasis).unwrap();
        let sum: f64 = lat.bonds.iter().enumerate().map(|(b, _)| x.table(b).weights.offset).sum();
        assert!((sum - x.energy_offset()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_setups() {
        assert!(SseModel::new(&square(2), 1.0, 0.0, Representation::ZBasis).is_err());
        assert!(SseModel::new(&square(2), -1.0, 1.0, Representation::ZBasis).is_err());
        let isolated = Lattice::from_bonds(3, vec![(0, 1)], 1.0);
        assert!(SseModel::new(&isolated, 1.0, 1.0, Representation::XBasis).is_err());
        assert!(SseModel::new(&isolated, 1.0, 1.0, Representation::ZBasis).is_ok());
    }
}
