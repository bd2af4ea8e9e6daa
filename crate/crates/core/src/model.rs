use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Spatial dimension of the lattice, or the infinite-range (all-to-all) limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Finite(u8),
    Infinite,
}

impl Dimension {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "infinity" => Ok(Dimension::Infinite),
            other => match other.parse::<u8>() {
                Ok(d @ 1..=3) => Ok(Dimension::Finite(d)),
                _ => Err(ModelError::InvalidSpec(format!("dimension must be 1, 2, 3 or inf, got {s:?}"))),
            },
        }
    }

    /// Finite dimension, `None` for the infinite-range model.
    pub fn finite(self) -> Option<usize> {
        match self {
            Dimension::Finite(d) => Some(d as usize),
            Dimension::Infinite => None,
        }
    }

    /// Known location of the quantum critical point g_c = Γ/J.
    pub fn critical_coupling(self) -> f64 {
        match self {
            Dimension::Finite(1) => G_C_1D,
            Dimension::Finite(2) => G_C_2D,
            Dimension::Finite(_) => G_C_3D,
            Dimension::Infinite => G_C_INF,
        }
    }
}

pub const G_C_1D: f64 = 0.5;
pub const G_C_2D: f64 = 1.52219;
pub const G_C_3D: f64 = 2.579;
pub const G_C_INF: f64 = 1.0;

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Finite(d) => write!(f, "{d}"),
            Dimension::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Dimension {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dimension::Finite(d) => s.serialize_u8(*d),
            Dimension::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dimension {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        let raw = Raw::deserialize(d)?;
        let text = match raw {
            Raw::Int(v) => v.to_string(),
            Raw::Str(s) => s,
        };
        Dimension::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Input record shared by every backend.
///
/// `size` is the linear extent L for finite dimensions and the total spin
/// count N for the infinite-range model. Temperatures are in units of J;
/// `temperature == 0` selects the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dimension: Dimension,
    pub size: usize,
    pub coupling: f64,
    pub g: f64,
    pub temperature: f64,
    pub boundary: Boundary,
}

impl ModelSpec {
    pub fn new(dimension: Dimension, size: usize, g: f64, temperature: f64, boundary: Boundary) -> Self {
        ModelSpec { dimension, size, coupling: 1.0, g, temperature, boundary }
    }

    pub fn chain(n: usize, g: f64, temperature: f64) -> Self {
        Self::new(Dimension::Finite(1), n, g, temperature, Boundary::Open)
    }

    pub fn infinite_range(n: usize, g: f64, temperature: f64) -> Self {
        Self::new(Dimension::Infinite, n, g, temperature, Boundary::Open)
    }

    pub fn hypercubic(d: u8, l: usize, g: f64, temperature: f64) -> Self {
        Self::new(Dimension::Finite(d), l, g, temperature, Boundary::Periodic)
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn n_sites(&self) -> usize {
        match self.dimension {
            Dimension::Finite(d) => self.size.pow(d as u32),
            Dimension::Infinite => self.size,
        }
    }

    /// Transverse field Γ = g·J.
    pub fn field(&self) -> f64 {
        self.g * self.coupling
    }

    /// Inverse temperature, `f64::INFINITY` at T = 0.
    pub fn beta(&self) -> f64 {
        if self.temperature == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.temperature
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ModelError::InvalidSpec(m));
        if !(self.coupling > 0.0) || !self.coupling.is_finite() {
            return bad(format!("coupling J must be positive, got {}", self.coupling));
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return bad(format!("field ratio g must be non-negative, got {}", self.g));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return bad(format!("temperature must be non-negative, got {}", self.temperature));
        }
        if self.size == 0 {
            return bad("lattice size must be positive".into());
        }
        if let Dimension::Finite(d) = self.dimension {
            if !(1..=3).contains(&d) {
                return bad(format!("dimension must be 1, 2 or 3, got {d}"));
            }
            if self.boundary == Boundary::Periodic && self.size < 3 && self.size != 1 {
                return bad("periodic lattices need L >= 3".into());
            }
        }
        Ok(())
    }
}

/// Bond graph of a model together with the Ising strength per bond.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub n_sites: usize,
    pub bonds: Vec<(usize, usize)>,
    /// Coefficient multiplying S^z_i S^z_j on every bond (positive: ferromagnetic).
    pub bond_coupling: f64,
    shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Hypercubic { d: usize, l: usize, periodic: bool },
    Complete,
    Custom,
}

impl Lattice {
    pub fn hypercubic(d: usize, l: usize, boundary: Boundary, coupling: f64) -> Self {
        let n = l.pow(d as u32);
        let periodic = boundary == Boundary::Periodic;
        let mut bonds = Vec::with_capacity(d * n);
        for i in 0..n {
            let x = coords(i, d, l);
            for axis in 0..d {
                let mut y = x.clone();
                if x[axis] + 1 < l {
                    y[axis] += 1;
                } else if periodic && l > 1 {
                    y[axis] = 0;
                } else {
                    continue;
                }
                bonds.push((i, index(&y, l)));
            }
        }
        Lattice { n_sites: n, bonds, bond_coupling: coupling, shape: Shape::Hypercubic { d, l, periodic } }
    }

    /// All-to-all graph of the infinite-range model, −(J/N)((J^z)² − N/4) = −(2J/N) Σ_{i<j} S^z_i S^z_j.
    pub fn complete(n: usize, coupling: f64) -> Self {
        let mut bonds = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 0..n {
            for j in i + 1..n {
                bonds.push((i, j));
            }
        }
        Lattice { n_sites: n, bonds, bond_coupling: 2.0 * coupling / n as f64, shape: Shape::Complete }
    }

    pub fn from_bonds(n_sites: usize, bonds: Vec<(usize, usize)>, bond_coupling: f64) -> Self {
        Lattice { n_sites, bonds, bond_coupling, shape: Shape::Custom }
    }

    pub fn for_spec(spec: &ModelSpec) -> Self {
        match spec.dimension {
            Dimension::Finite(d) => Lattice::hypercubic(d as usize, spec.size, spec.boundary, spec.coupling),
            Dimension::Infinite => Lattice::complete(spec.size, spec.coupling),
        }
    }

    pub fn coordination(&self) -> Vec<usize> {
        let mut z = vec![0; self.n_sites];
        for &(i, j) in &self.bonds {
            z[i] += 1;
            z[j] += 1;
        }
        z
    }

    /// `(d, L)` when the lattice is a periodic hypercube.
    pub fn periodic_extent(&self) -> Option<(usize, usize)> {
        match self.shape {
            Shape::Hypercubic { d, l, periodic: true } => Some((d, l)),
            _ => None,
        }
    }

    pub fn extent(&self) -> Option<(usize, usize)> {
        match self.shape {
            Shape::Hypercubic { d, l, .. } => Some((d, l)),
            _ => None,
        }
    }

    /// Index of the periodic displacement from site `i` to site `j`.
    pub fn displacement(&self, i: usize, j: usize) -> usize {
        let (d, l) = self.periodic_extent().expect("displacements need a periodic hypercube");
        let a = coords(i, d, l);
        let b = coords(j, d, l);
        let r: Vec<usize> = a.iter().zip(&b).map(|(x, y)| (y + l - x) % l).collect();
        index(&r, l)
    }

    /// Site reached from `i` by displacement `r`.
    pub fn translate(&self, i: usize, r: usize) -> usize {
        let (d, l) = self.periodic_extent().expect("translations need a periodic hypercube");
        let a = coords(i, d, l);
        let b = coords(r, d, l);
        let s: Vec<usize> = a.iter().zip(&b).map(|(x, y)| (x + y) % l).collect();
        index(&s, l)
    }
}

pub fn coords(i: usize, d: usize, l: usize) -> Vec<usize> {
    let mut x = Vec::with_capacity(d);
    let mut r = i;
    for _ in 0..d {
        x.push(r % l);
        r /= l;
    }
    x
}

pub fn index(x: &[usize], l: usize) -> usize {
    x.iter().rev().fold(0, |acc, &c| acc * l + c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsystemShape {
    Segment,
    Square,
    Cube,
}

impl SubsystemShape {
    pub fn dimension(self) -> usize {
        match self {
            SubsystemShape::Segment => 1,
            SubsystemShape::Square => 2,
            SubsystemShape::Cube => 3,
        }
    }

    pub fn for_dimension(d: usize) -> Self {
        match d {
            1 => SubsystemShape::Segment,
            2 => SubsystemShape::Square,
            _ => SubsystemShape::Cube,
        }
    }
}

/// A block of sites A inside a hypercubic lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemGeometry {
    pub shape: SubsystemShape,
    pub extent: usize,
    pub offset: Vec<usize>,
    pub sites: Vec<usize>,
}

impl SubsystemGeometry {
    /// Block of linear extent `ell`, centred in an `L^d` lattice.
    pub fn centered(shape: SubsystemShape, ell: usize, d: usize, l: usize) -> Result<Self> {
        let da = shape.dimension();
        if da > d {
            return Err(ModelError::InvalidSpec(format!("{shape:?} does not fit in a {d}-dimensional lattice")));
        }
        if ell == 0 || ell > l {
            return Err(ModelError::InvalidSpec(format!("subsystem extent {ell} must lie in 1..={l}")));
        }
        let start = (l - ell) / 2;
        let offset: Vec<usize> = (0..d).map(|axis| if axis < da { start } else { l / 2 }).collect();
        let count = ell.pow(da as u32);
        let mut sites = Vec::with_capacity(count);
        for k in 0..count {
            let local = coords(k, da, ell);
            let x: Vec<usize> = (0..d).map(|axis| offset[axis] + if axis < da { local[axis] } else { 0 }).collect();
            sites.push(index(&x, l));
        }
        Ok(SubsystemGeometry { shape, extent: ell, offset, sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Number of ordered pairs (i, j) in A per periodic displacement index.
    pub fn displacement_counts(&self, lattice: &Lattice) -> Vec<usize> {
        let mut counts = vec![0; lattice.n_sites];
        for &i in &self.sites {
            for &j in &self.sites {
                counts[lattice.displacement(i, j)] += 1;
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_lattice_bond_count() {
        let lat = Lattice::hypercubic(2, 4, Boundary::Periodic, 1.0);
        assert_eq!(lat.bonds.len(), 32);
        assert!(lat.coordination().iter().all(|&z| z == 4));
        let open = Lattice::hypercubic(1, 5, Boundary::Open, 1.0);
        assert_eq!(open.bonds, vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn displacement_roundtrip() {
        let lat = Lattice::hypercubic(2, 5, Boundary::Periodic, 1.0);
        for i in 0..25 {
            for j in 0..25 {
                assert_eq!(lat.translate(i, lat.displacement(i, j)), j);
            }
        }
    }

    #[test]
    fn centered_square() {
        let geom = SubsystemGeometry::centered(SubsystemShape::Square, 2, 2, 4).unwrap();
        assert_eq!(geom.sites, vec![5, 6, 9, 10]);
        let lat = Lattice::hypercubic(2, 4, Boundary::Periodic, 1.0);
        let counts = geom.displacement_counts(&lat);
        assert_eq!(counts.iter().sum::<usize>(), 16);
        assert_eq!(counts[0], 4);
    }

    #[test]
    fn dimension_parsing() {
        assert_eq!(Dimension::parse("inf").unwrap(), Dimension::Infinite);
        assert_eq!(Dimension::parse("2").unwrap(), Dimension::Finite(2));
        assert!(Dimension::parse("4").is_err());
    }

    #[test]
    fn infinite_range_coupling() {
        let lat = Lattice::complete(4, 1.0);
        assert_eq!(lat.bonds.len(), 6);
        assert!((lat.bond_coupling - 0.5).abs() < 1e-15);
    }
}
