//! Total-spin sectors |S; M⟩ of N spins-1/2 and the tridiagonal sector Hamiltonian.

use num_bigint::BigUint;
use statrs::function::gamma::ln_gamma;
use tfim_core::{ModelError, Result};

/// One total-spin sector. Spins are stored doubled so half-integer S is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinSectorBasis {
    pub n: usize,
    pub twice_s: usize,
}

impl SpinSectorBasis {
    pub fn new(n: usize, twice_s: usize) -> Result<Self> {
        if twice_s > n || (n - twice_s) % 2 != 0 {
            return Err(ModelError::InvalidSpec(format!("2S = {twice_s} is not a total spin of {n} spins-1/2")));
        }
        Ok(SpinSectorBasis { n, twice_s })
    }

    /// Every sector of N spins, from S = N/2 downwards.
    pub fn all(n: usize) -> Vec<Self> {
        (0..=n / 2).map(|k| SpinSectorBasis { n, twice_s: n - 2 * k }).collect()
    }

    pub fn spin(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_s + 1
    }

    /// M of basis index m = 0..2S.
    pub fn m_value(&self, m: usize) -> f64 {
        m as f64 - self.spin()
    }

    pub fn degeneracy(&self) -> BigUint {
        sector_degeneracy(self.n, self.twice_s)
    }

    pub fn ln_degeneracy(&self) -> f64 {
        ln_sector_degeneracy(self.n, self.twice_s)
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut c = BigUint::from(1u32);
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// D(N, S) = C(N, N/2 − S) − C(N, N/2 − S − 1), with S given as 2S.
pub fn sector_degeneracy(n: usize, twice_s: usize) -> BigUint {
    if twice_s > n || (n - twice_s) % 2 != 0 {
        return BigUint::from(0u32);
    }
    let k = (n - twice_s) / 2;
    let top = binomial(n, k);
    if k == 0 {
        top
    } else {
        top - binomial(n, k - 1)
    }
}

/// ln D(N, S) = ln C(N, k) + ln((2S + 1)/(N − k + 1)) with k = N/2 − S.
pub fn ln_sector_degeneracy(n: usize, twice_s: usize) -> f64 {
    let k = (n - twice_s) / 2;
    let ln_c = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
    ln_c + ((twice_s + 1) as f64 / (n - k + 1) as f64).ln()
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// off[m] couples m and m + 1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        let d = self.dim();
        faer::Mat::from_fn(d, d, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                0.0
            }
        })
    }

    /// Number of eigenvalues below x (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Lowest eigenvalue by bisection to absolute accuracy `tol`.
    pub fn lowest_eigenvalue(&self, tol: f64) -> f64 {
        let d = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..d {
            let r = (if i > 0 { self.off[i - 1].abs() } else { 0.0 }) + (if i + 1 < d { self.off[i].abs() } else { 0.0 });
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// H = −(J/N)((J^z)² − N/4) − Γ J^x restricted to total spin S, in the |S; M⟩ basis
/// ordered M = −S … S.
pub fn sector_hamiltonian(sector: SpinSectorBasis, g: f64, coupling: f64) -> SymTridiagonal {
    let n = sector.n as f64;
    let s = sector.spin();
    let field = g * coupling;
    let diag = (0..sector.dim())
        .map(|m| {
            let mz = sector.m_value(m);
            -(coupling / n) * (mz * mz - n / 4.0)
        })
        .collect();
    let off = (0..sector.dim().saturating_sub(1))
        .map(|m| {
            let mz = sector.m_value(m);
            -field * 0.5 * (s * (s + 1.0) - mz * (mz + 1.0)).sqrt()
        })
        .collect();
    SymTridiagonal { diag, off }
}

/// J^x in the |S; M⟩ basis (field term without the −Γ).
pub fn sector_jx(sector: SpinSectorBasis) -> SymTridiagonal {
    let s = sector.spin();
    SymTridiagonal {
        diag: vec![0.0; sector.dim()],
        off: (0..sector.dim().saturating_sub(1))
            .map(|m| {
                let mz = sector.m_value(m);
                0.5 * (s * (s + 1.0) - mz * (mz + 1.0)).sqrt()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degeneracies_of_four_spins() {
        assert_eq!(sector_degeneracy(4, 4), BigUint::from(1u32));
        assert_eq!(sector_degeneracy(4, 2), BigUint::from(3u32));
        assert_eq!(sector_degeneracy(4, 0), BigUint::from(2u32));
        let total: usize = SpinSectorBasis::all(4).iter().map(|s| s.dim() * s.degeneracy().to_u64_digits()[0] as usize).sum();
        assert_eq!(total, 16);
    }

    #[test]
    fn degeneracies_of_two_spins() {
        assert_eq!(sector_degeneracy(2, 2), BigUint::from(1u32));
        assert_eq!(sector_degeneracy(2, 0), BigUint::from(1u32));
        assert_eq!(sector_degeneracy(1000, 1000), BigUint::from(1u32));
    }

    #[test]
    fn dimension_count_is_two_to_the_n() {
        for n in [7, 10, 31] {
            let total: BigUint = SpinSectorBasis::all(n).iter().map(|s| s.degeneracy() * BigUint::from(s.dim())).sum();
            assert_eq!(total, BigUint::from(1u32) << n);
        }
    }

    #[test]
    fn log_degeneracy_matches_exact() {
        for (n, ts) in [(20, 4), (21, 1), (60, 0), (12, 12)] {
            let exact: f64 = sector_degeneracy(n, ts).to_string().parse().unwrap();
            assert!((ln_sector_degeneracy(n, ts) - exact.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_wrong_parity() {
        assert!(SpinSectorBasis::new(4, 3).is_err());
        assert!(SpinSectorBasis::new(4, 6).is_err());
    }

    #[test]
    fn zero_field_is_diagonal() {
        let sec = SpinSectorBasis::new(6, 6).unwrap();
        let h = sector_hamiltonian(sec, 0.0, 1.0);
        assert!(h.off.iter().all(|&x| x == 0.0));
        // M = ±3: −(1/6)(9 − 3/2)
        assert!((h.diag[0] + 1.25).abs() < 1e-15);
        assert!((h.diag[6] + 1.25).abs() < 1e-15);
    }

    #[test]
    fn singlet_sector_is_scalar() {
        let sec = SpinSectorBasis::new(8, 0).unwrap();
        let h = sector_hamiltonian(sec, 1.3, 1.0);
        assert_eq!(h.dim(), 1);
        assert!((h.diag[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bisection_finds_lowest() {
        let sec = SpinSectorBasis::new(9, 7).unwrap();
        let h = sector_hamiltonian(sec, 0.8, 1.0);
        let dense = h.to_dense();
        let eig = dense.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((h.lowest_eigenvalue(1e-13) - min).abs() < 1e-12);
    }
}
