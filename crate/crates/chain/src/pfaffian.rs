//! Pfaffians of real or complex antisymmetric matrices by Parlett–Reid
//! tridiagonalization with partial pivoting.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{ChainError, Result};

pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self> + PartialEq
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Square<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Square<T> {
    pub fn zeros(n: usize) -> Self {
        Square { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Square { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    fn swap_rows_cols(&mut self, a: usize, b: usize) {
        let n = self.n;
        for j in 0..n {
            self.data.swap(a * n + j, b * n + j);
        }
        for i in 0..n {
            self.data.swap(i * n + a, i * n + b);
        }
    }
}

/// Pf(A) for an antisymmetric matrix of even dimension.
pub fn pfaffian<T: Scalar>(a: &Square<T>) -> Result<T> {
    let n = a.n;
    if n % 2 == 1 {
        return Err(ChainError::OddDimension(n));
    }
    let scale = a.data.iter().fold(0.0f64, |m, x| m.max(x.modulus()));
    for i in 0..n {
        for j in 0..=i {
            if (a.get(i, j) + a.get(j, i)).modulus() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(ChainError::NotAntisymmetric);
            }
        }
    }
    Ok(pfaffian_unchecked(a.clone()))
}

/// Pf(A) without input validation; consumes the work matrix.
pub fn pfaffian_unchecked<T: Scalar>(mut a: Square<T>) -> T {
    let n = a.n;
    let mut pf = T::one();
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a.get(k + 1, k).modulus();
        for i in k + 2..n {
            let m = a.get(i, k).modulus();
            if m > best {
                best = m;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows_cols(k + 1, kp);
            pf = -pf;
        }
        let piv = a.get(k, k + 1);
        if piv.modulus() == 0.0 {
            return T::zero();
        }
        pf = pf * piv;
        if k + 2 < n {
            let tau: Vec<T> = (k + 2..n).map(|j| a.get(k, j) / piv).collect();
            let col: Vec<T> = (k + 2..n).map(|i| a.get(i, k + 1)).collect();
            let w = n;
            for (ii, i) in (k + 2..n).enumerate() {
                let (ti, ci) = (tau[ii], col[ii]);
                let row = &mut a.data[i * w + k + 2..i * w + n];
                for (jj, x) in row.iter_mut().enumerate() {
                    *x = *x + ti * col[jj] - ci * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// det(A) by LU with partial pivoting.
pub fn determinant<T: Scalar>(a: &Square<T>) -> T {
    let n = a.n;
    let mut m = a.clone();
    let mut det = T::one();
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m.get(i, k).modulus() > m.get(p, k).modulus() {
                p = i;
            }
        }
        if m.get(p, k).modulus() == 0.0 {
            return T::zero();
        }
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = m.get(k, k);
        det = det * piv;
        for i in k + 1..n {
            let f = m.get(i, k) / piv;
            for j in k + 1..n {
                let v = m.get(i, j) - f * m.get(k, j);
                m.set(i, j, v);
            }
        }
    }
    det
}

/// Relative deviation | |Pf|² − |det| | / |det| as a conditioning diagnostic.
pub fn pfaffian_consistency<T: Scalar>(a: &Square<T>, pf: T) -> f64 {
    let det = determinant(a).modulus();
    let pf2 = pf.modulus().powi(2);
    if det == 0.0 {
        return if pf2 == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (pf2 - det).abs() / det
}
