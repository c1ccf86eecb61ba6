//! Banded complex LU with partial pivoting and smallest-singular-value
//! estimation by inverse power iteration on `A^{-H} A^{-1}`.

use num_complex::Complex64;
use thiserror::Error;

use crate::dd::{self, Cdd, Dd};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandError {
    #[error("matrix is singular to working precision at pivot {0}")]
    Singular(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("power iteration produced a non-finite iterate")]
    NonFinite,
}

/// Scalar field the solver runs in.
pub trait Field:
    Copy
    + Send
    + Sync
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
    fn zero() -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn conj(self) -> Self;
    /// Cheap magnitude for pivoting.
    fn abs1(&self) -> f64;
    /// |z|^2 in the working precision, rounded to f64 only at the end of a sum.
    fn norm_sqr_acc(values: &[Self]) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs1(&self) -> f64 {
        self.re.abs() + self.im.abs()
    }
    fn norm_sqr_acc(values: &[Self]) -> f64 {
        values.iter().map(|v| v.norm_sqr()).sum()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Field for Cdd {
    fn zero() -> Self {
        Cdd::new(Dd::ZERO, Dd::ZERO)
    }
    fn from_c64(z: Complex64) -> Self {
        dd::cdd(z)
    }
    fn to_c64(self) -> Complex64 {
        dd::to_c64(self)
    }
    fn conj(self) -> Self {
        Cdd::new(self.re, -self.im)
    }
    fn abs1(&self) -> f64 {
        dd::abs1(self)
    }
    fn norm_sqr_acc(values: &[Self]) -> f64 {
        let mut acc = Dd::ZERO;
        for v in values {
            acc += dd::norm_sqr(v);
        }
        acc.to_f64()
    }
    fn scale(self, s: f64) -> Self {
        let s = Dd::from_f64(s);
        Cdd::new(self.re * s, self.im * s)
    }
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` keeps columns `i-kl ..= i+ku+kl`; the extra `kl` slots absorb
/// pivoting fill.
#[derive(Clone, Debug)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Field> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            T::zero()
        }
    }

    /// Panics outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add_diagonal(&mut self, shift: T) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] = self.data[k] + shift;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>, BandError> {
        if x.len() != self.n {
            return Err(BandError::Dimension { expected: self.n, got: x.len() });
        }
        let mut y = vec![T::zero(); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = T::zero();
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                acc = acc + self.data[self.idx(i, j)] * *xj;
            }
            *yi = acc;
        }
        Ok(y)
    }

    pub fn adjoint_matvec(&self, x: &[T]) -> Result<Vec<T>, BandError> {
        if x.len() != self.n {
            return Err(BandError::Dimension { expected: self.n, got: x.len() });
        }
        let mut y = vec![T::zero(); self.n];
        for (i, xi) in x.iter().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for (j, yj) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yj = *yj + self.data[self.idx(i, j)].conj() * *xi;
            }
        }
        Ok(y)
    }

    pub fn map<U: Field>(&self, f: impl Fn(T) -> U) -> BandMatrix<U> {
        BandMatrix {
            n: self.n,
            kl: self.kl,
            ku: self.ku,
            width: self.width,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_c64()).collect())
            .collect()
    }

    pub fn factor(&self) -> Result<BandLu<T>, BandError> {
        let mut a = self.clone();
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.data[a.idx(k, k)].abs1();
            for i in k + 1..=last {
                let v = a.data[a.idx(i, k)].abs1();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 || !best.is_finite() {
                return Err(BandError::Singular(k));
            }
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (ik, ip) = (a.idx(k, j), a.idx(p, j));
                    a.data.swap(ik, ip);
                }
            }
            let pivot = a.data[a.idx(k, k)];
            for i in k + 1..=last {
                let ik = a.idx(i, k);
                let l = a.data[ik] / pivot;
                a.data[ik] = l;
                for j in k + 1..=jmax {
                    let ij = a.idx(i, j);
                    let kj = a.idx(k, j);
                    a.data[ij] = a.data[ij] - l * a.data[kj];
                }
            }
        }
        Ok(BandLu { a, piv })
    }
}

/// Factorization `M A = U` with `M = L_{n-1} P_{n-1} ... L_0 P_0`.
#[derive(Clone, Debug)]
pub struct BandLu<T> {
    a: BandMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Field> BandLu<T> {
    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, BandError> {
        let a = &self.a;
        let n = a.n;
        if b.len() != n {
            return Err(BandError::Dimension { expected: n, got: b.len() });
        }
        let (kl, ku) = (a.kl, a.ku);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for (i, xi) in x.iter_mut().enumerate().take((k + kl).min(n - 1) + 1).skip(k + 1) {
                *xi = *xi - a.data[a.idx(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for (j, xj) in x.iter().enumerate().take((i + kl + ku).min(n - 1) + 1).skip(i + 1) {
                acc = acc - a.data[a.idx(i, j)] * *xj;
            }
            x[i] = acc / a.data[a.idx(i, i)];
        }
        Ok(x)
    }

    /// Solves `A^H y = c`.
    pub fn solve_adjoint(&self, c: &[T]) -> Result<Vec<T>, BandError> {
        let a = &self.a;
        let n = a.n;
        if c.len() != n {
            return Err(BandError::Dimension { expected: n, got: c.len() });
        }
        let (kl, ku) = (a.kl, a.ku);
        let mut t = c.to_vec();
        // U^H t = c
        for i in 0..n {
            let mut acc = t[i];
            let lo = i.saturating_sub(kl + ku);
            for (j, tj) in t.iter().enumerate().take(i).skip(lo) {
                acc = acc - a.data[a.idx(j, i)].conj() * *tj;
            }
            t[i] = acc / a.data[a.idx(i, i)].conj();
        }
        for k in (0..n).rev() {
            let mut acc = t[k];
            for (i, ti) in t.iter().enumerate().take((k + kl).min(n - 1) + 1).skip(k + 1) {
                acc = acc - a.data[a.idx(i, k)].conj() * *ti;
            }
            t[k] = acc;
            let p = self.piv[k];
            if p != k {
                t.swap(k, p);
            }
        }
        Ok(t)
    }
}

/// Outcome of the inverse power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaMin {
    pub sigma_min: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_REL_TOL: f64 = 1e-12;

fn start_vector<T: Field>(n: usize) -> Vec<T> {
    // deterministic, no special structure so it overlaps every singular vector
    (0..n)
        .map(|k| {
            let t = k as f64;
            T::from_c64(Complex64::new(
                1.0 + 0.5 * (0.7 * t).sin(),
                0.3 * (1.3 * t + 0.4).cos(),
            ))
        })
        .collect()
}

fn normalize<T: Field>(v: &mut [T]) -> Result<f64, BandError> {
    let nrm = T::norm_sqr_acc(v).sqrt();
    if !nrm.is_finite() || nrm == 0.0 {
        return Err(BandError::NonFinite);
    }
    let inv = 1.0 / nrm;
    for x in v.iter_mut() {
        *x = x.scale(inv);
    }
    Ok(nrm)
}

/// Smallest singular value of the factored matrix.
pub fn sigma_min<T: Field>(lu: &BandLu<T>, max_iter: usize, rel_tol: f64) -> Result<SigmaMin, BandError> {
    let n = lu.n();
    let mut v: Vec<T> = start_vector(n);
    normalize(&mut v)?;
    let mut prev = 0.0f64;
    for it in 1..=max_iter {
        let w = lu.solve(&v)?;
        let s = T::norm_sqr_acc(&w).sqrt();
        if !s.is_finite() {
            return Err(BandError::NonFinite);
        }
        let mut u = lu.solve_adjoint(&w)?;
        normalize(&mut u)?;
        v = u;
        if it > 1 && (s - prev).abs() <= rel_tol * s {
            return Ok(SigmaMin { sigma_min: 1.0 / s, iterations: it, converged: true });
        }
        prev = s;
    }
    Ok(SigmaMin { sigma_min: 1.0 / prev, iterations: max_iter, converged: false })
}
