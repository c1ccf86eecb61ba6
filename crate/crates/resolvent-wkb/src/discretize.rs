//! Matrix discretizations and numeric resolvent norms.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::banded::{self, BandError, BandMatrix};
use crate::dd::{cdd, Cdd, Dd};

type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizeError {
    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("invalid interval [{a}, {b}]")]
    Interval { a: f64, b: f64 },
    #[error("circle grids need a power-of-two size, got {0}")]
    NotPowerOfTwo(usize),
    #[error("operation needs a {expected} grid")]
    WrongGrid { expected: &'static str },
    #[error("grids differ: {0}")]
    GridMismatch(String),
    #[error("semiclassical parameter must be positive, got {0}")]
    NonPositiveH(f64),
    #[error("unsupported FD order {0}")]
    Order(usize),
    #[error("non-finite spectral parameter {0}")]
    NonFiniteZ(C64),
    #[error(transparent)]
    Band(#[from] BandError),
}

pub const MIN_POINTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Segment,
    Circle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub kind: GridKind,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid1D {
    /// `n` points including both endpoints; Dirichlet zeros sit just outside.
    pub fn segment(a: f64, b: f64, n: usize) -> Result<Self, DiscretizeError> {
        if n < MIN_POINTS {
            return Err(DiscretizeError::GridTooSmall { min: MIN_POINTS, got: n });
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(DiscretizeError::Interval { a, b });
        }
        Ok(Grid1D { kind: GridKind::Segment, a, b, n, dx: (b - a) / (n - 1) as f64 })
    }

    pub fn circle(n: usize) -> Result<Self, DiscretizeError> {
        if n < MIN_POINTS {
            return Err(DiscretizeError::GridTooSmall { min: MIN_POINTS, got: n });
        }
        if !n.is_power_of_two() {
            return Err(DiscretizeError::NotPowerOfTwo(n));
        }
        let tau = 2.0 * std::f64::consts::PI;
        Ok(Grid1D { kind: GridKind::Circle, a: 0.0, b: tau, n, dx: tau / n as f64 })
    }

    pub fn point(&self, k: usize) -> f64 {
        self.a + k as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    /// Grid point in double-double, `a + k (b - a)/(n - 1)`.
    pub fn point_dd(&self, k: usize) -> Dd {
        let a = Dd::from(self.a);
        let span = Dd::from(self.b) - a;
        let denom = match self.kind {
            GridKind::Segment => (self.n - 1) as f64,
            GridKind::Circle => self.n as f64,
        };
        a + span * Dd::from(k as f64) / Dd::from(denom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// Multiplication operator on a segment grid.
#[derive(Clone)]
pub enum Potential {
    /// `sum_k c_k x^k`, evaluated in double-double.
    Poly(Vec<C64>),
    Func(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Potential::Poly(c) => f.debug_tuple("Poly").field(c).finish(),
            Potential::Func(_) => f.write_str("Func(..)"),
        }
    }
}

impl Potential {
    pub fn eval_dd(&self, x: Dd) -> Cdd {
        match self {
            Potential::Poly(c) => {
                let xc = Cdd::new(x, Dd::from(0.0));
                let mut acc = cdd(C64::new(0.0, 0.0));
                for ck in c.iter().rev() {
                    acc = acc * xc + cdd(*ck);
                }
                acc
            }
            Potential::Func(f) => cdd(f(x.to_f64())),
        }
    }

    pub fn eval(&self, x: f64) -> C64 {
        crate::dd::to_c64(self.eval_dd(Dd::from(x)))
    }
}

#[derive(Clone, Debug)]
pub enum Storage {
    Band(BandMatrix<Cdd>),
    Dense(DMatrix<C64>),
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub storage: Storage,
    pub grid: Grid1D,
    pub h: f64,
    pub family: String,
    pub boundary: Boundary,
    /// Set when the grid resolves the local wavelength with fewer than 8 points.
    pub resolution_warning: bool,
}

impl OperatorMatrix {
    pub fn n(&self) -> usize {
        match &self.storage {
            Storage::Band(b) => b.n(),
            Storage::Dense(d) => d.nrows(),
        }
    }

    /// Square dense matrix as an operator; `grid` is nominal.
    pub fn from_dense(m: DMatrix<C64>, family: impl Into<String>) -> Result<Self, DiscretizeError> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(DiscretizeError::GridMismatch(format!("{}x{} is not square", n, m.ncols())));
        }
        let grid = Grid1D { kind: GridKind::Segment, a: 0.0, b: 1.0, n, dx: 1.0 / (n.max(2) - 1) as f64 };
        Ok(OperatorMatrix {
            storage: Storage::Dense(m),
            grid,
            h: 1.0,
            family: family.into(),
            boundary: Boundary::Dirichlet,
            resolution_warning: false,
        })
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>, DiscretizeError> {
        match &self.storage {
            Storage::Band(b) => {
                let xd: Vec<Cdd> = x.iter().map(|v| cdd(*v)).collect();
                Ok(b.matvec(&xd)?.into_iter().map(crate::dd::to_c64).collect())
            }
            Storage::Dense(d) => {
                if x.len() != d.ncols() {
                    return Err(BandError::Dimension { expected: d.ncols(), got: x.len() }.into());
                }
                let v = d * nalgebra::DVector::from_column_slice(x);
                Ok(v.iter().copied().collect())
            }
        }
    }
}

/// Integer stencils over a common denominator, so that the scaled
/// coefficients are exact in double-double.
struct Stencil {
    weights: [f64; 5],
    denom: f64,
}

const D1_4: Stencil = Stencil { weights: [1.0, -8.0, 0.0, 8.0, -1.0], denom: 12.0 };
const D2_4: Stencil = Stencil { weights: [-1.0, 16.0, -30.0, 16.0, -1.0], denom: 12.0 };
const D2_2: Stencil = Stencil { weights: [0.0, 1.0, -2.0, 1.0, 0.0], denom: 1.0 };

fn stencil_matrix(grid: &Grid1D, st: &Stencil, s: Cdd, pot: &Potential) -> BandMatrix<Cdd> {
    let n = grid.n;
    let mut m = BandMatrix::zeros(n, 2, 2);
    let inv = Dd::from(1.0) / Dd::from(st.denom);
    let s = Cdd::new(s.re * inv, s.im * inv);
    let stencil = &st.weights;
    for i in 0..n {
        for (o, c) in stencil.iter().enumerate() {
            let j = i as isize + o as isize - 2;
            if *c == 0.0 || j < 0 || j >= n as isize {
                continue;
            }
            m.set(i, j as usize, s * cdd(C64::new(*c, 0.0)));
        }
        let d = m.get(i, i) + pot.eval_dd(grid.point_dd(i));
        m.set(i, i, d);
    }
    m
}

fn max_abs_potential(grid: &Grid1D, pot: &Potential) -> f64 {
    (0..grid.n).map(|k| pot.eval(grid.point(k)).norm()).fold(0.0, f64::max)
}

fn check_segment(grid: &Grid1D, h: f64) -> Result<(), DiscretizeError> {
    if grid.kind != GridKind::Segment {
        return Err(DiscretizeError::WrongGrid { expected: "segment" });
    }
    if !(h > 0.0) {
        return Err(DiscretizeError::NonPositiveH(h));
    }
    Ok(())
}

/// `(hD)^2 + V` with Dirichlet conditions, central differences of order 2 or 4.
pub fn schrodinger_matrix(potential: &Potential, h: f64, grid: &Grid1D, order: usize) -> Result<OperatorMatrix, DiscretizeError> {
    check_segment(grid, h)?;
    let stencil = match order {
        2 => &D2_2,
        4 => &D2_4,
        o => return Err(DiscretizeError::Order(o)),
    };
    // (hD)^2 = -h^2 d^2/dx^2; the scale is computed in double-double
    let dx = Dd::from(grid.b - grid.a) / Dd::from((grid.n - 1) as f64);
    let hh = Dd::from(h) * Dd::from(h) / (dx * dx);
    let m = stencil_matrix(grid, stencil, Cdd::new(-hh, Dd::from(0.0)), potential);
    let vmax = max_abs_potential(grid, potential).max(1.0);
    Ok(OperatorMatrix {
        storage: Storage::Band(m),
        grid: *grid,
        h,
        family: "schrodinger".into(),
        boundary: Boundary::Dirichlet,
        resolution_warning: 8.0 * grid.dx > h / vmax.sqrt(),
    })
}

/// `hD + g` with `D = -i d/dx`, fourth-order central differences, Dirichlet.
pub fn first_order_matrix(g: &Potential, h: f64, grid: &Grid1D) -> Result<OperatorMatrix, DiscretizeError> {
    check_segment(grid, h)?;
    let dx = Dd::from(grid.b - grid.a) / Dd::from((grid.n - 1) as f64);
    let scale = Cdd::new(Dd::from(0.0), -(Dd::from(h) / dx));
    let m = stencil_matrix(grid, &D1_4, scale, g);
    let gmax = max_abs_potential(grid, g).max(1.0);
    Ok(OperatorMatrix {
        storage: Storage::Band(m),
        grid: *grid,
        h,
        family: "first-order".into(),
        boundary: Boundary::Dirichlet,
        resolution_warning: 8.0 * grid.dx > h / gmax,
    })
}

/// Fourier modes `k = modulation + j - n/2`, `j = 0..n`.
pub fn circle_modes(grid: &Grid1D, modulation: i64) -> Vec<i64> {
    let half = (grid.n / 2) as i64;
    (0..grid.n as i64).map(|j| modulation + j - half).collect()
}

/// Mode window centre for a spectral parameter: `xi = hk` near `-Im z`.
pub fn advection_modulation(z: C64, h: f64) -> i64 {
    (-z.im / h).round() as i64
}

/// `L = -sin(x)(hD)^2 - ihD` in the Fourier basis `e^{ikx}` on a window of
/// `n` consecutive modes; tridiagonal since `sin` couples `k` to `k ± 1`.
pub fn circle_matrix(h: f64, grid: &Grid1D, modulation: i64) -> Result<OperatorMatrix, DiscretizeError> {
    if grid.kind != GridKind::Circle {
        return Err(DiscretizeError::WrongGrid { expected: "circle" });
    }
    if !(h > 0.0) {
        return Err(DiscretizeError::NonPositiveH(h));
    }
    let ks = circle_modes(grid, modulation);
    let n = grid.n;
    let mut m = BandMatrix::zeros(n, 1, 1);
    let hd = Dd::from(h);
    let zero = Dd::from(0.0);
    for (j, &k) in ks.iter().enumerate() {
        let kd = Dd::from(k as f64);
        m.set(j, j, Cdd::new(zero, -(hd * kd)));
        let off = (hd * kd) * (hd * kd) * Dd::from(0.5);
        if j + 1 < n {
            m.set(j + 1, j, Cdd::new(zero, off));
        }
        if j >= 1 {
            m.set(j - 1, j, Cdd::new(zero, -off));
        }
    }
    Ok(OperatorMatrix {
        storage: Storage::Band(m),
        grid: *grid,
        h,
        family: "circle".into(),
        boundary: Boundary::Periodic,
        resolution_warning: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventSample {
    pub z: C64,
    pub h: f64,
    pub alpha: Option<f64>,
    pub sigma_min: f64,
    pub norm_numeric: f64,
    pub log_norm_numeric: f64,
    pub log_norm_asym: Option<f64>,
    pub floor_log: Option<f64>,
    pub valid: bool,
    /// `z` is numerically in the spectrum; `sigma_min` is the zero sentinel.
    pub singular: bool,
    pub converged: bool,
}

pub const CSV_HEADER: &str = "re_z,im_z,h,alpha,sigma_min,log_norm_numeric,log_norm_asym,floor_log,valid";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResolventSample {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.z.re,
            self.z.im,
            self.h,
            opt(self.alpha),
            self.sigma_min,
            self.log_norm_numeric,
            opt(self.log_norm_asym),
            opt(self.floor_log),
            u8::from(self.valid)
        )
    }

    /// Rescales the numeric norm by `e^{shift}` (scaled-to-physical maps).
    pub fn shifted(mut self, log_shift: f64) -> Self {
        self.log_norm_numeric += log_shift;
        self.norm_numeric = self.log_norm_numeric.exp();
        self.sigma_min = (-self.log_norm_numeric).exp();
        self
    }
}

fn sample_from_sigma(z: C64, h: f64, sigma: f64, converged: bool) -> ResolventSample {
    ResolventSample {
        z,
        h,
        alpha: None,
        sigma_min: sigma,
        norm_numeric: 1.0 / sigma,
        log_norm_numeric: -sigma.ln(),
        log_norm_asym: None,
        floor_log: None,
        valid: true,
        singular: false,
        converged,
    }
}

/// `‖(A - z)^{-1}‖ = 1/sigma_min(A - z)`: inverse iteration for banded
/// storage, full SVD for dense.
pub fn resolvent_norm(a: &OperatorMatrix, z: C64) -> Result<ResolventSample, DiscretizeError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(DiscretizeError::NonFiniteZ(z));
    }
    match &a.storage {
        Storage::Band(b) => {
            let mut shifted = b.clone();
            shifted.add_diagonal(-cdd(z));
            match shifted.factor() {
                Ok(lu) => {
                    let s = banded::sigma_min(&lu, banded::DEFAULT_MAX_ITER, banded::DEFAULT_REL_TOL)?;
                    Ok(sample_from_sigma(z, a.h, s.sigma_min, s.converged))
                }
                Err(BandError::Singular(_)) => Ok(singular_sample(z, a.h)),
                Err(e) => Err(e.into()),
            }
        }
        Storage::Dense(d) => {
            let n = d.nrows();
            let shifted = d - DMatrix::<C64>::identity(n, n) * z;
            let sv = shifted.singular_values();
            let s = sv.iter().copied().fold(f64::INFINITY, f64::min);
            let largest = sv.iter().copied().fold(0.0, f64::max);
            if s <= f64::EPSILON * largest * n as f64 * 1e-3 || s == 0.0 {
                Ok(singular_sample(z, a.h))
            } else {
                Ok(sample_from_sigma(z, a.h, s, true))
            }
        }
    }
}

fn singular_sample(z: C64, h: f64) -> ResolventSample {
    ResolventSample {
        z,
        h,
        alpha: None,
        sigma_min: 0.0,
        norm_numeric: f64::INFINITY,
        log_norm_numeric: f64::INFINITY,
        log_norm_asym: None,
        floor_log: None,
        valid: false,
        singular: true,
        converged: true,
    }
}

/// Order-preserving map; results do not depend on `workers`.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers > 1 && items.len() > 1 {
            use rayon::prelude::*;
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(|| items.par_iter().map(&f).collect());
            }
        }
    }
    let _ = workers;
    items.iter().map(f).collect()
}

/// Samples every `z`; failures stay in their slot.
pub fn sweep<E, F>(z_list: &[C64], workers: usize, sample: F) -> Vec<Result<ResolventSample, E>>
where
    E: Send,
    F: Fn(C64) -> Result<ResolventSample, E> + Sync + Send,
{
    parallel_map(z_list, workers, |z| sample(*z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = Grid1D::segment(-1.0, 1.0, 21).unwrap();
        assert!((g.dx - 0.1).abs() < 1e-15);
        assert!(Grid1D::segment(0.0, 1.0, 8).is_err());
        assert!(Grid1D::circle(100).is_err());
        let c = Grid1D::circle(64).unwrap();
        assert!((c.dx * 64.0 - 2.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn harmonic_oscillator_distance_to_spectrum() {
        let g = Grid1D::segment(-6.0, 6.0, 800).unwrap();
        let a = schrodinger_matrix(&Potential::Poly(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]), 1.0, &g, 4)
            .unwrap();
        let s = resolvent_norm(&a, C64::new(0.0, 0.0)).unwrap();
        assert!((s.norm_numeric - 1.0).abs() < 1e-3, "{}", s.norm_numeric);
        assert!((s.norm_numeric * s.sigma_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_first_order_is_normal() {
        let c = C64::new(0.3, 0.5);
        let g = Grid1D::segment(-3.0, 3.0, 400).unwrap();
        let a = first_order_matrix(&Potential::Poly(vec![c]), 0.05, &g).unwrap();
        let s = resolvent_norm(&a, C64::new(0.0, 0.0)).unwrap();
        // hD is Hermitian with eigenvalue spacing about pi h / 6 near 0
        let spacing = std::f64::consts::PI * 0.05 / 6.0;
        assert!(s.sigma_min >= 0.5 - 1e-12 && s.sigma_min <= (0.25 + spacing * spacing).sqrt(), "{}", s.sigma_min);
    }

    #[test]
    fn circle_annihilates_constants() {
        let g = Grid1D::circle(64).unwrap();
        let a = circle_matrix(0.1, &g, 0).unwrap();
        let mut e0 = vec![C64::new(0.0, 0.0); 64];
        e0[32] = C64::new(1.0, 0.0);
        let v = a.matvec(&e0).unwrap();
        assert!(v.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn dense_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]));
        let a = OperatorMatrix::from_dense(m, "diag").unwrap();
        let s = resolvent_norm(&a, C64::new(0.0, 0.0)).unwrap();
        assert!((s.sigma_min - 1.0).abs() < 1e-14);
        let s = resolvent_norm(&a, C64::new(2.0, 0.0)).unwrap();
        assert!(s.singular && s.sigma_min == 0.0);
    }

    #[test]
    fn banded_singular_is_flagged() {
        let g = Grid1D::circle(16).unwrap();
        let a = circle_matrix(0.1, &g, 0).unwrap();
        assert!(resolvent_norm(&a, C64::new(0.0, 0.0)).unwrap().singular);
    }

    #[test]
    fn csv_row_shape() {
        let s = sample_from_sigma(C64::new(4.0, 0.5), 0.125, 0.25, true);
        let row = s.csv_row();
        assert_eq!(row, "4,0.5,0.125,,0.25,1.3862943611198906,,,1");
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn sweep_is_order_preserving() {
        let zs: Vec<C64> = (0..12).map(|k| C64::new(k as f64, 1.0)).collect();
        let f = |z: C64| -> Result<ResolventSample, ()> { Ok(sample_from_sigma(z, 1.0, 1.0 / (1.0 + z.re), true)) };
        let a = sweep(&zs, 1, f);
        let b = sweep(&zs, 4, f);
        assert_eq!(a, b);
        assert_eq!(a[5].as_ref().unwrap().z, zs[5]);
    }
}
