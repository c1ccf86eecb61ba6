//! One-dimensional symbols `p(x, xi)`, Poisson brackets and the boundary frame.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Holomorphic function of `(x, xi)`.
pub type Holo = Arc<dyn Fn(C64, C64) -> C64 + Send + Sync>;
/// Lower-order correction `g^k(x)`.
pub type Correction = Arc<dyn Fn(f64) -> C64 + Send + Sync>;
/// Roots `w` of `p = z` with the other coordinate fixed to a real `t`.
pub type Resolver = Arc<dyn Fn(f64, C64) -> Vec<C64> + Send + Sync>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("non-finite symbol derivatives at ({x}, {xi})")]
    Evaluation { x: f64, xi: f64 },
    #[error("point ({x}, {xi}) is not on the bracket-zero curve (half-bracket {value:e})")]
    NotOnBoundary { x: f64, xi: f64, value: f64 },
    #[error("degenerate boundary point: |gamma_dot| = {0:e}")]
    DegenerateBoundary(f64),
    #[error("negative distance into the range: alpha = {0}")]
    NegativeAlpha(f64),
    #[error("unknown symbol id `{0}`")]
    UnknownId(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub xi: f64,
}

impl PhasePoint {
    pub fn new(x: f64, xi: f64) -> Self {
        PhasePoint { x, xi }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.xi.is_finite()
    }

    /// Coordinate along `axis`, then the other one.
    pub fn split(&self, axis: Axis) -> (f64, f64) {
        match axis {
            Axis::X => (self.x, self.xi),
            Axis::Xi => (self.xi, self.x),
        }
    }

    pub fn join(axis: Axis, t: f64, w: f64) -> Self {
        match axis {
            Axis::X => PhasePoint::new(t, w),
            Axis::Xi => PhasePoint::new(w, t),
        }
    }
}

/// Real parameter of the branch curve: integrate in `x` or in `xi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Xi,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "integrate-in-x"),
            Axis::Xi => write!(f, "integrate-in-xi"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partials {
    pub p: C64,
    pub px: C64,
    pub pxi: C64,
    pub pxx: C64,
    pub pxxi: C64,
    pub pxixi: C64,
}

impl Partials {
    fn is_finite(&self) -> bool {
        [self.p, self.px, self.pxi, self.pxx, self.pxxi, self.pxixi]
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Derivative along `axis` and across it.
    pub fn along(&self, axis: Axis) -> (C64, C64) {
        match axis {
            Axis::X => (self.px, self.pxi),
            Axis::Xi => (self.pxi, self.px),
        }
    }
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_FD_STEP_SECOND: f64 = 1e-4;

#[derive(Clone)]
pub struct SymbolModel {
    label: String,
    eval: Holo,
    d_x: Option<Holo>,
    d_xi: Option<Holo>,
    d_xx: Option<Holo>,
    d_xxi: Option<Holo>,
    d_xixi: Option<Holo>,
    fd_step: f64,
    fd_step_second: f64,
    corrections: Vec<Correction>,
    resolve_x_axis: Option<Resolver>,
    resolve_xi_axis: Option<Resolver>,
    axis_hint: Option<Axis>,
    scan_window: Option<(f64, f64)>,
}

impl fmt::Debug for SymbolModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolModel")
            .field("label", &self.label)
            .field("analytic", &self.has_analytic_partials())
            .field("fd_step", &self.fd_step)
            .field("corrections", &self.corrections.len())
            .field("axis_hint", &self.axis_hint)
            .field("scan_window", &self.scan_window)
            .finish()
    }
}

impl SymbolModel {
    pub fn new(label: impl Into<String>, eval: impl Fn(C64, C64) -> C64 + Send + Sync + 'static) -> Self {
        SymbolModel {
            label: label.into(),
            eval: Arc::new(eval),
            d_x: None,
            d_xi: None,
            d_xx: None,
            d_xxi: None,
            d_xixi: None,
            fd_step: DEFAULT_FD_STEP,
            fd_step_second: DEFAULT_FD_STEP_SECOND,
            corrections: Vec::new(),
            resolve_x_axis: None,
            resolve_xi_axis: None,
            axis_hint: None,
            scan_window: None,
        }
    }

    /// Analytic first and second partials `(d_x, d_xi, d_xx, d_xxi, d_xixi)`.
    pub fn with_partials(mut self, d: [Holo; 5]) -> Self {
        let [a, b, c, e, f] = d;
        self.d_x = Some(a);
        self.d_xi = Some(b);
        self.d_xx = Some(c);
        self.d_xxi = Some(e);
        self.d_xixi = Some(f);
        self
    }

    pub fn with_fd_steps(mut self, first: f64, second: f64) -> Self {
        self.fd_step = first;
        self.fd_step_second = second;
        self
    }

    pub fn with_corrections(mut self, c: Vec<Correction>) -> Self {
        self.corrections = c;
        self
    }

    /// Root solver for `p = z` along `axis`: given the real coordinate `t`,
    /// returns every candidate value of the other coordinate.
    pub fn with_resolver(mut self, axis: Axis, r: Resolver) -> Self {
        match axis {
            Axis::X => self.resolve_x_axis = Some(r),
            Axis::Xi => self.resolve_xi_axis = Some(r),
        }
        self
    }

    pub fn with_axis_hint(mut self, axis: Axis) -> Self {
        self.axis_hint = Some(axis);
        self
    }

    pub fn with_scan_window(mut self, a: f64, b: f64) -> Self {
        self.scan_window = Some((a.min(b), a.max(b)));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn corrections(&self) -> &[Correction] {
        &self.corrections
    }

    pub fn axis_hint(&self) -> Option<Axis> {
        self.axis_hint
    }

    pub fn scan_window(&self) -> Option<(f64, f64)> {
        self.scan_window
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.d_x.is_some() && self.d_xi.is_some() && self.d_xx.is_some() && self.d_xxi.is_some() && self.d_xixi.is_some()
    }

    pub fn eval(&self, x: C64, xi: C64) -> C64 {
        (self.eval)(x, xi)
    }

    pub fn eval_at(&self, rho: PhasePoint) -> C64 {
        self.eval(C64::new(rho.x, 0.0), C64::new(rho.xi, 0.0))
    }

    pub fn resolve(&self, axis: Axis, t: f64, z: C64) -> Option<Vec<C64>> {
        match axis {
            Axis::X => self.resolve_x_axis.as_ref().map(|r| r(t, z)),
            Axis::Xi => self.resolve_xi_axis.as_ref().map(|r| r(t, z)),
        }
    }

    pub fn has_resolver(&self, axis: Axis) -> bool {
        match axis {
            Axis::X => self.resolve_x_axis.is_some(),
            Axis::Xi => self.resolve_xi_axis.is_some(),
        }
    }

    /// Partials at a complex point, analytic where supplied.
    pub fn partials_c(&self, x: C64, xi: C64) -> Partials {
        if let (Some(a), Some(b), Some(c), Some(d), Some(e)) = (&self.d_x, &self.d_xi, &self.d_xx, &self.d_xxi, &self.d_xixi) {
            return Partials {
                p: (self.eval)(x, xi),
                px: a(x, xi),
                pxi: b(x, xi),
                pxx: c(x, xi),
                pxxi: d(x, xi),
                pxixi: e(x, xi),
            };
        }
        let fd = self.fd_partials_c(x, xi);
        let pick = |d: &Option<Holo>, v: C64| d.as_ref().map_or(v, |f| f(x, xi));
        Partials {
            p: fd.p,
            px: pick(&self.d_x, fd.px),
            pxi: pick(&self.d_xi, fd.pxi),
            pxx: pick(&self.d_xx, fd.pxx),
            pxxi: pick(&self.d_xxi, fd.pxxi),
            pxixi: pick(&self.d_xixi, fd.pxixi),
        }
    }

    pub fn partials(&self, rho: PhasePoint) -> Result<Partials, SymbolError> {
        let d = self.partials_c(C64::new(rho.x, 0.0), C64::new(rho.xi, 0.0));
        if d.is_finite() {
            Ok(d)
        } else {
            Err(SymbolError::Evaluation { x: rho.x, xi: rho.xi })
        }
    }

    /// Central finite-difference partials, ignoring analytic ones.
    pub fn fd_partials(&self, rho: PhasePoint) -> Partials {
        self.fd_partials_c(C64::new(rho.x, 0.0), C64::new(rho.xi, 0.0))
    }

    fn fd_partials_c(&self, x: C64, xi: C64) -> Partials {
        let f = |a: f64, b: f64| (self.eval)(x + a, xi + b);
        let h = self.fd_step;
        let p = f(0.0, 0.0);
        let px = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let pxi = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
        let k = self.fd_step_second;
        let pxx = (f(k, 0.0) - p * 2.0 + f(-k, 0.0)) / (k * k);
        let pxixi = (f(0.0, k) - p * 2.0 + f(0.0, -k)) / (k * k);
        let pxxi = (f(k, k) - f(k, -k) - f(-k, k) + f(-k, -k)) / (4.0 * k * k);
        Partials { p, px, pxi, pxx, pxxi, pxixi }
    }

    /// The model of `conj(p)`, continued holomorphically.
    pub fn conjugate(&self) -> SymbolModel {
        let wrap = |f: &Holo| -> Holo {
            let f = f.clone();
            Arc::new(move |x: C64, xi: C64| f(x.conj(), xi.conj()).conj())
        };
        let wrap_r = |r: &Resolver| -> Resolver {
            let r = r.clone();
            Arc::new(move |t: f64, z: C64| r(t, z.conj()).into_iter().map(|w| w.conj()).collect())
        };
        SymbolModel {
            label: format!("conj({})", self.label),
            eval: wrap(&self.eval),
            d_x: self.d_x.as_ref().map(wrap),
            d_xi: self.d_xi.as_ref().map(wrap),
            d_xx: self.d_xx.as_ref().map(wrap),
            d_xxi: self.d_xxi.as_ref().map(wrap),
            d_xixi: self.d_xixi.as_ref().map(wrap),
            fd_step: self.fd_step,
            fd_step_second: self.fd_step_second,
            corrections: self
                .corrections
                .iter()
                .map(|c| {
                    let c = c.clone();
                    Arc::new(move |x: f64| c(x).conj()) as Correction
                })
                .collect(),
            resolve_x_axis: self.resolve_x_axis.as_ref().map(wrap_r),
            resolve_xi_axis: self.resolve_xi_axis.as_ref().map(wrap_r),
            axis_hint: self.axis_hint,
            scan_window: self.scan_window,
        }
    }
}

/// `(1/2i){p, conj p}` = `Im(p_xi * conj(p_x))`.
pub fn poisson_half(model: &SymbolModel, rho: PhasePoint) -> Result<f64, SymbolError> {
    let d = model.partials(rho)?;
    Ok(half_from(&d))
}

fn half_from(d: &Partials) -> f64 {
    (d.pxi * d.px.conj()).im
}

/// Gradient `(f_x, f_xi)` of the half-bracket `f`.
pub fn half_bracket_gradient(model: &SymbolModel, rho: PhasePoint) -> Result<(f64, f64), SymbolError> {
    let d = model.partials(rho)?;
    Ok(gradient_from(&d))
}

fn gradient_from(d: &Partials) -> (f64, f64) {
    let fx = (d.pxxi * d.px.conj() + d.pxi * d.pxx.conj()).im;
    let fxi = (d.pxixi * d.px.conj() + d.pxi * d.pxxi.conj()).im;
    (fx, fxi)
}

/// `{p, (1/2i){p, conj p}}` = `p_xi f_x - p_x f_xi`.
pub fn second_bracket(model: &SymbolModel, rho: PhasePoint) -> Result<C64, SymbolError> {
    let d = model.partials(rho)?;
    let (fx, fxi) = gradient_from(&d);
    let v = d.pxi * fx - d.px * fxi;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(SymbolError::Evaluation { x: rho.x, xi: rho.xi })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFrame {
    pub s: f64,
    pub gamma: C64,
    pub gamma_dot: C64,
    pub u: C64,
    pub n: C64,
}

pub fn boundary_frame(model: &SymbolModel, rho_s: PhasePoint) -> Result<BoundaryFrame, SymbolError> {
    let d = model.partials(rho_s)?;
    let f = half_from(&d);
    let tol = 1e-8 * (1.0 + d.pxi.norm() * d.px.norm());
    if f.abs() > tol {
        return Err(SymbolError::NotOnBoundary { x: rho_s.x, xi: rho_s.xi, value: f });
    }
    let gamma_dot = -second_bracket(model, rho_s)?;
    let m = gamma_dot.norm();
    if m < 1e-12 {
        return Err(SymbolError::DegenerateBoundary(m));
    }
    let u = gamma_dot / m;
    Ok(BoundaryFrame { s: 0.0, gamma: d.p, gamma_dot, u, n: I * u })
}

pub fn chart_to_z(frame: &BoundaryFrame, alpha: f64) -> Result<C64, SymbolError> {
    if alpha < 0.0 || alpha.is_nan() {
        return Err(SymbolError::NegativeAlpha(alpha));
    }
    Ok(frame.gamma + frame.n * alpha)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParameter {
    pub z: C64,
    pub s: f64,
    pub alpha: f64,
    pub h: f64,
}

impl SpectralParameter {
    pub fn from_chart(frame: &BoundaryFrame, alpha: f64, h: f64) -> Result<Self, SymbolError> {
        Ok(SpectralParameter { z: chart_to_z(frame, alpha)?, s: frame.s, alpha, h })
    }
}

// ---------------------------------------------------------------- catalog

fn holo(f: impl Fn(C64, C64) -> C64 + Send + Sync + 'static) -> Holo {
    Arc::new(f)
}

/// Roots of `a w^2 + b w + c = 0` without cancellation.
pub fn quadratic_roots(a: C64, b: C64, c: C64) -> Vec<C64> {
    if a.norm() < 1e-300 {
        return vec![-c / b];
    }
    let d = (b * b - a * c * 4.0).sqrt();
    let q1 = b + d;
    let q2 = b - d;
    let q = if q1.norm() >= q2.norm() { q1 } else { q2 } * -0.5;
    if q.norm() == 0.0 {
        return vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    }
    vec![q / a, c / q]
}

fn pm_sqrt(w: C64) -> Vec<C64> {
    let s = w.sqrt();
    vec![-s, s]
}

fn cube_roots(w: C64) -> Vec<C64> {
    let r = w.powf(1.0 / 3.0);
    let om = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    vec![r, r * om, r * om.conj()]
}

/// `xi - i x^2 + i c`.
pub fn airy_fourier(c: f64) -> SymbolModel {
    let ic = I * c;
    SymbolModel::new("airy-fourier", move |x, xi| xi - I * x * x + ic)
        .with_partials([
            holo(|x, _| -I * x * 2.0),
            holo(|_, _| C64::new(1.0, 0.0)),
            holo(|_, _| -I * 2.0),
            holo(|_, _| C64::new(0.0, 0.0)),
            holo(|_, _| C64::new(0.0, 0.0)),
        ])
        .with_resolver(Axis::X, Arc::new(move |x, z| vec![z + I * x * x - ic]))
        .with_resolver(Axis::Xi, Arc::new(move |xi, z| pm_sqrt((C64::new(xi, 0.0) + ic - z) / I)))
        .with_axis_hint(Axis::X)
        .with_scan_window(-4.0, 4.0)
}

/// `xi^2 + i x^3`.
pub fn cubic() -> SymbolModel {
    SymbolModel::new("cubic", |x, xi| xi * xi + I * x * x * x)
        .with_partials([
            holo(|x, _| I * x * x * 3.0),
            holo(|_, xi| xi * 2.0),
            holo(|x, _| I * x * 6.0),
            holo(|_, _| C64::new(0.0, 0.0)),
            holo(|_, _| C64::new(2.0, 0.0)),
        ])
        .with_resolver(Axis::X, Arc::new(|x, z| pm_sqrt(z - I * x * x * x)))
        .with_resolver(Axis::Xi, Arc::new(|xi, z| cube_roots(-I * (z - xi * xi))))
        .with_axis_hint(Axis::Xi)
        .with_scan_window(-2.0, 2.0)
}

/// `xi^2 + i x^2`.
pub fn harmonic() -> SymbolModel {
    SymbolModel::new("harmonic", |x, xi| xi * xi + I * x * x)
        .with_partials([
            holo(|x, _| I * x * 2.0),
            holo(|_, xi| xi * 2.0),
            holo(|_, _| I * 2.0),
            holo(|_, _| C64::new(0.0, 0.0)),
            holo(|_, _| C64::new(2.0, 0.0)),
        ])
        .with_resolver(Axis::X, Arc::new(|x, z| pm_sqrt(z - I * x * x)))
        .with_resolver(Axis::Xi, Arc::new(|xi, z| pm_sqrt(-I * (z - xi * xi))))
        .with_axis_hint(Axis::X)
        .with_scan_window(-3.0, 3.0)
}

/// `-sin(x) xi^2 - i xi`, periodic in `x`.
pub fn advection() -> SymbolModel {
    SymbolModel::new("advection", |x, xi| -x.sin() * xi * xi - I * xi)
        .with_partials([
            holo(|x, xi| -x.cos() * xi * xi),
            holo(|x, xi| -x.sin() * xi * 2.0 - I),
            holo(|x, xi| x.sin() * xi * xi),
            holo(|x, xi| -x.cos() * xi * 2.0),
            holo(|x, _| -x.sin() * 2.0),
        ])
        .with_resolver(
            Axis::X,
            Arc::new(|x, z| quadratic_roots(C64::new(-x.sin(), 0.0), -I, -z)),
        )
        .with_axis_hint(Axis::X)
        .with_scan_window(-std::f64::consts::PI + 1e-3, -1e-3)
}

/// `xi + g(x)` with `g(x) = sum_k g_k x^k`.
pub fn model_first_order(g: Vec<C64>) -> SymbolModel {
    let g = Arc::new(g);
    let (g0, g1, g2, g3) = (g.clone(), g.clone(), g.clone(), g.clone());
    let horner = move |c: &[C64], x: C64, order: usize| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in (order..c.len()).rev() {
            let mut f = 1.0;
            for j in 0..order {
                f *= (k - j) as f64;
            }
            acc = acc * x + c[k] * f;
        }
        acc
    };
    SymbolModel::new("model-first-order", move |x, xi| xi + horner(&g0, x, 0))
        .with_partials([
            holo(move |x, _| horner(&g1, x, 1)),
            holo(|_, _| C64::new(1.0, 0.0)),
            holo(move |x, _| horner(&g2, x, 2)),
            holo(|_, _| C64::new(0.0, 0.0)),
            holo(|_, _| C64::new(0.0, 0.0)),
        ])
        .with_resolver(Axis::X, Arc::new(move |x, z| vec![z - horner(&g3, C64::new(x, 0.0), 0)]))
        .with_axis_hint(Axis::X)
        .with_scan_window(-4.0, 4.0)
}

/// `xi^2 + e^{4 i theta} x^2`, the rotated oscillator.
pub fn davies_kuijlaars(theta: f64) -> SymbolModel {
    let c = C64::from_polar(1.0, 4.0 * theta);
    SymbolModel::new("davies-kuijlaars", move |x, xi| xi * xi + c * x * x)
        .with_partials([
            holo(move |x, _| c * x * 2.0),
            holo(|_, xi| xi * 2.0),
            holo(move |_, _| c * 2.0),
            holo(|_, _| C64::new(0.0, 0.0)),
            holo(|_, _| C64::new(2.0, 0.0)),
        ])
        .with_resolver(Axis::X, Arc::new(move |x, z| pm_sqrt(z - c * x * x)))
        .with_resolver(Axis::Xi, Arc::new(move |xi, z| pm_sqrt((z - xi * xi) / c)))
        .with_axis_hint(Axis::X)
        .with_scan_window(-3.0, 3.0)
}

/// `xi^2 + x^2`: self-adjoint, brackets vanish identically.
pub fn real_oscillator() -> SymbolModel {
    SymbolModel::new("real-oscillator", |x, xi| xi * xi + x * x)
        .with_partials([
            holo(|x, _| x * 2.0),
            holo(|_, xi| xi * 2.0),
            holo(|_, _| C64::new(2.0, 0.0)),
            holo(|_, _| C64::new(0.0, 0.0)),
            holo(|_, _| C64::new(2.0, 0.0)),
        ])
        .with_axis_hint(Axis::X)
}

/// Symbols addressable by id. `model-first-order` uses `g = -i x^2 + i`.
pub fn catalog(id: &str) -> Result<SymbolModel, SymbolError> {
    match id {
        "airy-fourier" => Ok(airy_fourier(1.0)),
        "cubic" => Ok(cubic()),
        "harmonic" => Ok(harmonic()),
        "advection" => Ok(advection()),
        "model-first-order" => Ok(model_first_order(vec![I, C64::new(0.0, 0.0), -I])),
        "davies-kuijlaars" => Ok(davies_kuijlaars(std::f64::consts::PI / 8.0)),
        "real-oscillator" => Ok(real_oscillator()),
        other => Err(SymbolError::UnknownId(other.to_string())),
    }
}

pub const CATALOG_IDS: [&str; 6] = ["airy-fourier", "cubic", "harmonic", "advection", "model-first-order", "davies-kuijlaars"];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn half_bracket_values() {
        let h = poisson_half(&harmonic(), PhasePoint::new(0.5, -1.0)).unwrap();
        assert!((h - 2.0).abs() < 1e-14);
        let c = poisson_half(&cubic(), PhasePoint::new(1.0, -0.5)).unwrap();
        assert!((c - 3.0).abs() < 1e-14);
        let r = poisson_half(&real_oscillator(), PhasePoint::new(0.3, 0.7)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn second_bracket_values() {
        let rho = PhasePoint::new(-std::f64::consts::FRAC_PI_2, -1.0);
        let a = second_bracket(&advection(), rho).unwrap();
        assert!(close(a, C64::new(-2.0, -1.0), 1e-14), "{a}");
        let c = second_bracket(&cubic(), PhasePoint::new(1.0, 0.0)).unwrap();
        assert!(close(c, C64::new(0.0, 18.0), 1e-13), "{c}");
        let r = second_bracket(&real_oscillator(), PhasePoint::new(0.2, 0.1)).unwrap();
        assert_eq!(r, C64::new(0.0, 0.0));
    }

    #[test]
    fn frames() {
        let f = boundary_frame(&cubic(), PhasePoint::new(1.0, 0.0)).unwrap();
        assert!(close(f.gamma_dot, C64::new(0.0, -18.0), 1e-13));
        assert!(close(f.u, -I, 1e-15));
        assert!(close(f.n, C64::new(1.0, 0.0), 1e-15));
        assert!(close(f.gamma, I, 1e-15));

        let h = boundary_frame(&harmonic(), PhasePoint::new(0.0, 1.0)).unwrap();
        assert!(h.n.im > 0.0);
        assert!(close(h.gamma_dot, C64::new(8.0, 0.0), 1e-13));

        let a = boundary_frame(&advection(), PhasePoint::new(-std::f64::consts::FRAC_PI_2, -1.0)).unwrap();
        let expect = C64::new(-1.0, 2.0) / 5f64.sqrt();
        assert!(close(a.n, expect, 1e-14), "{}", a.n);

        match boundary_frame(&real_oscillator(), PhasePoint::new(0.0, 1.0)) {
            Err(SymbolError::DegenerateBoundary(_)) => {}
            other => panic!("{other:?}"),
        }
        match boundary_frame(&harmonic(), PhasePoint::new(0.5, -1.0)) {
            Err(SymbolError::NotOnBoundary { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chart_is_affine() {
        let frame = |g: C64, n: C64| BoundaryFrame { s: 0.0, gamma: g, gamma_dot: n / I, u: n / I, n };
        let f1 = frame(I, C64::new(1.0, 0.0));
        assert!(close(chart_to_z(&f1, 0.1).unwrap(), C64::new(0.1, 1.0), 1e-16));
        let f2 = frame(C64::new(1.0, 0.0), I);
        assert!(close(chart_to_z(&f2, 0.05).unwrap(), C64::new(1.0, 0.05), 1e-16));
        assert_eq!(chart_to_z(&f2, 0.0).unwrap(), f2.gamma);
        assert!(matches!(chart_to_z(&f2, -1.0), Err(SymbolError::NegativeAlpha(_))));
    }

    #[test]
    fn catalog_lookup() {
        for id in CATALOG_IDS {
            assert_eq!(catalog(id).unwrap().label(), id);
        }
        assert!(matches!(catalog("nope"), Err(SymbolError::UnknownId(_))));
    }

    #[test]
    fn first_order_polynomial_partials() {
        let m = model_first_order(vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(3.0, 0.0)]);
        let d = m.partials(PhasePoint::new(0.5, 0.0)).unwrap();
        // g = 1 + 2i x + 3 x^2
        assert!(close(d.p, C64::new(1.75, 1.0), 1e-15));
        assert!(close(d.px, C64::new(3.0, 2.0), 1e-15));
        assert!(close(d.pxx, C64::new(6.0, 0.0), 1e-15));
    }

    #[test]
    fn resolvers_solve_the_symbol() {
        let z = C64::new(0.3, 1.1);
        for id in CATALOG_IDS {
            let m = catalog(id).unwrap();
            for axis in [Axis::X, Axis::Xi] {
                for t in [-0.7, -0.2, 0.4, 1.3] {
                    if let Some(ws) = m.resolve(axis, t, z) {
                        for w in ws {
                            let tc = C64::new(t, 0.0);
                            let v = match axis {
                                Axis::X => m.eval(tc, w),
                                Axis::Xi => m.eval(w, tc),
                            };
                            assert!((v - z).norm() < 1e-12, "{id} {axis} t={t}");
                        }
                    }
                }
            }
        }
    }

    fn cloud() -> Vec<PhasePoint> {
        let mut v = Vec::new();
        for i in 0..5 {
            for j in 0..4 {
                v.push(PhasePoint::new(-1.7 + 0.73 * i as f64, -1.1 + 0.61 * j as f64));
            }
        }
        v
    }

    #[test]
    fn finite_differences_match_analytic() {
        for id in CATALOG_IDS {
            let m = catalog(id).unwrap();
            for rho in cloud() {
                let a = m.partials(rho).unwrap();
                let f = m.fd_partials(rho);
                for (u, v) in [(a.px, f.px), (a.pxi, f.pxi), (a.pxx, f.pxx), (a.pxxi, f.pxxi), (a.pxixi, f.pxixi)] {
                    assert!((u - v).norm() <= 1e-6, "{id} at {rho:?}: {u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn second_bracket_is_derivative_along_hamilton_field() {
        // H_p = p_xi d_x - p_x d_xi; with complex p split into Re and Im fields
        let eps = 1e-5;
        for id in ["cubic", "harmonic", "advection", "airy-fourier"] {
            let m = catalog(id).unwrap();
            for rho in cloud() {
                let d = m.partials(rho).unwrap();
                let f = |r: PhasePoint| poisson_half(&m, r).unwrap();
                let dir = |vx: f64, vxi: f64| {
                    let a = PhasePoint::new(rho.x + eps * vx, rho.xi + eps * vxi);
                    let b = PhasePoint::new(rho.x - eps * vx, rho.xi - eps * vxi);
                    (f(a) - f(b)) / (2.0 * eps)
                };
                let re = dir(d.pxi.re, -d.px.re);
                let im = dir(d.pxi.im, -d.px.im);
                let sb = second_bracket(&m, rho).unwrap();
                let scale = 1.0 + sb.norm();
                assert!((sb.re - re).abs() < 1e-5 * scale, "{id} {rho:?}");
                assert!((sb.im - im).abs() < 1e-5 * scale, "{id} {rho:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn half_bracket_antisymmetric(ix in 0usize..6, x in -2.0f64..2.0, xi in -2.0f64..2.0) {
            let m = catalog(CATALOG_IDS[ix]).unwrap();
            let rho = PhasePoint::new(x, xi);
            let a = poisson_half(&m, rho).unwrap();
            let b = poisson_half(&m.conjugate(), rho).unwrap();
            prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn frame_is_unitary(x in -0.5f64..0.5) {
            // harmonic: half-bracket vanishes on x = 0
            let rho = PhasePoint::new(0.0, 1.0 + x);
            let f = boundary_frame(&harmonic(), rho).unwrap();
            prop_assert!((f.u.norm() - 1.0).abs() < 1e-12);
            prop_assert!((f.n.norm() - 1.0).abs() < 1e-12);
            prop_assert_eq!(f.n, I * f.u);
        }

        #[test]
        fn chart_zero_alpha_is_boundary(a in 0.0f64..1.0, gr in -3.0f64..3.0, gi in -3.0f64..3.0, th in 0.0f64..6.28) {
            let n = C64::from_polar(1.0, th);
            let f = BoundaryFrame { s: 0.0, gamma: C64::new(gr, gi), gamma_dot: -I * n, u: -I * n, n };
            let z = chart_to_z(&f, a).unwrap();
            prop_assert!(((z - f.gamma) - n * a).norm() < 1e-12);
        }
    }
}
