//! WKB quasimodes of first-order models `hD + g(x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::asymptotics::{self, EstimateError};
use crate::branch::TurningPair;
use crate::discretize::{DiscretizeError, Grid1D, OperatorMatrix};
use crate::quad::{self, QuadError};

type C64 = Complex64;
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuasimodeError {
    #[error("Im g'({anchor}) = {slope} has the wrong sign for the {side:?} mode")]
    Side { side: Side, anchor: f64, slope: f64 },
    #[error("interval [{a}, {b}] does not cover anchor ± {reach}")]
    Coverage { a: f64, b: f64, reach: f64 },
    #[error("mode grid ({mode}) does not match operator grid ({op})")]
    GridMismatch { mode: String, op: String },
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("degenerate phase: |phi''(0)| = {0:e}")]
    DegeneratePhase(f64),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

/// `Plus` solves `(hD + g) e = 0`; `Minus` solves the adjoint equation
/// `(hD + conj g) e = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WkbMode {
    pub grid: Grid1D,
    /// Unit discrete L² norm.
    pub values: Vec<C64>,
    pub h: f64,
    pub turning_point: f64,
    /// Leading constant `c⁰ = |Im g'|^{1/4} / (pi h)^{1/4}`.
    pub normalization: f64,
    /// Constant actually applied to `exp(-(i/h) ∫ g)`.
    pub discrete_constant: f64,
    pub side: Side,
}

const FD_STEP: f64 = 1e-5;

fn slope_im(g: &dyn Fn(f64) -> C64, x: f64) -> f64 {
    ((g(x + FD_STEP) - g(x - FD_STEP)) / (2.0 * FD_STEP)).im
}

fn l2(v: &[C64], dx: f64) -> f64 {
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Mode anchored at a turning point of `g` on `n` points of `[a, b]`.
pub fn build_mode(
    g: &dyn Fn(f64) -> C64,
    h: f64,
    anchor: f64,
    side: Side,
    interval: (f64, f64),
    n: usize,
) -> Result<WkbMode, QuasimodeError> {
    let slope = slope_im(g, anchor);
    let ok = match side {
        Side::Plus => slope < 0.0,
        Side::Minus => slope > 0.0,
    };
    if !ok {
        return Err(QuasimodeError::Side { side, anchor, slope });
    }
    let (a, b) = interval;
    let reach = 6.0 * (h / slope.abs()).sqrt();
    if !(anchor - reach >= a && anchor + reach <= b) {
        return Err(QuasimodeError::Coverage { a, b, reach });
    }
    let grid = Grid1D::segment(a, b, n)?;
    let xs = grid.points();
    let gg = |x: f64| match side {
        Side::Plus => g(x),
        Side::Minus => g(x).conj(),
    };
    let samples: Vec<C64> = xs.iter().map(|&x| gg(x)).collect();
    let cum = quad::cumulative_simpson(&samples, grid.dx);
    let j = (((anchor - a) / grid.dx).round() as usize).min(n - 1);
    let tail = quad::integrate(gg, xs[j], anchor, 1e-14, quad::MAX_SUBDIVISIONS)?;
    let at_anchor = cum[j] + tail.value;
    let raw: Vec<C64> = cum.iter().map(|c| (-I / h * (c - at_anchor)).exp()).collect();
    let nrm = l2(&raw, grid.dx);
    if !(nrm > 0.0 && nrm.is_finite()) {
        return Err(QuasimodeError::ZeroNorm);
    }
    let c = 1.0 / nrm;
    Ok(WkbMode {
        grid,
        values: raw.iter().map(|v| v * c).collect(),
        h,
        turning_point: anchor,
        normalization: slope.abs().powf(0.25) / (PI * h).powf(0.25),
        discrete_constant: c,
        side,
    })
}

impl WkbMode {
    pub fn norm(&self) -> f64 {
        l2(&self.values, self.grid.dx)
    }

    /// `c_discrete / c⁰ - 1`.
    pub fn normalization_error(&self) -> f64 {
        self.discrete_constant / self.normalization - 1.0
    }

    /// Whether `|e|` decreases away from the anchor beyond `sqrt(h) ln(1/h)`,
    /// allowing local growth by at most `factor`.
    pub fn envelope_decays(&self, factor: f64) -> bool {
        let r = self.h.sqrt() * (1.0 / self.h).ln();
        let xs = self.grid.points();
        let mags: Vec<f64> = self.values.iter().map(|v| v.norm()).collect();
        let k0 = xs.iter().position(|&x| x >= self.turning_point).unwrap_or(xs.len() - 1);
        let right = (k0..xs.len() - 1).filter(|&k| xs[k] - self.turning_point > r).all(|k| mags[k + 1] <= factor * mags[k]);
        let left = (1..=k0).rev().filter(|&k| self.turning_point - xs[k] > r).all(|k| mags[k - 1] <= factor * mags[k]);
        right && left
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,re,im\n");
        for (k, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", self.grid.point(k), v.re, v.im));
        }
        s
    }
}

pub fn smoothstep7(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t.powi(3))
}

/// Equal to one on `[flat_lo, flat_hi]`, zero beyond a `taper`-wide ramp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothWindow {
    pub flat_lo: f64,
    pub flat_hi: f64,
    pub taper: f64,
}

impl SmoothWindow {
    pub fn value(&self, x: f64) -> f64 {
        if x < self.flat_lo {
            smoothstep7((x - (self.flat_lo - self.taper)) / self.taper)
        } else if x > self.flat_hi {
            smoothstep7(((self.flat_hi + self.taper) - x) / self.taper)
        } else {
            1.0
        }
    }
}

/// `‖A(χ e)‖ / ‖χ e‖`.
pub fn residual(op: &OperatorMatrix, mode: &WkbMode, window: &SmoothWindow) -> Result<f64, QuasimodeError> {
    let (g, m) = (&op.grid, &mode.grid);
    let same = g.n == m.n && (g.a - m.a).abs() <= 1e-12 * (1.0 + g.a.abs()) && (g.b - m.b).abs() <= 1e-12 * (1.0 + g.b.abs());
    if !same {
        return Err(QuasimodeError::GridMismatch {
            mode: format!("[{}, {}] n={}", m.a, m.b, m.n),
            op: format!("[{}, {}] n={}", g.a, g.b, g.n),
        });
    }
    let v: Vec<C64> = mode.values.iter().enumerate().map(|(k, e)| e * window.value(m.point(k))).collect();
    let nv = l2(&v, 1.0);
    if nv == 0.0 {
        return Err(QuasimodeError::ZeroNorm);
    }
    let r = op.matvec(&v)?;
    Ok(l2(&r, 1.0) / nv)
}

/// `log|E₋₊|`, the negative of the leading log norm.
pub fn e_minus_plus_log_magnitude(h: f64, alpha: f64, pair: &TurningPair, action: f64) -> Result<f64, QuasimodeError> {
    Ok(-asymptotics::estimate_single(h, alpha, pair, action)?.log_leading)
}

/// `(2 pi i h / phi''(0))^{1/2} a(0)` with the root of nonnegative real part.
pub fn stationary_phase_leading(phi: &dyn Fn(f64) -> C64, amp: &dyn Fn(f64) -> C64, h: f64) -> Result<C64, QuasimodeError> {
    let d = 1e-4;
    let p2 = (phi(d) - 2.0 * phi(0.0) + phi(-d)) / (d * d);
    if p2.norm() < 1e-8 {
        return Err(QuasimodeError::DegeneratePhase(p2.norm()));
    }
    Ok((2.0 * PI * I * h / p2).sqrt() * amp(0.0))
}

/// `∫_a^b e^{i phi/h} a dx` by adaptive quadrature.
pub fn oscillatory_integral(phi: &dyn Fn(f64) -> C64, amp: &dyn Fn(f64) -> C64, h: f64, a: f64, b: f64) -> Result<C64, QuasimodeError> {
    // split at the critical point so the peak is a panel endpoint
    let f = |x: f64| (I * phi(x) / h).exp() * amp(x);
    let l = quad::integrate(f, a, 0.0, 1e-14, 200)?;
    let r = quad::integrate(f, 0.0, b, 1e-14, 200)?;
    Ok(l.value + r.value)
}
