//! Adaptive Gauss-Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("no convergence after {subdivisions} subdivisions: estimate {estimate}, error {error:e}")]
    NoConvergence { estimate: Complex64, error: f64, subdivisions: usize },
    #[error("integrand is not finite at t = {0}")]
    NonFinite(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

pub const MAX_SUBDIVISIONS: usize = 60;
pub const DEFAULT_TOL: f64 = 1e-10;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    if !(fc.re.is_finite() && fc.im.is_finite()) {
        return Err(QuadError::NonFinite(c));
    }
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = r * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !(f1.re.is_finite() && f1.im.is_finite()) {
            return Err(QuadError::NonFinite(c - dx));
        }
        if !(f2.re.is_finite() && f2.im.is_finite()) {
            return Err(QuadError::NonFinite(c + dx));
        }
        let s = f1 + f2;
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let value = k * r;
    let error = ((k - g) * r).norm();
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]` (reversed limits allowed) to absolute
/// tolerance `tol`, bisecting the worst segment at most `max_sub` times.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64, max_sub: usize) -> Result<QuadResult, QuadError> {
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), abs_error: 0.0, subdivisions: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut segs = vec![gk15(&f, lo, hi)?];
    let mut subdivisions = 0;
    loop {
        let total: Complex64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if err <= tol {
            return Ok(QuadResult { value: total * sign, abs_error: err, subdivisions });
        }
        if subdivisions >= max_sub {
            return Err(QuadError::NoConvergence { estimate: total * sign, error: err, subdivisions });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            return Err(QuadError::NoConvergence { estimate: total * sign, error: err, subdivisions });
        }
        segs.push(gk15(&f, s.a, m)?);
        segs.push(gk15(&f, m, s.b)?);
        subdivisions += 1;
    }
}

/// Same as [`integrate`] with the substitution `t = a + u^2` on the first
/// half and `t = b - u^2` on the second. Removes square-root behaviour of the
/// integrand at both endpoints.
pub fn integrate_sqrt_endpoints<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_sub: usize,
) -> Result<QuadResult, QuadError> {
    let w = (0.5 * (b - a).abs()).sqrt();
    let s = (b - a).signum();
    let left = integrate(|u| f(a + s * u * u) * (2.0 * s * u), 0.0, w, 0.5 * tol, max_sub)?;
    let right = integrate(|u| f(b - s * u * u) * (2.0 * s * u), 0.0, w, 0.5 * tol, max_sub)?;
    Ok(QuadResult {
        value: left.value + right.value,
        abs_error: left.abs_error + right.abs_error,
        subdivisions: left.subdivisions + right.subdivisions,
    })
}

/// Running integral on a uniform grid: Simpson steps of width `2dx`, with the
/// first cell taken from the quadratic through the first three nodes.
pub fn cumulative_simpson(values: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = (values[0] + values[1]) * (0.5 * dx);
        return out;
    }
    // first interval from the quadratic through the first three nodes
    out[1] = (values[0] * 5.0 + values[1] * 8.0 - values[2]) * (dx / 12.0);
    for k in 2..n {
        out[k] = out[k - 2] + (values[k - 2] + values[k - 1] * 4.0 + values[k]) * (dx / 3.0);
    }
    out
}
