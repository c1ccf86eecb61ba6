//! Worked examples: the complex Airy operator, `D^2 + ix^3`, `D^2 + ix^2`,
//! the advection-diffusion operator on the circle and the rotated oscillator.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::action::{self, ActionError};
use crate::asymptotics::{self, AsymptoticEstimate, BranchInput, EstimateError, Region};
use crate::branch::{self, BranchError};
use crate::discretize::{self, DiscretizeError, Grid1D, Potential, ResolventSample};
use crate::quad::{self, QuadError};
use crate::symbol::{self, SymbolModel, C64};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExampleError {
    #[error("unknown example `{0}`")]
    Unknown(String),
    #[error("z = {z} is outside the range of `{id}`: {detail}")]
    OutOfRange { id: &'static str, z: C64, detail: String },
    #[error("theta = {0} outside [0, pi/4)")]
    Theta(f64),
    #[error("`{0}` has no resolvent norm")]
    NoNorm(&'static str),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleId {
    Airy,
    Cubic,
    Harmonic,
    Advection,
    DaviesKuijlaars,
}

pub const EXAMPLE_IDS: [&str; 5] = ["airy", "cubic", "harmonic", "advection", "davies-kuijlaars"];

impl ExampleId {
    pub fn as_str(self) -> &'static str {
        match self {
            ExampleId::Airy => "airy",
            ExampleId::Cubic => "cubic",
            ExampleId::Harmonic => "harmonic",
            ExampleId::Advection => "advection",
            ExampleId::DaviesKuijlaars => "davies-kuijlaars",
        }
    }

    /// The scaled symbol the generic pipeline runs on.
    pub fn symbol(self) -> SymbolModel {
        match self {
            ExampleId::Airy => symbol::airy_fourier(1.0),
            ExampleId::Cubic => symbol::cubic(),
            ExampleId::Harmonic => symbol::harmonic(),
            ExampleId::Advection => symbol::advection(),
            ExampleId::DaviesKuijlaars => symbol::davies_kuijlaars(PI / 8.0),
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = ExampleError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "airy" => Ok(ExampleId::Airy),
            "cubic" => Ok(ExampleId::Cubic),
            "harmonic" => Ok(ExampleId::Harmonic),
            "advection" => Ok(ExampleId::Advection),
            "davies-kuijlaars" => Ok(ExampleId::DaviesKuijlaars),
            other => Err(ExampleError::Unknown(other.to_string())),
        }
    }
}

/// Physical `z` in semiclassical coordinates. Physical log norms are the
/// scaled ones plus `log_shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub h: f64,
    /// Distance to the boundary in the scaled picture (`y` or `alpha`).
    pub alpha: f64,
    pub z_model: C64,
    pub log_shift: f64,
}

/// Advection boundary point and inward normal.
pub const ADVECTION_GAMMA: C64 = C64::new(1.0, 1.0);

pub fn advection_normal() -> C64 {
    C64::new(-1.0, 2.0) / 5f64.sqrt()
}

pub fn advection_z(alpha: f64) -> C64 {
    ADVECTION_GAMMA + advection_normal() * alpha
}

/// Default `h` for the advection example: `h / alpha^{3/2} = 0.15`.
pub fn advection_default_h(alpha: f64) -> f64 {
    0.15 * alpha.powf(1.5)
}

fn out_of_range(id: ExampleId, z: C64, detail: &str) -> ExampleError {
    ExampleError::OutOfRange { id: id.as_str(), z, detail: detail.to_string() }
}

/// `h` is only used by the advection example, where it is free.
pub fn scale(id: ExampleId, z: C64, h: Option<f64>) -> Result<Scaled, ExampleError> {
    match id {
        ExampleId::Airy => {
            if !(z.re > 0.0) {
                return Err(out_of_range(id, z, "Re z must be positive"));
            }
            let r = z.re;
            Ok(Scaled { h: r.powf(-1.5), alpha: 1.0, z_model: C64::new(z.im / r, 0.0), log_shift: -r.ln() })
        }
        ExampleId::Harmonic => {
            if !(z.re > 0.0 && z.im > 0.0) {
                return Err(out_of_range(id, z, "needs Re z > 0 and Im z > 0"));
            }
            let y = z.im / z.re;
            Ok(Scaled { h: 1.0 / z.re, alpha: y, z_model: C64::new(1.0, y), log_shift: -z.re.ln() })
        }
        ExampleId::Cubic => {
            if !(z.re > 0.0 && z.im > 0.0) {
                return Err(out_of_range(id, z, "needs Re z > 0 and Im z > 0"));
            }
            let y = z.re / z.im;
            Ok(Scaled { h: z.im.powf(-5.0 / 6.0), alpha: y, z_model: C64::new(y, 1.0), log_shift: -z.im.ln() })
        }
        ExampleId::Advection => {
            let alpha = ((z - ADVECTION_GAMMA) * advection_normal().conj()).re;
            if !(alpha > 0.0) {
                return Err(out_of_range(id, z, "z must lie inside the range, alpha > 0"));
            }
            let h = h.unwrap_or_else(|| advection_default_h(alpha));
            Ok(Scaled { h, alpha, z_model: z, log_shift: 0.0 })
        }
        ExampleId::DaviesKuijlaars => Err(ExampleError::NoNorm("davies-kuijlaars")),
    }
}

pub fn unscale(id: ExampleId, s: &Scaled) -> Result<C64, ExampleError> {
    match id {
        ExampleId::Airy => {
            let r = s.h.powf(-2.0 / 3.0);
            Ok(C64::new(r, s.z_model.re * r))
        }
        ExampleId::Harmonic => {
            let r = 1.0 / s.h;
            Ok(C64::new(r, s.z_model.im * r))
        }
        ExampleId::Cubic => {
            let m = s.h.powf(-6.0 / 5.0);
            Ok(C64::new(s.z_model.re * m, m))
        }
        ExampleId::Advection => Ok(s.z_model),
        ExampleId::DaviesKuijlaars => Err(ExampleError::NoNorm("davies-kuijlaars")),
    }
}

/// Validity strip with "much less" read as a ratio of at most 0.2.
#[derive(Clone, Debug, PartialEq)]
pub struct StripCheck {
    pub ok: bool,
    pub reasons: Vec<String>,
}

pub const MUCH_LESS: f64 = 0.2;

pub fn validity_strip(id: ExampleId, z: C64, h: Option<f64>) -> Result<StripCheck, ExampleError> {
    let mut reasons = Vec::new();
    let s = scale(id, z, h)?;
    match id {
        ExampleId::Airy => {
            if s.h >= 1.0 {
                reasons.push("Re z <= 1: correction scale not small".to_string());
            }
        }
        ExampleId::Harmonic => {
            if z.re.powf(1.0 / 3.0) > MUCH_LESS * z.im {
                reasons.push("Im z not >> (Re z)^{1/3}".to_string());
            }
            if z.im > MUCH_LESS * z.re {
                reasons.push("Im z not << Re z".to_string());
            }
        }
        ExampleId::Cubic => {
            if z.im.powf(4.0 / 9.0) > MUCH_LESS * z.re {
                reasons.push("Re z not >> (Im z)^{4/9}".to_string());
            }
            if z.re > MUCH_LESS * z.im {
                reasons.push("Re z not << Im z".to_string());
            }
        }
        ExampleId::Advection => {
            if s.h > MUCH_LESS * s.alpha.powf(1.5) {
                reasons.push("h not << alpha^{3/2}".to_string());
            }
            if s.alpha >= 1.0 {
                reasons.push("alpha >= 1".to_string());
            }
        }
        ExampleId::DaviesKuijlaars => unreachable!("scale rejects davies-kuijlaars"),
    }
    Ok(StripCheck { ok: reasons.is_empty(), reasons })
}

fn finish(s: &Scaled, action: f64, log_scaled: f64) -> AsymptoticEstimate {
    AsymptoticEstimate {
        log_leading: log_scaled + s.log_shift,
        exponent: action / s.h,
        correction_scale: s.h / s.alpha.powf(1.5),
        floor_log: asymptotics::floor_log(s.h, s.alpha) + s.log_shift,
        branch_tag: Some(1),
    }
}

/// Exact cubic action `Im ∫_{√y}^{-√y} (1 - iy + ix^2)^{1/3} dx`.
pub fn cubic_action_exact(y: f64) -> Result<f64, ExampleError> {
    let r = y.sqrt();
    let q = quad::integrate(|x| (C64::new(1.0, -y) + I * x * x).powf(1.0 / 3.0), r, -r, 1e-14, quad::MAX_SUBDIVISIONS)?;
    Ok(q.value.im)
}

/// `phi(x, z) = (-i + sqrt(-1 - 4 z sin x)) / (2 sin x)`.
pub fn advection_phi(x: f64, z: C64) -> C64 {
    let s = x.sin();
    (-I + (-1.0 - 4.0 * z * s).sqrt()) / (2.0 * s)
}

/// `(x_+, x_-)` with `sin x = -Re z / (Im z)^2`.
pub fn advection_turning(z: C64) -> Result<(f64, f64), ExampleError> {
    let g = z.re / (z.im * z.im);
    if !(g.abs() < 1.0) {
        return Err(out_of_range(ExampleId::Advection, z, "|Re z| >= (Im z)^2"));
    }
    let xp = (-g).asin();
    Ok((xp, -PI - xp))
}

pub fn advection_action(z: C64) -> Result<f64, ExampleError> {
    let (xp, xm) = advection_turning(z)?;
    let q = quad::integrate_sqrt_endpoints(|x| advection_phi(x, z), xm, xp, 1e-13, quad::MAX_SUBDIVISIONS)?;
    Ok(-q.value.im)
}

/// Closed-form estimate, physical units. `exact` picks the exact action
/// over the leading power law where both exist.
pub fn closed_norm(id: ExampleId, z: C64, h: Option<f64>, exact: bool) -> Result<AsymptoticEstimate, ExampleError> {
    let s = scale(id, z, h)?;
    let half_ln_pi = 0.5 * PI.ln();
    match id {
        ExampleId::Airy => {
            let r = z.re;
            let l = 4.0 / 3.0;
            let log = 0.5 * (PI / 2.0).ln() - 0.25 * r.ln() + l * r.powf(1.5);
            let mut e = finish(&s, l, 0.0);
            e.log_leading = log;
            Ok(e)
        }
        ExampleId::Harmonic => {
            let y = s.alpha;
            let l = if exact { action::harmonic_exact(y) } else { 2.0 / 3.0 * y.powf(1.5) };
            let log = l / s.h + half_ln_pi - (2.0f64.ln() + 0.25 * z.re.ln() + 0.25 * z.im.ln());
            let mut e = finish(&s, l, 0.0);
            e.log_leading = log;
            Ok(e)
        }
        ExampleId::Cubic => {
            let y = s.alpha;
            let l = if exact { cubic_action_exact(y)? } else { 4.0 / 9.0 * y.powf(1.5) };
            let log = l / s.h + half_ln_pi - (0.5 * 6f64.ln() + z.im.ln() / 3.0 + 0.25 * z.re.ln());
            let mut e = finish(&s, l, 0.0);
            e.log_leading = log;
            Ok(e)
        }
        ExampleId::Advection => {
            let l = advection_action(z)?;
            let g = z.re / (z.im * z.im);
            let log = l / s.h + half_ln_pi - 0.5 * s.h.ln() - z.im.ln() - 0.25 * (1.0 - g * g).ln();
            let mut e = finish(&s, l, 0.0);
            e.log_leading = log;
            Ok(e)
        }
        ExampleId::DaviesKuijlaars => Err(ExampleError::NoNorm("davies-kuijlaars")),
    }
}

/// Region of the two-point estimate. Harmonic carries two turning pairs
/// (boundary points `(0, ±1)`) contributing equally; the rest carry one.
pub fn region(id: ExampleId, z: C64) -> Region {
    match id {
        ExampleId::Harmonic if z.im <= z.re => Region::Both,
        ExampleId::Harmonic => Region::Only2,
        _ => Region::Only1,
    }
}

/// Turning points, action and estimate on the example's symbol.
pub fn pipeline_norm(id: ExampleId, z: C64, h: Option<f64>) -> Result<AsymptoticEstimate, ExampleError> {
    let s = scale(id, z, h)?;
    let model = id.symbol();
    let pairs = action::pipeline_action(&model, s.z_model, 1e-13)?;
    let inputs: Vec<BranchInput> =
        pairs.iter().map(|(p, a)| BranchInput { pair: *p, action: a.value, alpha: s.alpha }).collect();
    let reg = match (id, inputs.len()) {
        (ExampleId::Harmonic, n) if n >= 2 => Region::Both,
        _ => Region::Only1,
    };
    let mut e = asymptotics::estimate_double(s.h, &inputs, reg)?;
    e.log_leading += s.log_shift;
    e.floor_log += s.log_shift;
    Ok(e)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericOptions {
    pub n: Option<usize>,
    /// Half-width (segment) of the truncation domain.
    pub half_width: Option<f64>,
    pub order: usize,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions { n: None, half_width: None, order: 4 }
    }
}

pub const AIRY_N: usize = 1200;

pub fn airy_half_width(re_z: f64) -> f64 {
    12f64.max(3.0 * re_z)
}
pub const HARMONIC_N: usize = 2000;
pub const CUBIC_N: usize = 3000;
pub const ADVECTION_N: usize = 512;
/// Grid size used when no override is given.
pub fn default_n(id: ExampleId) -> Option<usize> {
    match id {
        ExampleId::Airy => Some(AIRY_N),
        ExampleId::Harmonic => Some(HARMONIC_N),
        ExampleId::Cubic => Some(CUBIC_N),
        ExampleId::Advection => Some(ADVECTION_N),
        ExampleId::DaviesKuijlaars => None,
    }
}

/// Cubic truncation interval around the scaled turning region `x near 1`.
pub const CUBIC_DOMAIN: (f64, f64) = (0.5, 1.5);

fn poly(c: &[(usize, C64)]) -> Potential {
    let deg = c.iter().map(|(k, _)| *k).max().unwrap_or(0);
    let mut v = vec![C64::new(0.0, 0.0); deg + 1];
    for (k, a) in c {
        v[*k] += *a;
    }
    Potential::Poly(v)
}

/// Numeric resolvent norm at physical `z`, in physical units.
pub fn numeric_sample(id: ExampleId, z: C64, h: Option<f64>, opts: &NumericOptions) -> Result<ResolventSample, ExampleError> {
    let s = scale(id, z, h)?;
    let sample = match id {
        ExampleId::Airy => {
            // D^2 + ix on a window centred at Im z. Dirichlet eigenvalues of
            // the truncation sit near Im = ±(L - √3 Re z), hence L ∝ Re z.
            let l = opts.half_width.unwrap_or_else(|| airy_half_width(z.re));
            let g = Grid1D::segment(z.im - l, z.im + l, opts.n.unwrap_or(AIRY_N))?;
            let a = discretize::schrodinger_matrix(&poly(&[(1, I)]), 1.0, &g, opts.order)?;
            let mut r = discretize::resolvent_norm(&a, z)?;
            r.h = s.h;
            r
        }
        ExampleId::Harmonic => {
            let l = opts.half_width.unwrap_or_else(|| 3.0 * s.alpha.sqrt() + 6.0 * s.h.sqrt());
            let g = Grid1D::segment(-l, l, opts.n.unwrap_or(HARMONIC_N))?;
            let a = discretize::schrodinger_matrix(&poly(&[(2, I)]), s.h, &g, opts.order)?;
            discretize::resolvent_norm(&a, s.z_model)?.shifted(s.log_shift)
        }
        ExampleId::Cubic => {
            let (lo, hi) = match opts.half_width {
                Some(w) => (1.0 - w, 1.0 + w),
                None => CUBIC_DOMAIN,
            };
            let g = Grid1D::segment(lo, hi, opts.n.unwrap_or(CUBIC_N))?;
            let a = discretize::schrodinger_matrix(&poly(&[(3, I)]), s.h, &g, opts.order)?;
            discretize::resolvent_norm(&a, s.z_model)?.shifted(s.log_shift)
        }
        ExampleId::Advection => {
            let g = Grid1D::circle(opts.n.unwrap_or(ADVECTION_N))?;
            let m = discretize::advection_modulation(z, s.h);
            let a = discretize::circle_matrix(s.h, &g, m)?;
            discretize::resolvent_norm(&a, z)?
        }
        ExampleId::DaviesKuijlaars => return Err(ExampleError::NoNorm("davies-kuijlaars")),
    };
    Ok(ResolventSample { z, h: s.h, ..sample })
}

/// Numeric sample with the closed-form estimate attached.
pub fn compare_sample(id: ExampleId, z: C64, h: Option<f64>, opts: &NumericOptions) -> Result<ResolventSample, ExampleError> {
    let s = scale(id, z, h)?;
    let mut r = numeric_sample(id, z, h, opts)?;
    let e = closed_norm(id, z, h, true)?;
    let w = asymptotics::validity(s.h, s.alpha, asymptotics::DEFAULT_C0, asymptotics::DEFAULT_C1);
    let strip = validity_strip(id, z, h)?;
    r.alpha = Some(s.alpha);
    r.log_norm_asym = Some(e.log_leading);
    r.floor_log = Some(e.floor_log);
    r.valid = !r.singular && strip.ok && (id == ExampleId::Airy || w.ok);
    Ok(r)
}

/// `|log_numeric - log_asym| / log_numeric`.
pub fn rel_log_err(r: &ResolventSample) -> Option<f64> {
    r.log_norm_asym.map(|a| (r.log_norm_numeric - a).abs() / r.log_norm_numeric.abs())
}

/// `2 Re f(r e^{i theta})`, the exponential growth rate of the spectral
/// projectors of the rotated oscillator.
pub fn dk_growth_rate(theta: f64) -> Result<f64, ExampleError> {
    if !(0.0..PI / 4.0).contains(&theta) {
        return Err(ExampleError::Theta(theta));
    }
    Ok(2.0 * action::action_closed_form("davies-kuijlaars", theta)?.value)
}

/// Same rate as `2 Im ∫_{-r}^{r} z sqrt(1 - z^2 x^2) dx`, `z = e^{i theta}`.
pub fn dk_growth_rate_quadrature(theta: f64) -> Result<f64, ExampleError> {
    if !(0.0..PI / 4.0).contains(&theta) {
        return Err(ExampleError::Theta(theta));
    }
    let r = action::dk_radius(theta);
    let z = C64::from_polar(1.0, theta);
    let q = quad::integrate_sqrt_endpoints(|x| z * (1.0 - z * z * x * x).sqrt(), -r, r, 1e-14, quad::MAX_SUBDIVISIONS)?;
    Ok(2.0 * q.value.im)
}

/// The rate from the generic turning-point pipeline at `Z = e^{2 i theta}`.
pub fn dk_growth_rate_pipeline(theta: f64) -> Result<f64, ExampleError> {
    if !(0.0..PI / 4.0).contains(&theta) {
        return Err(ExampleError::Theta(theta));
    }
    let m = symbol::davies_kuijlaars(theta);
    let z = C64::from_polar(1.0, 2.0 * theta);
    let pairs = branch::turning_points(&m, z)?;
    let b = branch::branch_function(&m, z, &pairs[0])?;
    let a = action::action(&m, z, &pairs[0], &b, 1e-13)?;
    Ok(2.0 * a.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for s in EXAMPLE_IDS {
            assert_eq!(s.parse::<ExampleId>().unwrap().as_str(), s);
        }
        assert!("nope".parse::<ExampleId>().is_err());
    }

    #[test]
    fn scaling_round_trips() {
        let cases = [
            (ExampleId::Airy, C64::new(4.0, 3.0)),
            (ExampleId::Harmonic, C64::new(200.0, 30.0)),
            (ExampleId::Cubic, C64::new(445.0, 1e4)),
            (ExampleId::Advection, advection_z(0.1)),
        ];
        for (id, z) in cases {
            let s = scale(id, z, None).unwrap();
            let back = unscale(id, &s).unwrap();
            assert!((back - z).norm() <= 1e-12 * z.norm(), "{id}: {back} vs {z}");
        }
    }

    #[test]
    fn airy_closed_values() {
        let e = closed_norm(ExampleId::Airy, C64::new(4.0, 0.0), None, true).unwrap();
        assert!((e.log_leading - 10.545_9).abs() < 1e-4, "{}", e.log_leading);
        let f = closed_norm(ExampleId::Airy, C64::new(4.0, 17.0), None, true).unwrap();
        assert_eq!(e.log_leading, f.log_leading);
        let nine = closed_norm(ExampleId::Airy, C64::new(9.0, 0.0), None, true).unwrap();
        assert!((nine.exponent - 36.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_denominator() {
        // leading variant: log = l/h + ln sqrt(pi) - ln(6^{1/2} 10^2 2)
        let z = C64::new(16.0, 1e6);
        let e = closed_norm(ExampleId::Cubic, z, None, false).unwrap();
        let s = scale(ExampleId::Cubic, z, None).unwrap();
        let l = 4.0 / 9.0 * s.alpha.powf(1.5);
        let want = l / s.h + 0.5 * PI.ln() - (6f64.sqrt() * 100.0 * 2.0).ln();
        assert!((e.log_leading - want).abs() < 1e-9);
    }

    #[test]
    fn dk_frozen_rates() {
        assert_eq!(dk_growth_rate(0.0).unwrap(), 0.0);
        for (t, want) in [(PI / 16.0, 0.403_200), (PI / 8.0, 0.881_374), (3.0 * PI / 16.0, 1.614_891)] {
            let c = dk_growth_rate(t).unwrap();
            assert!((c - want).abs() < 1e-6, "{t}: {c}");
            assert!((dk_growth_rate_quadrature(t).unwrap() - c).abs() < 1e-8);
        }
        assert!(dk_growth_rate(PI / 4.0).is_err());
    }

    #[test]
    fn advection_anchor() {
        let phi = advection_phi(-PI / 2.0, ADVECTION_GAMMA);
        assert!((phi + 1.0).norm() < 1e-14, "{phi}");
    }
}
