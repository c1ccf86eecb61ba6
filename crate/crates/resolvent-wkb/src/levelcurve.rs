//! Level sets `‖(P - z)^{-1}‖ = 1/eps` along coordinate scan lines.

use std::fmt;

use thiserror::Error;

use crate::discretize;
use crate::examples::{self, ExampleId};
use crate::symbol::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelError {
    #[error("eps must lie in (0, 1), got {0}")]
    Eps(f64),
    #[error("no sign change of sigma_min - eps on [{lo}, {hi}] at axis value {axis_value}")]
    NotFound { axis_value: f64, lo: f64, hi: f64 },
    #[error("bisection did not converge at axis value {0}")]
    NoConvergence(f64),
    #[error("sampler failed at z = {z}: {detail}")]
    Sampler { z: C64, detail: String },
    #[error("level law for `{id}` undefined at axis value {axis_value} (log argument {arg})")]
    LawDomain { id: &'static str, axis_value: f64, arg: f64 },
    #[error("no level law for `{0}`")]
    NoLaw(&'static str),
    #[error("fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate fit design")]
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Numeric,
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanAxis {
    /// Re z fixed, bisect in Im z.
    FixedRe,
    /// Im z fixed, bisect in Re z.
    FixedIm,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Numeric => "numeric",
            Source::Asymptotic => "asymptotic",
        })
    }
}

impl fmt::Display for ScanAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanAxis::FixedRe => "fixed-re",
            ScanAxis::FixedIm => "fixed-im",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelCurvePoint {
    pub z: C64,
    pub eps: f64,
    pub source: Source,
    pub scan_axis: ScanAxis,
    pub valid: bool,
}

pub const CSV_HEADER: &str = "eps,axis,axis_value,re_z,im_z,source";

impl LevelCurvePoint {
    pub fn axis_value(&self) -> f64 {
        match self.scan_axis {
            ScanAxis::FixedRe => self.z.re,
            ScanAxis::FixedIm => self.z.im,
        }
    }

    pub fn transverse(&self) -> f64 {
        match self.scan_axis {
            ScanAxis::FixedRe => self.z.im,
            ScanAxis::FixedIm => self.z.re,
        }
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{},{}", self.eps, self.scan_axis, self.axis_value(), self.z.re, self.z.im, self.source)
    }
}

fn point_at(axis: ScanAxis, axis_value: f64, t: f64) -> C64 {
    match axis {
        ScanAxis::FixedRe => C64::new(axis_value, t),
        ScanAxis::FixedIm => C64::new(t, axis_value),
    }
}

pub const LEVEL_REL_TOL: f64 = 1e-3;
const MAX_BISECTIONS: usize = 200;

/// Bisects `sigma_min(z) = eps` on the transverse bracket of one scan line.
pub fn bisect_line<F>(sigma: &F, eps: f64, axis: ScanAxis, axis_value: f64, bracket: (f64, f64)) -> Result<LevelCurvePoint, LevelError>
where
    F: Fn(C64) -> Result<f64, String>,
{
    let f = |t: f64| -> Result<f64, LevelError> {
        let z = point_at(axis, axis_value, t);
        let s = sigma(z).map_err(|detail| LevelError::Sampler { z, detail })?;
        Ok(s.ln() - eps.ln())
    };
    let (mut lo, mut hi) = bracket;
    let (mut flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(LevelError::NotFound { axis_value, lo, hi });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        // |ln(sigma/eps)| <= tol keeps |sigma - eps| <= eps (e^tol - 1)
        if fm.abs() <= LEVEL_REL_TOL * (1.0 - LEVEL_REL_TOL) {
            return Ok(LevelCurvePoint { z: point_at(axis, axis_value, mid), eps, source: Source::Numeric, scan_axis: axis, valid: true });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(LevelError::NoConvergence(axis_value))
}

/// One bisection per axis value; scan lines run through `parallel_map`.
pub fn trace_numeric<F>(
    sigma: &F,
    eps: f64,
    axis: ScanAxis,
    axis_values: &[f64],
    brackets: &[(f64, f64)],
    workers: usize,
) -> Result<Vec<Result<LevelCurvePoint, LevelError>>, LevelError>
where
    F: Fn(C64) -> Result<f64, String> + Sync + Send,
{
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LevelError::Eps(eps));
    }
    let jobs: Vec<(f64, (f64, f64))> = axis_values.iter().copied().zip(brackets.iter().copied()).collect();
    Ok(discretize::parallel_map(&jobs, workers, |(v, b)| bisect_line(sigma, eps, axis, *v, *b)))
}

/// Numeric `sigma_min` of an example at physical `z`.
pub fn example_sigma(id: ExampleId) -> impl Fn(C64) -> Result<f64, String> + Sync + Send {
    move |z| {
        examples::numeric_sample(id, z, None, &examples::NumericOptions::default())
            .map(|s| (-s.log_norm_numeric).exp())
            .map_err(|e| e.to_string())
    }
}

/// Natural scan axis of a level law.
pub fn law_axis(id: ExampleId) -> Result<ScanAxis, LevelError> {
    match id {
        ExampleId::Harmonic => Ok(ScanAxis::FixedRe),
        ExampleId::Cubic => Ok(ScanAxis::FixedIm),
        other => Err(LevelError::NoLaw(other.as_str())),
    }
}

/// `(coefficient, exponent)` of `t = c a^b (ln(a^b / eps))^{2/3}`.
pub fn law_constants(id: ExampleId) -> Result<(f64, f64), LevelError> {
    match id {
        ExampleId::Harmonic => Ok((1.5f64.powf(2.0 / 3.0), 1.0 / 3.0)),
        ExampleId::Cubic => Ok((2.25f64.powf(2.0 / 3.0), 4.0 / 9.0)),
        other => Err(LevelError::NoLaw(other.as_str())),
    }
}

/// Closed-form inversion of the leading level law.
pub fn level_asymptotic(id: ExampleId, eps: f64, axis_value: f64) -> Result<LevelCurvePoint, LevelError> {
    if !(eps > 0.0) {
        return Err(LevelError::Eps(eps));
    }
    let (c, b) = law_constants(id)?;
    let axis = law_axis(id)?;
    let arg = axis_value.powf(b) / eps;
    if !(arg > std::f64::consts::E) {
        return Err(LevelError::LawDomain { id: id.as_str(), axis_value, arg });
    }
    let t = c * axis_value.powf(b) * arg.ln().powf(2.0 / 3.0);
    let z = point_at(axis, axis_value, t);
    let valid = examples::validity_strip(id, z, None).map(|s| s.ok).unwrap_or(false);
    Ok(LevelCurvePoint { z, eps, source: Source::Asymptotic, scan_axis: axis, valid })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

/// Least squares of `ln t - (2/3) ln ln(a^{b0}/eps)` against `ln a`, with
/// `b0` the law's nominal exponent.
pub fn fit_growth(points: &[LevelCurvePoint], law: ExampleId) -> Result<GrowthFit, LevelError> {
    if points.len() < 4 {
        return Err(LevelError::TooFewPoints(points.len()));
    }
    let (_, b0) = law_constants(law)?;
    let xs: Vec<f64> = points.iter().map(|p| p.axis_value().ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.transverse().ln() - (2.0 / 3.0) * (p.axis_value().powf(b0) / p.eps).ln().ln())
        .collect();
    let (slope, icpt, r2) = linear_fit(&xs, &ys).ok_or(LevelError::Degenerate)?;
    Ok(GrowthFit { coefficient: icpt.exp(), exponent: slope, r_squared: r2 })
}

/// Ordinary least squares `y = slope x + intercept`, with R².
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 1e-300 * n {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, my - slope * mx, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_matrix_circles() {
        // diag(0, 3): sigma_min(z) = min |z - lambda|; level set is |z| = eps near 0
        let sigma = |z: C64| -> Result<f64, String> { Ok(z.norm().min((z - 3.0).norm())) };
        let p = bisect_line(&sigma, 0.25, ScanAxis::FixedRe, 0.0, (0.0, 1.0)).unwrap();
        assert!((p.z.im - 0.25).abs() <= 0.25 * 1e-3);
        // the minimum of sigma_min along Re z = 1.5 is 1.5 > eps
        assert!(matches!(bisect_line(&sigma, 0.25, ScanAxis::FixedRe, 1.5, (0.0, 1.0)), Err(LevelError::NotFound { .. })));
    }

    #[test]
    fn exact_law_is_recovered() {
        let pts: Vec<LevelCurvePoint> = [100.0, 200.0, 400.0, 800.0, 1600.0]
            .iter()
            .map(|&r| level_asymptotic(ExampleId::Harmonic, (-8.0f64).exp(), r).unwrap())
            .collect();
        let fit = fit_growth(&pts, ExampleId::Harmonic).unwrap();
        assert!((fit.exponent - 1.0 / 3.0).abs() < 1e-10);
        assert!((fit.coefficient - 1.5f64.powf(2.0 / 3.0)).abs() < 1e-9);
        assert!(fit_growth(&pts[..3], ExampleId::Harmonic).is_err());
    }

    #[test]
    fn harmonic_inversion_value() {
        let p = level_asymptotic(ExampleId::Harmonic, (-8.0f64).exp(), 200.0).unwrap();
        let want = 1.5f64.powf(2.0 / 3.0) * 200f64.powf(1.0 / 3.0) * (200f64.ln() / 3.0 + 8.0).powf(2.0 / 3.0);
        assert!((p.z.im - want).abs() < 1e-12);
        assert!((p.z.im - 35.0).abs() < 0.1, "{}", p.z.im);
        assert!(level_asymptotic(ExampleId::Harmonic, 0.9, 8.0).is_err());
        assert!(level_asymptotic(ExampleId::Cubic, (-8.0f64).exp(), 1e6).is_ok());
    }

    #[test]
    fn eps_domain() {
        let s = |_: C64| -> Result<f64, String> { Ok(1.0) };
        assert!(matches!(trace_numeric(&s, 0.0, ScanAxis::FixedRe, &[1.0], &[(0.0, 1.0)], 1), Err(LevelError::Eps(_))));
    }
}
