//! Leading resolvent-norm estimates near an order-2 boundary point.

use std::fmt;

use thiserror::Error;

use crate::branch::TurningPair;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("bracket signs wrong for a turning pair: plus {plus:e}, minus {minus:e}")]
    Classification { plus: f64, minus: f64 },
    #[error("semiclassical parameter must be positive, got {0}")]
    NonPositiveH(f64),
    #[error("negative action {0}")]
    NegativeAction(f64),
    #[error("no turning pairs supplied")]
    NoPairs,
    #[error("region {region:?} needs pair {index}, only {available} supplied")]
    MissingBranch { region: Region, index: usize, available: usize },
}

pub const DEFAULT_C0: f64 = 10.0;
pub const DEFAULT_C1: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityWindow {
    pub c0: f64,
    pub c1: f64,
    pub h: f64,
    pub alpha: f64,
    pub ok: bool,
    pub reason: String,
}

/// `h^{2/3}/c0 <= alpha <= c1 (h ln 1/h)^{2/3}` with `h < 1/e`.
pub fn validity(h: f64, alpha: f64, c0: f64, c1: f64) -> ValidityWindow {
    let reason = if !(h > 0.0 && h < (-1.0f64).exp()) {
        "h-too-large"
    } else if !(alpha >= h.powf(2.0 / 3.0) / c0) {
        "below-elliptic-floor"
    } else if alpha > c1 * (h * (1.0 / h).ln()).powf(2.0 / 3.0) {
        "beyond-log-window"
    } else {
        "ok"
    };
    ValidityWindow { c0, c1, h, alpha, ok: reason == "ok", reason: reason.to_string() }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticEstimate {
    /// Log of the leading factor.
    pub log_leading: f64,
    /// `ℓ₀ / h`.
    pub exponent: f64,
    /// `h / alpha^{3/2}`.
    pub correction_scale: f64,
    /// `-ln(sqrt(h) alpha^{1/4})`.
    pub floor_log: f64,
    pub branch_tag: Option<usize>,
}

impl AsymptoticEstimate {
    /// Heuristic band `log_leading ± kappa h̃`.
    pub fn band(&self, kappa: f64) -> (f64, f64) {
        let w = kappa * self.correction_scale;
        (self.log_leading - w, self.log_leading + w)
    }

    /// Log norm used against numerics: the larger of leading and floor.
    pub fn compare_log(&self) -> f64 {
        self.log_leading.max(self.floor_log)
    }

    pub fn leading_display(&self) -> NormDisplay {
        NormDisplay(self.log_leading)
    }
}

/// A norm stored by its logarithm; prints `exp(X)` when `e^X` overflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormDisplay(pub f64);

impl fmt::Display for NormDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0.exp();
        if v.is_finite() && v > 0.0 {
            write!(f, "{v:.6e}")
        } else {
            write!(f, "exp({})", self.0)
        }
    }
}

pub fn floor_log(h: f64, alpha: f64) -> f64 {
    -0.5 * h.ln() - 0.25 * alpha.ln()
}

/// `ℓ/h + ln sqrt(pi) - ln(h)/2 - ln(b+)/4 - ln(-b-)/4`.
pub fn leading_log(action: f64, h: f64, bracket_plus: f64, bracket_minus: f64) -> Result<f64, EstimateError> {
    if !(h > 0.0) {
        return Err(EstimateError::NonPositiveH(h));
    }
    if !(bracket_plus > 0.0 && bracket_minus < 0.0) {
        return Err(EstimateError::Classification { plus: bracket_plus, minus: bracket_minus });
    }
    Ok(action / h + 0.5 * std::f64::consts::PI.ln() - 0.5 * h.ln()
        - 0.25 * bracket_plus.ln()
        - 0.25 * (-bracket_minus).ln())
}

/// Single turning pair. `alpha` is the distance to the boundary.
pub fn estimate_single(h: f64, alpha: f64, pair: &TurningPair, action_value: f64) -> Result<AsymptoticEstimate, EstimateError> {
    if action_value < 0.0 {
        return Err(EstimateError::NegativeAction(action_value));
    }
    let log_leading = leading_log(action_value, h, pair.bracket_plus, pair.bracket_minus)?;
    Ok(AsymptoticEstimate {
        log_leading,
        exponent: action_value / h,
        correction_scale: h / alpha.powf(1.5),
        floor_log: floor_log(h, alpha),
        branch_tag: Some(pair.sheet),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Both,
    Only1,
    Only2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchInput {
    pub pair: TurningPair,
    pub action: f64,
    pub alpha: f64,
}

/// Two boundary points: sup of the branch estimates over the region.
/// Ties go to the first branch. The floor uses the larger `alpha`.
pub fn estimate_double(h: f64, branches: &[BranchInput], region: Region) -> Result<AsymptoticEstimate, EstimateError> {
    if branches.is_empty() {
        return Err(EstimateError::NoPairs);
    }
    let pick: Vec<usize> = match region {
        Region::Both => (0..branches.len().min(2)).collect(),
        Region::Only1 => vec![0],
        Region::Only2 => vec![1],
    };
    let mut best: Option<(usize, AsymptoticEstimate)> = None;
    for &i in &pick {
        let b = branches
            .get(i)
            .ok_or(EstimateError::MissingBranch { region, index: i + 1, available: branches.len() })?;
        let mut e = estimate_single(h, b.alpha, &b.pair, b.action)?;
        e.branch_tag = Some(i + 1);
        if best.map_or(true, |(_, cur)| e.log_leading > cur.log_leading) {
            best = Some((i, e));
        }
    }
    let (_, mut e) = best.ok_or(EstimateError::NoPairs)?;
    let alpha = pick.iter().map(|&i| branches[i].alpha).fold(f64::MIN, f64::max);
    e.floor_log = floor_log(h, alpha);
    Ok(e)
}
