//! The action `Im ∫ xi dx` between the turning points.

use std::f64::consts::FRAC_PI_4;

use thiserror::Error;

use crate::branch::{self, BranchError, BranchFunction, TurningPair};
use crate::quad::{self, QuadError};
use crate::symbol::{Axis, SymbolModel, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("quadrature did not reach tolerance (best estimate {best}, error {error:e})")]
    Accuracy { best: f64, error: f64 },
    #[error("integrand not finite at t = {0}")]
    NonFinite(f64),
    #[error("unknown closed form `{0}`")]
    UnknownClosedForm(String),
    #[error("parameter {0} outside the closed form's domain")]
    Domain(f64),
    #[error(transparent)]
    Branch(#[from] BranchError),
}

impl From<QuadError> for ActionError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::NoConvergence { estimate, error, .. } => ActionError::Accuracy { best: estimate.im, error },
            QuadError::NonFinite(t) => ActionError::NonFinite(t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionForm {
    XiDx,
    XDxi,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionResult {
    /// The imaginary part of the action (`im_action`).
    pub value: f64,
    pub form: ActionForm,
    pub abs_error_estimate: f64,
}

/// Derivative magnitude above which the endpoint substitution kicks in.
const STEEP: f64 = 1e6;

fn steep_ends(branch: &BranchFunction) -> bool {
    let (a, b) = branch.domain();
    let s = |t: f64| branch.derivative(t).norm();
    let v = s(a).max(s(b));
    !v.is_finite() || v > STEEP
}

fn integrate_im(f: impl Fn(f64) -> C64, a: f64, b: f64, tol: f64, steep: bool) -> Result<(f64, f64), ActionError> {
    let r = if steep {
        quad::integrate_sqrt_endpoints(f, a, b, tol, quad::MAX_SUBDIVISIONS)?
    } else {
        quad::integrate(f, a, b, tol, quad::MAX_SUBDIVISIONS)?
    };
    Ok((r.value.im, r.abs_error))
}

/// Action in the requested form along the same real parametrisation.
///
/// With `t` the branch parameter and `w(t)` the other coordinate:
/// `xi dx` is `-Im ∫ w dt` (axis x) or `-Im ∫ t w' dt` (axis xi);
/// `x dxi` is `Im ∫ t w' dt` (axis x) or `Im ∫ w dt` (axis xi).
pub fn action_in_form(branch: &BranchFunction, form: ActionForm, tol: f64) -> Result<ActionResult, ActionError> {
    let (a, b) = branch.domain();
    if a == b {
        return Ok(ActionResult { value: 0.0, form, abs_error_estimate: 0.0 });
    }
    let steep = steep_ends(branch);
    let direct = |t: f64| branch.eval(t);
    let parts = |t: f64| branch.derivative(t) * t;
    let (v, e) = match (branch.axis, form) {
        (Axis::X, ActionForm::XiDx) => {
            let (v, e) = integrate_im(direct, a, b, tol, steep)?;
            (-v, e)
        }
        (Axis::X, ActionForm::XDxi) => integrate_im(parts, a, b, tol, steep)?,
        (Axis::Xi, ActionForm::XDxi) => integrate_im(direct, a, b, tol, steep)?,
        (Axis::Xi, ActionForm::XiDx) => {
            let (v, e) = integrate_im(parts, a, b, tol, steep)?;
            (-v, e)
        }
        (_, ActionForm::ClosedForm) => return Err(ActionError::UnknownClosedForm("closed-form via quadrature".into())),
    };
    Ok(ActionResult { value: v, form, abs_error_estimate: e })
}

/// Action from `rho_-` to `rho_+` in the branch's natural form.
pub fn action(model: &SymbolModel, z: C64, pair: &TurningPair, branch: &BranchFunction, tol: f64) -> Result<ActionResult, ActionError> {
    let _ = (model, z);
    let form = match pair.branch_axis {
        Axis::X => ActionForm::XiDx,
        Axis::Xi => ActionForm::XDxi,
    };
    action_in_form(branch, form, tol)
}

/// `arcsin(w) = -i log(i w + sqrt(1 - w^2))`, principal branches.
pub fn arcsin(w: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    -i * (i * w + (C64::new(1.0, 0.0) - w * w).sqrt()).ln()
}

/// `Im[e^{-i pi/4} (1 + i y) arcsin(e^{i pi/4} sqrt(y) / sqrt(1 + i y))]`.
pub fn harmonic_exact(y: f64) -> f64 {
    let c = C64::new(1.0, y);
    let e = C64::from_polar(1.0, FRAC_PI_4);
    (e.conj() * c * arcsin(e * y.sqrt() / c.sqrt())).im
}

/// `f(w) = w sqrt(w^2 - 1) + log(w + sqrt(w^2 - 1))`.
pub fn dk_f(w: C64) -> C64 {
    let s = (w * w - 1.0).sqrt();
    w * s + (w + s).ln()
}

pub fn dk_radius(theta: f64) -> f64 {
    (2.0 * (2.0 * theta).cos()).powf(-0.5)
}

/// Closed forms keyed by id. `param` is `y` for the harmonic and cubic
/// forms, `Re z` for `airy` and `theta` for `davies-kuijlaars`.
pub fn action_closed_form(id: &str, param: f64) -> Result<ActionResult, ActionError> {
    let value = match id {
        "harmonic-exact" => {
            if param < 0.0 {
                return Err(ActionError::Domain(param));
            }
            harmonic_exact(param)
        }
        "harmonic-leading" => (2.0 / 3.0) * param.max(0.0).powf(1.5),
        "cubic-leading" => (4.0 / 9.0) * param.max(0.0).powf(1.5),
        "airy" => {
            if param < 0.0 {
                return Err(ActionError::Domain(param));
            }
            (4.0 / 3.0) * param.powf(1.5)
        }
        "davies-kuijlaars" => {
            if !(0.0..FRAC_PI_4).contains(&param) {
                return Err(ActionError::Domain(param));
            }
            dk_f(C64::from_polar(dk_radius(param), param)).re
        }
        other => return Err(ActionError::UnknownClosedForm(other.to_string())),
    };
    Ok(ActionResult { value, form: ActionForm::ClosedForm, abs_error_estimate: 0.0 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualAction {
    pub sheet: usize,
    pub value_xi_dx: f64,
    pub value_x_dxi: f64,
    pub discrepancy: f64,
}

/// Both forms of the action for every pair.
pub fn dual_action_check(model: &SymbolModel, z: C64, pairs: &[TurningPair]) -> Result<Vec<DualAction>, ActionError> {
    let mut out = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let b = branch::branch_function(model, z, pair)?;
        let a = action_in_form(&b, ActionForm::XiDx, 1e-10)?.value;
        let c = action_in_form(&b, ActionForm::XDxi, 1e-10)?.value;
        out.push(DualAction { sheet: pair.sheet, value_xi_dx: a, value_x_dxi: c, discrepancy: (a - c).abs() });
    }
    Ok(out)
}

/// Turning points, branch and action in one call (first pair).
pub fn pipeline_action(model: &SymbolModel, z: C64, tol: f64) -> Result<Vec<(TurningPair, ActionResult)>, ActionError> {
    let pairs = branch::turning_points(model, z)?;
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        let b = branch::branch_function(model, z, &p)?;
        let a = action(model, z, &p, &b, tol)?;
        out.push((p, a));
    }
    Ok(out)
}
