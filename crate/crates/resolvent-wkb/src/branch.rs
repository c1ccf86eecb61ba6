//! Turning points of `p = z` and the branch curve joining them.

use std::sync::Arc;

use thiserror::Error;

use crate::symbol::{self, Axis, BoundaryFrame, PhasePoint, SymbolError, SymbolModel, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchError {
    #[error("no turning points found for z = {z} ({detail})")]
    NoTurningPoints { z: C64, detail: String },
    #[error("turning points too close to the boundary: |bracket| = {0:e}")]
    TooCloseToBoundary(f64),
    #[error("symbol `{label}` has no resolver along {axis}")]
    NoResolver { label: String, axis: Axis },
    #[error("symbol `{0}` declares no scan window")]
    NoScanWindow(String),
    #[error("branch jump of {jump:e} at t = {t} exceeds bound {bound:e}")]
    Discontinuity { t: f64, jump: f64, bound: f64 },
    #[error("branch from rho_- does not reach rho_+ (miss {0:e})")]
    EndpointMismatch(f64),
    #[error("degenerate second bracket: {0:e}")]
    Degenerate(f64),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TurningPair {
    pub rho_plus: PhasePoint,
    pub rho_minus: PhasePoint,
    pub bracket_plus: f64,
    pub bracket_minus: f64,
    pub branch_axis: Axis,
    /// 1-based sheet tag, in increasing order of the other coordinate.
    pub sheet: usize,
}

pub const SCAN_SAMPLES: usize = 8192;
pub const ROOT_TOL: f64 = 1e-10;
const BRACKET_TOL: f64 = 1e-10;

fn roots(model: &SymbolModel, axis: Axis, t: f64, z: C64) -> Result<Vec<C64>, BranchError> {
    model
        .resolve(axis, t, z)
        .ok_or_else(|| BranchError::NoResolver { label: model.label().to_string(), axis })
}

fn nearest(ws: &[C64], target: C64) -> C64 {
    let mut best = ws[0];
    for w in ws.iter().skip(1) {
        if (w - target).norm() < (best - target).norm() {
            best = *w;
        }
    }
    best
}

/// Matches each tracked value to a distinct root, greedily by distance.
fn assign(prev: &[C64], ws: &[C64]) -> Vec<C64> {
    let mut used = vec![false; ws.len()];
    let mut out = prev.to_vec();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(prev.len() * ws.len());
    for (i, p) in prev.iter().enumerate() {
        for (j, w) in ws.iter().enumerate() {
            pairs.push(((p - w).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut done = vec![false; prev.len()];
    for (_, i, j) in pairs {
        if !done[i] && !used[j] {
            out[i] = ws[j];
            done[i] = true;
            used[j] = true;
        }
    }
    out
}

fn newton_polish(model: &SymbolModel, z: C64, rho: PhasePoint) -> Result<PhasePoint, BranchError> {
    let mut r = rho;
    for _ in 0..40 {
        let d = model.partials(r)?;
        let f = d.p - z;
        if f.norm() <= 1e-14 * (1.0 + z.norm()) {
            break;
        }
        // J = [[Re p_x, Re p_xi], [Im p_x, Im p_xi]]
        let det = d.px.re * d.pxi.im - d.pxi.re * d.px.im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (-f.re * d.pxi.im + f.im * d.pxi.re) / det;
        let dxi = (-d.px.re * f.im + d.px.im * f.re) / det;
        let next = PhasePoint::new(r.x + dx, r.xi + dxi);
        if !next.is_finite() {
            break;
        }
        r = next;
        if dx.abs() + dxi.abs() < 1e-16 * (1.0 + r.x.abs() + r.xi.abs()) {
            break;
        }
    }
    Ok(r)
}

struct Crossing {
    sheet: usize,
    rho: PhasePoint,
    w_re: f64,
}

/// Real solutions of `p(rho) = z`, grouped into classified pairs.
pub fn turning_points(model: &SymbolModel, z: C64) -> Result<Vec<TurningPair>, BranchError> {
    let axis = model.axis_hint().unwrap_or(Axis::X);
    let (a, b) = model.scan_window().ok_or_else(|| BranchError::NoScanWindow(model.label().to_string()))?;
    let n = SCAN_SAMPLES;
    let dt = (b - a) / n as f64;
    let mut prev_t = a;
    let mut prev = roots(model, axis, a, z)?;
    prev.sort_by(|p, q| p.re.total_cmp(&q.re));
    let m = prev.len();
    let mut crossings: Vec<Crossing> = Vec::new();
    for k in 1..=n {
        let t = a + dt * k as f64;
        let ws = roots(model, axis, t, z)?;
        if ws.len() != m {
            return Err(BranchError::NoTurningPoints { z, detail: format!("root count changed at t = {t}") });
        }
        let cur = assign(&prev, &ws);
        for j in 0..m {
            let (u, v) = (prev[j].im, cur[j].im);
            if u == 0.0 || u * v < 0.0 {
                // bisect the sign change on this sheet
                let (mut lo, mut hi) = (prev_t, t);
                let (mut wlo, mut whi) = (prev[j], cur[j]);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let wm = nearest(&roots(model, axis, mid, z)?, wlo);
                    if wlo.im * wm.im <= 0.0 {
                        hi = mid;
                        whi = wm;
                    } else {
                        lo = mid;
                        wlo = wm;
                    }
                }
                let (tm, wm) = if wlo.im.abs() <= whi.im.abs() { (lo, wlo) } else { (hi, whi) };
                let rho = newton_polish(model, z, PhasePoint::join(axis, tm, wm.re))?;
                let res = (model.eval_at(rho) - z).norm();
                if res <= ROOT_TOL {
                    let dup = crossings.iter().any(|c| {
                        c.sheet == j && (c.rho.x - rho.x).abs() + (c.rho.xi - rho.xi).abs() < 1e-9
                    });
                    if !dup {
                        crossings.push(Crossing { sheet: j, rho, w_re: wm.re });
                    }
                }
            }
        }
        prev = cur;
        prev_t = t;
    }
    if crossings.is_empty() {
        return Err(BranchError::NoTurningPoints { z, detail: "no real root in the scan window".into() });
    }
    let mut pairs = Vec::new();
    let mut smallest = f64::INFINITY;
    for j in 0..m {
        let mut on: Vec<&Crossing> = crossings.iter().filter(|c| c.sheet == j).collect();
        on.sort_by(|p, q| p.rho.split(axis).0.total_cmp(&q.rho.split(axis).0));
        for chunk in on.chunks(2) {
            if chunk.len() < 2 {
                continue;
            }
            let b0 = symbol::poisson_half(model, chunk[0].rho)?;
            let b1 = symbol::poisson_half(model, chunk[1].rho)?;
            smallest = smallest.min(b0.abs()).min(b1.abs());
            if b0.abs() < BRACKET_TOL || b1.abs() < BRACKET_TOL || b0 * b1 >= 0.0 {
                continue;
            }
            let (pp, pm, bp, bm) = if b0 > 0.0 {
                (chunk[0].rho, chunk[1].rho, b0, b1)
            } else {
                (chunk[1].rho, chunk[0].rho, b1, b0)
            };
            let key = 0.5 * (chunk[0].w_re + chunk[1].w_re);
            pairs.push((key, TurningPair { rho_plus: pp, rho_minus: pm, bracket_plus: bp, bracket_minus: bm, branch_axis: axis, sheet: 0 }));
        }
    }
    if pairs.is_empty() {
        if smallest < BRACKET_TOL {
            return Err(BranchError::TooCloseToBoundary(smallest));
        }
        return Err(BranchError::NoTurningPoints { z, detail: "real roots found but none pair up".into() });
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(i, (_, mut p))| {
            p.sheet = i + 1;
            p
        })
        .collect())
}

/// Leading-order turning coordinates along the branch axis for `z = gamma + alpha n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxTurning {
    pub axis: Axis,
    pub t_plus: f64,
    pub t_minus: f64,
}

pub fn approx_turning_small_alpha(
    model: &SymbolModel,
    frame: &BoundaryFrame,
    rho0: PhasePoint,
    alpha: f64,
) -> Result<ApproxTurning, BranchError> {
    let axis = model.axis_hint().unwrap_or(Axis::X);
    let d = model.partials(rho0)?;
    let (_, p_w) = d.along(axis);
    let sb = frame.gamma_dot.norm();
    if sb < 1e-12 {
        return Err(BranchError::Degenerate(sb));
    }
    let (fx, fxi) = symbol::half_bracket_gradient(model, rho0)?;
    let df_t = match axis {
        Axis::X => fx,
        Axis::Xi => fxi,
    };
    let sigma = if df_t >= 0.0 { 1.0 } else { -1.0 };
    let c = p_w.norm() * (2.0 / sb).sqrt();
    let t0 = rho0.split(axis).0;
    let off = sigma * c * alpha.max(0.0).sqrt();
    Ok(ApproxTurning { axis, t_plus: t0 + off, t_minus: t0 - off })
}

pub const BRANCH_NODES: usize = 1024;

/// The other coordinate along `p = z`, continued from `rho_-` to `rho_+`.
#[derive(Clone)]
pub struct BranchFunction {
    pub axis: Axis,
    pub z: C64,
    pub t_minus: f64,
    pub t_plus: f64,
    nodes: Vec<f64>,
    values: Vec<C64>,
    model: Arc<SymbolModel>,
}

impl std::fmt::Debug for BranchFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BranchFunction")
            .field("axis", &self.axis)
            .field("z", &self.z)
            .field("domain", &(self.t_minus, self.t_plus))
            .finish()
    }
}

impl BranchFunction {
    pub fn domain(&self) -> (f64, f64) {
        (self.t_minus, self.t_plus)
    }

    pub fn eval(&self, t: f64) -> C64 {
        let n = self.nodes.len();
        if n == 1 {
            return self.values[0];
        }
        let span = self.t_plus - self.t_minus;
        let s = ((t - self.t_minus) / span * (n - 1) as f64).round();
        let k = s.clamp(0.0, (n - 1) as f64) as usize;
        match self.model.resolve(self.axis, t, self.z) {
            Some(ws) if !ws.is_empty() => nearest(&ws, self.values[k]),
            _ => self.values[k],
        }
    }

    /// `dw/dt = -p_t / p_w` on the curve.
    pub fn derivative(&self, t: f64) -> C64 {
        let w = self.eval(t);
        let tc = C64::new(t, 0.0);
        let d = match self.axis {
            Axis::X => self.model.partials_c(tc, w),
            Axis::Xi => self.model.partials_c(w, tc),
        };
        let (p_t, p_w) = d.along(self.axis);
        -p_t / p_w
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        self.nodes.iter().copied().zip(self.values.iter().copied())
    }
}

pub fn branch_function(model: &SymbolModel, z: C64, pair: &TurningPair) -> Result<BranchFunction, BranchError> {
    let axis = pair.branch_axis;
    let (t_minus, w_minus) = pair.rho_minus.split(axis);
    let (t_plus, w_plus) = pair.rho_plus.split(axis);
    let model = Arc::new(model.clone());
    if t_minus == t_plus {
        return Ok(BranchFunction {
            axis,
            z,
            t_minus,
            t_plus,
            nodes: vec![t_minus],
            values: vec![C64::new(w_minus, 0.0)],
            model,
        });
    }
    let n = BRANCH_NODES;
    let dt = (t_plus - t_minus) / n as f64;
    let mut nodes = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    let mut w = C64::new(w_minus, 0.0);
    for k in 0..=n {
        let t = if k == n { t_plus } else { t_minus + dt * k as f64 };
        let ws = roots(&model, axis, t, z)?;
        w = nearest(&ws, w);
        nodes.push(t);
        values.push(w);
    }
    let f = BranchFunction { axis, z, t_minus, t_plus, nodes, values, model };
    let mut slope_prev = f.slope_at(0);
    for k in 0..n {
        let slope_next = f.slope_at(k + 1);
        let jump = (f.values[k + 1] - f.values[k]).norm();
        let bound = 10.0 * slope_prev.max(slope_next) * dt.abs() + 1e-12;
        if jump > bound {
            return Err(BranchError::Discontinuity { t: f.nodes[k], jump, bound });
        }
        slope_prev = slope_next;
    }
    let miss_minus = (f.values[0] - w_minus).norm();
    let miss_plus = (f.values[n] - w_plus).norm();
    let scale = 1.0 + w_plus.abs().max(w_minus.abs());
    if miss_minus > ROOT_TOL * scale || miss_plus > ROOT_TOL * scale {
        return Err(BranchError::EndpointMismatch(miss_minus.max(miss_plus)));
    }
    Ok(f)
}

impl BranchFunction {
    fn slope_at(&self, k: usize) -> f64 {
        let tc = C64::new(self.nodes[k], 0.0);
        let w = self.values[k];
        let d = match self.axis {
            Axis::X => self.model.partials_c(tc, w),
            Axis::Xi => self.model.partials_c(w, tc),
        };
        let (p_t, p_w) = d.along(self.axis);
        (p_t / p_w).norm()
    }
}
