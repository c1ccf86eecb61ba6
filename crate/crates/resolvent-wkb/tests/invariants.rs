use std::f64::consts::FRAC_PI_2;

use resolvent_wkb::action::{self, pipeline_action};
use resolvent_wkb::asymptotics::{self, estimate_single};
use resolvent_wkb::branch::{self, approx_turning_small_alpha, turning_points, TurningPair};
use resolvent_wkb::examples;
use resolvent_wkb::levelcurve::linear_fit;
use resolvent_wkb::symbol::{self, boundary_frame, chart_to_z, PhasePoint, SymbolModel, C64};

fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / (n - 1) as f64).exp()).collect()
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly).unwrap().0
}

/// Scaled example symbols with a boundary point, keyed for messages.
fn boundary_models() -> Vec<(&'static str, SymbolModel, PhasePoint)> {
    vec![
        ("airy-fourier", symbol::airy_fourier(1.0), PhasePoint::new(0.0, 0.0)),
        ("cubic", symbol::cubic(), PhasePoint::new(1.0, 0.0)),
        ("harmonic", symbol::harmonic(), PhasePoint::new(0.0, -1.0)),
        ("advection", symbol::advection(), PhasePoint::new(-FRAC_PI_2, -1.0)),
    ]
}

fn pair_near(pairs: &[TurningPair], rho0: PhasePoint) -> TurningPair {
    let d = |p: &TurningPair| (p.rho_plus.x - rho0.x).hypot(p.rho_plus.xi - rho0.xi);
    *pairs.iter().min_by(|a, b| d(a).total_cmp(&d(b))).unwrap()
}

fn pair_at(model: &SymbolModel, rho0: PhasePoint, alpha: f64) -> (C64, TurningPair) {
    let frame = boundary_frame(model, rho0).unwrap();
    let z = chart_to_z(&frame, alpha).unwrap();
    let pairs = turning_points(model, z).unwrap_or_else(|e| panic!("{} alpha={alpha}: {e}", model.label()));
    (z, pair_near(&pairs, rho0))
}

#[test]
fn approx_turning_points_are_first_order() {
    for (name, model, rho0) in boundary_models() {
        let frame = boundary_frame(&model, rho0).unwrap();
        let alphas = [1e-3, 1e-2, 1e-1];
        let mut errs = Vec::new();
        for &a in &alphas {
            let (_, p) = pair_at(&model, rho0, a);
            let ap = approx_turning_small_alpha(&model, &frame, rho0, a).unwrap();
            let (tp, _) = p.rho_plus.split(ap.axis);
            let (tm, _) = p.rho_minus.split(ap.axis);
            errs.push((tp - ap.t_plus).abs().max((tm - ap.t_minus).abs()));
        }
        if errs.iter().all(|&e| e < 1e-12) {
            continue;
        }
        let s = loglog_slope(&alphas, &errs);
        assert!(s >= 0.9, "{name}: slope {s} errs {errs:?}");
    }
}

#[test]
fn bracket_scales_like_sqrt_alpha() {
    let alphas = log_space(1e-4, 1e-1, 10);
    for (name, model, rho0) in boundary_models() {
        let b: Vec<f64> = alphas.iter().map(|&a| pair_at(&model, rho0, a).1.bracket_plus).collect();
        assert!(b.iter().all(|&v| v > 0.0), "{name}");
        let s = loglog_slope(&alphas, &b);
        assert!((0.45..=0.55).contains(&s), "{name}: bracket slope {s}");
    }
}

#[test]
fn action_scales_like_alpha_three_halves() {
    let alphas = log_space(1e-4, 1e-1, 10);
    for (name, model, rho0) in boundary_models() {
        let ell: Vec<f64> = alphas
            .iter()
            .map(|&a| {
                let (z, p) = pair_at(&model, rho0, a);
                let b = branch::branch_function(&model, z, &p).unwrap();
                action::action(&model, z, &p, &b, 1e-13).unwrap().value
            })
            .collect();
        assert!(ell.iter().all(|&v| v > 0.0), "{name}: {ell:?}");
        let s = loglog_slope(&alphas, &ell);
        assert!((1.45..=1.55).contains(&s), "{name}: action slope {s}");
    }
}

#[test]
fn harmonic_and_cubic_remainders_are_order_five_halves() {
    let ys = log_space(1e-3, 1e-1, 12);
    let check = |name: &str, exact: &dyn Fn(f64) -> f64, lead: f64| {
        let r: Vec<f64> = ys.iter().map(|&y| (exact(y) - lead * y.powf(1.5)).abs()).collect();
        let ratio: Vec<f64> = r.iter().zip(&ys).map(|(r, y)| r / y.powf(2.5)).collect();
        let hi = ratio.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi < 1.0, "{name}: remainder / y^2.5 up to {hi}");
        let s = loglog_slope(&ys, &r);
        assert!(s >= 2.4, "{name}: residual slope {s}");
    };
    check("harmonic", &action::harmonic_exact, 2.0 / 3.0);
    check("cubic", &|y| examples::cubic_action_exact(y).unwrap(), 4.0 / 9.0);
}

#[test]
fn dual_actions_agree_on_all_examples() {
    for (name, model, rho0) in boundary_models() {
        for a in [0.01, 0.05] {
            let (z, p) = pair_at(&model, rho0, a);
            let d = action::dual_action_check(&model, z, &[p]).unwrap();
            assert!(d[0].discrepancy <= 1e-8, "{name} alpha={a}: {:?}", d[0]);
        }
    }
}

fn scaled_estimate(model: &SymbolModel, z: C64, h: f64, alpha: f64) -> f64 {
    let r = pipeline_action(model, z, 1e-13).unwrap();
    estimate_single(h, alpha, &r[0].0, r[0].1.value).unwrap().log_leading
}

#[test]
fn estimate_is_scale_invariant() {
    // xi - i x^2 at z = -i alpha rescales to alpha (xi' - i x'^2) at z' = -i, h' = h / alpha^{3/2}
    let model = symbol::airy_fourier(0.0);
    for (h, alpha) in [(0.01, 0.2), (0.005, 0.1), (0.02, 0.5), (0.001, 0.03)] {
        let orig = scaled_estimate(&model, C64::new(0.0, -alpha), h, alpha);
        let scaled = scaled_estimate(&model, C64::new(0.0, -1.0), h / alpha.powf(1.5), 1.0) - alpha.ln();
        assert!((orig - scaled).abs() <= 1e-10 * orig.abs().max(1.0), "h={h} alpha={alpha}: {orig} vs {scaled}");
    }
}

#[test]
fn estimate_increases_with_alpha_inside_window() {
    let h: f64 = 0.01;
    // below h^{2/3} the -ln(alpha)/4 bracket term can still win over the action
    let lo = h.powf(2.0 / 3.0);
    let hi = (asymptotics::DEFAULT_C1 * (h * (1.0 / h).ln()).powf(2.0 / 3.0)).min(0.5);
    for (name, model, rho0) in boundary_models() {
        let mut prev = f64::NEG_INFINITY;
        for a in log_space(lo, hi, 16) {
            let (z, p) = pair_at(&model, rho0, a);
            let b = branch::branch_function(&model, z, &p).unwrap();
            let ell = action::action(&model, z, &p, &b, 1e-13).unwrap().value;
            let v = estimate_single(h, a, &p, ell).unwrap().log_leading;
            assert!(v > prev, "{name}: not increasing at alpha={a}");
            prev = v;
        }
    }
}

#[test]
fn estimate_obeys_exponential_envelope() {
    // log_leading <= ln C - ln h / 2 - ln alpha / 4 + C alpha^{3/2} / h
    let model = symbol::airy_fourier(0.0);
    let need = |h: f64, a: f64| {
        let v = scaled_estimate(&model, C64::new(0.0, -a), h, a);
        let env = |c: f64| c.ln() - 0.5 * h.ln() - 0.25 * a.ln() + c * a.powf(1.5) / h;
        let (mut lo, mut hi) = (1e-3f64, 1e3f64);
        for _ in 0..100 {
            let mid = (lo * hi).sqrt();
            if env(mid) >= v {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let hs = log_space(1e-4, 0.05, 6);
    let alphas = log_space(0.02, 0.9, 6);
    let fit = hs.iter().flat_map(|&h| alphas.iter().map(move |&a| (h, a))).map(|(h, a)| need(h, a)).fold(0.0f64, f64::max);
    // one constant for the whole lattice, bounded as h -> 0
    assert!(fit < 2.0, "fitted C = {fit}");
    for &h in &hs {
        for &a in &alphas {
            let v = scaled_estimate(&model, C64::new(0.0, -a), h, a);
            let env = fit.ln() - 0.5 * h.ln() - 0.25 * a.ln() + fit * a.powf(1.5) / h;
            assert!(v <= env, "h={h} alpha={a}: {v} > {env}");
        }
    }
}

#[test]
fn harmonic_branches_tie() {
    let model = symbol::harmonic();
    for y in [0.04, 0.1, 0.15] {
        let r = pipeline_action(&model, C64::new(1.0, y), 1e-13).unwrap();
        assert_eq!(r.len(), 2);
        let e: Vec<f64> = r.iter().map(|(p, a)| estimate_single(0.005, y, p, a.value).unwrap().log_leading).collect();
        assert!((e[0] - e[1]).abs() <= 1e-9, "y={y}: {e:?}");
    }
}
