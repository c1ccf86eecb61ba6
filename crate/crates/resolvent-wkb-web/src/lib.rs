//! Three interactive operations for the static page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the plain `*_rows` functions
//! underneath are what the native tests exercise.

use resolvent_wkb::examples::{self, ExampleId, NumericOptions};
use resolvent_wkb::quasimode::{self, Side};
use resolvent_wkb::symbol::C64;
use wasm_bindgen::prelude::*;

/// Smaller than the native default so a sweep stays interactive.
pub const WEB_AIRY_N: usize = 600;

/// `[re_z, log_numeric, log_asym]` triples for `count` points in `[lo, hi]`.
pub fn airy_compare_rows(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, String> {
    if count == 0 || !(hi >= lo) {
        return Err("empty range".into());
    }
    let opts = NumericOptions { n: Some(WEB_AIRY_N), ..Default::default() };
    let mut out = Vec::with_capacity(3 * count);
    for k in 0..count {
        let re = if count == 1 { lo } else { lo + (hi - lo) * k as f64 / (count - 1) as f64 };
        let s = examples::compare_sample(ExampleId::Airy, C64::new(re, 0.0), None, &opts).map_err(|e| e.to_string())?;
        out.extend([re, s.log_norm_numeric, s.log_norm_asym.unwrap_or(f64::NAN)]);
    }
    Ok(out)
}

/// `[x, |e|, re e]` triples of the WKB mode of `i(1 - x^2)` at turning point 1.
pub fn quasimode_rows(h: f64) -> Result<Vec<f64>, String> {
    let g = |x: f64| C64::new(0.0, 1.0 - x * x);
    let m = quasimode::build_mode(&g, h, 1.0, Side::Plus, (-0.5, 2.5), 1501).map_err(|e| e.to_string())?;
    Ok(m.grid.points().into_iter().zip(&m.values).flat_map(|(x, v)| [x, v.norm(), v.re]).collect())
}

/// `[theta, rate]` pairs on `count` angles in `[0, pi/4)`.
pub fn dk_rows(count: usize) -> Result<Vec<f64>, String> {
    if count == 0 {
        return Err("empty range".into());
    }
    let mut out = Vec::with_capacity(2 * count);
    for k in 0..count {
        let th = std::f64::consts::FRAC_PI_4 * k as f64 / count as f64;
        out.extend([th, examples::dk_growth_rate(th).map_err(|e| e.to_string())?]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn airy_compare(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, JsError> {
    airy_compare_rows(lo, hi, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn quasimode_profile(h: f64) -> Result<Vec<f64>, JsError> {
    quasimode_rows(h).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dk_curve(count: usize) -> Result<Vec<f64>, JsError> {
    dk_rows(count).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn airy_rows_track_the_estimate() {
        let r = airy_compare_rows(4.0, 6.0, 2).unwrap();
        assert_eq!(r.len(), 6);
        for t in r.chunks(3) {
            assert!(((t[1] - t[2]) / t[1]).abs() < 0.01, "{t:?}");
        }
        assert!(airy_compare_rows(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn quasimode_peaks_at_turning_point() {
        let r = quasimode_rows(0.02).unwrap();
        let peak = r.chunks(3).max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
        assert!((peak[0] - 1.0).abs() < 0.01, "{peak:?}");
    }

    #[test]
    fn dk_curve_starts_at_zero_and_grows() {
        let r = dk_rows(8).unwrap();
        assert_eq!(r[1], 0.0);
        assert!(r.chunks(2).zip(r.chunks(2).skip(1)).all(|(a, b)| b[1] > a[1]));
    }
}
