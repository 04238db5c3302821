//! Slope calibration at a pole.
//!
//! Near a pole the noncollapsing pair may split as `A(1 ± ε rᵐ)`, with
//! `m = 1` when the reflection swaps them and `m = 2` when it fixes them.
//! With the collapsing profile `s·r`, the splitting feeds back into
//! `Ric_aa − Ric_bb ≈ 8ε rᵐ⁻² (c²/s² − m²/4)`, which stays bounded as `r → 0`
//! only for the slope `s = 2c/m` at which the coefficient changes sign. The
//! calibration bisects on that sign.

use crate::curvature::ricci_closed_form;
use crate::error::{invalid, Error, Result};
use crate::manifold::{ManifoldSpec, Side};
use crate::stencil::NodeJet;

const SPLIT: f64 = 1e-3;
const RADIUS: f64 = 1e-3;

/// Leading coefficient of `r^{2−m}(Ric_aa − Ric_bb)` as `r → 0`.
fn anisotropy(c: f64, slope: f64, m: i32, pair: [usize; 2], collapse: usize) -> f64 {
    let at = |r: f64| {
        let mut jet = NodeJet {
            v: [1.0; 4],
            d1: [0.0; 4],
            d2: [0.0; 4],
        };
        jet.v[collapse] = slope * r;
        jet.d1[collapse] = slope;
        let mf = m as f64;
        for (sign, j) in [(1.0, pair[0]), (-1.0, pair[1])] {
            jet.v[j] = 1.0 + sign * SPLIT * r.powi(m);
            jet.d1[j] = sign * SPLIT * mf * r.powi(m - 1);
            jet.d2[j] = sign * SPLIT * mf * (mf - 1.0) * r.powi(m - 2);
        }
        let ric = ricci_closed_form(&jet, c);
        (ric[pair[0]] - ric[pair[1]]) * r.powi(2 - m) / SPLIT
    };
    // Two Richardson passes in r.
    let (f0, f1, f2) = (at(RADIUS), at(RADIUS / 2.0), at(RADIUS / 4.0));
    let g0 = 2.0 * f1 - f0;
    let g1 = 2.0 * f2 - f1;
    (4.0 * g1 - g0) / 3.0
}

/// Slope in `range` at which the pole of `spec` on `side` is smooth.
pub fn calibrate_slope(spec: &ManifoldSpec, side: Side, range: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid("trial_range", format!("[{lo}, {hi}] must be a positive interval")));
    }
    let pole = spec
        .pole(side)
        .ok_or_else(|| Error::InvalidSpec(format!("no pole at the {} end", side.name())))?;
    let pair = pole.noncollapsing();
    let m = if pole.reflection.is_identity() { 2 } else { 1 };
    let f = |s: f64| anisotropy(spec.c, s, m, pair, pole.collapse);
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_slope_is_twice_c() {
        for c in [1.0, 2.0] {
            let s = calibrate_slope(&ManifoldSpec::s4(c), Side::Minus, (0.5, 10.0)).unwrap();
            assert!((s / (2.0 * c) - 1.0).abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn no_sign_change_reported() {
        let err = calibrate_slope(&ManifoldSpec::s4(1.0), Side::Minus, (3.0, 5.0));
        assert!(matches!(err, Err(Error::NoSignChange { .. })));
        assert!(calibrate_slope(&ManifoldSpec::s4(1.0), Side::Minus, (2.0, 1.0)).is_err());
    }
}
