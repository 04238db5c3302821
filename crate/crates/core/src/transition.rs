//! Smooth plateau functions used to build Grove–Ziller profiles.
//!
//! The derivative is a power of the standard bump,
//!
//! ```text
//! f'(x) = s · exp(-p u² / (1 - u²)),   u = x / r₁,   |u| < 1,
//! ```
//!
//! and vanishes for `|x| ≥ r₁`. Hence `f` is odd, starts with slope `s`, is
//! concave on `[0, r₁]`, and is constant past `r₁` with every derivative
//! vanishing there to all orders. The sharpness `p` controls how much of the
//! box `s·r₁` the plateau fills.

use crate::error::{invalid, Result};
use crate::quadrature::integrate;

/// Value and first three derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct TransitionProfile {
    slope: f64,
    width: f64,
    sharpness: f64,
    /// `∫₀¹ exp(-p u²/(1-u²)) du`.
    fill: f64,
}

fn bump_exponent(u: f64, p: f64) -> f64 {
    -p * u * u / (1.0 - u * u)
}

fn fill_fraction(p: f64) -> f64 {
    integrate(|u| if u < 1.0 { bump_exponent(u, p).exp() } else { 0.0 }, 0.0, 1.0)
}

impl TransitionProfile {
    pub fn new(slope: f64, width: f64, sharpness: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(invalid("slope", format!("{slope} must be positive")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(invalid("width", format!("{width} must be positive")));
        }
        if !(sharpness > 0.0 && sharpness.is_finite()) {
            return Err(invalid("sharpness", format!("{sharpness} must be positive")));
        }
        Ok(TransitionProfile {
            slope,
            width,
            sharpness,
            fill: fill_fraction(sharpness),
        })
    }

    /// Profile whose plateau value is exactly `height`. Requires
    /// `height < slope·width`: a concave function leaving 0 with slope `s`
    /// cannot climb higher than `s·r₁` within `r₁`.
    pub fn with_height(slope: f64, width: f64, height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(invalid("height", format!("{height} must be positive")));
        }
        let target = height / (slope * width);
        if !(target < 1.0) {
            return Err(invalid(
                "width",
                format!(
                    "a concave transition with slope {slope} over {width} reaches at most {}, below the plateau {height}",
                    slope * width
                ),
            ));
        }
        // fill_fraction decreases from 1 (p → 0) to 0 (p → ∞).
        let (mut lo, mut hi) = (1e-8_f64.ln(), 1e4_f64.ln());
        if fill_fraction(hi.exp()) > target {
            return Err(invalid("height", format!("{height} is too small for width {width}")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fill_fraction(mid.exp()) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Self::new(slope, width, (0.5 * (lo + hi)).exp())
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    /// Constant value attained for `x ≥ r₁`.
    pub fn plateau(&self) -> f64 {
        self.slope * self.width * self.fill
    }

    pub fn eval(&self, x: f64) -> Jet3 {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let u = x.abs() / self.width;
        if u >= 1.0 {
            return Jet3 {
                value: sign * self.plateau(),
                d1: 0.0,
                d2: 0.0,
                d3: 0.0,
            };
        }
        let p = self.sharpness;
        let q = 1.0 - u * u;
        let e = bump_exponent(u, p).exp();
        let g1 = -2.0 * p * u / (q * q);
        let g2 = -2.0 * p * (1.0 + 3.0 * u * u) / (q * q * q);
        let r1 = self.width;
        let value = self.slope * r1 * integrate(|t| bump_exponent(t, p).exp(), 0.0, u);
        // f odd: value and d2 flip sign, d1 and d3 are even.
        Jet3 {
            value: sign * value,
            d1: self.slope * e,
            d2: sign * self.slope * e * g1 / r1,
            d3: self.slope * e * (g1 * g1 + g2) / (r1 * r1),
        }
    }
}

/// The fixed-shape plateau function `f` with `f(0) = 0`, `f'(0) = s₀`,
/// constant for `query ≥ r₁`. Returns `(f, f', f'', f''')` at `query`.
pub fn transition_profile(s0: f64, r1: f64, query: f64) -> Result<Jet3> {
    Ok(TransitionProfile::new(s0, r1, 1.0)?.eval(query))
}
