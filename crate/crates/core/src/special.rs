//! Error-function utilities shared by the statistics and detection code.
//!
//! `erf`/`erfc` come from `statrs`; the inverse is solved here by Newton
//! iteration, seeded from the closed-form inverse of the Winitzki-type
//! approximation used for hardware-friendly thresholds.

use std::f64::consts::PI;

pub use statrs::function::erf::{erf, erfc};

/// Constant of the rational-exponent erf approximation.
pub const ERF_APPROX_A: f64 = 0.147;

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Closed-form inverse of the approximation
/// `erf(x) ~ sgn(x) sqrt(1 - exp(-x^2 (4/pi + a x^2) / (1 + a x^2)))`.
pub(crate) fn erf_inv_approx(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    y.signum() * approx_from_log_tail((1.0 - y * y).ln())
}

/// Same inverse expressed through `l = ln(1 - y^2)`, so callers holding
/// `q = 1 - y` can pass `ln(q (2 - q))` without cancellation.
fn approx_from_log_tail(l: f64) -> f64 {
    let a = ERF_APPROX_A;
    let b = 2.0 / (PI * a) + 0.5 * l;
    let x2 = (b * b - l / a).sqrt() - b;
    x2.max(0.0).sqrt()
}

/// Inverse error function on (-1, 1), accurate to ~1e-14 relative.
///
/// Returns +/-infinity at +/-1 and NaN outside [-1, 1].
pub fn erf_inv(y: f64) -> f64 {
    if !(-1.0..=1.0).contains(&y) || y.is_nan() {
        return f64::NAN;
    }
    if y == 1.0 {
        return f64::INFINITY;
    }
    if y == -1.0 {
        return f64::NEG_INFINITY;
    }
    if y < 0.0 {
        return -erf_inv(-y);
    }
    if y > 0.5 {
        return erfc_inv(1.0 - y);
    }
    let mut x = erf_inv_approx(y);
    for _ in 0..50 {
        let f = erf(x) - y;
        let step = f / (TWO_OVER_SQRT_PI * (-x * x).exp());
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

/// Inverse of `erfc` on (0, 1]; solving against `erfc` keeps relative
/// precision when the target of `erf_inv` sits next to 1.
pub fn erfc_inv(q: f64) -> f64 {
    debug_assert!(q > 0.0 && q <= 1.0);
    if q >= 1.0 {
        return 0.0;
    }
    let mut x = approx_from_log_tail(q.ln() + (2.0 - q).ln()).max(1e-3);
    for _ in 0..100 {
        // Newton on log(erfc(x)) - log(q): well conditioned deep in the tail.
        let e = erfc(x);
        let deriv = -TWO_OVER_SQRT_PI * (-x * x).exp() / e;
        let step = (e.ln() - q.ln()) / deriv;
        x -= step;
        if step.abs() <= 1e-15 * x.abs() {
            break;
        }
    }
    x
}

/// `1 - erf(x)^n` for x >= 0, computed without cancellation.
pub(crate) fn one_minus_erf_pow(x: f64, n: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let tail = erfc(x);
    if tail >= 1.0 {
        return 1.0;
    }
    -(n * (-tail).ln_1p()).exp_m1()
}
