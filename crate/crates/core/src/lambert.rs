//! Principal branch of the Lambert W function and the Wright omega function.

use crate::error::DivergenceError;
use crate::math::{exp, ln, ln_1p, sqrt};

const MAX_ITER: usize = 50;
const INV_E: f64 = 0.367_879_441_171_442_33;

/// Principal branch `W₀(x)`: the `w ≥ -1` solving `w eʷ = x`.
///
/// Halley iteration started from `ln(1 + x)` for non-negative `x` and from
/// the branch-point series near `-1/e`.
pub fn lambert_w(x: f64) -> Result<f64, DivergenceError> {
    if x.is_nan() || x < -INV_E {
        // Tolerate the rounding of -1/e itself.
        if x.is_nan() || x < -INV_E - 4.0 * f64::EPSILON {
            return Err(DivergenceError::LambertDomain(x));
        }
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if x >= 0.0 {
        ln_1p(x)
    } else if x < -0.25 {
        let p = sqrt(2.0 * (core::f64::consts::E * x + 1.0).max(0.0));
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        ln_1p(x)
    };
    if w <= -1.0 {
        return Ok(-1.0);
    }
    for _ in 0..MAX_ITER {
        let ew = exp(w);
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            return Ok(w);
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        if !next.is_finite() {
            return Err(DivergenceError::LambertNoConvergence(x));
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            return Ok(w);
        }
    }
    Err(DivergenceError::LambertNoConvergence(x))
}

/// Wright omega `ω(z) = W₀(eᶻ)`, the solution of `ω + ln ω = z`.
///
/// Stays finite where `eᶻ` would overflow or underflow.
pub fn wright_omega(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z == f64::INFINITY {
        return f64::INFINITY;
    }
    if z < -745.0 {
        return 0.0;
    }
    let mut w = if z > 1.0 {
        z - ln(z)
    } else if z < -2.0 {
        exp(z)
    } else {
        // W(e^z) on [-2, 1] lies in [0.12, 1]; a linear guess is close enough.
        (0.57 + 0.2 * z).max(0.1)
    };
    for _ in 0..MAX_ITER {
        // Newton on ω + ln ω - z with the exact derivative 1 + 1/ω.
        let r = w + ln(w) - z;
        let next = w - r * w / (w + 1.0);
        let next = if next <= 0.0 { w * 0.5 } else { next };
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next;
        w = next;
        if done {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(x: f64) -> f64 {
        let w = lambert_w(x).unwrap();
        (w * exp(w) - x).abs() / x.abs().max(1.0)
    }

    #[test]
    fn fixed_points() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(core::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w(-INV_E).unwrap() + 1.0).abs() < 1e-7);
    }

    #[test]
    fn omega_constant() {
        // Reference value from plain Newton on w e^w = 1 started at 0.5.
        let mut w: f64 = 0.5;
        for _ in 0..100 {
            w -= (w * w.exp() - 1.0) / (w.exp() * (w + 1.0));
        }
        let got = lambert_w(1.0).unwrap();
        assert!((got - w).abs() < 1e-15);
        assert!((got - 0.567_143_290_4).abs() < 1e-10);
    }

    #[test]
    fn residual_bound_over_range() {
        let mut x = -INV_E + 1e-12;
        while x < 0.0 {
            assert!(residual(x) <= 1e-12, "x={x}");
            x += 0.00731;
        }
        for k in -300..=300 {
            let x = 10f64.powf(k as f64);
            assert!(residual(x) <= 1e-12, "x={x}");
        }
    }

    #[test]
    fn domain_error() {
        assert!(matches!(lambert_w(-0.5), Err(DivergenceError::LambertDomain(_))));
        assert!(lambert_w(f64::NAN).is_err());
    }

    #[test]
    fn omega_matches_lambert_of_exp() {
        let mut z = -30.0;
        while z <= 30.0 {
            let a = wright_omega(z);
            let b = lambert_w(exp(z)).unwrap();
            assert!(((a - b) / b).abs() < 1e-13, "z={z} {a} {b}");
            z += 0.173;
        }
        // Far beyond the range of exp.
        let w = wright_omega(1000.0);
        assert!((w + ln(w) - 1000.0).abs() < 1e-12);
        let w = wright_omega(-700.0);
        assert!(((w - exp(-700.0)) / w).abs() < 1e-14);
    }
}
