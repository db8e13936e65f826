//! Special functions used by the kernel integrals.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `|Γ(-β)|` through the reflection formula, avoiding direct evaluation next
/// to the poles at the non-negative integers.
pub fn abs_gamma_neg(beta: f64) -> f64 {
    PI / ((PI * beta).sin().abs() * gamma(1.0 + beta))
}

/// Signed `Γ(-β)` for non-integer β > 0.
pub fn gamma_neg(beta: f64) -> f64 {
    -PI / ((PI * beta).sin() * gamma(1.0 + beta))
}

/// Generalized binomial coefficient `C(a, k)` for real `a`.
pub fn binomial(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a - i as f64) / (i as f64 + 1.0))
}

/// Exponential integral `E₁(x) = ∫ₓ^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series for `x <= 1`, modified Lentz continued fraction above. The
/// series loses about `log10(e^{2x})` digits to cancellation, so it is not
/// used beyond `x = 1`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("E1 requires x > 0, got {x}")));
    }
    if x <= 1.0 {
        // E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let contrib = term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() - sum)
    } else {
        Ok(upper_gamma_cf(0.0, x))
    }
}

/// Upper incomplete gamma `Γ(s, x)` by continued fraction; valid for any real
/// `s` and converges quickly once `x > 1`.
pub fn upper_gamma_cf(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + s * x.ln()).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_reference_values() {
        // A&S table 5.1
        assert!((exp_integral_e1(1.0).unwrap() - 0.219_383_934_395_520_27).abs() < 1e-14);
        assert!((exp_integral_e1(0.5).unwrap() - 0.559_773_594_776_160_8).abs() < 1e-14);
        assert!((exp_integral_e1(2.0).unwrap() - 0.048_900_510_708_061_12).abs() < 1e-15);
    }

    #[test]
    fn e1_small_argument_behaviour() {
        for &x in &[1e-6, 1e-9, 1e-12] {
            let r = exp_integral_e1(x).unwrap() + x.ln() + EULER_GAMMA;
            assert!(r.abs() < 2.0 * x, "x={x}: {r}");
        }
    }

    #[test]
    fn e1_bracket_at_ten() {
        let v = exp_integral_e1(10.0).unwrap();
        let e = (-10.0f64).exp();
        assert!(v > e / 11.0 && v < e / 10.0);
    }

    #[test]
    fn e1_branches_meet() {
        let below = exp_integral_e1(1.0).unwrap();
        let above = upper_gamma_cf(0.0, 1.0);
        assert!((below - above).abs() < 1e-14);
        assert!(exp_integral_e1(0.0).is_err() && exp_integral_e1(-1.0).is_err());
    }

    #[test]
    fn reflection_matches_direct_gamma() {
        for &b in &[0.3, 0.5, 0.8, 1.2, 1.7] {
            let direct = gamma(-b);
            assert!((gamma_neg(b) - direct).abs() < 1e-12 * direct.abs());
            assert!((abs_gamma_neg(b) - direct.abs()).abs() < 1e-12 * direct.abs());
        }
    }
}
