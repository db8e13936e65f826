//! Integrals of the tempered kernel `ζ(y) = e^{−λy} y^{−1−β}`.

use crate::error::{Error, Result};
use crate::quad::{gauss_jacobi, integrate_graded};
use crate::special::{exp_integral_e1, gamma, upper_gamma_cf};
use crate::symbol::OperatorParams;

const MAX_IBP_TERMS: usize = 100;

#[inline]
pub fn zeta(params: &OperatorParams, y: f64) -> f64 {
    (-params.lambda * y).exp() * y.powf(-1.0 - params.beta)
}

/// `∫_0^h y^p e^{−λy} dy` for `p > −1`.
///
/// Integration by parts peels off `K − 1` boundary terms and the remaining
/// smooth weight `y^{p+K−1}` is handled by Gauss–Jacobi.
pub fn power_exp_moment(p: f64, lambda: f64, h: f64) -> Result<f64> {
    if !(p > -1.0) {
        return Err(Error::Domain(format!("moment exponent must exceed -1, got {p}")));
    }
    if !(h >= 0.0) {
        return Err(Error::Domain(format!("moment upper limit must be >= 0, got {h}")));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    if lambda == 0.0 {
        return Ok(h.powf(p + 1.0) / (p + 1.0));
    }
    let x = lambda * h;
    // smallest K ≥ 4 whose next term is below 1e-16 of the leading one
    let mut k = 4usize;
    loop {
        let mut ratio = 1.0;
        for i in 1..=k {
            ratio *= x / (p + i as f64 + 1.0);
        }
        if ratio.abs() < 1e-16 {
            break;
        }
        k += 1;
        if k > MAX_IBP_TERMS {
            return Err(Error::Quadrature(format!(
                "moment series for lambda*h = {x} did not converge in {MAX_IBP_TERMS} terms"
            )));
        }
    }
    let e = (-x).exp();
    let mut sum = 0.0;
    let mut coeff = 1.0; // λ^{l−1} / Π_{i=1}^{l} (p+i)
    let mut hp = h.powf(p);
    for l in 1..k {
        coeff /= p + l as f64;
        hp *= h;
        sum += e * coeff * hp;
        coeff *= lambda;
    }
    // coeff now λ^{K−1}/Π_{i=1}^{K−1}(p+i)
    let q = p + (k - 1) as f64;
    let rule = gauss_jacobi(32, 0.0, q)?;
    let half = 0.5 * h;
    let rem: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(eta, w)| w * (-lambda * half * (1.0 + eta)).exp())
        .sum::<f64>()
        * half.powf(q + 1.0);
    Ok(sum + coeff * rem)
}

/// `∫_0^h e^{−λy} y^{k−β} dy`; requires `k − β > −1`.
pub fn regularized_moment(lambda: f64, beta: f64, h: f64, k: i32) -> Result<f64> {
    power_exp_moment(k as f64 - beta, lambda, h)
}

/// `∫_a^∞ e^{−λy} y^{−1−β} dy` for `a > 0`.
pub fn tail_integral(lambda: f64, beta: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("tail integral needs a > 0, got {a}")));
    }
    if lambda == 0.0 {
        return Ok(a.powf(-beta) / beta);
    }
    let x = lambda * a;
    if beta == 1.0 {
        return Ok((-x).exp() / a - lambda * exp_integral_e1(x)?);
    }
    // λ^β Γ(−β, λa)
    let upper = if x > 1.0 {
        upper_gamma_cf(-beta, x)
    } else {
        let e = (-x).exp();
        let g1mb = if beta < 1.0 {
            gamma(1.0 - beta) - power_exp_moment(-beta, 1.0, x)?
        } else {
            let g2mb = gamma(2.0 - beta) - power_exp_moment(1.0 - beta, 1.0, x)?;
            (g2mb - x.powf(1.0 - beta) * e) / (1.0 - beta)
        };
        (x.powf(-beta) * e - g1mb) / beta
    };
    Ok(lambda.powf(beta) * upper)
}

/// `∫_a^b s^m ζ(s) ds` for integer `m ≥ 0`, `0 ≤ a ≤ b ≤ ∞`.
pub fn zeta_moment(params: &OperatorParams, m: i32, a: f64, b: f64) -> Result<f64> {
    let p = m as f64 - 1.0 - params.beta;
    if b <= a {
        return Ok(0.0);
    }
    if b.is_infinite() {
        if m != 0 {
            return Err(Error::Domain("infinite moments only for m = 0".into()));
        }
        return tail_integral(params.lambda, params.beta, a);
    }
    if a == 0.0 {
        return power_exp_moment(p, params.lambda, b);
    }
    let lambda = params.lambda;
    Ok(integrate_graded(0.0, a, b, 20, |s| s.powf(p) * (-lambda * s).exp()))
}
