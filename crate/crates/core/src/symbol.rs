//! Fourier symbol of the tempered fractional operator and a spectral
//! application routine used as an independent oracle.

use crate::error::{Error, Result};
use crate::special::{abs_gamma_neg, gamma};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Exponent β ∈ (0, 2) and tempering λ ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub beta: f64,
    pub lambda: f64,
}

impl OperatorParams {
    pub fn new(beta: f64, lambda: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::Domain(format!("beta must lie in (0, 2), got {beta}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Self { beta, lambda })
    }

    pub fn is_tempered(&self) -> bool {
        self.lambda > 0.0
    }

    pub fn is_beta_one(&self) -> bool {
        self.beta == 1.0
    }

    /// Kernel normalization `c_β`.
    ///
    /// The untempered constant is used when λ = 0 or β = 1; otherwise
    /// `1 / (2 |Γ(-β)|)`.
    pub fn c_beta(&self) -> f64 {
        if self.lambda == 0.0 || self.beta == 1.0 {
            gamma(1.0 + self.beta) * (0.5 * PI * self.beta).sin() / PI
        } else {
            1.0 / (2.0 * abs_gamma_neg(self.beta))
        }
    }
}

/// Symbol `G(ξ)`; the operator acts as `F[L w](ξ) = G(ξ) F[w](ξ)`.
pub fn symbol(params: &OperatorParams, xi: f64) -> f64 {
    let a = xi.abs();
    let OperatorParams { beta, lambda } = *params;
    if lambda == 0.0 {
        return a.powf(beta);
    }
    if a == 0.0 {
        return 0.0;
    }
    let t = a / lambda;
    if beta == 1.0 {
        let core = if t < 1e-4 {
            let t2 = t * t;
            t2 * (0.5 - t2 / 12.0 + t2 * t2 / 30.0)
        } else {
            t * t.atan() - 0.5 * (t * t).ln_1p()
        };
        return 2.0 / PI * lambda * core;
    }
    let sign = if beta < 1.0 { 1.0 } else { -1.0 };
    sign * lambda.powf(beta) * re_power_minus_one(beta, t)
}

/// `Re (1 + i t)^β − 1` without cancellation for small `t`.
fn re_power_minus_one(beta: f64, t: f64) -> f64 {
    let a = 0.5 * beta * (t * t).ln_1p();
    let b = beta * t.atan();
    let s = (0.5 * b).sin();
    a.exp_m1() * b.cos() - 2.0 * s * s
}

/// `∫_0^∞ (2 − 2 cos ξy) e^{−λy} y^{−1−β} dy`, i.e. the symbol without the
/// normalization constant. Continuous in (β, λ) on the whole parameter range.
pub fn kernel_symbol(params: &OperatorParams, xi: f64) -> f64 {
    symbol(params, xi) / params.c_beta()
}

/// Samples `values[i] = w(x_lo + i dx)` with `dx = (x_hi − x_lo) / len`
/// (right endpoint excluded, periodic convention).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub x_lo: f64,
    pub x_hi: f64,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn from_fn<F: Fn(f64) -> f64>(x_lo: f64, x_hi: f64, len: usize, f: F) -> Self {
        let dx = (x_hi - x_lo) / len as f64;
        let values = (0..len).map(|i| f(x_lo + i as f64 * dx)).collect();
        Self { x_lo, x_hi, values }
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.values.len() as f64
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx()
    }
}

/// Spectral application `L w` on a zero-padded periodic grid.
///
/// `w` must decay to zero at both ends of its window; large boundary values
/// only produce a warning because wrap-around pollutes the result.
pub fn apply_operator_fourier(
    params: &OperatorParams,
    w: &SampledFunction,
    pad_factor: usize,
) -> Result<SampledFunction> {
    let m = w.values.len();
    if m < 2 || pad_factor == 0 {
        return Err(Error::Domain("need at least two samples and pad_factor >= 1".into()));
    }
    let peak = w.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let edge = w.values[0].abs().max(w.values[m - 1].abs());
    if peak > 0.0 && edge > 1e-12 * peak {
        log::warn!(
            "apply_operator_fourier: boundary sample {edge:.3e} relative to max {peak:.3e}; result is aliased"
        );
    }
    let len = m * pad_factor;
    let dx = w.dx();
    let mut buf: Vec<Complex64> = (0..len)
        .map(|i| Complex64::new(if i < m { w.values[i] } else { 0.0 }, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
        let xi = 2.0 * PI * kk / (len as f64 * dx);
        *z *= symbol(params, xi) / len as f64;
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    Ok(SampledFunction {
        x_lo: w.x_lo,
        x_hi: w.x_hi,
        values: buf[..m].iter().map(|z| z.re).collect(),
    })
}

/// `∫_0^1 (c0 + c1 x + c2 x² + c3 x³) e^{−ixξ} dx`.
pub fn fourier_of_cubic(coeffs: [f64; 4], xi: f64) -> Complex64 {
    // The closed form cancels like ξ^{-4}; the series needs ~40 terms at |ξ| = 2.
    if xi.abs() < 2.0 {
        // Σ_k (−iξ)^k/k! ∫ x^k P(x) dx
        let mut sum = Complex64::new(0.0, 0.0);
        let mut fac = Complex64::new(1.0, 0.0);
        for k in 0..40 {
            if k > 0 {
                fac *= Complex64::new(0.0, -xi) / k as f64;
            }
            let mom: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| c / (k + m + 1) as f64)
                .sum();
            sum += fac * mom;
        }
        return sum;
    }
    // Σ_m [P^{(m)}(0) − P^{(m)}(1) e^{−iξ}] / (iξ)^{m+1}
    let d0 = [coeffs[0], coeffs[1], 2.0 * coeffs[2], 6.0 * coeffs[3]];
    let d1 = [
        coeffs.iter().sum::<f64>(),
        coeffs[1] + 2.0 * coeffs[2] + 3.0 * coeffs[3],
        2.0 * coeffs[2] + 6.0 * coeffs[3],
        6.0 * coeffs[3],
    ];
    let e = Complex64::from_polar(1.0, -xi);
    let ixi = Complex64::new(0.0, xi);
    let mut pow = ixi;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 0..4 {
        sum += (d0[m] - d1[m] * e) / pow;
        pow *= ixi;
    }
    sum
}

/// Fourier transform of the cardinal B-spline `M_r` supported on `[0, r]`.
pub fn fourier_bspline(r: usize, xi: f64) -> Complex64 {
    // (1 − e^{−iξ})/(iξ) = sin ξ/ξ − 2i sin²(ξ/2)/ξ
    let base = if xi.abs() < 1e-8 {
        Complex64::new(1.0 - xi * xi / 6.0, -xi / 2.0)
    } else {
        let s = (0.5 * xi).sin();
        Complex64::new(xi.sin() / xi, -2.0 * s * s / xi)
    };
    base.powu(r as u32)
}
