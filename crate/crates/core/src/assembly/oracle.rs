//! Frequency-domain evaluation of stiffness entries and load entries.

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::quad::{adaptive_gk, adaptive_gk_noisy};
use crate::special::binomial;
use crate::symbol::{fourier_bspline, symbol, OperatorParams};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Term `coef · x^pow · (ln x)^{log}` with `log ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coef: f64,
    pub pow: f64,
    pub log: bool,
}

impl PowerTerm {
    fn eval(&self, x: f64) -> f64 {
        let v = self.coef * x.powf(self.pow);
        if self.log {
            v * x.ln()
        } else {
            v
        }
    }

    fn derivative(&self) -> Vec<PowerTerm> {
        let mut out = vec![PowerTerm { coef: self.coef * self.pow, pow: self.pow - 1.0, log: self.log }];
        if self.log {
            out.push(PowerTerm { coef: self.coef, pow: self.pow - 1.0, log: false });
        }
        out.retain(|t| t.coef != 0.0);
        out
    }

    /// `∫_U^∞`; requires `pow < −1`.
    fn tail(&self, u: f64) -> f64 {
        let q = self.pow + 1.0;
        let up = u.powf(q);
        if self.log {
            -self.coef * up * (u.ln() / q - 1.0 / (q * q))
        } else {
            -self.coef * up / q
        }
    }
}

/// Large-`ξ` expansion of the symbol, valid for `ξ > λ`.
pub fn symbol_tail_expansion(params: &OperatorParams, terms: usize) -> Vec<PowerTerm> {
    let OperatorParams { beta, lambda } = *params;
    if lambda == 0.0 {
        return vec![PowerTerm { coef: 1.0, pow: beta, log: false }];
    }
    let mut out = Vec::new();
    if beta == 1.0 {
        let s = 2.0 / PI;
        out.push(PowerTerm { coef: s * PI / 2.0, pow: 1.0, log: false });
        out.push(PowerTerm { coef: -s * lambda, pow: 0.0, log: true });
        out.push(PowerTerm { coef: s * (lambda * lambda.ln() - lambda), pow: 0.0, log: false });
        for m in 1..terms {
            let mf = m as f64;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let a = -sign * lambda.powi(2 * m as i32 + 1) / (2.0 * mf + 1.0);
            let b = -0.5 * lambda * (-sign) * lambda.powi(2 * m as i32) / mf;
            out.push(PowerTerm { coef: s * (a + b), pow: -2.0 * mf, log: false });
        }
        return out;
    }
    let sign = if beta < 1.0 { 1.0 } else { -1.0 };
    for k in 0..terms {
        let c = binomial(beta, k) * lambda.powi(k as i32) * ((beta - k as f64) * PI / 2.0).cos();
        if c != 0.0 {
            out.push(PowerTerm { coef: sign * c, pow: beta - k as f64, log: false });
        }
    }
    out.push(PowerTerm { coef: -sign * lambda.powf(beta), pow: 0.0, log: false });
    out
}

const PERIODS: usize = 64;
const EXPANSION_TERMS: usize = 12;

/// `Σ_m b_m cos(m u)` expansion of `cos(j u) (1 − cos u)^r`.
fn cosine_coefficients(r: usize, j: usize) -> Vec<(usize, f64)> {
    let base: &[f64] = if r == 1 { &[1.0, -1.0] } else { &[1.5, -2.0, 0.5] };
    let mut acc: Vec<(usize, f64)> = Vec::new();
    let mut add = |m: usize, v: f64| {
        if let Some(e) = acc.iter_mut().find(|e| e.0 == m) {
            e.1 += v;
        } else {
            acc.push((m, v));
        }
    };
    for (k, a) in base.iter().enumerate() {
        add(j + k, 0.5 * a);
        add(j.abs_diff(k), 0.5 * a);
    }
    acc
}

/// `B(φ_{n,0}, φ_{n,j}) = (2^{r+1}/2π) ∫_0^∞ G(u/h) cos(ju) ((1 − cos u)/u²)^r du`.
///
/// Integrated adaptively over `[0, 2πK]`; the remainder uses the large-`u`
/// expansion of `G` and asymptotic integration by parts.
pub fn symbol_entry_oracle(params: &OperatorParams, spec: &BasisSpec, j: usize) -> Result<f64> {
    let r = spec.r();
    let h = spec.h();
    let jf = j as f64;
    let integrand = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let s = (0.5 * u).sin();
        let w = (2.0 * s * s / (u * u)).powi(r as i32);
        symbol(params, u / h) * (jf * u).cos() * w
    };
    let upper = 2.0 * PI * PERIODS as f64;
    if params.lambda * h * 10.0 > upper {
        return Err(Error::Domain("oracle expansion requires λh small".into()));
    }
    let scale = symbol(params, 1.0 / h).max(1e-300);
    let mut head = 0.0;
    for k in 0..PERIODS {
        let (a, b) = (2.0 * PI * k as f64, 2.0 * PI * (k + 1) as f64);
        // cos(ju) carries an absolute phase error of about ε j u
        head += adaptive_gk_noisy(integrand, a, b, 1e-16 * scale, 1e-14, 2000, 100.0 * (1.0 + jf * b))?;
    }
    // F(u) = G(u/h) u^{−2r} as power terms in u
    let mut f_terms = Vec::new();
    for t in symbol_tail_expansion(params, EXPANSION_TERMS) {
        let c = t.coef * h.powf(-t.pow);
        let p = t.pow - 2.0 * r as f64;
        if t.log {
            f_terms.push(PowerTerm { coef: c, pow: p, log: true });
            f_terms.push(PowerTerm { coef: -c * h.ln(), pow: p, log: false });
        } else {
            f_terms.push(PowerTerm { coef: c, pow: p, log: false });
        }
    }
    let eval_all = |ts: &[PowerTerm], x: f64| ts.iter().map(|t| t.eval(x)).sum::<f64>();
    let mut derivs = vec![f_terms.clone()];
    for _ in 0..7 {
        let next: Vec<PowerTerm> = derivs.last().unwrap().iter().flat_map(|t| t.derivative()).collect();
        derivs.push(next);
    }
    let mut tail = 0.0;
    for (m, b) in cosine_coefficients(r, j) {
        if b == 0.0 {
            continue;
        }
        if m == 0 {
            tail += b * f_terms.iter().map(|t| t.tail(upper)).sum::<f64>();
        } else {
            let mm = (m * m) as f64;
            let mut v = 0.0;
            let mut sign = -1.0;
            let mut den = mm;
            for order in [1usize, 3, 5, 7] {
                v += sign * eval_all(&derivs[order], upper) / den;
                sign = -sign;
                den *= mm;
            }
            tail += b * v;
        }
    }
    Ok(2f64.powi(r as i32 + 1) / (2.0 * PI) * (head + tail))
}

/// `(1/2π) ∫ G F[u] conj(F[φ_{n,j}]) dξ` over `[−Ξ, Ξ]`, for a manufactured
/// solution given through its Fourier transform.
pub fn fourier_load_entry<F: Fn(f64) -> Complex64>(
    params: &OperatorParams,
    spec: &BasisSpec,
    u_hat: F,
    j: usize,
    xi_max: f64,
) -> Result<f64> {
    let h = spec.h();
    let amp = h.sqrt();
    let r = spec.r();
    let integrand = |xi: f64| {
        let phi = amp * Complex64::from_polar(1.0, -(j as f64) * h * xi) * fourier_bspline(r, h * xi);
        symbol(params, xi) * (u_hat(xi) * phi.conj()).re
    };
    let panel = PI;
    let panels = (xi_max / panel).ceil() as usize;
    let mut total = 0.0;
    for k in 0..panels {
        let (a, b) = (k as f64 * panel, ((k + 1) as f64 * panel).min(xi_max));
        total += adaptive_gk(integrand, a, b, 1e-18, 1e-13, 2000)?;
    }
    // G F[u] conj(F[φ]) is even in ξ after taking the real part
    Ok(total / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::stiffness::stiffness_entry;

    fn p(beta: f64, lambda: f64) -> OperatorParams {
        OperatorParams::new(beta, lambda).unwrap()
    }

    #[test]
    fn expansion_matches_symbol_far_out() {
        for &(beta, lambda) in &[(0.3, 3.0), (1.0, 3.0), (1.5, 1.0), (1.8, 3.0), (0.5, 0.0)] {
            let prm = p(beta, lambda);
            let terms = symbol_tail_expansion(&prm, EXPANSION_TERMS);
            for xi in [50.0 * lambda.max(1.0), 1e4] {
                let approx: f64 = terms.iter().map(|t| t.eval(xi)).sum();
                let exact = symbol(&prm, xi);
                assert!((approx - exact).abs() < 1e-12 * exact, "{beta} {lambda} {xi}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn cosine_expansion() {
        // cos(2u)(1 − cos u)² at u = 0.7
        let u: f64 = 0.7;
        let want = (2.0 * u).cos() * (1.0 - u.cos()).powi(2);
        let got: f64 = cosine_coefficients(2, 2).iter().map(|(m, b)| b * (*m as f64 * u).cos()).sum();
        assert!((want - got).abs() < 1e-15);
        let want1 = 1.0 - u.cos();
        let got1: f64 = cosine_coefficients(1, 0).iter().map(|(m, b)| b * (*m as f64 * u).cos()).sum();
        assert!((want1 - got1).abs() < 1e-15);
    }

    #[test]
    fn oracle_matches_time_domain_r1() {
        let prm = p(0.3, 0.0);
        let spec = BasisSpec::new(1, 6).unwrap();
        for j in 0..4 {
            let a = symbol_entry_oracle(&prm, &spec, j).unwrap();
            let b = stiffness_entry(&prm, 1, 6, j).unwrap();
            assert!((a - b).abs() < 1e-6 * b.abs(), "j={j}: {a} vs {b}");
        }
    }

    #[test]
    fn r2_integrand_tail_decay() {
        let prm = p(1.0, 0.0);
        let h = 1.0 / 64.0;
        // envelope of G(u/h)((1 − cos u)/u²)² with cos u = −1
        let env = |u: f64| symbol(&prm, u / h) * (2.0 / (u * u)).powi(2);
        let (u1, u2) = (PI * 101.0, PI * 1001.0);
        let slope = (env(u2).ln() - env(u1).ln()) / (u2.ln() - u1.ln());
        assert!((slope - (1.0 - 4.0)).abs() < 1e-6);
    }
}
