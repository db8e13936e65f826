//! Piecewise-smooth functions on ℝ and pointwise application of the
//! tempered operator `L w(x) = c_β ∫_0^∞ [2w(x) − w(x+t) − w(x−t)] ζ(t) dt`.

use crate::error::{Error, Result};
use crate::kernel::{tail_integral, zeta, zeta_moment};
use crate::quad::{gauss_legendre, integrate_graded};
use crate::special::gamma;
use crate::symbol::OperatorParams;
use serde::{Deserialize, Serialize};

/// Analytic piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Smooth {
    /// `Σ c_k x^k`.
    Poly(Vec<f64>),
    /// `e^{−x²}`.
    Gaussian,
    /// `scale · (x − x²)^{exponent}`; not differentiable at 0 and 1.
    Bubble { exponent: f64, scale: f64 },
}

impl Smooth {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Smooth::Poly(c) => c.iter().rev().fold(0.0, |acc, a| acc * x + a),
            Smooth::Gaussian => (-x * x).exp(),
            Smooth::Bubble { exponent, scale } => {
                let b = x - x * x;
                if b <= 0.0 {
                    0.0
                } else {
                    scale * b.powf(*exponent)
                }
            }
        }
    }

    /// `f(x + d) − f(x)` without cancellation for small `d`.
    pub fn increment(&self, x: f64, d: f64) -> f64 {
        match self {
            Smooth::Poly(c) => {
                // exact Taylor expansion: Σ_j f^{(j)}(x) d^j / j!
                let mut deriv = c.clone();
                let (mut sum, mut pow, mut fact) = (0.0, 1.0, 1.0);
                for j in 1..c.len() {
                    deriv = deriv.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect();
                    pow *= d;
                    fact *= j as f64;
                    sum += Smooth::Poly(deriv.clone()).value(x) * pow / fact;
                }
                sum
            }
            Smooth::Gaussian => (-x * x).exp() * (-d * (2.0 * x + d)).exp_m1(),
            Smooth::Bubble { .. } => self.value(x + d) - self.value(x),
        }
    }

    /// `k`-th derivative, if available in closed form.
    pub fn derivative(&self, x: f64, k: usize) -> Option<f64> {
        match self {
            Smooth::Poly(c) => {
                let mut d = c.clone();
                for _ in 0..k {
                    if d.is_empty() {
                        break;
                    }
                    d = d.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect();
                }
                Some(Smooth::Poly(d).value(x))
            }
            Smooth::Gaussian => {
                // d^k e^{−x²} = (−1)^k H_k(x) e^{−x²}
                let (mut h0, mut h1) = (1.0, 2.0 * x);
                let hk = if k == 0 {
                    1.0
                } else {
                    for i in 1..k {
                        let h2 = 2.0 * x * h1 - 2.0 * i as f64 * h0;
                        h0 = h1;
                        h1 = h2;
                    }
                    h1
                };
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                Some(sign * hk * (-x * x).exp())
            }
            Smooth::Bubble { .. } => None,
        }
    }
}

/// Analytic piece on `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub f: Smooth,
}

/// Sorted, non-overlapping pieces; `far` is the value outside every piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    pieces: Vec<Piece>,
    far: f64,
}

impl PiecewiseFunction {
    pub fn new(mut pieces: Vec<Piece>, far: f64) -> Result<Self> {
        pieces.retain(|p| p.hi > p.lo);
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in pieces.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::InvalidProblem(format!(
                    "overlapping pieces [{}, {}) and [{}, {})",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        if pieces.iter().any(|p| !p.lo.is_finite() || !p.hi.is_finite()) || !far.is_finite() {
            return Err(Error::InvalidProblem("pieces must have finite bounds".into()));
        }
        Ok(Self { pieces, far })
    }

    pub fn zero() -> Self {
        Self { pieces: Vec::new(), far: 0.0 }
    }

    pub fn single(lo: f64, hi: f64, f: Smooth) -> Self {
        Self { pieces: vec![Piece { lo, hi, f }], far: 0.0 }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn far(&self) -> f64 {
        self.far
    }

    /// Union of the two piece lists; overlapping pieces are rejected.
    pub fn concat(&self, other: &PiecewiseFunction) -> Result<Self> {
        let mut p = self.pieces.clone();
        p.extend(other.pieces.iter().cloned());
        Self::new(p, self.far + other.far)
    }

    fn locate(&self, x: f64) -> Option<&Piece> {
        let idx = self.pieces.partition_point(|p| p.lo <= x);
        if idx == 0 {
            return None;
        }
        let p = &self.pieces[idx - 1];
        (x < p.hi).then_some(p)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some(p) => p.f.value(x),
            None => self.far,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().flat_map(|p| [p.lo, p.hi]).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Hull of all pieces, or `None` when the function is constant.
    pub fn hull(&self) -> Option<(f64, f64)> {
        let lo = self.pieces.first()?.lo;
        let hi = self.pieces.iter().map(|p| p.hi).fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// `k`-th derivative at a point strictly inside a piece or outside all pieces.
    fn local_derivative(&self, x: f64, k: usize) -> Option<f64> {
        match self.locate(x) {
            Some(p) => p.f.derivative(x, k),
            None => Some(if k == 0 { self.far } else { 0.0 }),
        }
    }
}

const TAYLOR_TERMS: usize = 8;
const TAYLOR_RADIUS: f64 = 0.1;

/// `L w(x)` for `x` not on a breakpoint of `w`.
pub fn apply_operator_pointwise(params: &OperatorParams, w: &PiecewiseFunction, x: f64) -> Result<f64> {
    let mut dist: Vec<f64> = w.breakpoints().iter().map(|b| (x - b).abs()).collect();
    dist.sort_by(f64::total_cmp);
    dist.dedup();
    if dist.first() == Some(&0.0) {
        return Err(Error::Domain(format!("operator evaluated on breakpoint x = {x}")));
    }
    let wx = w.value(x);
    let bracket = |t: f64| 2.0 * wx - w.value(x + t) - w.value(x - t);
    let t1 = dist.first().copied().unwrap_or(f64::INFINITY);
    let delta = t1.min(TAYLOR_RADIUS);
    // 2w − w(x+t) − w(x−t) = −Σ_k 2 w^{(2k)}(x) t^{2k}/(2k)!
    let mut total = 0.0;
    let mut fact = 1.0;
    for k in 1..=TAYLOR_TERMS {
        fact *= ((2 * k - 1) * (2 * k)) as f64;
        let d = w.local_derivative(x, 2 * k).ok_or_else(|| {
            Error::Domain("operator application needs closed-form derivatives".into())
        })?;
        if d != 0.0 {
            total -= 2.0 * d / fact * zeta_moment(params, 2 * k as i32, 0.0, delta)?;
        }
    }
    let integrand = |t: f64| bracket(t) * zeta(params, t);
    let mut lo = delta;
    for &d in dist.iter().chain(std::iter::once(&f64::INFINITY)) {
        let hi = d;
        if hi.is_infinite() {
            break;
        }
        if hi > lo {
            total += integrate_graded(0.0, lo, hi, 20, integrand);
            lo = hi;
        }
    }
    if lo.is_finite() && lo > 0.0 {
        total += (2.0 * wx - 2.0 * w.far()) * tail_integral(params.lambda, params.beta, lo)?;
    }
    Ok(params.c_beta() * total)
}

/// `B(u, v)` by direct quadrature of `c_β ∫_0^∞ ζ(t) C(t) dt` with
/// `C(t) = ∫ (u(x+t) − u(x)) (v(x+t) − v(x)) dx`. `v` must be compactly
/// supported and all breakpoints must lie on the grid `h ℤ`.
pub fn bilinear_direct(
    params: &OperatorParams,
    u: &PiecewiseFunction,
    v: &PiecewiseFunction,
    h: f64,
) -> Result<f64> {
    if v.far() != 0.0 {
        return Err(Error::Domain("second argument must be compactly supported".into()));
    }
    let Some((vlo, vhi)) = v.hull() else {
        return Ok(0.0);
    };
    let (ulo, uhi) = u.hull().unwrap_or((vlo, vhi));
    let tmax = vhi.max(uhi) - vlo.min(ulo);
    let mut bps: Vec<f64> = u.breakpoints();
    bps.extend(v.breakpoints());
    if bps.iter().any(|b| ((b / h) - (b / h).round()).abs() > 1e-9) {
        return Err(Error::Domain("bilinear_direct needs breakpoints on the grid h·Z".into()));
    }
    let rule = gauss_legendre(10);
    let cell = |k: i64| h * (k as f64 + 0.5);
    let v_cells: Vec<i64> = ((vlo / h).round() as i64..(vhi / h).round() as i64).collect();
    // Pieces are chosen by cell index, never by rounding x, so that
    // segments of length ~ulp near a breakpoint keep the correct side.
    let c_of_t = |t: f64| -> f64 {
        let tau_full = t / h;
        let m = tau_full.floor() as i64;
        let tau = tau_full - m as f64;
        let mut cells: Vec<i64> = v_cells.iter().flat_map(|k| [*k, k - m, k - m - 1]).collect();
        cells.sort_unstable();
        cells.dedup();
        let mut sum = 0.0;
        let ev = |p: Option<&Piece>, far: f64, y: f64| p.map_or(far, |p| p.f.value(y));
        // w(y) − w(x) with y = x + t; within one piece the increment is formed
        // directly, which keeps C(t) relatively accurate as t → 0
        let diff = |from: Option<&Piece>, to: Option<&Piece>, far: f64, x: f64, y: f64, t: f64| match (from, to) {
            (None, None) => 0.0,
            (Some(p), Some(q)) if std::ptr::eq(p, q) => p.f.increment(x, t),
            _ => ev(to, far, y) - ev(from, far, x),
        };
        for k in cells {
            let (u0, v0) = (u.locate(cell(k)), v.locate(cell(k)));
            let kf = k as f64;
            // x + t stays in cell k + m for θ ∈ [0, 1 − τ]
            let (u1, v1) = (u.locate(cell(k + m)), v.locate(cell(k + m)));
            if tau < 1.0 && (v0.is_some() || v1.is_some()) {
                sum += h * rule.integrate(0.0, 1.0 - tau, |theta| {
                    let (x, y) = (h * (kf + theta), h * ((k + m) as f64 + theta + tau));
                    diff(u0, u1, u.far(), x, y, t) * diff(v0, v1, 0.0, x, y, t)
                });
            }
            // and crosses into cell k + m + 1 on the last τ of the cell;
            // parametrized by σ ∈ [0, τ] so that tiny τ keeps its length
            let (u2, v2) = (u.locate(cell(k + m + 1)), v.locate(cell(k + m + 1)));
            if tau > 0.0 && (v0.is_some() || v2.is_some()) {
                sum += h * rule.integrate(0.0, tau, |sigma| {
                    let (x, y) = (h * (kf + 1.0) - h * (tau - sigma), h * ((k + m + 1) as f64 + sigma));
                    (ev(u2, u.far(), y) - ev(u0, u.far(), x)) * (ev(v2, 0.0, y) - ev(v0, 0.0, x))
                });
            }
        }
        sum
    };
    let steps = (tmax / h).ceil() as usize;
    let mut total = 0.0;
    let q = 4.0;
    // first cell: t = h s^q flattens the t^{−1−β} singularity
    let first = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let t = h * s.powf(q);
        c_of_t(t) * zeta(params, t) * h * q * s.powf(q - 1.0)
    };
    let scale = c_of_t(h).abs().max(1e-300) * zeta(params, h) * h;
    total += crate::quad::adaptive_gk(first, 0.0, 1.0, 1e-14 * scale, 1e-13, 4000)?;
    for k in 1..steps {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        total += crate::quad::adaptive_gk(|t| c_of_t(t) * zeta(params, t), a, b, 1e-15 * scale, 1e-13, 4000)?;
    }
    let t_end = steps as f64 * h;
    // beyond t_end: C(t) = 2 ∫ (u − far) v
    let mut uv = 0.0;
    let vb = v.breakpoints();
    let mut pts: Vec<f64> = bps.iter().copied().filter(|p| *p > vlo && *p < vhi).collect();
    pts.extend(vb);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    for s in pts.windows(2) {
        uv += rule.integrate(s[0], s[1], |x| (u.value(x) - u.far()) * v.value(x));
    }
    total += 2.0 * uv * tail_integral(params.lambda, params.beta, t_end)?;
    Ok(params.c_beta() * total)
}

/// `scale · (x − x²)^{exponent}` on `[0, 1)`.
pub fn bubble(exponent: f64, scale: f64) -> PiecewiseFunction {
    PiecewiseFunction::single(0.0, 1.0, Smooth::Bubble { exponent, scale })
}

/// `(x − x²)^{β/2} / Γ(1 + β)`.
pub fn fractional_bubble(beta: f64) -> PiecewiseFunction {
    bubble(0.5 * beta, 1.0 / gamma(1.0 + beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn p(beta: f64, lambda: f64) -> OperatorParams {
        OperatorParams::new(beta, lambda).unwrap()
    }

    #[test]
    fn increment_is_exact_for_tiny_steps() {
        let p = Smooth::Poly(vec![0.5, -1.0, 3.0, 2.0]);
        for (x, d) in [(0.3, 0.2), (1.0, -0.7)] {
            let want = p.value(x + d) - p.value(x);
            assert!((p.increment(x, d) - want).abs() < 1e-14);
        }
        // f = x²: f(1 + d) − f(1) = 2d + d²
        let q = Smooth::Poly(vec![0.0, 0.0, 1.0]);
        let d = 1e-12;
        assert!((q.increment(1.0, d) - (2.0 * d + d * d)).abs() < 1e-15 * d);
        let g = Smooth::Gaussian;
        let want = -2.0 * 0.5 * d * (-0.25f64).exp();
        assert!((g.increment(0.5, d) - want).abs() < 1e-9 * want.abs());
    }

    #[test]
    fn gaussian_derivatives() {
        let g = Smooth::Gaussian;
        let x: f64 = 0.3;
        let e = (-x * x).exp();
        assert!((g.derivative(x, 1).unwrap() + 2.0 * x * e).abs() < 1e-15);
        assert!((g.derivative(x, 2).unwrap() - (4.0 * x * x - 2.0) * e).abs() < 1e-15);
        let poly = Smooth::Poly(vec![0.0, 0.0, 1.0, -1.0]);
        assert_eq!(poly.derivative(2.0, 3).unwrap(), -6.0);
        assert_eq!(poly.derivative(2.0, 4).unwrap(), 0.0);
    }

    #[test]
    fn piecewise_lookup() {
        let f = PiecewiseFunction::new(
            vec![
                Piece { lo: 1.0, hi: 2.0, f: Smooth::Poly(vec![5.0]) },
                Piece { lo: 0.0, hi: 1.0, f: Smooth::Poly(vec![0.0, 1.0]) },
            ],
            -1.0,
        )
        .unwrap();
        assert_eq!(f.value(0.5), 0.5);
        assert_eq!(f.value(1.0), 5.0);
        assert_eq!(f.value(2.0), -1.0);
        assert_eq!(f.breakpoints(), vec![0.0, 1.0, 2.0]);
        assert!(PiecewiseFunction::new(
            vec![
                Piece { lo: 0.0, hi: 1.5, f: Smooth::Gaussian },
                Piece { lo: 1.0, hi: 2.0, f: Smooth::Gaussian }
            ],
            0.0
        )
        .is_err());
    }

    #[test]
    fn constant_function_is_annihilated() {
        let one = PiecewiseFunction::new(vec![Piece { lo: 0.0, hi: 1.0, f: Smooth::Poly(vec![1.0]) }], 1.0).unwrap();
        for x in [0.1, 0.5, 0.93] {
            assert_eq!(apply_operator_pointwise(&p(0.7, 2.0), &one, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn example1_closed_form_beta_one() {
        // f = (1/π)(3x − 1/2 + (3x² − 2x) log((1−x)/x))
        let u = PiecewiseFunction::single(0.0, 1.0, Smooth::Poly(vec![0.0, 0.0, 1.0, -1.0]));
        for x in [0.05, 0.3, 0.5, 0.77, 0.99] {
            let got = apply_operator_pointwise(&p(1.0, 0.0), &u, x).unwrap();
            let want = (3.0 * x - 0.5 + (3.0 * x * x - 2.0 * x) * ((1.0 - x) / x).ln()) / PI;
            assert!((got - want).abs() < 1e-10, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn gaussian_half_laplacian_at_origin() {
        // (−Δ)^{1/2} e^{−x²} at 0 equals 2/√π
        let g = PiecewiseFunction::single(-7.0, 7.0, Smooth::Gaussian);
        let v = apply_operator_pointwise(&p(1.0, 0.0), &g, 0.0).unwrap();
        assert!((v - 2.0 / PI.sqrt()).abs() < 1e-10, "{v}");
    }

    #[test]
    fn bubble_solves_unit_load() {
        // (x − x²)^{β/2}/Γ(1+β) has constant image 1 on (0, 1); checked
        // through the weak form against the hat at the centre.
        let beta = 0.6;
        let prm = p(beta, 0.0);
        let u = fractional_bubble(beta);
        let n = 3;
        let h = 0.125;
        let hat = PiecewiseFunction::new(
            vec![
                Piece { lo: 3.0 * h, hi: 4.0 * h, f: Smooth::Poly(vec![-3.0 * 8f64.sqrt(), 8.0 * 8f64.sqrt()]) },
                Piece { lo: 4.0 * h, hi: 5.0 * h, f: Smooth::Poly(vec![5.0 * 8f64.sqrt(), -8.0 * 8f64.sqrt()]) },
            ],
            0.0,
        )
        .unwrap();
        let _ = n;
        let b = bilinear_direct(&prm, &u, &hat, h).unwrap();
        let load = 8f64.sqrt() * h; // ∫ φ = 2^{-n/2}
        assert!((b - load).abs() < 1e-4 * load, "{b} vs {load}");
    }

    #[test]
    fn rejects_breakpoint_evaluation() {
        let u = PiecewiseFunction::single(0.0, 1.0, Smooth::Poly(vec![1.0]));
        assert!(apply_operator_pointwise(&p(0.5, 0.0), &u, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pointwise_operator_is_linear(beta in 0.1f64..1.9, lambda in 0.0f64..4.0, x in 0.01f64..0.99, a in -2.0f64..2.0) {
            let prm = p(beta, lambda);
            let u = PiecewiseFunction::single(0.0, 1.0, Smooth::Poly(vec![0.0, 0.0, 1.0, -1.0]));
            let au = PiecewiseFunction::single(0.0, 1.0, Smooth::Poly(vec![0.0, 0.0, a, -a]));
            let l1 = apply_operator_pointwise(&prm, &u, x).unwrap();
            let l2 = apply_operator_pointwise(&prm, &au, x).unwrap();
            prop_assert!((a * l1 - l2).abs() < 1e-12 * (1.0 + l2.abs()));
        }
    }
}
