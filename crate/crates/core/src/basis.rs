//! B-spline scaling functions, boundary-adapted spline wavelets and the fast
//! wavelet transform between multiscale and single-scale coefficients.
//!
//! Multiscale coefficients are ordered as the coarse scaling block at level
//! `n0` followed by the wavelet blocks of levels `n0, …, n − 1`, each in
//! ascending index.

use crate::banded::BandedSpd;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Spline order `r ∈ {1, 2}` and level `n ≥ n0(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct BasisSpec {
    r: usize,
    n: u32,
}

#[derive(Deserialize)]
struct RawSpec {
    r: usize,
    n: u32,
}

impl TryFrom<RawSpec> for BasisSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        BasisSpec::new(raw.r, raw.n)
    }
}

impl BasisSpec {
    pub fn new(r: usize, n: u32) -> Result<Self> {
        if r != 1 && r != 2 {
            return Err(Error::Domain(format!("spline order must be 1 or 2, got {r}")));
        }
        let n0 = coarsest_level(r);
        if n < n0 || n > 30 {
            return Err(Error::Domain(format!("level must lie in [{n0}, 30] for r = {r}, got {n}")));
        }
        Ok(Self { r, n })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn n0(&self) -> u32 {
        coarsest_level(self.r)
    }

    /// `N(n) = 2ⁿ − r + 1`.
    pub fn dim(&self) -> usize {
        level_dim(self.r, self.n)
    }

    pub fn h(&self) -> f64 {
        0.5f64.powi(self.n as i32)
    }

    /// Same order at another level.
    pub fn at_level(&self, n: u32) -> Result<Self> {
        Self::new(self.r, n)
    }
}

/// Least `n0` with `2^{n0} ≥ 2r`.
pub fn coarsest_level(r: usize) -> u32 {
    let mut n0 = 0;
    while (1usize << n0) < 2 * r {
        n0 += 1;
    }
    n0
}

pub fn level_dim(r: usize, n: u32) -> usize {
    (1usize << n) + 1 - r
}

/// Cardinal B-spline `M_r` on `[0, r]`; `M₁` is taken as the indicator of
/// `[0, 1)` so translates form a partition of unity.
pub fn bspline_eval(r: usize, x: f64) -> f64 {
    match r {
        1 => {
            if (0.0..1.0).contains(&x) {
                1.0
            } else {
                0.0
            }
        }
        2 => {
            if x <= 0.0 || x >= 2.0 {
                0.0
            } else {
                1.0 - (x - 1.0).abs()
            }
        }
        _ => f64::NAN,
    }
}

/// Refinement and wavelet masks against `M_r(2x − k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoScaleCoefficients {
    pub scaling_mask: Vec<f64>,
    pub interior_wavelet: Vec<f64>,
    /// Left boundary wavelet; the right one is its mirror image.
    pub boundary_wavelet: Vec<f64>,
}

impl TwoScaleCoefficients {
    pub fn for_order(r: usize) -> Result<Self> {
        match r {
            1 => Ok(Self {
                scaling_mask: vec![1.0, 1.0],
                interior_wavelet: vec![0.5, -0.5],
                boundary_wavelet: vec![0.5, -0.5],
            }),
            2 => Ok(Self {
                scaling_mask: vec![0.5, 1.0, 0.5],
                interior_wavelet: vec![1.0 / 24.0, -0.25, 5.0 / 12.0, -0.25, 1.0 / 24.0],
                boundary_wavelet: vec![3.0 / 8.0, -0.25, 1.0 / 24.0],
            }),
            _ => Err(Error::Domain(format!("spline order must be 1 or 2, got {r}"))),
        }
    }
}

fn check_scaling_index(spec: &BasisSpec, j: usize) -> Result<()> {
    if j >= spec.dim() {
        return Err(Error::Index { index: j as i64, set: format!("I_{} (size {})", spec.n, spec.dim()) });
    }
    Ok(())
}

fn check_wavelet_index(r: usize, l: u32, j: usize) -> Result<()> {
    if l < coarsest_level(r) || l >= 30 {
        return Err(Error::Index { index: l as i64, set: "admissible wavelet levels".into() });
    }
    if j == 0 || j > (1usize << l) {
        return Err(Error::Index { index: j as i64, set: format!("J_{l}") });
    }
    Ok(())
}

/// `φ_{n,j}(x) = 2^{n/2} M_r(2ⁿx − j)`.
pub fn scaling_eval(spec: &BasisSpec, j: usize, x: f64) -> Result<f64> {
    check_scaling_index(spec, j)?;
    let s = (1u64 << spec.n) as f64;
    Ok(s.sqrt() * bspline_eval(spec.r, s * x - j as f64))
}

/// Wavelet `ψ_{l,j}` for `j ∈ {1, …, 2^l}`, evaluated through its
/// level-`(l+1)` expansion.
pub fn wavelet_eval(spec: &BasisSpec, l: u32, j: usize, x: f64) -> Result<f64> {
    check_wavelet_index(spec.r, l, j)?;
    let fine = BasisSpec::new(spec.r, l + 1)?;
    let mut v = 0.0;
    for (k, c) in wavelet_mask(spec.r, l, j) {
        v += c * scaling_eval(&fine, k, x)?;
    }
    Ok(v)
}

/// Level-`(l+1)` expansion of `φ_{l,j}`, coefficients include `2^{-1/2}`.
pub fn scaling_mask(r: usize, _l: u32, j: usize) -> Vec<(usize, f64)> {
    match r {
        1 => vec![(2 * j, FRAC_1_SQRT_2), (2 * j + 1, FRAC_1_SQRT_2)],
        _ => vec![
            (2 * j, 0.5 * FRAC_1_SQRT_2),
            (2 * j + 1, FRAC_1_SQRT_2),
            (2 * j + 2, 0.5 * FRAC_1_SQRT_2),
        ],
    }
}

/// Level-`(l+1)` expansion of `ψ_{l,j}`, coefficients include `2^{-1/2}`.
pub fn wavelet_mask(r: usize, l: u32, j: usize) -> Vec<(usize, f64)> {
    const INTERIOR: [f64; 5] = [1.0 / 24.0, -0.25, 5.0 / 12.0, -0.25, 1.0 / 24.0];
    const BOUNDARY: [f64; 3] = [3.0 / 8.0, -0.25, 1.0 / 24.0];
    let m = 1usize << l;
    match r {
        1 => vec![(2 * j - 2, 0.5 * FRAC_1_SQRT_2), (2 * j - 1, -0.5 * FRAC_1_SQRT_2)],
        _ => {
            if j == 1 {
                BOUNDARY.iter().enumerate().map(|(k, c)| (k, c * FRAC_1_SQRT_2)).collect()
            } else if j == m {
                let last = 2 * m - 2;
                BOUNDARY.iter().enumerate().map(|(k, c)| (last - k, c * FRAC_1_SQRT_2)).collect()
            } else {
                INTERIOR
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (2 * j - 4 + k, c * FRAC_1_SQRT_2))
                    .collect()
            }
        }
    }
}

fn check_len(spec: &BasisSpec, v: &[f64]) -> Result<()> {
    if v.len() != spec.dim() {
        return Err(Error::Length { expected: spec.dim(), got: v.len() });
    }
    Ok(())
}

/// `M^r c`: multiscale coefficients to single-scale coefficients at level `n`.
pub fn fwt_apply(spec: &BasisSpec, coeffs: &[f64]) -> Result<Vec<f64>> {
    check_len(spec, coeffs)?;
    let r = spec.r;
    let n0 = spec.n0();
    let mut s = coeffs[..level_dim(r, n0)].to_vec();
    let mut offset = s.len();
    for l in n0..spec.n {
        let m = 1usize << l;
        let mut next = vec![0.0; level_dim(r, l + 1)];
        for (j, sj) in s.iter().enumerate() {
            if *sj != 0.0 {
                for (k, c) in scaling_mask(r, l, j) {
                    next[k] += c * sj;
                }
            }
        }
        for j in 1..=m {
            let cj = coeffs[offset + j - 1];
            if cj != 0.0 {
                for (k, c) in wavelet_mask(r, l, j) {
                    next[k] += c * cj;
                }
            }
        }
        offset += m;
        s = next;
    }
    Ok(s)
}

/// `(M^r)ᵀ v`.
pub fn fwt_transpose_apply(spec: &BasisSpec, single: &[f64]) -> Result<Vec<f64>> {
    check_len(spec, single)?;
    let r = spec.r;
    let n0 = spec.n0();
    let mut out = vec![0.0; spec.dim()];
    let mut s = single.to_vec();
    let mut end = spec.dim();
    for l in (n0..spec.n).rev() {
        let m = 1usize << l;
        let start = end - m;
        for j in 1..=m {
            out[start + j - 1] = wavelet_mask(r, l, j).iter().map(|(k, c)| c * s[*k]).sum();
        }
        s = (0..level_dim(r, l))
            .map(|j| scaling_mask(r, l, j).iter().map(|(k, c)| c * s[*k]).sum())
            .collect();
        end = start;
    }
    out[..end].copy_from_slice(&s);
    Ok(out)
}

/// Gram matrix action `⟨φ_{l,i}, φ_{l,k}⟩`: identity for r = 1,
/// tridiag(1/6, 2/3, 1/6) for r = 2.
fn mass_apply(r: usize, v: &[f64]) -> Vec<f64> {
    if r == 1 {
        return v.to_vec();
    }
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut s = 2.0 / 3.0 * v[i];
            if i > 0 {
                s += v[i - 1] / 6.0;
            }
            if i + 1 < n {
                s += v[i + 1] / 6.0;
            }
            s
        })
        .collect()
}

fn mass_solve(r: usize, v: &mut [f64]) -> Result<()> {
    if r == 1 {
        return Ok(());
    }
    let n = v.len();
    let mut g = BandedSpd::zeros(n, 1);
    for i in 0..n {
        g.set(i, i, 2.0 / 3.0);
        if i > 0 {
            g.set(i, i - 1, 1.0 / 6.0);
        }
    }
    g.factor()?.solve_in_place(v);
    Ok(())
}

/// `(M^r)^{-1} v` using L²-orthogonality of `V_l` and `W_l`.
pub fn fwt_solve(spec: &BasisSpec, single: &[f64]) -> Result<Vec<f64>> {
    check_len(spec, single)?;
    let r = spec.r;
    let n0 = spec.n0();
    let mut out = vec![0.0; spec.dim()];
    let mut s = single.to_vec();
    let mut end = spec.dim();
    for l in (n0..spec.n).rev() {
        let m = 1usize << l;
        let gs = mass_apply(r, &s);
        // wavelet part: W c = M₁ᵀ G s with W = M₁ᵀ G M₁ (banded)
        let masks: Vec<Vec<(usize, f64)>> = (1..=m).map(|j| wavelet_mask(r, l, j)).collect();
        let bw = if r == 1 { 0 } else { 3 };
        let mut w = BandedSpd::zeros(m, bw);
        let fine_dim = s.len();
        for a in 0..m {
            let mut dense = vec![0.0; fine_dim];
            for (k, c) in &masks[a] {
                dense[*k] = *c;
            }
            let g = mass_apply(r, &dense);
            for b in a.saturating_sub(bw)..=a {
                let v: f64 = masks[b].iter().map(|(k, c)| c * g[*k]).sum();
                w.set(a, b, v);
            }
        }
        let mut c: Vec<f64> = masks
            .iter()
            .map(|mk| mk.iter().map(|(k, cf)| cf * gs[*k]).sum())
            .collect();
        w.factor()?.solve_in_place(&mut c);
        let start = end - m;
        out[start..end].copy_from_slice(&c);
        let mut coarse: Vec<f64> = (0..level_dim(r, l))
            .map(|j| scaling_mask(r, l, j).iter().map(|(k, cf)| cf * gs[*k]).sum())
            .collect();
        mass_solve(r, &mut coarse)?;
        s = coarse;
        end = start;
    }
    out[..end].copy_from_slice(&s);
    Ok(out)
}
