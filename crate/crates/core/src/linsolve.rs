//! Toeplitz matvec by circulant embedding, conjugate gradients with and
//! without the wavelet preconditioner, dense reference solves and spectral
//! estimates.

use crate::assembly::{stiffness_entry, ToeplitzStiffness};
use crate::basis::{fwt_apply, fwt_transpose_apply, level_dim, wavelet_mask, BasisSpec};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

pub(crate) fn fft_plans(len: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<usize, PlanPair>)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("FFT plan cache poisoned");
    let (planner, map) = &mut *guard;
    if let Some(p) = map.get(&len) {
        return p.clone();
    }
    let pair = (planner.plan_fft_forward(len), planner.plan_fft_inverse(len));
    map.insert(len, pair.clone());
    pair
}

/// Circulant of power-of-two length `≥ 2N` containing the Toeplitz matrix.
#[derive(Debug)]
pub struct CirculantEmbedding {
    n: usize,
    spectrum: Vec<f64>,
}

impl CirculantEmbedding {
    pub fn new(first_row: &[f64]) -> Self {
        let n = first_row.len();
        let len = (2 * n).next_power_of_two();
        let mut c = vec![Complex64::new(0.0, 0.0); len];
        for (k, v) in first_row.iter().enumerate() {
            c[k].re = *v;
            if k > 0 {
                c[len - k].re = *v;
            }
        }
        let (fwd, _) = fft_plans(len);
        fwd.process(&mut c);
        let scale = 1.0 / len as f64;
        Self { n, spectrum: c.iter().map(|z| z.re * scale).collect() }
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let len = self.spectrum.len();
        let (fwd, inv) = fft_plans(len);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (b, v) in buf.iter_mut().zip(x) {
            b.re = *v;
        }
        fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= *s;
        }
        inv.process(&mut buf);
        buf[..self.n].iter().map(|z| z.re).collect()
    }
}

/// Symmetric operator on `ℝ^N`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl LinearOperator for ToeplitzStiffness {
    fn dim(&self) -> usize {
        ToeplitzStiffness::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        toeplitz_matvec(self, x)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.nrows(), x)?;
        Ok((self * DVector::from_column_slice(x)).as_slice().to_vec())
    }
}

fn check_len(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Length { expected, got: x.len() });
    }
    Ok(())
}

/// `A x` in `O(N log N)`.
pub fn toeplitz_matvec(a: &ToeplitzStiffness, x: &[f64]) -> Result<Vec<f64>> {
    check_len(a.dim(), x)?;
    Ok(a.circulant().apply(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cg,
    Pcg,
    Dense,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Cg => "cg",
            Method::Pcg => "pcg",
            Method::Dense => "dense",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(Method::Cg),
            "pcg" => Ok(Method::Pcg),
            "dense" => Ok(Method::Dense),
            _ => Err(Error::Domain(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    /// `‖r_k‖ / ‖r_0‖` for `k = 0, …, iterations`.
    pub residual_history: Vec<f64>,
    pub wall_time: f64,
}

pub const DEFAULT_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients from a zero initial guess; stops when
/// `‖r_k‖ ≤ tol ‖r_0‖`. `max_iter` defaults to `20 N`.
pub fn cg_solve<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    tol: f64,
    max_iter: Option<usize>,
) -> Result<(Vec<f64>, SolveReport)> {
    let method = Method::Cg;
    let n = a.dim();
    check_len(n, b)?;
    let start = Instant::now();
    let max_iter = max_iter.unwrap_or(20 * n);
    let mut x = vec![0.0; n];
    let r0 = dot(b, b).sqrt();
    let mut history = vec![if r0 == 0.0 { 0.0 } else { 1.0 }];
    if r0 == 0.0 {
        return Ok((x, SolveReport { method, iterations: 0, residual_history: history, wall_time: 0.0 }));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 1..=max_iter {
        let ap = a.apply(&p)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Numerical(format!("operator not positive definite (pᵀAp = {pap:e})")));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let rel = rr_new.sqrt() / r0;
        history.push(rel);
        if rel <= tol {
            let report = SolveReport {
                method,
                iterations: it,
                residual_history: history,
                wall_time: start.elapsed().as_secs_f64(),
            };
            return Ok((x, report));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        method: "cg",
        iterations: max_iter,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}

/// Diagonal scaling of the multiscale basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalD {
    pub spec: BasisSpec,
    pub entries: Vec<f64>,
}

fn mask_energy(a: &ToeplitzStiffness, l: u32, j: usize) -> Result<f64> {
    let r = a.spec().r();
    let mask = wavelet_mask(r, l, j);
    let span = mask.iter().map(|m| m.0).max().unwrap_or(0) - mask.iter().map(|m| m.0).min().unwrap_or(0);
    let t: Result<Vec<f64>> = (0..=span).map(|d| level_entry(a, l + 1, d)).collect();
    let t = t?;
    let mut e = 0.0;
    for (ia, ca) in &mask {
        for (ib, cb) in &mask {
            e += ca * cb * t[ia.abs_diff(*ib)];
        }
    }
    Ok(e)
}

fn level_entry(a: &ToeplitzStiffness, level: u32, d: usize) -> Result<f64> {
    if level == a.spec().n() {
        return Ok(a.first_row()[d]);
    }
    stiffness_entry(a.params(), a.spec().r(), level, d)
}

/// `D̃`: coarse entries `B(φ,φ)^{−1/2}` then per level `B(ψ,ψ)^{−1/2}` with
/// boundary and interior wavelets distinguished.
pub fn build_diag(a: &ToeplitzStiffness) -> Result<DiagonalD> {
    let spec = *a.spec();
    let r = spec.r();
    let n0 = spec.n0();
    let mut entries = Vec::with_capacity(spec.dim());
    let coarse = level_entry(a, n0, 0)?;
    entries.extend(std::iter::repeat(coarse.powf(-0.5)).take(level_dim(r, n0)));
    for l in n0..spec.n() {
        let m = 1usize << l;
        let b1 = mask_energy(a, l, 1)?.powf(-0.5);
        let b2 = mask_energy(a, l, 2)?.powf(-0.5);
        entries.push(b1);
        entries.extend(std::iter::repeat(b2).take(m - 2));
        entries.push(b1);
    }
    if entries.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Numerical("diagonal scaling has non-positive energies".into()));
    }
    Ok(DiagonalD { spec, entries })
}

/// `D̃ (M^r)ᵀ A M^r D̃`.
pub struct PreconditionedOperator<'a> {
    pub a: &'a ToeplitzStiffness,
    pub d: &'a DiagonalD,
}

impl LinearOperator for PreconditionedOperator<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x)?;
        let dx: Vec<f64> = x.iter().zip(&self.d.entries).map(|(a, b)| a * b).collect();
        let mx = fwt_apply(self.a.spec(), &dx)?;
        let amx = toeplitz_matvec(self.a, &mx)?;
        let mtamx = fwt_transpose_apply(self.a.spec(), &amx)?;
        Ok(mtamx.iter().zip(&self.d.entries).map(|(a, b)| a * b).collect())
    }
}

/// CG on the wavelet-preconditioned system `D̃ Mᵀ A M D̃ y = D̃ Mᵀ b`;
/// returns the single-scale coefficients `M D̃ y`.
pub fn pcg_solve(
    a: &ToeplitzStiffness,
    b: &[f64],
    tol: f64,
    max_iter: Option<usize>,
) -> Result<(Vec<f64>, SolveReport)> {
    let d = build_diag(a)?;
    pcg_with_diag(a, &d, b, tol, max_iter)
}

/// Stops on the residual of the original system, `‖b − A d_k‖ ≤ tol ‖b‖`,
/// tracked by recurrence at no extra cost.
pub fn pcg_with_diag(
    a: &ToeplitzStiffness,
    d: &DiagonalD,
    b: &[f64],
    tol: f64,
    max_iter: Option<usize>,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    check_len(n, b)?;
    if d.entries.len() != n {
        return Err(Error::Length { expected: n, got: d.entries.len() });
    }
    let start = Instant::now();
    let max_iter = max_iter.unwrap_or(20 * n);
    let spec = a.spec();
    let scale = |v: &[f64]| -> Vec<f64> { v.iter().zip(&d.entries).map(|(x, y)| x * y).collect() };
    let b_norm = dot(b, b).sqrt();
    let mut history = vec![if b_norm == 0.0 { 0.0 } else { 1.0 }];
    let mut y = vec![0.0; n];
    let finish = |y: &[f64], iterations: usize, history: Vec<f64>| -> Result<(Vec<f64>, SolveReport)> {
        let sol = fwt_apply(spec, &scale(y))?;
        Ok((
            sol,
            SolveReport { method: Method::Pcg, iterations, residual_history: history, wall_time: start.elapsed().as_secs_f64() },
        ))
    };
    if b_norm == 0.0 {
        return finish(&y, 0, history);
    }
    // r̃ = D Mᵀ r with r = b − A M D y
    let mut r = b.to_vec();
    let mut rt = scale(&fwt_transpose_apply(spec, &r)?);
    let mut p = rt.clone();
    let mut rr = dot(&rt, &rt);
    for it in 1..=max_iter {
        let q = fwt_apply(spec, &scale(&p))?;
        let aq = toeplitz_matvec(a, &q)?;
        let ap = scale(&fwt_transpose_apply(spec, &aq)?);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Numerical(format!("preconditioned operator not positive definite (pᵀAp = {pap:e})")));
        }
        let alpha = rr / pap;
        for i in 0..n {
            y[i] += alpha * p[i];
            rt[i] -= alpha * ap[i];
            r[i] -= alpha * aq[i];
        }
        let rel = dot(&r, &r).sqrt() / b_norm;
        history.push(rel);
        if rel <= tol {
            return finish(&y, it, history);
        }
        let rr_new = dot(&rt, &rt);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = rt[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { method: "pcg", iterations: max_iter, residual: *history.last().unwrap_or(&f64::NAN) })
}

pub const DENSE_LIMIT: usize = 1 << 13;

/// Cholesky solve of the materialized matrix.
pub fn dense_solve(a: &ToeplitzStiffness, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
    check_len(a.dim(), b)?;
    if a.dim() > DENSE_LIMIT {
        return Err(Error::SizeGuard(format!("dense solve limited to N <= {DENSE_LIMIT}, got {}", a.dim())));
    }
    let start = Instant::now();
    let chol = a
        .to_dense()
        .cholesky()
        .ok_or_else(|| Error::Numerical("stiffness matrix is not positive definite".into()))?;
    let x = chol.solve(&DVector::from_column_slice(b));
    Ok((
        x.as_slice().to_vec(),
        SolveReport { method: Method::Dense, iterations: 0, residual_history: vec![], wall_time: start.elapsed().as_secs_f64() },
    ))
}

/// Dispatch by method.
pub fn solve(a: &ToeplitzStiffness, b: &[f64], method: Method, tol: f64) -> Result<(Vec<f64>, SolveReport)> {
    match method {
        Method::Cg => cg_solve(a, b, tol, None),
        Method::Pcg => pcg_solve(a, b, tol, None),
        Method::Dense => dense_solve(a, b),
    }
}

pub const DENSE_EIG_LIMIT: usize = 512;

/// All eigenvalues, ascending, of a small operator.
pub fn dense_eigenvalues<A: LinearOperator + ?Sized>(op: &A) -> Result<Vec<f64>> {
    let n = op.dim();
    if n > DENSE_EIG_LIMIT {
        return Err(Error::SizeGuard(format!("dense eigenvalues limited to N <= {DENSE_EIG_LIMIT}, got {n}")));
    }
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = op.apply(&e)?;
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Extreme Ritz values after `steps` Lanczos iterations with full
/// reorthogonalization, from a fixed deterministic start vector.
pub fn lanczos_extremes<A: LinearOperator + ?Sized>(op: &A, steps: usize) -> Result<(f64, f64)> {
    let n = op.dim();
    let steps = steps.min(n).max(1);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 1.618_033_988_75).sin()).collect();
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    for k in 0..steps {
        let mut w = op.apply(&basis[k])?;
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = dot(&w, &w).sqrt();
        if k + 1 == steps || b < 1e-13 * a.abs().max(1e-300) {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i.abs_diff(j) == 1 {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    let ev = SymmetricEigen::new(t).eigenvalues;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// `A^{−1}` applied through tightly converged PCG.
pub struct InverseOperator<'a> {
    pub a: &'a ToeplitzStiffness,
    pub d: &'a DiagonalD,
    pub tol: f64,
}

impl LinearOperator for InverseOperator<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(pcg_with_diag(self.a, self.d, x, self.tol, None)?.0)
    }
}

pub const LANCZOS_STEPS: usize = 200;

/// `(λ_min, λ_max)` of `A`: dense for small `N`, otherwise Lanczos for
/// `λ_max` and Lanczos on `A^{−1}` for `λ_min`.
pub fn stiffness_extremes(a: &ToeplitzStiffness) -> Result<(f64, f64)> {
    if a.dim() <= DENSE_EIG_LIMIT {
        let ev = dense_eigenvalues(a)?;
        return Ok((ev[0], *ev.last().expect("non-empty")));
    }
    let (_, hi) = lanczos_extremes(a, LANCZOS_STEPS)?;
    let d = build_diag(a)?;
    let inv = InverseOperator { a, d: &d, tol: 1e-13 };
    let (_, inv_hi) = lanczos_extremes(&inv, 60)?;
    Ok((1.0 / inv_hi, hi))
}

/// `(λ_min, λ_max)` of the preconditioned operator.
pub fn preconditioned_extremes(a: &ToeplitzStiffness) -> Result<(f64, f64)> {
    let d = build_diag(a)?;
    let op = PreconditionedOperator { a, d: &d };
    if a.dim() <= DENSE_EIG_LIMIT {
        let ev = dense_eigenvalues(&op)?;
        return Ok((ev[0], *ev.last().expect("non-empty")));
    }
    lanczos_extremes(&op, LANCZOS_STEPS)
}
