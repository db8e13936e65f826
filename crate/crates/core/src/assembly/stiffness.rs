use crate::basis::{level_dim, BasisSpec};
use crate::error::{Error, Result};
use crate::functions::{bilinear_direct, Piece, PiecewiseFunction, Smooth};
use crate::kernel::{tail_integral, zeta, zeta_moment};
use crate::linsolve::CirculantEmbedding;
use crate::quad::gauss_legendre;
use crate::symbol::OperatorParams;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::sync::{Arc, OnceLock};

/// Symmetric Toeplitz stiffness matrix stored by its first row.
#[derive(Debug)]
pub struct ToeplitzStiffness {
    spec: BasisSpec,
    params: OperatorParams,
    first_row: Vec<f64>,
    circulant: OnceLock<Arc<CirculantEmbedding>>,
}

impl Clone for ToeplitzStiffness {
    fn clone(&self) -> Self {
        Self {
            spec: self.spec,
            params: self.params,
            first_row: self.first_row.clone(),
            circulant: OnceLock::new(),
        }
    }
}

impl ToeplitzStiffness {
    pub fn from_first_row(spec: BasisSpec, params: OperatorParams, first_row: Vec<f64>) -> Result<Self> {
        if first_row.len() != spec.dim() {
            return Err(Error::Length { expected: spec.dim(), got: first_row.len() });
        }
        Ok(Self { spec, params, first_row, circulant: OnceLock::new() })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn dim(&self) -> usize {
        self.first_row.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.first_row[i.abs_diff(j)]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Lazily built circulant embedding used by the FFT matvec.
    pub fn circulant(&self) -> Arc<CirculantEmbedding> {
        self.circulant
            .get_or_init(|| Arc::new(CirculantEmbedding::new(&self.first_row)))
            .clone()
    }
}

/// Coefficients (ascending in `σ`) of the autocorrelation
/// `Q(τ) = ∫ M_r(y) M_r(y − τ) dy` on `|τ| = a + σ`, `σ ∈ [0, 1]`.
fn q_piece(r: usize, a: usize) -> [f64; 4] {
    match (r, a) {
        (1, 0) => [1.0, -1.0, 0.0, 0.0],
        (2, 0) => [2.0 / 3.0, 0.0, -1.0, 0.5],
        (2, 1) => [1.0 / 6.0, -0.5, 0.5, -1.0 / 6.0],
        _ => [0.0; 4],
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

/// `Q(τ) = ⟨M_r, M_r(· − τ)⟩`.
pub fn autocorrelation(r: usize, tau: f64) -> f64 {
    let t = tau.abs();
    if t >= r as f64 {
        return 0.0;
    }
    let a = t.floor();
    poly_eval(&q_piece(r, a as usize), t - a)
}

/// `p(1 − τ)` re-expanded in powers of `τ`.
fn reflect(p: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    for (k, c) in p.iter().enumerate() {
        for m in 0..=k {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            out[m] += c * binom[k][m] * sign;
        }
    }
    out
}

const PIECE_NODES: usize = 24;

/// `B(φ_{n,0}, φ_{n,j})`.
///
/// `B_{0j} = c_β ∫_0^∞ ζ(s) C(s/h) ds` with
/// `C(τ) = 2Q(j) − Q(τ + j) − Q(τ − j)`, piecewise polynomial on unit
/// cells of `τ` and constant `2Q(j)` beyond `τ = j + r`. The first cell
/// uses exact ζ-moments; the others are smooth and use Gauss–Legendre.
pub fn stiffness_entry(params: &OperatorParams, r: usize, n: u32, j: usize) -> Result<f64> {
    if r != 1 && r != 2 {
        return Err(Error::Domain(format!("spline order must be 1 or 2, got {r}")));
    }
    let h = 0.5f64.powi(n as i32);
    let qj = autocorrelation(r, j as f64);
    let c_of = |tau: f64| 2.0 * qj - autocorrelation(r, tau + j as f64) - autocorrelation(r, tau - j as f64);
    let mut total = 0.0;
    let first = j.saturating_sub(r);
    let last = j + r; // exclusive
    let rule = gauss_legendre(PIECE_NODES);
    for k in first..last {
        if k == 0 {
            // C(τ) on [0, 1] = 2Q(j) − q_j(τ) − q_{j−1}(1 − τ)   (j ≥ 1)
            //               = 2Q(0) − 2 q_0(τ)                  (j = 0)
            let mut coef = [0.0; 4];
            if j == 0 {
                let q0 = q_piece(r, 0);
                for m in 0..4 {
                    coef[m] = -2.0 * q0[m];
                }
                coef[0] += 2.0 * qj;
            } else {
                let a = q_piece(r, j);
                let b = reflect(&q_piece(r, j - 1));
                for m in 0..4 {
                    coef[m] = -a[m] - b[m];
                }
                coef[0] += 2.0 * qj;
            }
            // C(0) = 0 and, for r = 2, C'(0) = 0 exactly.
            coef[0] = 0.0;
            if r == 2 {
                coef[1] = 0.0;
            }
            for (m, c) in coef.iter().enumerate() {
                if *c != 0.0 {
                    total += c * h.powi(-(m as i32)) * zeta_moment(params, m as i32, 0.0, h).map_err(|e| {
                        Error::Quadrature(format!("entry j = {j}, near-origin moment m = {m}: {e}"))
                    })?;
                }
            }
        } else {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            total += rule.integrate(a, b, |s| c_of(s / h) * zeta(params, s));
        }
    }
    if qj != 0.0 {
        total += 2.0 * qj
            * tail_integral(params.lambda, params.beta, last as f64 * h)
                .map_err(|e| Error::Quadrature(format!("entry j = {j}, tail integral: {e}")))?;
    }
    let v = params.c_beta() * total;
    if !v.is_finite() {
        return Err(Error::Numerical(format!("stiffness entry j = {j} is not finite")));
    }
    Ok(v)
}

/// First row `B(φ_{n,0}, φ_{n,j})`, `j = 0, …, N − 1`.
pub fn assemble_first_row(params: &OperatorParams, spec: &BasisSpec) -> Result<ToeplitzStiffness> {
    let row: Result<Vec<f64>> = (0..spec.dim())
        .into_par_iter()
        .map(|j| stiffness_entry(params, spec.r(), spec.n(), j))
        .collect();
    ToeplitzStiffness::from_first_row(*spec, *params, row?)
}

/// `φ_{n,j}` as a piecewise polynomial.
pub fn scaling_function(spec: &BasisSpec, j: usize) -> Result<PiecewiseFunction> {
    if j >= spec.dim() {
        return Err(Error::Index { index: j as i64, set: format!("I_{}", spec.n()) });
    }
    let h = spec.h();
    let s = 1.0 / h;
    let amp = s.sqrt();
    let x0 = j as f64 * h;
    let pieces = match spec.r() {
        1 => vec![Piece { lo: x0, hi: x0 + h, f: Smooth::Poly(vec![amp]) }],
        _ => vec![
            // amp · (x/h − j) and amp · (j + 2 − x/h)
            Piece { lo: x0, hi: x0 + h, f: Smooth::Poly(vec![-amp * j as f64, amp * s]) },
            Piece { lo: x0 + h, hi: x0 + 2.0 * h, f: Smooth::Poly(vec![amp * (j + 2) as f64, -amp * s]) },
        ],
    };
    PiecewiseFunction::new(pieces, 0.0)
}

/// Dense stiffness matrix by direct quadrature of the bilinear form,
/// independent of the Toeplitz formulas. Intended for small `n`.
pub fn brute_force_matrix(params: &OperatorParams, spec: &BasisSpec) -> Result<DMatrix<f64>> {
    let n = spec.dim();
    if n > level_dim(spec.r(), 7) {
        return Err(Error::SizeGuard(format!("brute-force assembly limited to n <= 7, got {}", spec.n())));
    }
    let funcs: Result<Vec<PiecewiseFunction>> = (0..n).map(|j| scaling_function(spec, j)).collect();
    let funcs = funcs?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let vals: Result<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| bilinear_direct(params, &funcs[i], &funcs[j], spec.h()))
        .collect();
    let vals = vals?;
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(m)
}
