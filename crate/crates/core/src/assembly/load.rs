use crate::basis::{bspline_eval, BasisSpec};
use crate::error::{Error, Result};
use crate::functions::{apply_operator_pointwise, bilinear_direct, PiecewiseFunction};
use crate::quad::gauss_legendre;
use crate::symbol::OperatorParams;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

use super::oracle::fourier_load_entry;
use super::stiffness::scaling_function;

/// Entries `(f, φ_{n,j})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    pub spec: BasisSpec,
    pub values: Vec<f64>,
}

/// Right-hand side description.
#[derive(Clone)]
pub enum Rhs {
    Constant(f64),
    Callable(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// `f = L u` for a piecewise-smooth manufactured solution `u`.
    Operator(PiecewiseFunction),
    /// `(f, φ) = B(u, φ)` evaluated in frequency space from `F[u]`.
    Fourier {
        u_hat: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
        xi_max: f64,
    },
}

impl fmt::Debug for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Constant(c) => write!(f, "Constant({c})"),
            Rhs::Callable(_) => write!(f, "Callable"),
            Rhs::Operator(u) => write!(f, "Operator({u:?})"),
            Rhs::Fourier { xi_max, .. } => write!(f, "Fourier(xi_max = {xi_max})"),
        }
    }
}

const CELL_NODES: usize = 8;
const GRADING_LEVELS: usize = 30;

/// Quadrature nodes `(x, weight, cell)` over `[0, 1]`, with the two end
/// cells refined geometrically towards the boundary.
fn cell_nodes(spec: &BasisSpec) -> Vec<(f64, f64, usize)> {
    let rule = gauss_legendre(CELL_NODES);
    let cells = 1usize << spec.n();
    let h = spec.h();
    let mut out = Vec::with_capacity((cells + 2 * GRADING_LEVELS) * CELL_NODES);
    let push = |a: f64, b: f64, cell: usize, out: &mut Vec<(f64, f64, usize)>| {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((mid + half * x, w * half, cell));
        }
    };
    for k in 0..cells {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        if k == 0 || k == cells - 1 {
            let mut edges = vec![0.0];
            for l in (1..=GRADING_LEVELS).rev() {
                edges.push(h * 0.5f64.powi(l as i32));
            }
            edges.push(h);
            for e in edges.windows(2) {
                if k == 0 {
                    push(a + e[0], a + e[1], k, &mut out);
                }
                if k == cells - 1 {
                    push(b - e[1], b - e[0], k, &mut out);
                }
            }
        } else {
            push(a, b, k, &mut out);
        }
    }
    out
}

fn callable_load<F: Fn(f64) -> Result<f64> + Sync>(spec: &BasisSpec, f: F) -> Result<Vec<f64>> {
    let nodes = cell_nodes(spec);
    let vals: Result<Vec<f64>> = nodes.par_iter().map(|(x, _, _)| f(*x)).collect();
    let vals = vals?;
    let r = spec.r();
    let dim = spec.dim();
    let s = 1.0 / spec.h();
    let amp = s.sqrt();
    let mut b = vec![0.0; dim];
    for ((x, w, cell), fx) in nodes.iter().zip(vals) {
        let lo = cell.saturating_sub(r - 1);
        for j in lo..=*cell {
            if j < dim {
                b[j] += w * fx * amp * bspline_eval(r, s * x - j as f64);
            }
        }
    }
    Ok(b)
}

/// Load vector `(f, φ_{n,j})`.
pub fn load_vector(rhs: &Rhs, params: &OperatorParams, spec: &BasisSpec) -> Result<LoadVector> {
    let values = match rhs {
        Rhs::Constant(c) => vec![c * spec.h().sqrt(); spec.dim()],
        Rhs::Callable(f) => callable_load(spec, |x| Ok(f(x)))?,
        Rhs::Operator(u) => callable_load(spec, |x| apply_operator_pointwise(params, u, x))?,
        Rhs::Fourier { u_hat, xi_max } => {
            let r: Result<Vec<f64>> = (0..spec.dim())
                .into_par_iter()
                .map(|j| fourier_load_entry(params, spec, |xi| u_hat(xi), j, *xi_max))
                .collect();
            r?
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("load vector has non-finite entries".into()));
    }
    Ok(LoadVector { spec: *spec, values })
}

/// `B(η, φ_{n,j})` through the pointwise image `L η` on `Ω`.
pub fn lifting_load(eta: &PiecewiseFunction, params: &OperatorParams, spec: &BasisSpec) -> Result<LoadVector> {
    load_vector(&Rhs::Operator(eta.clone()), params, spec)
}

/// `B(η, φ_{n,j})` by direct quadrature of the double integral; an
/// independent path for cross-checking [`lifting_load`].
pub fn lifting_load_weak(
    eta: &PiecewiseFunction,
    params: &OperatorParams,
    spec: &BasisSpec,
    j: usize,
) -> Result<f64> {
    let phi = scaling_function(spec, j)?;
    bilinear_direct(params, eta, &phi, spec.h())
}
