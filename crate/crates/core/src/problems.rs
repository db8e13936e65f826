//! Declarative problem definitions and the end-to-end solve.
//!
//! Every closed-form ingredient is referenced by a registered name so that a
//! [`ProblemSpec`] round-trips through JSON.

use crate::assembly::{assemble_first_row_cached, lifting_load, load_vector, Rhs, ToeplitzStiffness};
use crate::basis::{bspline_eval, BasisSpec};
use crate::error::{Error, Result};
use crate::functions::{Piece, PiecewiseFunction, Smooth};
use crate::linsolve::{solve, Method, SolveReport, DEFAULT_TOL};
use crate::special::{gamma, gamma_neg};
use crate::symbol::OperatorParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Gaussian exterior data is cut where `e^{−x²} < 10⁻¹⁸`.
pub const GAUSS_TRUNCATION: f64 = 6.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhsSpec {
    /// `f = L u` for the registered solution `u`.
    Manufactured { solution: String },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExteriorSpec {
    Zero,
    /// `g` equals the registered function outside `Ω`.
    Named { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LiftingSpec {
    None,
    S1,
    S3,
    /// Registered interior extension; `"zero_interior"` is the only one.
    Custom { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: String,
    pub params: OperatorParams,
    pub rhs: RhsSpec,
    pub exterior: ExteriorSpec,
    pub lifting: LiftingSpec,
}

/// Registered problem ids.
pub const PROBLEM_IDS: [&str; 6] =
    ["example1", "example2", "gauss_exterior", "tent_exterior", "tent_exterior_s2", "constant_one"];

fn named_solution(name: &str) -> Result<PiecewiseFunction> {
    let poly = |lo: f64, hi: f64, c: Vec<f64>| Piece { lo, hi, f: Smooth::Poly(c) };
    match name {
        "example1" => PiecewiseFunction::new(vec![poly(0.0, 1.0, vec![0.0, 0.0, 1.0, -1.0])], 0.0),
        "gaussian" => PiecewiseFunction::new(
            vec![Piece { lo: -GAUSS_TRUNCATION, hi: GAUSS_TRUNCATION, f: Smooth::Gaussian }],
            0.0,
        ),
        "tent" => PiecewiseFunction::new(
            vec![
                poly(-0.5, 0.0, vec![0.0, -2.0]),
                poly(0.0, 1.0, vec![0.0, 0.0, 1.0, -2.0, 1.0]),
                poly(1.0, 1.5, vec![-2.0, 2.0]),
            ],
            0.0,
        ),
        "one" => PiecewiseFunction::new(vec![], 1.0),
        _ => Err(Error::InvalidProblem(format!("unknown solution {name:?}"))),
    }
}

/// Part of a piecewise function outside `[0, 1)`.
fn exterior_part(w: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    let mut out = Vec::new();
    for p in w.pieces() {
        if p.lo < 0.0 {
            out.push(Piece { lo: p.lo, hi: p.hi.min(0.0), f: p.f.clone() });
        }
        if p.hi > 1.0 {
            out.push(Piece { lo: p.lo.max(1.0), hi: p.hi, f: p.f.clone() });
        }
    }
    PiecewiseFunction::new(out, w.far())
}

/// One-sided value and derivative of the exterior data at an endpoint.
fn endpoint_data(g: &PiecewiseFunction, x: f64, from_left: bool) -> Result<(f64, f64)> {
    let probe = if from_left { x - 1e-300_f64.max(f64::EPSILON) } else { x };
    match g.pieces().iter().find(|p| p.lo <= probe && probe < p.hi) {
        Some(p) => {
            let d = p
                .f
                .derivative(x, 1)
                .ok_or_else(|| Error::InvalidProblem("exterior data must be differentiable at the boundary".into()))?;
            Ok((p.f.value(x), d))
        }
        None => Ok((g.far(), 0.0)),
    }
}

pub fn lifting_s1(g0: f64, g1: f64, x: f64) -> f64 {
    g0 * (1.0 - x) + g1 * x
}

/// Cubic Hermite interpolant of `(g(0), g′(0), g(1), g′(1))`, as monomial
/// coefficients.
pub fn s3_coefficients(g0: f64, d0: f64, g1: f64, d1: f64) -> [f64; 4] {
    [g0, d0, -3.0 * g0 - 2.0 * d0 + 3.0 * g1 - d1, 2.0 * g0 + d0 - 2.0 * g1 + d1]
}

pub fn lifting_s3(g0: f64, d0: f64, g1: f64, d1: f64, x: f64) -> f64 {
    let c = s3_coefficients(g0, d0, g1, d1);
    c[0] + x * (c[1] + x * (c[2] + x * c[3]))
}

/// Right-hand side of the first experiment (`u = x²(1 − x)` on `Ω`) in
/// closed form, `λ = 0` only.
pub fn example1_rhs(params: &OperatorParams, x: f64) -> Result<f64> {
    if params.is_tempered() {
        return Err(Error::Domain("closed-form right-hand side requires lambda = 0".into()));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("right-hand side evaluated at x = {x} outside (0, 1)")));
    }
    let beta = params.beta;
    if beta == 1.0 {
        return Ok((3.0 * x - 0.5 + (3.0 * x * x - 2.0 * x) * ((1.0 - x) / x).ln()) / PI);
    }
    let y = 1.0 - x;
    let k = -params.c_beta() * gamma_neg(beta) / gamma(4.0 - beta);
    Ok(k * (2.0 * (3.0 - beta) * x.powf(2.0 - beta) - 6.0 * x.powf(3.0 - beta) + 6.0 * y.powf(3.0 - beta)
        - 4.0 * (3.0 - beta) * y.powf(2.0 - beta)
        + (3.0 - beta) * (2.0 - beta) * y.powf(1.0 - beta)))
}

/// Exact solution of the constant-load problem for `λ = 0`.
pub fn example2_exact(beta: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    (x - x * x).powf(0.5 * beta) / gamma(1.0 + beta)
}

impl ProblemSpec {
    /// Registered problem with the given operator parameters.
    pub fn named(id: &str, params: OperatorParams) -> Result<Self> {
        let m = |s: &str| RhsSpec::Manufactured { solution: s.into() };
        let ext = |s: &str| ExteriorSpec::Named { name: s.into() };
        let (rhs, exterior, lifting) = match id {
            "example1" => (m("example1"), ExteriorSpec::Zero, LiftingSpec::None),
            "example2" => (RhsSpec::Constant { value: 1.0 }, ExteriorSpec::Zero, LiftingSpec::None),
            "gauss_exterior" => (m("gaussian"), ext("gaussian"), LiftingSpec::S1),
            "tent_exterior" => (m("tent"), ext("tent"), LiftingSpec::S3),
            "tent_exterior_s2" => (m("tent"), ext("tent"), LiftingSpec::Custom { name: "zero_interior".into() }),
            "constant_one" => (RhsSpec::Constant { value: 0.0 }, ext("one"), LiftingSpec::S1),
            _ => return Err(Error::InvalidProblem(format!("unknown problem {id:?}; known: {PROBLEM_IDS:?}"))),
        };
        let p = Self { id: id.into(), params, rhs, exterior, lifting };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        OperatorParams::new(self.params.beta, self.params.lambda)?;
        let zero_ext = self.exterior == ExteriorSpec::Zero;
        let no_lift = self.lifting == LiftingSpec::None;
        if zero_ext != no_lift {
            return Err(Error::InvalidProblem("a lifting is required exactly when the exterior data is nonzero".into()));
        }
        if let LiftingSpec::Custom { name } = &self.lifting {
            if name != "zero_interior" {
                return Err(Error::InvalidProblem(format!("unknown lifting {name:?}")));
            }
        }
        let g = self.exterior_data()?;
        if let RhsSpec::Manufactured { solution } = &self.rhs {
            let u = named_solution(solution)?;
            // u must equal g outside Ω
            let ext = exterior_part(&u)?;
            let probes = [-7.0, -1.0, -0.5, -0.25, -1e-3, 1.0, 1.001, 1.25, 1.5, 2.0, 7.0];
            if probes.iter().any(|x| (ext.value(*x) - g.value(*x)).abs() > 1e-14) {
                return Err(Error::InvalidProblem(format!(
                    "manufactured solution {solution:?} does not match the exterior data"
                )));
            }
        }
        Ok(())
    }

    /// Exterior data `g` as a function on ℝ (its values inside `Ω` are unused).
    pub fn exterior_data(&self) -> Result<PiecewiseFunction> {
        match &self.exterior {
            ExteriorSpec::Zero => Ok(PiecewiseFunction::zero()),
            ExteriorSpec::Named { name } => exterior_part(&named_solution(name)?),
        }
    }

    /// Lifting `η`: exterior data outside `Ω` and the chosen extension inside.
    pub fn lifting(&self) -> Result<Option<PiecewiseFunction>> {
        let g = self.exterior_data()?;
        let interior = match &self.lifting {
            LiftingSpec::None => return Ok(None),
            LiftingSpec::Custom { .. } => Smooth::Poly(vec![0.0]),
            LiftingSpec::S1 => {
                let (g0, _) = endpoint_data(&g, 0.0, true)?;
                let (g1, _) = endpoint_data(&g, 1.0, false)?;
                Smooth::Poly(vec![g0, g1 - g0])
            }
            LiftingSpec::S3 => {
                let (g0, d0) = endpoint_data(&g, 0.0, true)?;
                let (g1, d1) = endpoint_data(&g, 1.0, false)?;
                Smooth::Poly(s3_coefficients(g0, d0, g1, d1).to_vec())
            }
        };
        let mut pieces = g.pieces().to_vec();
        pieces.push(Piece { lo: 0.0, hi: 1.0, f: interior });
        Ok(Some(PiecewiseFunction::new(pieces, g.far())?))
    }

    /// Exact solution on ℝ, when known.
    pub fn exact_solution(&self) -> Option<ScalarFn> {
        match &self.rhs {
            RhsSpec::Manufactured { solution } => {
                if solution == "gaussian" {
                    return Some(Arc::new(|x: f64| (-x * x).exp()));
                }
                let u = named_solution(solution).ok()?;
                Some(Arc::new(move |x| u.value(x)))
            }
            RhsSpec::Constant { value } => {
                if self.id == "constant_one" || (self.exterior != ExteriorSpec::Zero && *value == 0.0) {
                    let g = self.exterior_data().ok()?;
                    if g.pieces().is_empty() {
                        let c = g.far();
                        return Some(Arc::new(move |_| c));
                    }
                    return None;
                }
                if self.exterior == ExteriorSpec::Zero && !self.params.is_tempered() {
                    let (beta, v) = (self.params.beta, *value);
                    return Some(Arc::new(move |x| v * example2_exact(beta, x)));
                }
                None
            }
        }
    }

    fn rhs(&self) -> Result<Rhs> {
        match &self.rhs {
            RhsSpec::Constant { value } => Ok(Rhs::Constant(*value)),
            RhsSpec::Manufactured { solution } => {
                if solution == "example1" && !self.params.is_tempered() {
                    let params = self.params;
                    return Ok(Rhs::Callable(Arc::new(move |x| {
                        example1_rhs(&params, x).unwrap_or(f64::NAN)
                    })));
                }
                Ok(Rhs::Operator(named_solution(solution)?))
            }
        }
    }
}

/// `p_n = Σ d_j φ_{n,j} + η`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    pub spec: BasisSpec,
    pub coeffs: Vec<f64>,
    pub lifting: Option<PiecewiseFunction>,
}

impl DiscreteSolution {
    /// Galerkin part only.
    pub fn eval_discrete(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let r = self.spec.r();
        let s = 1.0 / self.spec.h();
        let amp = s.sqrt();
        let cell = ((x * s).floor() as usize).min((1usize << self.spec.n()) - 1);
        let lo = cell.saturating_sub(r - 1);
        (lo..=cell.min(self.coeffs.len() - 1))
            .map(|j| self.coeffs[j] * amp * bspline_eval(r, s * x - j as f64))
            .sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let eta = self.lifting.as_ref().map_or(0.0, |e| e.value(x));
        self.eval_discrete(x) + eta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub tol: f64,
    pub cache_dir: Option<PathBuf>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { method: Method::Pcg, tol: DEFAULT_TOL, cache_dir: None }
    }
}

/// Assembled linear system `A d = b` for a problem.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub stiffness: ToeplitzStiffness,
    pub rhs: Vec<f64>,
    pub lifting: Option<PiecewiseFunction>,
}

pub fn discretize(prob: &ProblemSpec, spec: &BasisSpec, cache_dir: Option<&std::path::Path>) -> Result<DiscreteProblem> {
    prob.validate()?;
    if spec.r() == 1 && prob.params.beta >= 1.0 {
        return Err(Error::InvalidProblem(format!(
            "piecewise-constant elements require beta < 1, got beta = {}",
            prob.params.beta
        )));
    }
    let stiffness = assemble_first_row_cached(&prob.params, spec, cache_dir)?;
    let mut b = load_vector(&prob.rhs()?, &prob.params, spec)?.values;
    let lifting = prob.lifting()?;
    if let Some(eta) = &lifting {
        let le = lifting_load(eta, &prob.params, spec)?;
        b.iter_mut().zip(&le.values).for_each(|(x, y)| *x -= y);
    }
    Ok(DiscreteProblem { stiffness, rhs: b, lifting })
}

pub fn solve_problem(prob: &ProblemSpec, spec: &BasisSpec, method: Method) -> Result<(DiscreteSolution, SolveReport)> {
    solve_problem_with(prob, spec, &SolveOptions { method, ..SolveOptions::default() })
}

pub fn solve_problem_with(
    prob: &ProblemSpec,
    spec: &BasisSpec,
    opts: &SolveOptions,
) -> Result<(DiscreteSolution, SolveReport)> {
    let dp = discretize(prob, spec, opts.cache_dir.as_deref())?;
    let (coeffs, report) = solve(&dp.stiffness, &dp.rhs, opts.method, opts.tol)?;
    Ok((DiscreteSolution { spec: *spec, coeffs, lifting: dp.lifting }, report))
}
