//! Error norms, convergence and conditioning sweeps.

use crate::assembly::ToeplitzStiffness;
use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::linsolve::{
    build_diag, cg_solve, dense_eigenvalues, pcg_with_diag, preconditioned_extremes, stiffness_extremes, Method,
    PreconditionedOperator, DENSE_EIG_LIMIT,
};
use crate::problems::{discretize, solve_problem_with, DiscreteSolution, ProblemSpec, SolveOptions};
use crate::quad::{gauss_legendre, integrate_end_graded};
use crate::symbol::OperatorParams;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Error grid is `[ERROR_LO, ERROR_HI]`.
pub const ERROR_LO: f64 = -1.0;
pub const ERROR_HI: f64 = 2.0;

/// Weight `w` of the seminorm part in `(1/2π) ∫ (1 + w |ξ|^β) |F e|² dξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeminormWeight {
    /// `w = 1`.
    Spectral,
    /// `w = 1/c_β` (untempered constant), i.e. `‖e‖² + ½ ∬ (e(x) − e(y))² |x − y|^{−1−β}`.
    Gagliardo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOptions {
    /// Samples for the spectral norm: `3 · 2^{n + oversample_log2}` on `[−1, 2]`,
    /// so that `0` and `1` are always sample points.
    pub oversample_log2: u32,
    pub pad_factor: usize,
    pub weight: SeminormWeight,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { oversample_log2: 6, pad_factor: 8, weight: SeminormWeight::Gagliardo }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    /// `((1/2π) ∫ (1 + |ξ|^β) |F e|² dξ)^{1/2}`.
    pub h: f64,
}

/// Norms of `e` where `e` is smooth on the cells of width `2^{−n}`.
pub fn function_norms<F: Fn(f64) -> f64 + Sync>(e: F, n: u32, beta: f64, opts: &NormOptions) -> Result<ErrorNorms> {
    if opts.pad_factor == 0 {
        return Err(Error::Domain("pad_factor must be positive".into()));
    }
    let h = 0.5f64.powi(n as i32);
    let cells = ((ERROR_HI - ERROR_LO) / h).round() as usize;
    let rule = gauss_legendre(8);
    // collected before summing so the result does not depend on scheduling
    let cell_sq: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (ERROR_LO + k as f64 * h, ERROR_LO + (k + 1) as f64 * h);
            // graded near the boundary of Ω where solutions lose smoothness
            let near = |p: f64| (a - p).abs() < 0.5 * h || (b - p).abs() < 0.5 * h;
            if near(0.0) || near(1.0) {
                integrate_end_graded(a, b, 30, 8, |x| e(x).powi(2))
            } else {
                rule.integrate(a, b, |x| e(x).powi(2))
            }
        })
        .collect();
    let l2sq: f64 = cell_sq.iter().sum();
    let m = 3usize << (n + opts.oversample_log2);
    let dx = (ERROR_HI - ERROR_LO) / m as f64;
    let samples: Vec<f64> = (0..m).into_par_iter().map(|i| e(ERROR_LO + i as f64 * dx)).collect();
    let peak = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let edge = samples[0].abs().max(samples[m - 1].abs());
    if peak > 0.0 && edge > 1e-12 * peak {
        log::warn!("error function does not vanish at the grid ends ({edge:.3e} vs max {peak:.3e})");
    }
    let len = m * opts.pad_factor;
    let mut buf: Vec<Complex64> = (0..len)
        .map(|i| Complex64::new(if i < m { samples[i] } else { 0.0 }, 0.0))
        .collect();
    let (fwd, _) = crate::linsolve::fft_plans(len);
    fwd.process(&mut buf);
    let span = len as f64 * dx;
    let w = match opts.weight {
        SeminormWeight::Spectral => 1.0,
        SeminormWeight::Gagliardo => 1.0 / OperatorParams::new(beta, 0.0)?.c_beta(),
    };
    let hsq: f64 = buf
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
            let xi = 2.0 * std::f64::consts::PI * kk / span;
            (1.0 + w * xi.abs().powf(beta)) * (z.norm_sqr() * dx * dx)
        })
        .sum::<f64>()
        / span;
    Ok(ErrorNorms { l2: l2sq.sqrt(), h: hsq.sqrt() })
}

/// `‖exact − approx‖` in `L²(ℝ)` and in `H^{β/2}(ℝ)` with the weight of `opts`.
pub fn error_norms(
    exact: &(dyn Fn(f64) -> f64 + Sync),
    approx: &DiscreteSolution,
    beta: f64,
    opts: &NormOptions,
) -> Result<ErrorNorms> {
    function_norms(|x| exact(x) - approx.eval(x), approx.spec.n(), beta, opts)
}

/// `‖p_{n+1} − p_n‖` for consecutive levels of the same problem.
pub fn successive_errors(
    coarse: &DiscreteSolution,
    fine: &DiscreteSolution,
    beta: f64,
    opts: &NormOptions,
) -> Result<ErrorNorms> {
    if coarse.spec.r() != fine.spec.r() || fine.spec.n() != coarse.spec.n() + 1 || coarse.lifting != fine.lifting {
        return Err(Error::InvalidProblem("successive errors need the same problem on levels n and n + 1".into()));
    }
    function_norms(|x| fine.eval(x) - coarse.eval(x), fine.spec.n(), beta, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMode {
    Exact,
    Successive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub error_h: f64,
    pub rate_h: Option<f64>,
    pub error_l2: f64,
    pub rate_l2: Option<f64>,
    pub iterations: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub problem: String,
    pub r: usize,
    pub beta: f64,
    pub lambda: f64,
    pub method: Method,
    pub tol: f64,
    pub mode: ErrorMode,
    pub rows: Vec<ConvergenceRow>,
}

/// `log₂(e_{k−1}/e_k)` per unit level step; `None` for the first entry.
pub fn rates(ns: &[u32], errors: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|i| {
            (i > 0).then(|| (errors[i - 1] / errors[i]).log2() / (ns[i] as f64 - ns[i - 1] as f64))
        })
        .collect()
}

/// Least-squares slope of `log₂ y` against `n`.
pub fn fit_log2_slope(ns: &[u32], ys: &[f64]) -> f64 {
    let k = ns.len() as f64;
    let mx = ns.iter().map(|n| *n as f64).sum::<f64>() / k;
    let my = ys.iter().map(|y| y.log2()).sum::<f64>() / k;
    let sxy: f64 = ns.iter().zip(ys).map(|(n, y)| (*n as f64 - mx) * (y.log2() - my)).sum();
    let sxx: f64 = ns.iter().map(|n| (*n as f64 - mx).powi(2)).sum();
    sxy / sxx
}

fn check_range(n_range: &[u32]) -> Result<()> {
    if n_range.is_empty() {
        return Err(Error::Domain("empty level range".into()));
    }
    if n_range.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("level range must be strictly ascending".into()));
    }
    Ok(())
}

/// Errors and rates over `n_range`; exact errors when the solution is known,
/// successive-level errors otherwise.
pub fn convergence_sweep(
    prob: &ProblemSpec,
    r: usize,
    n_range: &[u32],
    opts: &SolveOptions,
    norms: &NormOptions,
) -> Result<ConvergenceReport> {
    let mode = if prob.exact_solution().is_some() { ErrorMode::Exact } else { ErrorMode::Successive };
    convergence_sweep_in_mode(prob, r, n_range, opts, norms, mode)
}

/// As [`convergence_sweep`] with the error mode forced.
pub fn convergence_sweep_in_mode(
    prob: &ProblemSpec,
    r: usize,
    n_range: &[u32],
    opts: &SolveOptions,
    norms: &NormOptions,
    mode: ErrorMode,
) -> Result<ConvergenceReport> {
    check_range(n_range)?;
    let exact = match mode {
        ErrorMode::Exact => Some(prob.exact_solution().ok_or_else(|| {
            Error::InvalidProblem(format!("problem {:?} has no known exact solution", prob.id))
        })?),
        ErrorMode::Successive => None,
    };
    let mut levels: Vec<u32> = n_range.to_vec();
    if mode == ErrorMode::Successive {
        levels.extend(n_range.iter().map(|n| n + 1));
        levels.sort_unstable();
        levels.dedup();
    }
    let solved: Result<Vec<_>> = levels
        .par_iter()
        .map(|&n| {
            let spec = BasisSpec::new(r, n)?;
            solve_problem_with(prob, &spec, opts).map(|s| (n, s))
        })
        .collect();
    let solved = solved?;
    let find = |n: u32| solved.iter().find(|s| s.0 == n).map(|s| &s.1).expect("level solved");
    let beta = prob.params.beta;
    let errs: Result<Vec<ErrorNorms>> = n_range
        .par_iter()
        .map(|&n| match &exact {
            Some(u) => error_norms(u.as_ref(), &find(n).0, beta, norms),
            None => successive_errors(&find(n).0, &find(n + 1).0, beta, norms),
        })
        .collect();
    let errs = errs?;
    let eh: Vec<f64> = errs.iter().map(|e| e.h).collect();
    let el: Vec<f64> = errs.iter().map(|e| e.l2).collect();
    let (rh, rl) = (rates(n_range, &eh), rates(n_range, &el));
    let rows = n_range
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let rep = &find(n).1;
            ConvergenceRow {
                n,
                error_h: eh[i],
                rate_h: rh[i],
                error_l2: el[i],
                rate_l2: rl[i],
                iterations: rep.iterations,
                wall_time: rep.wall_time,
            }
        })
        .collect();
    Ok(ConvergenceReport {
        problem: prob.id.clone(),
        r,
        beta,
        lambda: prob.params.lambda,
        method: opts.method,
        tol: opts.tol,
        mode,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub n: u32,
    pub cond_plain: f64,
    pub rate_plain: Option<f64>,
    pub cond_pcg: f64,
    pub iters_cg: usize,
    pub iters_pcg: usize,
    pub time_cg: f64,
    pub time_pcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub r: usize,
    pub beta: f64,
    pub lambda: f64,
    pub tol: f64,
    pub rows: Vec<ConditionRow>,
}

fn condition_row(params: &OperatorParams, r: usize, n: u32, tol: f64) -> Result<ConditionRow> {
    let prob = ProblemSpec::named("example1", *params)?;
    let spec = BasisSpec::new(r, n)?;
    let dp = discretize(&prob, &spec, None)?;
    let a = &dp.stiffness;
    let (_, cg) = cg_solve(a, &dp.rhs, tol, None)?;
    let d = build_diag(a)?;
    let (_, pcg) = pcg_with_diag(a, &d, &dp.rhs, tol, None)?;
    let (lo, hi) = stiffness_extremes(a)?;
    let (plo, phi) = preconditioned_extremes(a)?;
    Ok(ConditionRow {
        n,
        cond_plain: hi / lo,
        rate_plain: None,
        cond_pcg: phi / plo,
        iters_cg: cg.iterations,
        iters_pcg: pcg.iterations,
        time_cg: cg.wall_time,
        time_pcg: pcg.wall_time,
    })
}

/// Condition numbers and iteration counts for the first experiment's system.
pub fn condition_sweep(params: &OperatorParams, r: usize, n_range: &[u32], tol: f64) -> Result<ConditionReport> {
    check_range(n_range)?;
    let rows: Result<Vec<ConditionRow>> = n_range.par_iter().map(|&n| condition_row(params, r, n, tol)).collect();
    let mut rows = rows?;
    let conds: Vec<f64> = rows.iter().map(|r| r.cond_plain).collect();
    // growth rate, so the ratio is inverted relative to error rates
    for (row, rate) in rows.iter_mut().zip(rates(n_range, &conds)) {
        row.rate_plain = rate.map(|v| -v);
    }
    Ok(ConditionReport { r, beta: params.beta, lambda: params.lambda, tol, rows })
}

/// All eigenvalues, ascending, of `A` or of the preconditioned operator.
pub fn eigenvalue_dump(a: &ToeplitzStiffness, preconditioned: bool) -> Result<Vec<f64>> {
    if a.dim() > DENSE_EIG_LIMIT {
        return Err(Error::SizeGuard(format!(
            "eigenvalue dump limited to N <= {DENSE_EIG_LIMIT} (n <= 9), got N = {}",
            a.dim()
        )));
    }
    if preconditioned {
        let d = build_diag(a)?;
        dense_eigenvalues(&PreconditionedOperator { a, d: &d })
    } else {
        dense_eigenvalues(a)
    }
}
