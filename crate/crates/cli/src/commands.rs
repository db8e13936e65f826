use std::path::PathBuf;

use log::info;
use serde_json::{json, Value};
use tempfrac::analysis::{
    condition_sweep, convergence_sweep, convergence_sweep_in_mode, eigenvalue_dump, ConditionReport,
    ConvergenceReport, ErrorMode, NormOptions,
};
use tempfrac::basis::level_dim;
use tempfrac::linsolve::{Method, DENSE_EIG_LIMIT};
use tempfrac::problems::{solve_problem_with, ExteriorSpec, ProblemSpec, SolveOptions, GAUSS_TRUNCATION};
use tempfrac::symbol::{kernel_symbol, symbol};
use tempfrac::{assemble_first_row, BasisSpec, Error, OperatorParams};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{opt_sci, sci, write_artifacts, Table};
use crate::tables::{expand, SweepJob, TableSpec};

/// Command-line overrides; each takes precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub method: Option<Method>,
    pub tol: Option<f64>,
    pub table: Option<u8>,
}

/// Resolved run context.
pub struct Run {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub table: Option<u8>,
}

impl Run {
    pub fn new(cfg: Option<ExperimentConfig>, ov: Overrides) -> Result<Self, CliError> {
        let mut cfg = match (cfg, ov.table) {
            (Some(c), _) => c,
            (None, Some(_)) => serde_json::from_str("{}").expect("empty config parses"),
            (None, None) => return Err(CliError::Config("either --config or --table is required".into())),
        };
        if ov.method.is_some() {
            cfg.method = ov.method;
        }
        if ov.tol.is_some() {
            cfg.tol = ov.tol;
        }
        let tol = cfg.tol();
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::Config(format!("tol must lie in (0, 1), got {tol}")));
        }
        let out = ov.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("results"));
        Ok(Self { cfg, out, table: ov.table })
    }

    fn stem(&self, default: &str) -> String {
        match self.table {
            Some(k) => format!("table{k}"),
            None => self.cfg.name.clone().unwrap_or_else(|| default.to_string()),
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions { method: self.cfg.method(), tol: self.cfg.tol(), cache_dir: self.cfg.cache_dir.clone() }
    }

    fn emit(&self, default_stem: &str, table: &Table, meta: Value) -> Result<(), CliError> {
        let (csv, json) = write_artifacts(&self.out, &self.stem(default_stem), table, meta)?;
        info!("wrote {} and {}", csv.display(), json.display());
        println!("{}", csv.display());
        Ok(())
    }
}

fn no_table(run: &Run, cmd: &str) -> Result<(), CliError> {
    match run.table {
        Some(k) => Err(CliError::Config(format!("--table {k} does not apply to `{cmd}`"))),
        None => Ok(()),
    }
}

fn problem_meta(prob: &ProblemSpec) -> Value {
    let mut v = json!({ "spec": prob });
    let gauss = matches!(&prob.exterior, ExteriorSpec::Named { name } if name.contains("gauss"));
    if gauss {
        v["exterior_truncation"] = json!({
            "half_width": GAUSS_TRUNCATION,
            "note": "Gaussian exterior data set to zero where |x| exceeds half_width",
        });
    }
    v
}

pub fn solve(run: &Run) -> Result<(), CliError> {
    no_table(run, "solve")?;
    run.cfg.validate_levels()?;
    let prob = run.cfg.problem()?;
    let n = *run.cfg.n_range.last().expect("validated non-empty");
    let spec = BasisSpec::new(run.cfg.r, n)?;
    let opts = run.solve_options();
    let (sol, report) = solve_problem_with(&prob, &spec, &opts)?;
    let big_n = spec.dim();
    let mut table = Table::new(&["x", "p"]);
    for k in 0..=big_n {
        let x = k as f64 / big_n as f64;
        table.push(vec![sci(x), sci(sol.eval(x))]);
    }
    let meta = json!({
        "command": "solve",
        "problem": problem_meta(&prob),
        "r": spec.r(),
        "n": n,
        "dim": big_n,
        "method": opts.method,
        "tol": opts.tol,
        "samples": "x_k = k / N, k = 0..N, N = dim",
        "report": report,
    });
    run.emit("solution", &table, meta)
}

fn sweep_meta(rep: &ConvergenceReport, prob: &ProblemSpec, norms: &NormOptions, note: Option<&str>) -> Value {
    let mut v = json!({
        "problem": problem_meta(prob),
        "r": rep.r,
        "beta": rep.beta,
        "lambda": rep.lambda,
        "n_range": rep.rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        "method": rep.method,
        "tol": rep.tol,
        "mode": rep.mode,
        "norms": norms,
        "iterations": rep.rows.iter().map(|r| r.iterations).collect::<Vec<_>>(),
        "wall_seconds": rep.rows.iter().map(|r| r.wall_time).collect::<Vec<_>>(),
    });
    if let Some(n) = note {
        v["note"] = json!(n);
    }
    v
}

fn mode_name(m: ErrorMode) -> &'static str {
    match m {
        ErrorMode::Exact => "exact",
        ErrorMode::Successive => "successive",
    }
}

fn convergence_table(run: &Run, header_keys: &[&str], jobs: &[SweepJob]) -> Result<(), CliError> {
    let opts = run.solve_options();
    let norms = run.cfg.norm_options();
    let exact = jobs.iter().any(|j| j.modes.contains(&ErrorMode::Exact));
    let successive = jobs.iter().any(|j| j.modes.contains(&ErrorMode::Successive));
    let mut header: Vec<&str> = header_keys.to_vec();
    header.push("n");
    if exact {
        header.extend(["H-Err", "H-Rate", "L2-Err", "L2-Rate"]);
    }
    if successive {
        header.extend(["Hhat-Err", "Hhat-Rate", "L2hat-Err", "L2hat-Rate"]);
    }
    let mut table = Table::new(&header);
    let mut blocks = Vec::new();
    for job in jobs {
        info!("sweep {:?} r={} n={:?}", job.keys, job.r, job.n_range);
        let reports: Vec<ConvergenceReport> = job
            .modes
            .iter()
            .map(|&m| convergence_sweep_in_mode(&job.problem, job.r, &job.n_range, &opts, &norms, m))
            .collect::<Result<_, _>>()?;
        for (i, &n) in job.n_range.iter().enumerate() {
            let mut row: Vec<String> = job.keys.iter().map(|(_, v)| v.clone()).collect();
            row.push(n.to_string());
            for mode in [ErrorMode::Exact, ErrorMode::Successive] {
                let wanted = if mode == ErrorMode::Exact { exact } else { successive };
                if !wanted {
                    continue;
                }
                match reports.iter().find(|r| r.mode == mode) {
                    Some(rep) => {
                        let c = &rep.rows[i];
                        row.extend([sci(c.error_h), opt_sci(c.rate_h), sci(c.error_l2), opt_sci(c.rate_l2)]);
                    }
                    None => row.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            table.push(row);
        }
        let keys: serde_json::Map<String, Value> =
            job.keys.iter().map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect();
        let sweeps: Vec<Value> =
            reports.iter().map(|rep| sweep_meta(rep, &job.problem, &norms, job.note)).collect();
        blocks.push(json!({ "keys": keys, "sweeps": sweeps }));
    }
    let meta = json!({ "command": "convergence", "table": run.table, "blocks": blocks });
    run.emit("convergence", &table, meta)
}

pub fn convergence(run: &Run) -> Result<(), CliError> {
    if let Some(k) = run.table {
        return match expand(k)? {
            TableSpec::Convergence { header_keys, jobs } => convergence_table(run, &header_keys, &jobs),
            TableSpec::Condition(_) => {
                Err(CliError::Config(format!("table {k} holds condition numbers; use `condition`")))
            }
        };
    }
    run.cfg.validate_levels()?;
    let prob = run.cfg.problem()?;
    let opts = run.solve_options();
    let norms = run.cfg.norm_options();
    let rep = match run.cfg.mode {
        Some(m) => convergence_sweep_in_mode(&prob, run.cfg.r, &run.cfg.n_range, &opts, &norms, m)?,
        None => convergence_sweep(&prob, run.cfg.r, &run.cfg.n_range, &opts, &norms)?,
    };
    let mut table = Table::new(&[
        "problem", "r", "beta", "lambda", "n", "mode", "H-Err", "H-Rate", "L2-Err", "L2-Rate", "Iter",
    ]);
    for c in &rep.rows {
        table.push(vec![
            rep.problem.clone(),
            rep.r.to_string(),
            rep.beta.to_string(),
            rep.lambda.to_string(),
            c.n.to_string(),
            mode_name(rep.mode).into(),
            sci(c.error_h),
            opt_sci(c.rate_h),
            sci(c.error_l2),
            opt_sci(c.rate_l2),
            c.iterations.to_string(),
        ]);
    }
    let mut meta = sweep_meta(&rep, &prob, &norms, None);
    meta["command"] = json!("convergence");
    meta["mode_selected_automatically"] = json!(run.cfg.mode.is_none());
    run.emit("convergence", &table, meta)
}

fn condition_meta(rep: &ConditionReport) -> Value {
    json!({
        "r": rep.r,
        "beta": rep.beta,
        "lambda": rep.lambda,
        "n_range": rep.rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        "tol": rep.tol,
        "methods": ["cg", "pcg"],
        "condition_estimates": "Lanczos extremes",
        "wall_seconds_cg": rep.rows.iter().map(|r| r.time_cg).collect::<Vec<_>>(),
        "wall_seconds_pcg": rep.rows.iter().map(|r| r.time_pcg).collect::<Vec<_>>(),
    })
}

pub fn condition(run: &Run) -> Result<(), CliError> {
    let tol = run.cfg.tol();
    let jobs: Vec<(usize, OperatorParams, Vec<u32>)> = match run.table {
        Some(k) => match expand(k)? {
            TableSpec::Condition(jobs) => jobs.into_iter().map(|j| (j.r, j.params, j.n_range)).collect(),
            TableSpec::Convergence { .. } => {
                return Err(CliError::Config(format!("table {k} holds error norms; use `convergence`")))
            }
        },
        None => {
            run.cfg.validate_levels()?;
            vec![(run.cfg.r, run.cfg.params()?, run.cfg.n_range.clone())]
        }
    };
    let mut table =
        Table::new(&["r", "beta", "lambda", "n", "Cond", "Cond-Rate", "CG-Iter", "PCG-Cond", "PCG-Iter"]);
    let mut blocks = Vec::new();
    for (r, prm, ns) in jobs {
        info!("condition r={r} beta={} lambda={} n={ns:?}", prm.beta, prm.lambda);
        let rep = condition_sweep(&prm, r, &ns, tol)?;
        for c in &rep.rows {
            table.push(vec![
                r.to_string(),
                prm.beta.to_string(),
                prm.lambda.to_string(),
                c.n.to_string(),
                sci(c.cond_plain),
                opt_sci(c.rate_plain),
                c.iters_cg.to_string(),
                sci(c.cond_pcg),
                c.iters_pcg.to_string(),
            ]);
        }
        blocks.push(condition_meta(&rep));
    }
    let meta = json!({ "command": "condition", "table": run.table, "blocks": blocks });
    run.emit("condition", &table, meta)
}

pub fn eigs(run: &Run) -> Result<(), CliError> {
    no_table(run, "eigs")?;
    run.cfg.validate_levels()?;
    let prm = run.cfg.params()?;
    let r = run.cfg.r;
    // checked before assembly so oversized requests fail fast
    if let Some(n) = run.cfg.n_range.iter().find(|&&n| level_dim(r, n) > DENSE_EIG_LIMIT) {
        return Err(Error::SizeGuard(format!(
            "eigenvalue dump limited to N <= {DENSE_EIG_LIMIT}, level {n} gives N = {}",
            level_dim(r, *n)
        ))
        .into());
    }
    let mut table = Table::new(&["n", "index", "plain", "preconditioned"]);
    for &n in &run.cfg.n_range {
        let a = assemble_first_row(&prm, &BasisSpec::new(r, n)?)?;
        let plain = eigenvalue_dump(&a, false)?;
        let pre = eigenvalue_dump(&a, true)?;
        for (i, (p, q)) in plain.iter().zip(&pre).enumerate() {
            table.push(vec![n.to_string(), i.to_string(), sci(*p), sci(*q)]);
        }
    }
    let meta = json!({
        "command": "eigs",
        "r": r,
        "beta": prm.beta,
        "lambda": prm.lambda,
        "n_range": run.cfg.n_range,
        "solver": "dense symmetric eigensolver",
        "order": "ascending",
    });
    run.emit("eigs", &table, meta)
}

pub fn symbol_dump(run: &Run) -> Result<(), CliError> {
    no_table(run, "symbol")?;
    let prm = run.cfg.params()?;
    let grid = run.cfg.xi.unwrap_or_default();
    let ok = grid.count >= 1
        && grid.lo.is_finite()
        && grid.hi.is_finite()
        && grid.lo <= grid.hi
        && (!grid.log || grid.lo > 0.0);
    if !ok {
        return Err(CliError::Config(format!("invalid xi grid {grid:?}")));
    }
    let mut table = Table::new(&["xi", "G", "kernel_symbol"]);
    for xi in grid.points() {
        table.push(vec![sci(xi), sci(symbol(&prm, xi)), sci(kernel_symbol(&prm, xi))]);
    }
    let meta = json!({
        "command": "symbol",
        "beta": prm.beta,
        "lambda": prm.lambda,
        "c_beta": prm.c_beta(),
        "grid": grid,
    });
    run.emit("symbol", &table, meta)
}
