//! Predefined parameter grids selected by `--table`.

use tempfrac::analysis::ErrorMode;
use tempfrac::problems::{ProblemSpec, RhsSpec};
use tempfrac::OperatorParams;

use crate::error::CliError;

/// One convergence sweep of a table.
#[derive(Debug, Clone)]
pub struct SweepJob {
    /// Leading CSV columns identifying the block, e.g. `("eta", "eta1")`.
    pub keys: Vec<(&'static str, String)>,
    pub problem: ProblemSpec,
    pub r: usize,
    pub n_range: Vec<u32>,
    pub modes: Vec<ErrorMode>,
    pub note: Option<&'static str>,
}

/// One condition-number sweep of the second table.
#[derive(Debug, Clone)]
pub struct ConditionJob {
    pub r: usize,
    pub params: OperatorParams,
    pub n_range: Vec<u32>,
}

#[derive(Debug, Clone)]
pub enum TableSpec {
    Convergence { header_keys: Vec<&'static str>, jobs: Vec<SweepJob> },
    Condition(Vec<ConditionJob>),
}

fn params(beta: f64, lambda: f64) -> Result<OperatorParams, CliError> {
    Ok(OperatorParams::new(beta, lambda)?)
}

fn fmt_param(x: f64) -> String {
    format!("{x}")
}

pub fn expand(table: u8) -> Result<TableSpec, CliError> {
    match table {
        1 => {
            let mut jobs = Vec::new();
            for (r, beta) in [(1usize, 0.3), (1, 0.8), (2, 0.5), (2, 1.0), (2, 1.8)] {
                let n_range = if r == 1 { vec![10, 11, 12] } else { vec![9, 10, 11] };
                for lambda in [0.0, 3.0] {
                    jobs.push(SweepJob {
                        keys: vec![("r", r.to_string()), ("beta", fmt_param(beta)), ("lambda", fmt_param(lambda))],
                        problem: ProblemSpec::named("example1", params(beta, lambda)?)?,
                        r,
                        n_range: n_range.clone(),
                        modes: vec![ErrorMode::Exact],
                        note: None,
                    });
                }
            }
            Ok(TableSpec::Convergence { header_keys: vec!["r", "beta", "lambda"], jobs })
        }
        2 => {
            let mut jobs = Vec::new();
            for (r, beta) in [(1usize, 0.3), (1, 0.5), (1, 0.8), (2, 0.5), (2, 1.0), (2, 1.5), (2, 1.8)] {
                let n_range = if r == 1 { vec![11, 12, 13] } else { vec![10, 11, 12] };
                jobs.push(ConditionJob { r, params: params(beta, 3.0)?, n_range });
            }
            Ok(TableSpec::Condition(jobs))
        }
        3 => {
            let mut jobs = Vec::new();
            for beta in [0.5, 1.0, 1.5] {
                jobs.push(SweepJob {
                    keys: vec![("beta", fmt_param(beta)), ("lambda", "0".into())],
                    problem: ProblemSpec::named("example2", params(beta, 0.0)?)?,
                    r: 2,
                    n_range: vec![8, 9, 10],
                    modes: vec![ErrorMode::Exact, ErrorMode::Successive],
                    note: None,
                });
            }
            Ok(TableSpec::Convergence { header_keys: vec!["beta", "lambda"], jobs })
        }
        4 => {
            let mut jobs = Vec::new();
            for beta in [0.5, 1.0, 1.5] {
                for lambda in [1.5, 3.0] {
                    let prm = params(beta, lambda)?;
                    let mut problem = ProblemSpec::named("example2", prm)?;
                    problem.rhs = RhsSpec::Constant { value: prm.c_beta() };
                    jobs.push(SweepJob {
                        keys: vec![("beta", fmt_param(beta)), ("lambda", fmt_param(lambda))],
                        problem,
                        r: 2,
                        n_range: vec![8, 9, 10],
                        modes: vec![ErrorMode::Successive],
                        note: Some(
                            "right-hand side f = c_beta, i.e. f = 1 for the kernel without its normalization \
                             constant; absolute errors scale by c_beta, rates are unaffected",
                        ),
                    });
                }
            }
            Ok(TableSpec::Convergence { header_keys: vec!["beta", "lambda"], jobs })
        }
        5 => {
            let mut jobs = Vec::new();
            for (id, eta) in [("tent_exterior_s2", "eta1"), ("tent_exterior", "eta2")] {
                for beta in [0.5, 1.0, 1.6] {
                    for lambda in [0.0, 3.0] {
                        jobs.push(SweepJob {
                            keys: vec![("eta", eta.into()), ("beta", fmt_param(beta)), ("lambda", fmt_param(lambda))],
                            problem: ProblemSpec::named(id, params(beta, lambda)?)?,
                            r: 2,
                            n_range: vec![9, 10, 11],
                            modes: vec![ErrorMode::Exact],
                            note: None,
                        });
                    }
                }
            }
            Ok(TableSpec::Convergence { header_keys: vec!["eta", "beta", "lambda"], jobs })
        }
        k => Err(CliError::Config(format!("--table must be 1..5, got {k}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let count = |k| match expand(k).unwrap() {
            TableSpec::Convergence { jobs, .. } => jobs.len(),
            TableSpec::Condition(jobs) => jobs.len(),
        };
        assert_eq!([count(1), count(2), count(3), count(4), count(5)], [10, 7, 3, 6, 12]);
        assert!(expand(0).is_err() && expand(6).is_err());
    }

    #[test]
    fn fourth_table_scales_rhs() {
        let TableSpec::Convergence { jobs, .. } = expand(4).unwrap() else { panic!() };
        let j = &jobs[1];
        let c = j.problem.params.c_beta();
        assert_eq!(j.problem.rhs, RhsSpec::Constant { value: c });
        assert!((c - 1.0 / (4.0 * std::f64::consts::PI.sqrt())).abs() < 1e-12);
    }
}
