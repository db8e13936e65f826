//! On-disk cache of first rows: raw little-endian `f64` plus a JSON sidecar.

use super::stiffness::{assemble_first_row, ToeplitzStiffness};
use crate::basis::BasisSpec;
use crate::error::Result;
use crate::symbol::OperatorParams;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Sidecar {
    r: usize,
    n: u32,
    beta: f64,
    lambda: f64,
    len: usize,
}

fn stem(dir: &Path, params: &OperatorParams, spec: &BasisSpec) -> PathBuf {
    dir.join(format!(
        "row_r{}_n{}_b{:016x}_l{:016x}",
        spec.r(),
        spec.n(),
        params.beta.to_bits(),
        params.lambda.to_bits()
    ))
}

/// Reads a cached row; any mismatch or I/O problem yields `None`.
pub fn load_cached_row(dir: &Path, params: &OperatorParams, spec: &BasisSpec) -> Option<Vec<f64>> {
    let base = stem(dir, params, spec);
    let meta: Sidecar = serde_json::from_slice(&fs::read(base.with_extension("json")).ok()?).ok()?;
    let want = Sidecar { r: spec.r(), n: spec.n(), beta: params.beta, lambda: params.lambda, len: spec.dim() };
    if meta != want {
        return None;
    }
    let bytes = fs::read(base.with_extension("bin")).ok()?;
    if bytes.len() != 8 * spec.dim() {
        return None;
    }
    Some(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
}

pub fn store_cached_row(dir: &Path, a: &ToeplitzStiffness) -> Result<()> {
    fs::create_dir_all(dir)?;
    let base = stem(dir, a.params(), a.spec());
    let bytes: Vec<u8> = a.first_row().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(base.with_extension("bin"), bytes)?;
    let meta = Sidecar {
        r: a.spec().r(),
        n: a.spec().n(),
        beta: a.params().beta,
        lambda: a.params().lambda,
        len: a.dim(),
    };
    fs::write(base.with_extension("json"), serde_json::to_vec_pretty(&meta)?)?;
    Ok(())
}

/// Assembly through the cache when `dir` is given.
pub fn assemble_first_row_cached(
    params: &OperatorParams,
    spec: &BasisSpec,
    dir: Option<&Path>,
) -> Result<ToeplitzStiffness> {
    if let Some(d) = dir {
        if let Some(row) = load_cached_row(d, params, spec) {
            return ToeplitzStiffness::from_first_row(*spec, *params, row);
        }
        let a = assemble_first_row(params, spec)?;
        if let Err(e) = store_cached_row(d, &a) {
            log::warn!("could not write stiffness cache: {e}");
        }
        return Ok(a);
    }
    assemble_first_row(params, spec)
}
