//! Galerkin solver for the one-dimensional tempered fractional Laplacian
//! `−(Δ + λ)^{β/2} p = f` on `(0, 1)` with B-spline and wavelet bases.

pub mod analysis;
pub mod assembly;
mod banded;
pub mod basis;
pub mod error;
pub mod functions;
pub mod kernel;
pub mod linsolve;
pub mod problems;
pub mod quad;
pub mod special;
pub mod symbol;

pub use assembly::{assemble_first_row, stiffness_entry, ToeplitzStiffness};
pub use basis::BasisSpec;
pub use error::{Error, Result};
pub use symbol::OperatorParams;
