//! Stiffness, load and lifting assembly.

mod cache;
mod load;
mod oracle;
mod stiffness;

pub use crate::kernel::{regularized_moment, tail_integral};
pub use crate::special::exp_integral_e1;
pub use cache::{assemble_first_row_cached, load_cached_row, store_cached_row};
pub use load::{lifting_load, lifting_load_weak, load_vector, LoadVector, Rhs};
pub use oracle::{fourier_load_entry, symbol_entry_oracle, symbol_tail_expansion};
pub use stiffness::{
    assemble_first_row, autocorrelation, brute_force_matrix, scaling_function, stiffness_entry,
    ToeplitzStiffness,
};
