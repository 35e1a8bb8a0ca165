//! Periodic grids, real fields and the spectral toolkit built on them.
//!
//! Fourier coefficients follow the convention
//! `ĝ(k) = (1/n) Σ_j g(x_j) e^{-ikx_j}` so that `g(x) = Σ_k ĝ(k) e^{ikx}`:
//! a constant field `c` has `ĝ(0) = c`, and Parseval reads
//! `∫ g² dx = 2π Σ_k |ĝ(k)|²`.

mod field;
mod grid;
mod holder;
mod lp;
mod multiplier;
mod ops;

pub use field::Field;
pub use grid::TorusGrid;
pub use holder::holder_seminorm;
pub use lp::{besov_block_norms, besov_seminorm, lp_high, lp_low, lp_project, max_block, LpBlock};
pub use multiplier::frac_multiplier_constant;
pub use ops::{
    dealiased_product, dealiased_product3, derivative, frac_laplacian, half_frac_laplacian, shift,
    transform_forward, transform_inverse,
};
