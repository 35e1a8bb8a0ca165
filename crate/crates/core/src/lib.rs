//! Pseudo-spectral simulation of the one-dimensional forced fractional Euler
//! alignment system on the 2π-periodic torus,
//!
//! ```text
//! u_t + u u' = -Λ_α(ρu) + u Λ_α ρ + f,      ρ_t + (ρu)' = 0,
//! ```
//!
//! together with a diagnostic suite for its conservation laws, explicit
//! `L^∞` bounds, energy equalities, alignment and flocking behaviour, and the
//! Littlewood-Paley energy budget.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: grids, fields, transforms, `Λ_α`, Littlewood-Paley blocks,
//!   Besov and Hölder seminorms, dealiased products.
//! * [`kernel`]: the periodized kernel `φ_α`, its infimum `ι(r)`, and direct
//!   quadrature operators used as independent oracles.
//! * [`model`]: state, forcing, right-hand side, SSP-RK3 time stepping,
//!   initial data and mollification, snapshot files.
//! * [`diagnostics`]: per-snapshot records and per-run checks.
//! * [`onsager`]: scale-by-scale energy budget.
//! * [`experiments`]: scenario configuration, runners and reports used by the
//!   `ealign` command-line tool.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod model;
pub mod onsager;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use model::{DerivedFields, ForceSpec, SimConfig, Snapshot, State, Trajectory};
pub use spectral::{Field, TorusGrid};
