//! Sharp-cutoff Littlewood-Paley blocks: block `-1` is the mean mode, block
//! `q ≥ 0` holds `2^q ≤ |k| < 2^{q+1}`. On an n-point grid the blocks
//! `-1..=log₂(n) - 1` partition every resolved mode (Nyquist included).

use num_complex::Complex64;

use super::field::Field;
use super::grid::TorusGrid;
use super::ops::{transform_forward, transform_inverse};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LpBlock {
    pub q: i32,
}

impl LpBlock {
    pub fn new(q: i32) -> Self {
        assert!(q >= -1, "Littlewood-Paley index must be >= -1");
        LpBlock { q }
    }

    /// Block containing wavenumber magnitude `k`.
    pub fn of_wavenumber(k: u64) -> Self {
        if k == 0 {
            LpBlock { q: -1 }
        } else {
            LpBlock {
                q: 63 - k.leading_zeros() as i32,
            }
        }
    }

    /// `λ_q = 2^q`.
    pub fn lambda(&self) -> f64 {
        2f64.powi(self.q)
    }

    pub fn contains(&self, k: u64) -> bool {
        Self::of_wavenumber(k) == *self
    }
}

/// Highest block index with resolved modes, `log₂(n) − 1`.
pub fn max_block(grid: &TorusGrid) -> i32 {
    grid.n_points().trailing_zeros() as i32 - 1
}

fn filter(field: &Field, keep: impl Fn(LpBlock) -> bool) -> Field {
    let grid = field.grid();
    let mut modes = transform_forward(field);
    for (j, c) in modes.iter_mut().enumerate() {
        let k = grid.wavenumber(j).unsigned_abs();
        if !keep(LpBlock::of_wavenumber(k)) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    transform_inverse(grid, &modes)
}

/// `g_q`
pub fn lp_project(field: &Field, q: i32) -> Field {
    assert!(q >= -1, "Littlewood-Paley index must be >= -1");
    filter(field, |b| b.q == q)
}

/// `g_{≤Q} = Σ_{q=-1}^{Q} g_q`
pub fn lp_low(field: &Field, cap: i32) -> Field {
    filter(field, |b| b.q <= cap)
}

/// `g_{>Q}`
pub fn lp_high(field: &Field, cap: i32) -> Field {
    filter(field, |b| b.q > cap)
}

/// `(q, λ_q^s ‖g_q‖_{L^p})` for every block `q = -1..=max_block`.
pub fn besov_block_norms(field: &Field, s: f64, p: f64) -> Vec<(i32, f64)> {
    (-1..=max_block(field.grid()))
        .map(|q| {
            let block = lp_project(field, q);
            (q, LpBlock::new(q).lambda().powf(s) * block.lp_norm(p))
        })
        .collect()
}

/// `‖ λ_q^s ‖g_q‖_{L^p} ‖_{ℓ^r_q}` over all resolved blocks; `r = ∞` takes
/// the supremum.
pub fn besov_seminorm(field: &Field, s: f64, p: f64, r: f64) -> f64 {
    assert!(p >= 1.0 && r >= 1.0, "Besov indices need p, r >= 1");
    let blocks = besov_block_norms(field, s, p);
    if r.is_infinite() {
        blocks.iter().fold(0.0_f64, |m, &(_, v)| m.max(v))
    } else {
        blocks
            .iter()
            .map(|&(_, v)| v.powf(r))
            .sum::<f64>()
            .powf(1.0 / r)
    }
}
