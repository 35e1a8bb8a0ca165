use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::state::remove_nyquist;
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::spectral::{
    derivative, frac_laplacian, transform_forward, transform_inverse, Field, TorusGrid,
};

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn mode_one() -> u32 {
    1
}

/// Catalog of initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// Constant density and velocity.
    Stationary {
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        u: f64,
    },
    /// `ρ₀ = ρ̄ + a cos(mx)`, `u₀ = ū + b sin(kx)`.
    Smooth {
        #[serde(default = "one")]
        rho_mean: f64,
        #[serde(default = "half")]
        rho_amp: f64,
        #[serde(default = "mode_one")]
        rho_mode: u32,
        #[serde(default)]
        u_mean: f64,
        #[serde(default = "one")]
        u_amp: f64,
        #[serde(default = "mode_one")]
        u_mode: u32,
    },
    /// Step-like density `base + H·½(1 + tanh(cos x / w))` and a sawtooth
    /// velocity `u_amp·S_K(x)`, where `S_K` is the `K`-term Fourier series
    /// of `x/π` on `(−π, π)` with Lanczos σ-factors.
    SteepTanh {
        base: f64,
        height: f64,
        width: f64,
        #[serde(default)]
        u_amp: f64,
        #[serde(default)]
        u_modes: u32,
    },
    /// Seeded random Fourier series with coefficients decaying like
    /// `k^{-decay}` on `1 ≤ k ≤ modes`, rescaled so that
    /// `max|ρ₀ − ρ̄| = rho_amp` and `max|u₀ − ū| = u_amp`.
    Random {
        #[serde(default = "one")]
        rho_mean: f64,
        rho_amp: f64,
        #[serde(default)]
        u_mean: f64,
        u_amp: f64,
        modes: u32,
        #[serde(default = "one")]
        decay: f64,
    },
}

/// Lanczos-smoothed partial sum of the Fourier series of `x/π` on `(−π, π)`.
fn sawtooth(x: f64, modes: u32) -> f64 {
    let k_cut = modes as f64 + 1.0;
    (1..=modes)
        .map(|k| {
            let k = k as f64;
            let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
            let arg = PI * k / k_cut;
            let sigma = arg.sin() / arg;
            sign * 2.0 / (PI * k) * sigma * (k * x).sin()
        })
        .sum()
}

fn random_series(grid: &TorusGrid, rng: &mut ChaCha8Rng, modes: u32, decay: f64) -> Field {
    let n = grid.n_points();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let top = (modes as usize).min(n / 2 - 1);
    for k in 1..=top {
        let amp = (k as f64).powf(-decay);
        let phase = rng.gen::<f64>() * 2.0 * PI;
        let scale = amp * rng.gen_range(0.5..1.0);
        let c = Complex64::from_polar(0.5 * scale, phase);
        coeffs[k] = c;
        coeffs[n - k] = c.conj();
    }
    let f = transform_inverse(grid, &coeffs);
    let s = f.sup_norm();
    if s > 0.0 {
        f.scale(1.0 / s)
    } else {
        f
    }
}

impl InitialData {
    /// Raw `(u₀, ρ₀)` before mollification.
    pub fn sample(&self, grid: &TorusGrid, seed: u64) -> (Field, Field) {
        match *self {
            InitialData::Stationary { rho, u } => {
                (Field::constant(grid, u), Field::constant(grid, rho))
            }
            InitialData::Smooth {
                rho_mean,
                rho_amp,
                rho_mode,
                u_mean,
                u_amp,
                u_mode,
            } => (
                Field::from_fn(grid, |x| u_mean + u_amp * (u_mode as f64 * x).sin()),
                Field::from_fn(grid, |x| rho_mean + rho_amp * (rho_mode as f64 * x).cos()),
            ),
            InitialData::SteepTanh {
                base,
                height,
                width,
                u_amp,
                u_modes,
            } => (
                Field::from_fn(grid, |x| u_amp * sawtooth(x, u_modes)),
                Field::from_fn(grid, |x| {
                    base + height * 0.5 * (1.0 + (x.cos() / width).tanh())
                }),
            ),
            InitialData::Random {
                rho_mean,
                rho_amp,
                u_mean,
                u_amp,
                modes,
                decay,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let r = random_series(grid, &mut rng, modes, decay);
                let v = random_series(grid, &mut rng, modes, decay);
                (
                    v.map(|s| u_mean + u_amp * s),
                    r.map(|s| rho_mean + rho_amp * s),
                )
            }
        }
    }
}

/// Builds `(u₀, ρ₀, e₀)` from a catalog entry: samples the recipe, mollifies
/// at width `mollify_eps`, drops the Nyquist mode and sets
/// `e₀ = u₀' − Λ_α ρ₀`. Fails if `min ρ₀ < floor`.
pub fn rough_initial_data(
    recipe: &InitialData,
    seed: u64,
    grid: &TorusGrid,
    alpha: f64,
    mollify_eps: f64,
    floor: f64,
) -> Result<(Field, Field, Field)> {
    let (u, rho) = recipe.sample(grid, seed);
    let u0 = remove_nyquist(&mollify(&u, mollify_eps)?);
    let rho0 = remove_nyquist(&mollify(&rho, mollify_eps)?);
    let min = rho0.min();
    if !(min >= floor) || !(min > 0.0) {
        return Err(Error::FloorViolation { min, floor });
    }
    let e0 = &derivative(&u0) - &frac_laplacian(&rho0, alpha)?;
    Ok((u0, rho0, e0))
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Fourier multiplier of the unit-mass bump of half-width `eps` at
/// wavenumber `k`: `∫η(s)cos(kεs)ds / ∫η(s)ds`.
fn mollifier_symbol(k: f64, eps: f64, mass: f64) -> f64 {
    let w = k * eps;
    2.0 * integrate(|s| bump(s) * (w * s).cos(), 0.0, 1.0, 1e-15, 1e-13) / mass
}

/// Convolution with the standard mollifier `η_ε(x) = ε^{-1}η(x/ε)`,
/// `η ∝ exp(−1/(1−x²))` on `|x| < 1` with unit mass, applied as an exact
/// Fourier multiplier of the periodized kernel. `eps = 0` is the identity.
pub fn mollify(field: &Field, eps: f64) -> Result<Field> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            reason: "mollification width must be finite and non-negative",
        });
    }
    if eps == 0.0 {
        return Ok(field.clone());
    }
    let grid = field.grid();
    let mass = 2.0 * integrate(bump, 0.0, 1.0, 1e-16, 1e-14);
    let n = grid.n_points();
    let mut symbols = vec![0.0; n / 2 + 1];
    for (k, s) in symbols.iter_mut().enumerate() {
        *s = mollifier_symbol(k as f64, eps, mass);
    }
    let mut modes = transform_forward(field);
    for (j, c) in modes.iter_mut().enumerate() {
        *c *= symbols[grid.wavenumber(j).unsigned_abs() as usize];
    }
    Ok(transform_inverse(grid, &modes))
}
