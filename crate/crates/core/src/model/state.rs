use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{derivative, frac_laplacian, transform_forward, transform_inverse, Field};

/// Density level at or below which the solver reports vacuum.
pub const VACUUM_THRESHOLD: f64 = 1e-8;

/// Velocity and density at time `t`.
///
/// `evolved_e` is only present in cross-check runs, where `e` is advanced by
/// its own conservation law instead of being derived from `(u, ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Field,
    pub rho: Field,
    pub t: f64,
    pub alpha: f64,
    pub evolved_e: Option<Field>,
}

impl State {
    pub fn new(u: Field, rho: Field, t: f64, alpha: f64) -> Result<Self> {
        u.grid().check_same(rho.grid())?;
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let state = State {
            u,
            rho,
            t,
            alpha,
            evolved_e: None,
        };
        state.check_density()?;
        Ok(state)
    }

    /// Enables cross-check mode, seeding the evolved `e` from the
    /// compatibility relation.
    pub fn with_evolved_e(mut self) -> Result<Self> {
        let e = compute_derived(&self)?.e;
        self.evolved_e = Some(e);
        Ok(self)
    }

    pub fn check_density(&self) -> Result<()> {
        let min = self.rho.min();
        if !(min > VACUUM_THRESHOLD) {
            return Err(Error::Vacuum {
                t: self.t,
                rho_min: min,
            });
        }
        Ok(())
    }

    /// `M = ∫ ρ dx`
    pub fn mass(&self) -> f64 {
        self.rho.integral()
    }
}

/// `e = u' − Λ_α ρ`, `q = e/ρ`, `q'`, `q'/ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedFields {
    pub e: Field,
    pub q: Field,
    pub q_prime: Field,
    pub q_prime_over_rho: Field,
}

pub fn compute_derived(state: &State) -> Result<DerivedFields> {
    state.check_density()?;
    let lrho = frac_laplacian(&state.rho, state.alpha)?;
    let e = &derivative(&state.u) - &lrho;
    let q = e.zip_map(&state.rho, |e, r| e / r);
    let q_prime = derivative(&q);
    let q_prime_over_rho = q_prime.zip_map(&state.rho, |a, r| a / r);
    Ok(DerivedFields {
        e,
        q,
        q_prime,
        q_prime_over_rho,
    })
}

/// Drops the Nyquist coefficient so the field lives on `|k| < n/2`.
pub fn remove_nyquist(field: &Field) -> Field {
    let mut modes = transform_forward(field);
    modes[field.grid().nyquist_index()] = Complex64::new(0.0, 0.0);
    transform_inverse(field.grid(), &modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(128).unwrap()
    }

    #[test]
    fn derived_examples() {
        let g = grid();
        let s = State::new(Field::zeros(&g), Field::constant(&g, 1.3), 0.0, 1.0).unwrap();
        let d = compute_derived(&s).unwrap();
        assert!(d.e.sup_norm() < 1e-14 && d.q.sup_norm() < 1e-14);

        let s = State::new(
            Field::from_fn(&g, f64::sin),
            Field::constant(&g, 1.0),
            0.0,
            1.0,
        )
        .unwrap();
        let d = compute_derived(&s).unwrap();
        assert!(d.e.max_abs_diff(&Field::from_fn(&g, f64::cos)) < 1e-13);

        let s = State::new(
            Field::zeros(&g),
            Field::from_fn(&g, |x| 1.0 + 0.5 * x.cos()),
            0.0,
            1.0,
        )
        .unwrap();
        let d = compute_derived(&s).unwrap();
        assert!(d.e.max_abs_diff(&Field::from_fn(&g, |x| -0.5 * PI * x.cos())) < 1e-10);
    }

    #[test]
    fn derived_invariants() {
        let g = grid();
        let u = Field::from_fn(&g, |x| x.sin() + 0.3 * (2.0 * x).cos());
        let rho = Field::from_fn(&g, |x| 1.0 + 0.4 * (x.cos()).sin());
        let s = State::new(u, rho.clone(), 0.0, 0.8).unwrap();
        let d = compute_derived(&s).unwrap();
        assert!(d.q.pointwise_mul(&rho).max_abs_diff(&d.e) < 1e-10);
        // e' = ρ²(q'/ρ) + qρ'
        let lhs = derivative(&d.e);
        let rhs = &rho.pointwise_mul(&rho).pointwise_mul(&d.q_prime_over_rho)
            + &d.q.pointwise_mul(&derivative(&rho));
        assert!(lhs.max_abs_diff(&rhs) < 1e-8);
    }

    #[test]
    fn vacuum_rejected() {
        let g = grid();
        let rho = Field::from_fn(&g, |x| 1.0 + x.cos());
        assert!(matches!(
            State::new(Field::zeros(&g), rho, 0.0, 1.0),
            Err(Error::Vacuum { .. })
        ));
    }
}
