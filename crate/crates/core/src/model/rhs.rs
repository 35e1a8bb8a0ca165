use super::force::ForceSpec;
use super::state::State;
use crate::error::{Error, Result};
use crate::spectral::{dealiased_product, derivative, frac_laplacian, Field};

/// Time derivatives of the evolved fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendency {
    pub du: Field,
    pub drho: Field,
    /// Present only when the state carries an independently evolved `e`.
    pub de: Option<Field>,
}

fn check_finite(field: &Field, what: &'static str, t: f64) -> Result<()> {
    if field.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what, t })
    }
}

/// `u_t = −uu' − Λ_α(ρu) + uΛ_αρ + f`, `ρ_t = −(ρu)'`, and in cross-check
/// mode `e_t = −(ue)' + f'`. All products are dealiased.
pub fn rhs(state: &State, force: &ForceSpec) -> Result<Tendency> {
    state.check_density()?;
    check_finite(&state.u, "u", state.t)?;
    check_finite(&state.rho, "rho", state.t)?;
    let grid = state.u.grid();
    let alpha = state.alpha;
    let u = &state.u;
    let rho = &state.rho;

    let du_dx = derivative(u);
    let momentum = dealiased_product(rho, u)?;
    let lrho = frac_laplacian(rho, alpha)?;

    let mut du = &(&frac_laplacian(&momentum, alpha)? + &dealiased_product(u, &du_dx)?).scale(-1.0)
        + &dealiased_product(u, &lrho)?;
    if !force.is_zero() {
        du = &du + &force.sample(grid, state.t);
    }
    let drho = derivative(&momentum).scale(-1.0);

    let de = match &state.evolved_e {
        Some(e) => {
            let mut de = derivative(&dealiased_product(u, e)?).scale(-1.0);
            if !force.is_zero() {
                de = &de + &force.sample_dx(grid, state.t);
            }
            Some(de)
        }
        None => None,
    };
    Ok(Tendency { du, drho, de })
}

/// Velocity tendency in the form `u_t = −ue − Λ_α(ρu) + f` with
/// `e = u' − Λ_αρ`.
pub fn rhs_e_form(state: &State, force: &ForceSpec) -> Result<Field> {
    state.check_density()?;
    let alpha = state.alpha;
    let e = &derivative(&state.u) - &frac_laplacian(&state.rho, alpha)?;
    let momentum = dealiased_product(&state.rho, &state.u)?;
    let mut du =
        (&dealiased_product(&state.u, &e)? + &frac_laplacian(&momentum, alpha)?).scale(-1.0);
    if !force.is_zero() {
        du = &du + &force.sample(state.u.grid(), state.t);
    }
    Ok(du)
}
