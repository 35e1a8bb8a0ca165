//! Littlewood-Paley energy budget.
//!
//! With `U = (ρu)_{≤Q}/ρ_{≤Q}` and `E_{≤Q} = ½∫(ρu)_{≤Q}²/ρ_{≤Q}`,
//!
//! ```text
//! E_{≤Q}(t) − E_{≤Q}(0) = ∫₀ᵗ Π_Q − ε_Q(t) + ∫₀ᵗ∫(ρf)_{≤Q} U,
//! Π_Q = ∫ F_Q U',   F_Q = (ρu²)_{≤Q} − U (ρu)_{≤Q},
//! ε_Q(t) = −∫₀ᵗ ⟨ρ𝒯(ρ, u), U_{≤Q}⟩,   𝒯(ρ, u) = −Λ_α(ρu) + uΛ_αρ.
//! ```

use std::io::Write;

use rayon::prelude::*;

use crate::diagnostics::spectral_dissipation;
use crate::error::{Error, Result};
use crate::model::{ForceSpec, State, Trajectory};
use crate::quadrature::{cumulative_trapezoid, linear_fit};
use crate::spectral::{
    besov_block_norms, dealiased_product, dealiased_product3, derivative, half_frac_laplacian,
    lp_high, lp_low, max_block, Field, LpBlock,
};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn low_density(state: &State, q: i32) -> Result<Field> {
    let r = lp_low(&state.rho, q);
    let min = r.min();
    if !(min > 0.0) {
        return Err(Error::LowPassVacuum { q, min });
    }
    Ok(r)
}

/// `U = (ρu)_{≤Q}/ρ_{≤Q}`
pub fn u_ratio(state: &State, q: i32) -> Result<Field> {
    let r = low_density(state, q)?;
    let m = lp_low(&dealiased_product(&state.rho, &state.u)?, q);
    Ok(m.zip_map(&r, |a, b| a / b))
}

/// `½∫(ρu)_{≤Q}²/ρ_{≤Q}`
pub fn scale_energy(state: &State, q: i32) -> Result<f64> {
    let r = low_density(state, q)?;
    let m = lp_low(&dealiased_product(&state.rho, &state.u)?, q);
    Ok(0.5 * m.zip_map(&r, |a, b| a * a / b).integral())
}

/// `F_Q = (ρu²)_{≤Q} − U(ρu)_{≤Q}`
pub fn commutator(state: &State, q: i32) -> Result<Field> {
    let u_ratio = u_ratio(state, q)?;
    let m = lp_low(&dealiased_product(&state.rho, &state.u)?, q);
    let m2 = lp_low(&dealiased_product3(&state.rho, &state.u, &state.u)?, q);
    Ok(&m2 - &u_ratio.pointwise_mul(&m))
}

/// `Π_Q = ∫F_Q U'`
pub fn flux(state: &State, q: i32) -> Result<f64> {
    let f = commutator(state, q)?;
    let du = derivative(&u_ratio(state, q)?);
    Ok(f.pointwise_mul(&du).integral())
}

/// `⟨ρ𝒯(ρ, u), φ⟩ = ∫−Λ_{α/2}(ρu)Λ_{α/2}(ρφ) + Λ_{α/2}ρ Λ_{α/2}(ρuφ)`
pub fn transport_pairing(state: &State, phi: &Field) -> Result<f64> {
    let a = state.alpha;
    let rho = &state.rho;
    let h_m = half_frac_laplacian(&dealiased_product(rho, &state.u)?, a)?;
    let h_rphi = half_frac_laplacian(&dealiased_product(rho, phi)?, a)?;
    let h_rho = half_frac_laplacian(rho, a)?;
    let h_ruphi = half_frac_laplacian(&dealiased_product3(rho, &state.u, phi)?, a)?;
    Ok(-h_m.pointwise_mul(&h_rphi).integral() + h_rho.pointwise_mul(&h_ruphi).integral())
}

/// Instantaneous rate of `ε_Q`: `−⟨ρ𝒯(ρ, u), U_{≤Q}⟩`.
pub fn eps_rate(state: &State, q: i32) -> Result<f64> {
    let phi = lp_low(&u_ratio(state, q)?, q);
    Ok(-transport_pairing(state, &phi)?)
}

/// Rate with the projection moved inside:
/// `−∫ρ_{≤Q}u_{≤Q}𝒯(ρ_{≤Q}, u_{≤Q})`, which is half the full dissipation
/// of the low-passed fields.
pub fn eps_rate_low_passed(state: &State, q: i32) -> Result<f64> {
    let low = State {
        u: lp_low(&state.u, q),
        rho: low_density(state, q)?,
        t: state.t,
        alpha: state.alpha,
        evolved_e: None,
    };
    Ok(0.5 * spectral_dissipation(&low)?)
}

/// Instantaneous force term `∫(ρf)_{≤Q}U`.
pub fn force_rate(state: &State, force: &ForceSpec, q: i32) -> Result<f64> {
    if force.is_zero() {
        return Ok(0.0);
    }
    let f = force.sample(state.u.grid(), state.t);
    let rf = lp_low(&dealiased_product(&state.rho, &f)?, q);
    Ok(rf.pointwise_mul(&u_ratio(state, q)?).integral())
}

/// Per-snapshot quantities at one scale.
#[derive(Clone, Copy, Debug, PartialEq)]
struct ScaleRates {
    energy: f64,
    flux: f64,
    eps: f64,
    eps_alt: f64,
    force: f64,
}

fn scale_rates(state: &State, force: &ForceSpec, q: i32, with_alt: bool) -> Result<ScaleRates> {
    Ok(ScaleRates {
        energy: scale_energy(state, q)?,
        flux: flux(state, q)?,
        eps: eps_rate(state, q)?,
        eps_alt: if with_alt {
            eps_rate_low_passed(state, q)?
        } else {
            0.0
        },
        force: force_rate(state, force, q)?,
    })
}

/// Budget terms for one `Q`, one entry per snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleBudget {
    pub q: i32,
    pub energy: Vec<f64>,
    pub flux_rate: Vec<f64>,
    pub flux_integral: Vec<f64>,
    pub eps: Vec<f64>,
    /// `ε_Q` with low-passed fields inside `𝒯`; empty unless requested.
    pub eps_low_passed: Vec<f64>,
    pub force_term: Vec<f64>,
    pub residual: Vec<f64>,
}

impl ScaleBudget {
    pub fn max_abs_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_flux_integral(&self) -> f64 {
        self.flux_integral.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBudgetReport {
    pub q_list: Vec<i32>,
    pub times: Vec<f64>,
    pub scales: Vec<ScaleBudget>,
    /// `ε(t) = ½∫₀ᵗ D`
    pub eps_total: Vec<f64>,
    /// `E(t) = ½∫ρu²`
    pub energy: Vec<f64>,
}

impl EnergyBudgetReport {
    pub fn initial_energy(&self) -> f64 {
        self.energy[0]
    }

    /// `max_t |residual|/E(0)` per scale.
    pub fn relative_residuals(&self) -> Vec<(i32, f64)> {
        let e0 = self.initial_energy();
        let scale = if e0 > 0.0 { e0 } else { 1.0 };
        self.scales
            .iter()
            .map(|s| (s.q, s.max_abs_residual() / scale))
            .collect()
    }

    /// `max_t |ε_Q(t) − ε(t)|` per scale.
    pub fn eps_gaps(&self) -> Vec<(i32, f64)> {
        self.scales
            .iter()
            .map(|s| {
                let gap = s
                    .eps
                    .iter()
                    .zip(&self.eps_total)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                (s.q, gap)
            })
            .collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "t,Q,E_leQ,flux_int,eps_Q,force_term,residual")?;
        for (i, t) in self.times.iter().enumerate() {
            for s in &self.scales {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    fmt(*t),
                    s.q,
                    fmt(s.energy[i]),
                    fmt(s.flux_integral[i]),
                    fmt(s.eps[i]),
                    fmt(s.force_term[i]),
                    fmt(s.residual[i])
                )?;
            }
        }
        Ok(())
    }
}

/// Default sweep `Q = 0..=log₂(n/4)`; the last octave is left out.
pub fn default_q_list(state: &State) -> Vec<i32> {
    (0..max_block(state.u.grid())).collect()
}

/// Budget for every `Q` in `q_list` along the trajectory.
pub fn energy_budget(
    traj: &Trajectory,
    force: &ForceSpec,
    q_list: &[i32],
    with_low_passed: bool,
) -> Result<EnergyBudgetReport> {
    let times = traj.times();
    let per_snapshot: Vec<(Vec<ScaleRates>, f64, f64)> = traj
        .snapshots
        .par_iter()
        .map(|s| {
            let rates = q_list
                .iter()
                .map(|&q| scale_rates(&s.state, force, q, with_low_passed))
                .collect::<Result<Vec<_>>>()?;
            let m = s.state.rho.pointwise_mul(&s.state.u);
            Ok((
                rates,
                0.5 * m.pointwise_mul(&s.state.u).integral(),
                spectral_dissipation(&s.state)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let energy: Vec<f64> = per_snapshot.iter().map(|p| p.1).collect();
    let half_d: Vec<f64> = per_snapshot.iter().map(|p| 0.5 * p.2).collect();
    let eps_total = cumulative_trapezoid(&times, &half_d);
    let scales = q_list
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let col = |f: fn(&ScaleRates) -> f64| {
                per_snapshot
                    .iter()
                    .map(|p| f(&p.0[k]))
                    .collect::<Vec<f64>>()
            };
            let e = col(|r| r.energy);
            let flux_rate = col(|r| r.flux);
            let flux_integral = cumulative_trapezoid(&times, &flux_rate);
            let eps = cumulative_trapezoid(&times, &col(|r| r.eps));
            let eps_low_passed = if with_low_passed {
                cumulative_trapezoid(&times, &col(|r| r.eps_alt))
            } else {
                Vec::new()
            };
            let force_term = cumulative_trapezoid(&times, &col(|r| r.force));
            let residual = (0..times.len())
                .map(|i| (e[i] - e[0]) - (flux_integral[i] - eps[i] + force_term[i]))
                .collect();
            ScaleBudget {
                q,
                energy: e,
                flux_rate,
                flux_integral,
                eps,
                eps_low_passed,
                force_term,
                residual,
            }
        })
        .collect();
    Ok(EnergyBudgetReport {
        q_list: q_list.to_vec(),
        times,
        scales,
        eps_total,
        energy,
    })
}

/// Residual time series of the budget at a single `Q`.
pub fn budget_residual(traj: &Trajectory, force: &ForceSpec, q: i32) -> Result<Vec<f64>> {
    Ok(energy_budget(traj, force, &[q], false)?
        .scales
        .remove(0)
        .residual)
}

/// `ε_Q(t)` along the trajectory.
pub fn eps_q(traj: &Trajectory, q: i32) -> Result<Vec<f64>> {
    Ok(energy_budget(traj, &ForceSpec::Zero, &[q], false)?
        .scales
        .remove(0)
        .eps)
}

/// Besov diagnostics of `u` per block: `d^{1/3}_{3,q} = λ_q^{1/3}‖u_q‖_3`
/// and `d̃_q = λ_q^{α/2}‖u_q‖_2`, at the final time and integrated in time
/// (`L³` and `L²` respectively).
#[derive(Clone, Debug, PartialEq)]
pub struct BesovRow {
    pub q: i32,
    pub d_third_final: f64,
    pub d_third_time_l3: f64,
    pub d_tilde_final: f64,
    pub d_tilde_time_l2: f64,
}

pub fn besov_table(traj: &Trajectory) -> Vec<BesovRow> {
    let alpha = traj.config.alpha;
    let times = traj.times();
    let per: Vec<(Vec<(i32, f64)>, Vec<(i32, f64)>)> = traj
        .snapshots
        .par_iter()
        .map(|s| {
            (
                besov_block_norms(&s.state.u, 1.0 / 3.0, 3.0),
                besov_block_norms(&s.state.u, alpha / 2.0, 2.0),
            )
        })
        .collect();
    let blocks = per[0].0.len();
    (0..blocks)
        .map(|b| {
            let d3: Vec<f64> = per.iter().map(|p| p.0[b].1.powi(3)).collect();
            let d2: Vec<f64> = per.iter().map(|p| p.1[b].1.powi(2)).collect();
            let last = per.len() - 1;
            BesovRow {
                q: per[0].0[b].0,
                d_third_final: per[last].0[b].1,
                d_third_time_l3: cumulative_trapezoid(&times, &d3).last().unwrap().cbrt(),
                d_tilde_final: per[last].1[b].1,
                d_tilde_time_l2: cumulative_trapezoid(&times, &d2).last().unwrap().sqrt(),
            }
        })
        .collect()
}

pub fn write_besov_csv(mut out: impl Write, rows: &[BesovRow]) -> std::io::Result<()> {
    writeln!(
        out,
        "q,d_third_final,d_third_time_l3,d_tilde_final,d_tilde_time_l2"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.q,
            fmt(r.d_third_final),
            fmt(r.d_third_time_l3),
            fmt(r.d_tilde_final),
            fmt(r.d_tilde_time_l2)
        )?;
    }
    Ok(())
}

/// `L^{3/2}` norms of `F_Q` and of the computable terms of its
/// decomposition; `remainder` is `F_Q` minus those terms.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorDecomposition {
    pub q: i32,
    pub f_q: f64,
    /// `−[(ρu)_{≤Q} − ρ_{≤Q}u_{≤Q}]²/ρ_{≤Q}`
    pub low_commutator_sq: f64,
    /// `ρ_{>Q}u_{>Q}²`
    pub high_cubic: f64,
    /// `2[(ρu)_{≤Q} − ρ_{≤Q}u_{≤Q}]u_{>Q}`
    pub mixed: f64,
    /// `ρ[(u²)_{≤Q} − u_{≤Q}²]`
    pub square_commutator: f64,
    pub remainder: f64,
    /// `λ_Q^{-2/3}(max_q d^{1/3}_{3,q}(u))²`
    pub envelope: f64,
}

pub fn commutator_decomposition(state: &State, q: i32) -> Result<CommutatorDecomposition> {
    let rho = &state.rho;
    let u = &state.u;
    let p = 1.5;
    let f_q = commutator(state, q)?;
    let r_low = low_density(state, q)?;
    let u_low = lp_low(u, q);
    let u_high = lp_high(u, q);
    let rho_high = lp_high(rho, q);
    let comm = &lp_low(&dealiased_product(rho, u)?, q) - &dealiased_product(&r_low, &u_low)?;
    let t1 = comm.zip_map(&r_low, |c, r| -c * c / r);
    let t2 = dealiased_product3(&rho_high, &u_high, &u_high)?;
    let t3 = dealiased_product(&comm, &u_high)?.scale(2.0);
    let sq = &lp_low(&dealiased_product(u, u)?, q) - &dealiased_product(&u_low, &u_low)?;
    let t4 = dealiased_product(rho, &sq)?;
    let remainder = &(&(&(&f_q - &t1) - &t2) - &t3) - &t4;
    let d_max = besov_block_norms(u, 1.0 / 3.0, 3.0)
        .iter()
        .fold(0.0_f64, |m, b| m.max(b.1));
    Ok(CommutatorDecomposition {
        q,
        f_q: f_q.lp_norm(p),
        low_commutator_sq: t1.lp_norm(p),
        high_cubic: t2.lp_norm(p),
        mixed: t3.lp_norm(p),
        square_commutator: t4.lp_norm(p),
        remainder: remainder.lp_norm(p),
        envelope: LpBlock::new(q).lambda().powf(-2.0 / 3.0) * d_max * d_max,
    })
}

/// Decay of `|∫Π_Q|` and `|ε_Q − ε|` across the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct OnsagerConvergence {
    pub q_list: Vec<i32>,
    pub flux_integral: Vec<f64>,
    pub eps_gap: Vec<f64>,
    /// First entry over last entry.
    pub flux_decay_factor: f64,
    pub eps_decay_factor: f64,
    /// Least-squares slope of `log₂|∫Π_Q|` against `Q`.
    pub flux_slope: Option<f64>,
    pub besov: Vec<BesovRow>,
}

impl OnsagerConvergence {
    pub fn passed(&self, factor: f64) -> bool {
        self.flux_decay_factor >= factor && self.eps_decay_factor >= factor
    }
}

fn decay(v: &[f64]) -> f64 {
    match (v.first(), v.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        (Some(&a), Some(_)) if a > 0.0 => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn onsager_convergence_study(
    report: &EnergyBudgetReport,
    traj: &Trajectory,
) -> OnsagerConvergence {
    let flux_integral: Vec<f64> = report
        .scales
        .iter()
        .map(ScaleBudget::max_abs_flux_integral)
        .collect();
    let eps_gap: Vec<f64> = report.eps_gaps().into_iter().map(|g| g.1).collect();
    let (qx, qy): (Vec<f64>, Vec<f64>) = report
        .q_list
        .iter()
        .zip(&flux_integral)
        .filter(|(_, v)| **v > 0.0)
        .map(|(q, v)| (*q as f64, v.log2()))
        .unzip();
    OnsagerConvergence {
        q_list: report.q_list.clone(),
        flux_decay_factor: decay(&flux_integral),
        eps_decay_factor: decay(&eps_gap),
        flux_slope: linear_fit(&qx, &qy).map(|f| f.0),
        flux_integral,
        eps_gap,
        besov: besov_table(traj),
    }
}
