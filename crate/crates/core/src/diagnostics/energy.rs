use super::record::{compute_records, DiagnosticsRecord, RecordOptions};
use crate::error::{Error, Result};
use crate::model::{ForceSpec, Trajectory};
use crate::quadrature::cumulative_trapezoid;

/// Residual of an energy equality along a run, time integrals by the
/// trapezoid rule over the saved snapshots.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyResidual {
    pub times: Vec<f64>,
    /// Left side minus right side.
    pub residual: Vec<f64>,
    /// Normalizing scale: initial energy plus total dissipated energy.
    pub scale: f64,
    pub max_relative: f64,
    /// Same residual with the dissipation weighted by 1 instead of ½.
    pub max_relative_unit_weight: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn relative(residual: &[f64], scale: f64) -> f64 {
    if scale > 0.0 {
        max_abs(residual) / scale
    } else {
        max_abs(residual)
    }
}

/// `½∫ρu²(t) + w∫₀ᵗD − ½∫ρ₀u₀² − ∫₀ᵗ∫ρuf` for weights `w = ½` and `w = 1`.
pub(crate) fn energy_residual_from_records(
    records: &[DiagnosticsRecord],
    weight: f64,
) -> EnergyResidual {
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let d: Vec<f64> = records.iter().map(|r| r.dissipation).collect();
    let w: Vec<f64> = records.iter().map(|r| r.force_work).collect();
    let dint = cumulative_trapezoid(&times, &d);
    let wint = cumulative_trapezoid(&times, &w);
    let e0 = records.first().map_or(0.0, |r| r.energy);
    let build = |c: f64| -> (Vec<f64>, f64) {
        let res: Vec<f64> = records
            .iter()
            .enumerate()
            .map(|(i, r)| r.energy + c * dint[i] - e0 - wint[i])
            .collect();
        let scale = e0 + c * dint.last().copied().unwrap_or(0.0);
        (res, scale)
    };
    let (residual, scale) = build(weight);
    let (alt, alt_scale) = build(if weight == 1.0 { 0.5 } else { 1.0 });
    EnergyResidual {
        max_relative: relative(&residual, scale),
        max_relative_unit_weight: relative(&alt, alt_scale),
        times,
        residual,
        scale,
    }
}

/// `∫ρ²(t) + ½∫₀ᵗJ − ∫ρ₀² + ∫₀ᵗ∫eρ²`.
pub(crate) fn rho_energy_residual_from_records(records: &[DiagnosticsRecord]) -> EnergyResidual {
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let j: Vec<f64> = records.iter().map(|r| r.rho_dissipation).collect();
    let s: Vec<f64> = records.iter().map(|r| r.e_rho2).collect();
    let jint = cumulative_trapezoid(&times, &j);
    let sint = cumulative_trapezoid(&times, &s);
    let r0 = records.first().map_or(0.0, |r| r.rho_energy);
    let build = |c: f64| -> (Vec<f64>, f64) {
        let res: Vec<f64> = records
            .iter()
            .enumerate()
            .map(|(i, r)| r.rho_energy + c * jint[i] - r0 + sint[i])
            .collect();
        (res, r0 + c * jint.last().copied().unwrap_or(0.0))
    };
    let (residual, scale) = build(0.5);
    let (alt, alt_scale) = build(1.0);
    EnergyResidual {
        max_relative: relative(&residual, scale),
        max_relative_unit_weight: relative(&alt, alt_scale),
        times,
        residual,
        scale,
    }
}

fn records_for(traj: &Trajectory, force: &ForceSpec) -> Result<Vec<DiagnosticsRecord>> {
    compute_records(&traj.snapshots, force, &RecordOptions::default())
}

/// Residual of the velocity energy equality.
pub fn energy_residual(traj: &Trajectory, force: &ForceSpec) -> Result<EnergyResidual> {
    Ok(energy_residual_from_records(
        &records_for(traj, force)?,
        0.5,
    ))
}

/// Residual of the density energy equality.
pub fn rho_energy_residual(traj: &Trajectory, force: &ForceSpec) -> Result<EnergyResidual> {
    Ok(rho_energy_residual_from_records(&records_for(traj, force)?))
}

/// Residuals recomputed on subsampled snapshot sets.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementReport {
    pub strides: Vec<usize>,
    pub energy_max_residual: Vec<f64>,
    pub rho_energy_max_residual: Vec<f64>,
    /// Observed orders between consecutive strides.
    pub energy_orders: Vec<f64>,
    pub rho_energy_orders: Vec<f64>,
}

impl RefinementReport {
    pub fn min_order(&self) -> f64 {
        self.energy_orders
            .iter()
            .chain(&self.rho_energy_orders)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Observed convergence order of both residuals as the snapshot stride is
/// refined. `strides` must be increasing.
pub fn residual_refinement(
    traj: &Trajectory,
    force: &ForceSpec,
    strides: &[usize],
) -> Result<RefinementReport> {
    if strides.len() < 2 || strides.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "strides must be increasing with at least two entries".into(),
        ));
    }
    let records = records_for(traj, force)?;
    let last = records.len() - 1;
    let mut em = Vec::new();
    let mut rm = Vec::new();
    for &s in strides {
        let sub: Vec<DiagnosticsRecord> = records
            .iter()
            .enumerate()
            .filter(|(i, _)| i % s == 0 || *i == last)
            .map(|(_, r)| r.clone())
            .collect();
        em.push(max_abs(&energy_residual_from_records(&sub, 0.5).residual));
        rm.push(max_abs(&rho_energy_residual_from_records(&sub).residual));
    }
    let orders = |v: &[f64]| -> Vec<f64> {
        v.windows(2)
            .zip(strides.windows(2))
            .map(|(r, s)| (r[1] / r[0]).ln() / (s[1] as f64 / s[0] as f64).ln())
            .collect()
    };
    Ok(RefinementReport {
        strides: strides.to_vec(),
        energy_orders: orders(&em),
        rho_energy_orders: orders(&rm),
        energy_max_residual: em,
        rho_energy_max_residual: rm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evolve, InitialData, SimConfig};

    #[test]
    fn stationary_flock_residual_vanishes() {
        let mut cfg = SimConfig::new(32, 1.0, 1.0, InitialData::Stationary { rho: 1.2, u: 0.4 });
        cfg.dt_max = Some(0.05);
        let traj = evolve(&cfg).unwrap();
        let r = energy_residual(&traj, &ForceSpec::Zero).unwrap();
        assert!(r.max_relative < 1e-12);
        let r = rho_energy_residual(&traj, &ForceSpec::Zero).unwrap();
        assert!(r.max_relative < 1e-12);
    }

    #[test]
    fn short_smooth_run_closes_with_half_weight() {
        let mut cfg = SimConfig::new(
            64,
            1.0,
            0.5,
            InitialData::Smooth {
                rho_mean: 1.0,
                rho_amp: 0.5,
                rho_mode: 1,
                u_mean: 0.0,
                u_amp: 1.0,
                u_mode: 1,
            },
        );
        cfg.dt_max = Some(2e-3);
        let traj = evolve(&cfg).unwrap();
        let r = energy_residual(&traj, &ForceSpec::Zero).unwrap();
        assert!(r.max_relative < 1e-5, "{}", r.max_relative);
        assert!(r.max_relative_unit_weight > 100.0 * r.max_relative);
        let r = rho_energy_residual(&traj, &ForceSpec::Zero).unwrap();
        assert!(r.max_relative < 1e-5, "{}", r.max_relative);
    }
}
