use std::f64::consts::PI;

use crate::error::Result;
use crate::kernel::KernelSpec;
use crate::model::{ForceSpec, Snapshot, Trajectory};
use crate::quadrature::cumulative_trapezoid;

/// Absolute slack allowed on every pointwise bound.
pub const BOUND_SLACK: f64 = 1e-8;

/// Constants of the explicit `L^∞` bounds, evaluated from initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub iota_pi: f64,
    pub r0: f64,
    pub mass: f64,
    pub u0_inf: f64,
    pub q0_inf: f64,
    pub rho0_min: f64,
    pub rho0_max: f64,
    pub f_inf: f64,
    pub f_prime_inf: f64,
}

impl BoundConstants {
    /// `c₀ = ½min{ρ₋(0), ιM/(2πι + ‖q₀‖)}`, `c₁ = 2‖f'‖/(ιM)`,
    /// `c₂ = ιM/(2c₀)`,
    /// `c₃ = max{2‖ρ₀‖, 4M(2c₂)^{1/α}, (2/c₂)M r₀^{−1−α}}`,
    /// `c₄ = (1+α)c₁/α`, with `ι = ι(π)`.
    pub fn from_initial(
        initial: &Snapshot,
        force: &ForceSpec,
        kernel: &KernelSpec,
    ) -> Result<Self> {
        let alpha = kernel.alpha();
        let iota = kernel.iota(PI)?;
        let r0 = kernel.r0();
        let rho = &initial.state.rho;
        let mass = rho.integral();
        let q0_inf = initial.derived.q.sup_norm();
        let rho0_min = rho.min();
        let rho0_max = rho.max();
        let f_prime_inf = force.sup_norm_dx();
        let c0 = 0.5 * rho0_min.min(iota * mass / (2.0 * PI * iota + q0_inf));
        let c1 = 2.0 * f_prime_inf / (iota * mass);
        let c2 = iota * mass / (2.0 * c0);
        let c3 = (2.0 * rho0_max)
            .max(4.0 * mass * (2.0 * c2).powf(1.0 / alpha))
            .max(2.0 / c2 * mass * r0.powf(-1.0 - alpha));
        let c4 = (1.0 + alpha) / alpha * c1;
        Ok(BoundConstants {
            c0,
            c1,
            c2,
            c3,
            c4,
            iota_pi: iota,
            r0,
            mass,
            u0_inf: initial.state.u.sup_norm(),
            q0_inf,
            rho0_min,
            rho0_max,
            f_inf: force.sup_norm(),
            f_prime_inf,
        })
    }

    pub fn velocity_bound(&self, t: f64) -> f64 {
        self.u0_inf + t * self.f_inf
    }

    pub fn density_lower(&self, t: f64) -> f64 {
        self.c0 * (-self.c1 * t).exp()
    }

    pub fn density_upper(&self, t: f64) -> f64 {
        self.c3 * (self.c4 * t).exp()
    }

    pub fn q_bound(&self, t: f64) -> f64 {
        self.c2 * (self.c1 * t).exp()
    }

    pub fn e_bound(&self, t: f64) -> f64 {
        self.c2 * self.c3 * ((self.c1 + self.c4) * t).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Velocity,
    DensityLower,
    DensityUpper,
    Q,
    E,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundViolation {
    pub kind: BoundKind,
    pub t: f64,
    pub x: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundReport {
    /// Number of (node, snapshot, bound) triples checked.
    pub checked: usize,
    pub violations: Vec<BoundViolation>,
    /// Largest `value/bound` seen per kind (lower bound: `bound/value`).
    pub worst_ratio: Vec<(BoundKind, f64)>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn note(&mut self, kind: BoundKind, ratio: f64) {
        match self.worst_ratio.iter_mut().find(|(k, _)| *k == kind) {
            Some((_, r)) => *r = r.max(ratio),
            None => self.worst_ratio.push((kind, ratio)),
        }
    }

    fn check_upper(&mut self, kind: BoundKind, snap: &Snapshot, values: &[f64], bound: f64) {
        let grid = snap.state.u.grid();
        for (j, &v) in values.iter().enumerate() {
            self.checked += 1;
            self.note(kind, v / bound);
            if v > bound + BOUND_SLACK {
                self.violations.push(BoundViolation {
                    kind,
                    t: snap.t(),
                    x: grid.node(j),
                    value: v,
                    bound,
                });
            }
        }
    }

    fn check_density(&mut self, snap: &Snapshot, c: &BoundConstants) {
        let t = snap.t();
        let rho = snap.state.rho.samples();
        let grid = snap.state.rho.grid();
        let lower = c.density_lower(t);
        for (j, &v) in rho.iter().enumerate() {
            self.checked += 1;
            self.note(BoundKind::DensityLower, lower / v);
            if v < lower - BOUND_SLACK {
                self.violations.push(BoundViolation {
                    kind: BoundKind::DensityLower,
                    t,
                    x: grid.node(j),
                    value: v,
                    bound: lower,
                });
            }
        }
        self.check_upper(BoundKind::DensityUpper, snap, rho, c.density_upper(t));
    }
}

/// Both sides of the density bounds at every node of every snapshot.
pub fn check_density_bounds(traj: &Trajectory, constants: &BoundConstants) -> BoundReport {
    let mut report = BoundReport::default();
    for snap in &traj.snapshots {
        report.check_density(snap, constants);
    }
    report
}

/// Velocity, density, `q` and `e` bounds at every node of every snapshot.
pub fn check_linfty_bounds(traj: &Trajectory, constants: &BoundConstants) -> BoundReport {
    let mut report = BoundReport::default();
    for snap in &traj.snapshots {
        let t = snap.t();
        let abs =
            |f: &crate::spectral::Field| f.samples().iter().map(|v| v.abs()).collect::<Vec<f64>>();
        report.check_upper(
            BoundKind::Velocity,
            snap,
            &abs(&snap.state.u),
            constants.velocity_bound(t),
        );
        report.check_density(snap, constants);
        report.check_upper(
            BoundKind::Q,
            snap,
            &abs(&snap.derived.q),
            constants.q_bound(t),
        );
        report.check_upper(
            BoundKind::E,
            snap,
            &abs(&snap.derived.e),
            constants.e_bound(t),
        );
    }
    report
}

/// `‖q(t)‖_∞` against `‖q₀‖ + ‖f'‖∫₀ᵗρ₋⁻¹` (with the measured `ρ₋`) and
/// against `c₂e^{c₁t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QBoundReport {
    pub times: Vec<f64>,
    pub q_norm: Vec<f64>,
    pub transport_bound: Vec<f64>,
    pub exponential_bound: Vec<f64>,
    pub transport_violations: usize,
    pub exponential_violations: usize,
}

impl QBoundReport {
    pub fn passed(&self) -> bool {
        self.transport_violations == 0 && self.exponential_violations == 0
    }
}

pub fn check_q_bound(
    traj: &Trajectory,
    force: &ForceSpec,
    constants: &BoundConstants,
) -> QBoundReport {
    let times = traj.times();
    let inv_min: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| 1.0 / s.state.rho.min())
        .collect();
    let integral = cumulative_trapezoid(&times, &inv_min);
    let q0 = traj.first().derived.q.sup_norm();
    let fp = force.sup_norm_dx();
    let q_norm: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| s.derived.q.sup_norm())
        .collect();
    let transport_bound: Vec<f64> = integral.iter().map(|i| q0 + fp * i).collect();
    let exponential_bound: Vec<f64> = times.iter().map(|&t| constants.q_bound(t)).collect();
    let count = |b: &[f64]| {
        q_norm
            .iter()
            .zip(b)
            .filter(|(q, b)| **q > **b + BOUND_SLACK)
            .count()
    };
    QBoundReport {
        transport_violations: count(&transport_bound),
        exponential_violations: count(&exponential_bound),
        times,
        q_norm,
        transport_bound,
        exponential_bound,
    }
}
