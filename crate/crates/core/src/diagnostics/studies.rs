use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::{Snapshot, Trajectory};
use crate::quadrature::linear_fit;
use crate::spectral::{derivative, holder_seminorm, shift, Field};

/// Amplitudes below this are treated as fully aligned.
const ALIGNED: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentReport {
    pub times: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// Start of the checked window (the force has vanished from here on).
    pub window_start: f64,
    pub window_end: f64,
    /// `M·ι(π)`
    pub rate_bound: f64,
    /// `−slope` of `log A` on the window, `None` if `A` fell below `1e-14`
    /// too early to fit.
    pub fitted_rate: Option<f64>,
    /// `max A(t)/(A(t_f)e^{−Mι(π)(t−t_f)})` over the window.
    pub worst_envelope_ratio: f64,
    pub envelope_ok: bool,
}

impl AlignmentReport {
    pub fn fitted_rate_ok(&self) -> bool {
        self.fitted_rate.is_none_or(|r| r >= self.rate_bound)
    }
}

/// `A(t) = max u − min u` along the run, checked against the exponential
/// envelope from the time the force stops.
pub fn alignment_decay(traj: &Trajectory, kernel: &KernelSpec) -> Result<AlignmentReport> {
    let start = traj.config.force.support_end().ok_or_else(|| {
        Error::Invalid("alignment decay needs a force that vanishes after some time".into())
    })?;
    let times = traj.times();
    let amplitude: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| s.state.u.max() - s.state.u.min())
        .collect();
    let first = times
        .iter()
        .position(|&t| t >= start - 1e-12)
        .ok_or_else(|| {
            Error::Invalid(format!("no snapshot after the force stops at t = {start}"))
        })?;
    let t_f = times[first];
    let a_f = amplitude[first];
    let mass = traj.first().state.mass();
    let rate_bound = mass * kernel.iota(PI)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in first..times.len() {
        let env = a_f * (-rate_bound * (times[i] - t_f)).exp();
        if amplitude[i] > env * (1.0 + 1e-6) + ALIGNED {
            ok = false;
        }
        if env > 0.0 {
            worst = worst.max(amplitude[i] / env);
        }
    }
    let (fx, fy): (Vec<f64>, Vec<f64>) = (first..times.len())
        .filter(|&i| amplitude[i] > ALIGNED)
        .map(|i| (times[i], amplitude[i].ln()))
        .unzip();
    let fitted_rate = if fx.len() >= 3 {
        linear_fit(&fx, &fy).map(|(s, _)| -s)
    } else {
        None
    };
    Ok(AlignmentReport {
        window_start: t_f,
        window_end: *times.last().unwrap(),
        times,
        amplitude,
        rate_bound,
        fitted_rate,
        worst_envelope_ratio: worst,
        envelope_ok: ok,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HolderField {
    Rho,
    U,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub field: HolderField,
    pub gamma: f64,
    pub alpha: f64,
    pub times: Vec<f64>,
    pub seminorms: Vec<f64>,
    /// Slope of `log[g(t)]_γ` against `log t` over the window.
    pub slope: f64,
    /// `−γ/α`
    pub envelope_slope: f64,
    pub tolerance: f64,
    /// `max t^{γ/α}[g(t)]_γ` over the window.
    pub envelope_constant: f64,
}

impl HolderReport {
    pub fn slope_ok(&self) -> bool {
        self.slope >= self.envelope_slope - self.tolerance
    }
}

/// Log-log fit of the Hölder seminorm over the snapshots with
/// `0 < t ≤ t_max`.
pub fn holder_scaling_study(
    traj: &Trajectory,
    gamma: f64,
    field: HolderField,
    t_max: f64,
    tolerance: f64,
) -> Result<HolderReport> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            reason: "must lie in (0, 1]",
        });
    }
    let alpha = traj.config.alpha;
    let picked: Vec<&Snapshot> = traj
        .snapshots
        .iter()
        .filter(|s| s.t() > 0.0 && s.t() <= t_max)
        .collect();
    if picked.len() < 3 {
        return Err(Error::TooShort {
            what: "holder study window",
            min: 3,
            got: picked.len(),
        });
    }
    let times: Vec<f64> = picked.iter().map(|s| s.t()).collect();
    let seminorms: Vec<f64> = picked
        .iter()
        .map(|s| {
            let g = match field {
                HolderField::Rho => &s.state.rho,
                HolderField::U => &s.state.u,
            };
            holder_seminorm(g, gamma)
        })
        .collect();
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = seminorms.iter().map(|v| v.max(1e-300).ln()).collect();
    let (slope, _) =
        linear_fit(&lx, &ly).ok_or_else(|| Error::Invalid("degenerate holder fit".into()))?;
    let envelope_constant = times
        .iter()
        .zip(&seminorms)
        .map(|(t, v)| t.powf(gamma / alpha) * v)
        .fold(0.0, f64::max);
    Ok(HolderReport {
        field,
        gamma,
        alpha,
        times,
        seminorms,
        slope,
        envelope_slope: -gamma / alpha,
        tolerance,
        envelope_constant,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlockingReport {
    /// Momentum over mass at the final snapshot.
    pub u_bar: f64,
    pub fit_start: f64,
    pub times: Vec<f64>,
    pub u_prime_inf: Vec<f64>,
    /// Slope of `log‖u'‖_∞` on `t ≥ fit_start`.
    pub u_prime_rate: f64,
    /// `(t₁, t₂ = 2t₁, ‖ρ̃(t₂) − ρ̃(t₁)‖_∞)` in the moving frame.
    pub cauchy: Vec<(f64, f64, f64)>,
    pub cauchy_slack: f64,
}

impl FlockingReport {
    pub fn rate_negative(&self) -> bool {
        self.u_prime_rate < 0.0
    }

    /// Each successive dyadic distance at most `(1 + slack)` times the
    /// previous one, and the last strictly below the first.
    pub fn cauchy_decreasing(&self) -> bool {
        let d: Vec<f64> = self.cauchy.iter().map(|c| c.2).collect();
        d.len() >= 2
            && d.windows(2)
                .all(|w| w[1] <= (1.0 + self.cauchy_slack) * w[0])
            && d[d.len() - 1] < d[0]
    }
}

fn nearest(traj: &Trajectory, t: f64) -> &Snapshot {
    traj.snapshots
        .iter()
        .min_by(|a, b| (a.t() - t).abs().total_cmp(&(b.t() - t).abs()))
        .expect("non-empty trajectory")
}

/// `ρ̃(x, t) = ρ(x + ūt, t)`.
pub fn moving_frame_density(snap: &Snapshot, u_bar: f64) -> Field {
    shift(&snap.state.rho, u_bar * snap.t())
}

/// Moving-frame Cauchy distances over the dyadic pairs
/// `(t₀2^k, t₀2^{k+1})` and the exponential fit of `‖u'‖_∞` after
/// `fit_start`.
pub fn flocking_study(traj: &Trajectory, fit_start: f64, pair_base: f64) -> Result<FlockingReport> {
    let last = traj.last();
    let u_bar = last.state.rho.pointwise_mul(&last.state.u).integral() / last.state.mass();
    let times = traj.times();
    let u_prime_inf: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| derivative(&s.state.u).sup_norm())
        .collect();
    let (fx, fy): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&u_prime_inf)
        .filter(|(t, v)| **t >= fit_start && **v > 1e-300)
        .map(|(t, v)| (*t, v.ln()))
        .unzip();
    if fx.len() < 3 {
        return Err(Error::TooShort {
            what: "flocking fit window",
            min: 3,
            got: fx.len(),
        });
    }
    let (u_prime_rate, _) =
        linear_fit(&fx, &fy).ok_or_else(|| Error::Invalid("degenerate flocking fit".into()))?;
    let t_end = *times.last().unwrap();
    let mut cauchy = Vec::new();
    let mut t1 = pair_base;
    while 2.0 * t1 <= t_end * (1.0 + 1e-12) {
        let a = nearest(traj, t1);
        let b = nearest(traj, 2.0 * t1);
        let d = moving_frame_density(b, u_bar).max_abs_diff(&moving_frame_density(a, u_bar));
        cauchy.push((a.t(), b.t(), d));
        t1 *= 2.0;
    }
    Ok(FlockingReport {
        u_bar,
        fit_start,
        times,
        u_prime_inf,
        u_prime_rate,
        cauchy,
        cauchy_slack: 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evolve, InitialData, SimConfig};

    fn smooth(t_end: f64) -> SimConfig {
        SimConfig::new(
            64,
            1.0,
            t_end,
            InitialData::Smooth {
                rho_mean: 1.0,
                rho_amp: 0.5,
                rho_mode: 1,
                u_mean: 0.0,
                u_amp: 1.0,
                u_mode: 1,
            },
        )
    }

    #[test]
    fn constant_velocity_is_aligned() {
        let mut cfg = SimConfig::new(32, 1.0, 1.0, InitialData::Stationary { rho: 1.0, u: 0.5 });
        cfg.output_stride = 4;
        let traj = evolve(&cfg).unwrap();
        let r = alignment_decay(&traj, &KernelSpec::new(1.0).unwrap()).unwrap();
        assert!(r.amplitude.iter().all(|&a| a == 0.0));
        assert!(r.envelope_ok && r.fitted_rate.is_none());
    }

    #[test]
    fn unforced_alignment_beats_bound() {
        let mut cfg = smooth(2.0);
        cfg.output_stride = 5;
        let traj = evolve(&cfg).unwrap();
        let r = alignment_decay(&traj, &KernelSpec::new(1.0).unwrap()).unwrap();
        assert!((r.rate_bound - PI / 2.0).abs() < 1e-8);
        assert!(r.envelope_ok, "worst {}", r.worst_envelope_ratio);
        assert!(r.fitted_rate_ok());
    }

    #[test]
    fn smooth_data_holder_slope_is_flat() {
        let mut cfg = smooth(0.1);
        cfg.output_times = (0..8).map(|k| 0.1 * 2f64.powi(-k)).collect();
        let traj = evolve(&cfg).unwrap();
        let r = holder_scaling_study(&traj, 0.25, HolderField::Rho, 0.1, 0.05).unwrap();
        assert!(r.slope.abs() < 0.05 && r.slope_ok());
    }

    #[test]
    fn stationary_flock_moving_frame_is_constant() {
        let mut cfg = SimConfig::new(32, 1.5, 4.0, InitialData::Stationary { rho: 2.0, u: 0.3 });
        cfg.output_times = vec![0.5, 1.0, 2.0];
        let traj = evolve(&cfg).unwrap();
        for s in &traj.snapshots {
            let r = moving_frame_density(s, 0.3);
            assert!(r.max_abs_diff(&traj.first().state.rho) < 1e-13);
        }
    }
}
