use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{evolve, evolve_from, stable_dt, SimConfig, Snapshot, State, Trajectory};
use crate::quadrature::linear_fit;
use crate::spectral::{Field, TorusGrid};

/// Distances below this count as converged in the Cauchy trend.
pub const CONVERGED_DISTANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MollificationReport {
    pub eps: Vec<f64>,
    /// `t = 0` followed by the requested times.
    pub times: Vec<f64>,
    /// `u_distances[i][j] = ‖u^{ε_j}(t_i) − u^{ε_{j+1}}(t_i)‖_∞`.
    pub u_distances: Vec<Vec<f64>>,
    pub rho_distances: Vec<Vec<f64>>,
    /// Largest `d_{j+1}/d_j` over positive times and both fields (0 when
    /// every distance is converged).
    pub worst_ratio: f64,
    pub decreasing: bool,
}

fn at_time(traj: &Trajectory, t: f64) -> Result<&Snapshot> {
    traj.snapshots
        .iter()
        .find(|s| s.t() == t)
        .ok_or_else(|| Error::Invalid(format!("no snapshot at t = {t}")))
}

fn pair_ratio(d: &[f64]) -> (f64, bool) {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for w in d.windows(2) {
        if w[1] <= CONVERGED_DISTANCE {
            continue;
        }
        worst = worst.max(w[1] / w[0]);
        if w[1] >= w[0] {
            ok = false;
        }
    }
    (worst, ok)
}

/// Runs `base` from its initial data mollified at each width in `eps_list`
/// and compares consecutive runs at `times`.
pub fn mollification_convergence(
    base: &SimConfig,
    eps_list: &[f64],
    times: &[f64],
) -> Result<MollificationReport> {
    if eps_list.len() < 3 {
        return Err(Error::TooShort {
            what: "eps list",
            min: 3,
            got: eps_list.len(),
        });
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid(
            "eps list must be strictly decreasing".into(),
        ));
    }
    let h = base.grid()?.node_spacing();
    if let Some(&e) = eps_list.iter().find(|&&e| e <= 4.0 * h) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: e,
            reason: "must exceed four node spacings",
        });
    }
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0 && t <= base.t_end)) {
        return Err(Error::Invalid(
            "comparison times must lie in (0, t_end]".into(),
        ));
    }
    let runs = eps_list
        .par_iter()
        .map(|&eps| {
            let mut cfg = base.clone();
            cfg.mollify_eps = eps;
            cfg.output_stride = usize::MAX;
            cfg.output_times = times.to_vec();
            evolve(&cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all_times = vec![0.0];
    all_times.extend_from_slice(times);
    let mut u_distances: Vec<Vec<f64>> = Vec::new();
    let mut rho_distances: Vec<Vec<f64>> = Vec::new();
    for &t in &all_times {
        let snaps = runs
            .iter()
            .map(|r| at_time(r, t))
            .collect::<Result<Vec<_>>>()?;
        let du = snaps
            .windows(2)
            .map(|w| w[0].state.u.max_abs_diff(&w[1].state.u))
            .collect();
        let dr = snaps
            .windows(2)
            .map(|w| w[0].state.rho.max_abs_diff(&w[1].state.rho))
            .collect();
        u_distances.push(du);
        rho_distances.push(dr);
    }
    let mut worst_ratio: f64 = 0.0;
    let mut decreasing = true;
    for i in 1..all_times.len() {
        for d in [&u_distances[i], &rho_distances[i]] {
            let (w, ok) = pair_ratio(d);
            worst_ratio = worst_ratio.max(w);
            decreasing &= ok;
        }
    }
    Ok(MollificationReport {
        eps: eps_list.to_vec(),
        times: all_times,
        u_distances,
        rho_distances,
        worst_ratio,
        decreasing,
    })
}

/// `Φ = ‖√ρ_σ u_δ‖² + ‖ρ_δ/√ρ_σ‖² + ‖q_δ‖²` with `ρ_σ = ρ₁ + ρ₂` and
/// `g_δ = g₁ − g₂`.
pub fn stability_functional(a: &Snapshot, b: &Snapshot) -> Result<f64> {
    let (sa, sb) = (&a.state, &b.state);
    if sa.u.grid() != sb.u.grid() {
        return Err(Error::GridMismatch {
            left: sa.u.len(),
            right: sb.u.len(),
        });
    }
    let w = sa.u.grid().node_spacing();
    let qa = a.derived.q.samples();
    let qb = b.derived.q.samples();
    let mut phi = 0.0;
    for j in 0..sa.u.len() {
        let sigma = sa.rho.samples()[j] + sb.rho.samples()[j];
        let du = sa.u.samples()[j] - sb.u.samples()[j];
        let dr = sa.rho.samples()[j] - sb.rho.samples()[j];
        let dq = qa[j] - qb[j];
        phi += sigma * du * du + dr * dr / sigma + dq * dq;
    }
    Ok(w * phi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub n_points: usize,
    pub delta: f64,
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    /// Smallest `Λ` with `Φ(t) ≤ Φ(0)e^{Λt}` at every sampled time.
    pub envelope_rate: f64,
    /// Least-squares slope of `log Φ` against `t`.
    pub fitted_slope: Option<f64>,
    pub envelope_ok: bool,
}

impl UniquenessReport {
    pub fn ratios(&self) -> Vec<f64> {
        let p0 = self.phi[0];
        self.phi
            .iter()
            .map(|p| if p0 > 0.0 { p / p0 } else { 0.0 })
            .collect()
    }
}

/// Smooth zero-mean perturbation of size `delta` in both `u` and `ρ`; `e`
/// and `q` follow from the perturbed pair.
pub fn perturb(state: &State, delta: f64) -> Result<State> {
    let g = state.u.grid();
    let du = Field::from_fn(g, |x| {
        delta * ((2.0 * x + 0.3).sin() + 0.5 * (3.0 * x).cos())
    });
    let dr = Field::from_fn(g, |x| {
        delta * ((x - 0.7).cos() + 0.25 * (4.0 * x + 1.1).sin())
    });
    State::new(&state.u + &du, &state.rho + &dr, state.t, state.alpha)
}

fn sample_times(t_end: f64, samples: usize) -> Vec<f64> {
    (1..=samples)
        .map(|i| t_end * i as f64 / samples as f64)
        .collect()
}

fn paired_run(config: &SimConfig, delta: f64, samples: usize) -> Result<(Trajectory, Trajectory)> {
    let base = config.initial_state()?;
    let mut cfg = config.clone();
    cfg.output_stride = usize::MAX;
    cfg.output_times = sample_times(config.t_end, samples);
    // same step sequence for both runs
    let dt = 0.5 * stable_dt(&base, config.cfl_number)?;
    cfg.dt_max = Some(config.dt_max.map_or(dt, |d| d.min(dt)));
    let other = perturb(&base, delta)?;
    let (a, b) = rayon::join(|| evolve_from(&cfg, base), || evolve_from(&cfg, other));
    Ok((a?, b?))
}

/// Evolves the configured data and a `delta`-perturbed copy and fits the
/// Grönwall rate of the stability functional.
pub fn uniqueness_gronwall(
    config: &SimConfig,
    delta: f64,
    samples: usize,
) -> Result<UniquenessReport> {
    if !(delta >= 0.0) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            reason: "must be non-negative",
        });
    }
    let (a, b) = paired_run(config, delta, samples.max(2))?;
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::Invalid(
            "perturbed run saved a different set of times".into(),
        ));
    }
    let times = a.times();
    let phi = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| stability_functional(x, y))
        .collect::<Result<Vec<_>>>()?;
    let p0 = phi[0];
    let (envelope_rate, fitted_slope) = if p0 > 0.0 {
        let rate = times
            .iter()
            .zip(&phi)
            .skip(1)
            .map(|(t, p)| (p / p0).ln() / t)
            .fold(f64::NEG_INFINITY, f64::max);
        let ly: Vec<f64> = phi.iter().map(|p| p.max(1e-300).ln()).collect();
        (rate, linear_fit(&times, &ly).map(|f| f.0))
    } else {
        (0.0, None)
    };
    let envelope_ok = times
        .iter()
        .zip(&phi)
        .all(|(t, p)| *p <= p0 * (envelope_rate * t).exp() * (1.0 + 1e-12) + 1e-300);
    Ok(UniquenessReport {
        n_points: config.n_points,
        delta,
        times,
        phi,
        envelope_rate,
        fitted_slope,
        envelope_ok,
    })
}

/// Same configuration on a grid twice as fine.
pub fn refined(config: &SimConfig) -> Result<SimConfig> {
    let mut cfg = config.clone();
    cfg.n_points *= 2;
    TorusGrid::new(cfg.n_points)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InitialData;

    fn smooth(n: usize, t_end: f64) -> SimConfig {
        SimConfig::new(
            n,
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
    fn identical_runs_have_zero_phi() {
        let r = uniqueness_gronwall(&smooth(64, 0.5), 0.0, 5).unwrap();
        assert!(r.phi.iter().all(|&p| p <= 1e-12), "{:?}", r.phi);
    }

    #[test]
    fn phi_matches_direct_sum() {
        let g = TorusGrid::new(16).unwrap();
        let a = State::new(
            Field::from_fn(&g, |x| x.sin()),
            Field::from_fn(&g, |x| 1.0 + 0.3 * x.cos()),
            0.0,
            1.0,
        )
        .unwrap();
        let b = perturb(&a, 0.1).unwrap();
        let (sa, sb) = (Snapshot::new(a).unwrap(), Snapshot::new(b).unwrap());
        let phi = stability_functional(&sa, &sb).unwrap();
        let h = g.node_spacing();
        let mut direct = 0.0;
        for j in 0..16 {
            let r1 = sa.state.rho.samples()[j];
            let r2 = sb.state.rho.samples()[j];
            let q1 = sa.derived.e.samples()[j] / r1;
            let q2 = sb.derived.e.samples()[j] / r2;
            let du = sa.state.u.samples()[j] - sb.state.u.samples()[j];
            direct += h * ((r1 + r2) * du * du + (r1 - r2).powi(2) / (r1 + r2) + (q1 - q2).powi(2));
        }
        assert!((phi - direct).abs() <= 1e-14 * direct, "{phi} vs {direct}");
        assert_eq!(stability_functional(&sa, &sa).unwrap(), 0.0);
    }

    #[test]
    fn linear_response_regime() {
        let cfg = smooth(64, 1.0);
        let small = uniqueness_gronwall(&cfg, 1e-6, 4).unwrap();
        let large = uniqueness_gronwall(&cfg, 1e-5, 4).unwrap();
        for (a, b) in small.ratios().iter().zip(large.ratios()) {
            assert!((a - b).abs() <= 0.05 * b, "{a} vs {b}");
        }
        assert!(small.envelope_ok);
    }

    #[test]
    fn smooth_data_mollification_is_converged_early() {
        let cfg = smooth(64, 0.2);
        let r = mollification_convergence(&cfg, &[1.0, 0.8, 0.6], &[0.1, 0.2]).unwrap();
        assert_eq!(r.times, vec![0.0, 0.1, 0.2]);
        assert_eq!(r.u_distances.len(), 3);
        assert!(r.u_distances[0][0] > 0.0);
    }

    #[test]
    fn mollification_rejects_bad_lists() {
        let cfg = smooth(64, 0.2);
        assert!(mollification_convergence(&cfg, &[1.0, 0.5], &[0.1]).is_err());
        assert!(mollification_convergence(&cfg, &[1.0, 0.5, 0.7], &[0.1]).is_err());
        assert!(mollification_convergence(&cfg, &[1.0, 0.5, 0.1], &[0.1]).is_err());
        assert!(mollification_convergence(&cfg, &[1.0, 0.5, 0.4], &[0.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn phi_is_symmetric_and_nonnegative(
            a in proptest::collection::vec(-1.0f64..1.0, 16),
            b in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            let g = TorusGrid::new(16).unwrap();
            let make = |v: &[f64]| {
                let u = Field::new(&g, v.to_vec()).unwrap();
                let rho = Field::new(&g, v.iter().map(|x| 1.2 + 0.5 * x.sin()).collect()).unwrap();
                Snapshot::new(State::new(u, rho, 0.0, 0.9).unwrap()).unwrap()
            };
            let (x, y) = (make(&a), make(&b));
            let xy = stability_functional(&x, &y).unwrap();
            let yx = stability_functional(&y, &x).unwrap();
            proptest::prop_assert!(xy >= 0.0);
            proptest::prop_assert!((xy - yx).abs() <= 1e-12 * xy.max(1.0));
            proptest::prop_assert_eq!(stability_functional(&x, &x).unwrap(), 0.0);
        }
    }
}
