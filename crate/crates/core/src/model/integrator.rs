use serde::{Deserialize, Serialize};

use super::force::ForceSpec;
use super::initial::{rough_initial_data, InitialData};
use super::rhs::{rhs, Tendency};
use super::state::{compute_derived, DerivedFields, State};
use crate::error::{Error, Result};
use crate::spectral::{frac_multiplier_constant, Field, TorusGrid};

fn default_cfl() -> f64 {
    0.4
}
fn default_stride() -> usize {
    1
}
fn default_floor() -> f64 {
    1e-3
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_points: usize,
    pub alpha: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_number: f64,
    /// Save every `output_stride`-th step (the final state is always saved).
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default)]
    pub dt_max: Option<f64>,
    /// Additional times hit exactly and always saved.
    #[serde(default)]
    pub output_times: Vec<f64>,
    pub initial: InitialData,
    #[serde(default)]
    pub mollify_eps: f64,
    #[serde(default = "default_floor")]
    pub rho_floor: f64,
    #[serde(default)]
    pub force: ForceSpec,
    #[serde(default)]
    pub seed: u64,
    /// Evolve `e` by its own conservation law alongside `(u, ρ)`.
    #[serde(default)]
    pub evolve_e: bool,
}

impl SimConfig {
    pub fn new(n_points: usize, alpha: f64, t_end: f64, initial: InitialData) -> Self {
        SimConfig {
            n_points,
            alpha,
            t_end,
            cfl_number: default_cfl(),
            output_stride: default_stride(),
            dt_max: None,
            output_times: Vec::new(),
            initial,
            mollify_eps: 0.0,
            rho_floor: default_floor(),
            force: ForceSpec::Zero,
            seed: 0,
            evolve_e: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        TorusGrid::new(self.n_points)?;
        frac_multiplier_constant(self.alpha)?;
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    name,
                    value: v,
                    reason: "must be positive and finite",
                })
            }
        };
        positive("t_end", self.t_end)?;
        positive("cfl_number", self.cfl_number)?;
        if let Some(dt) = self.dt_max {
            positive("dt_max", dt)?;
        }
        if self.output_stride == 0 {
            return Err(Error::Config("output_stride must be at least 1".into()));
        }
        if !(self.mollify_eps >= 0.0) {
            return Err(Error::OutOfRange {
                name: "mollify_eps",
                value: self.mollify_eps,
                reason: "must be non-negative",
            });
        }
        positive("rho_floor", self.rho_floor)?;
        for &t in &self.output_times {
            if !(t >= 0.0 && t <= self.t_end) {
                return Err(Error::OutOfRange {
                    name: "output_times",
                    value: t,
                    reason: "must lie in [0, t_end]",
                });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n_points)
    }

    pub fn initial_state(&self) -> Result<State> {
        self.validate()?;
        let grid = self.grid()?;
        let (u0, rho0, _) = rough_initial_data(
            &self.initial,
            self.seed,
            &grid,
            self.alpha,
            self.mollify_eps,
            self.rho_floor,
        )?;
        let state = State::new(u0, rho0, 0.0, self.alpha)?;
        if self.evolve_e {
            state.with_evolved_e()
        } else {
            Ok(state)
        }
    }
}

/// Saved state with its derived fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub state: State,
    pub derived: DerivedFields,
}

impl Snapshot {
    pub fn new(state: State) -> Result<Self> {
        let derived = compute_derived(&state)?;
        Ok(Snapshot { state, derived })
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SimConfig,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Snapshot::t).collect()
    }

    pub fn first(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trajectory has at least one snapshot")
    }

    /// Every `stride`-th snapshot, always keeping the last one.
    pub fn subsample(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let last = self.snapshots.len() - 1;
        let snapshots = self
            .snapshots
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride == 0 || *i == last)
            .map(|(_, s)| s.clone())
            .collect();
        Trajectory {
            config: self.config.clone(),
            snapshots,
            steps: self.steps,
        }
    }
}

/// CFL-limited step size
/// `cfl·min(Δx/‖u‖_∞, 1/(C(α) k_max^α ‖ρ‖_∞))`.
pub fn stable_dt(state: &State, cfl: f64) -> Result<f64> {
    let grid = state.u.grid();
    let c = frac_multiplier_constant(state.alpha)?;
    let k_max = grid.k_max() as f64;
    let advective = grid.node_spacing() / state.u.sup_norm().max(1e-300);
    let dissipative = 1.0 / (c * k_max.powf(state.alpha) * state.rho.sup_norm());
    Ok(cfl * advective.min(dissipative))
}

fn combine(
    base: &State,
    a: f64,
    stage: &State,
    b: f64,
    tendency: &Tendency,
    dt: f64,
    t: f64,
) -> State {
    let mix = |x: &Field, y: &Field, d: &Field| {
        x.zip_map(y, |p, q| a * p + b * q)
            .zip_map(d, |p, r| p + b * dt * r)
    };
    let evolved_e = match (&base.evolved_e, &stage.evolved_e, &tendency.de) {
        (Some(e0), Some(e1), Some(de)) => Some(mix(e0, e1, de)),
        _ => None,
    };
    State {
        u: mix(&base.u, &stage.u, &tendency.du),
        rho: mix(&base.rho, &stage.rho, &tendency.drho),
        t,
        alpha: base.alpha,
        evolved_e,
    }
}

fn advance(state: &State, force: &ForceSpec, dt: f64) -> Result<State> {
    let t0 = state.t;
    let k0 = rhs(state, force)?;
    let s1 = combine(state, 0.0, state, 1.0, &k0, dt, t0 + dt);
    let k1 = rhs(&s1, force)?;
    let s2 = combine(state, 0.75, &s1, 0.25, &k1, dt, t0 + 0.5 * dt);
    let k2 = rhs(&s2, force)?;
    let s3 = combine(state, 1.0 / 3.0, &s2, 2.0 / 3.0, &k2, dt, t0 + dt);
    if !s3.u.is_finite() {
        return Err(Error::NonFinite { what: "u", t: s3.t });
    }
    if !s3.rho.is_finite() {
        return Err(Error::NonFinite {
            what: "rho",
            t: s3.t,
        });
    }
    s3.check_density()?;
    Ok(s3)
}

/// One SSP-RK3 (Shu-Osher) step of size
/// `min(dt_max, stable_dt(state, 0.4))`.
pub fn step(state: &State, force: &ForceSpec, dt_max: f64) -> Result<State> {
    step_with_cfl(state, force, dt_max, default_cfl())
}

pub(crate) fn step_with_cfl(
    state: &State,
    force: &ForceSpec,
    dt_max: f64,
    cfl: f64,
) -> Result<State> {
    let dt = dt_max.min(stable_dt(state, cfl)?);
    advance(state, force, dt)
}

/// Runs `config` from its initial data to `t_end`.
pub fn evolve(config: &SimConfig) -> Result<Trajectory> {
    let initial = config.initial_state()?;
    evolve_from(config, initial)
}

/// Runs `config` from an explicitly supplied initial state.
pub fn evolve_from(config: &SimConfig, initial: State) -> Result<Trajectory> {
    config.validate()?;
    let mut targets: Vec<f64> = config
        .output_times
        .iter()
        .copied()
        .filter(|&t| t > initial.t)
        .collect();
    targets.push(config.t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let dt_cap = config.dt_max.unwrap_or(f64::INFINITY);
    let mut snapshots = vec![Snapshot::new(initial.clone())?];
    let mut state = initial;
    let mut steps = 0usize;
    for &target in &targets {
        loop {
            let remaining = target - state.t;
            if remaining <= 1e-12 * target.abs().max(1.0) {
                break;
            }
            let dt = dt_cap
                .min(remaining)
                .min(stable_dt(&state, config.cfl_number)?);
            // avoid a sliver step right before the target
            let dt = if remaining - dt < 1e-3 * dt {
                remaining
            } else {
                dt
            };
            state = advance(&state, &config.force, dt)?;
            let reached = (target - state.t).abs() <= 1e-12 * target.abs().max(1.0);
            if reached {
                state.t = target;
            }
            steps += 1;
            if steps % config.output_stride == 0 && !reached {
                snapshots.push(Snapshot::new(state.clone())?);
            }
            if reached {
                break;
            }
        }
        snapshots.push(Snapshot::new(state.clone())?);
    }
    Ok(Trajectory {
        config: config.clone(),
        snapshots,
        steps,
    })
}
