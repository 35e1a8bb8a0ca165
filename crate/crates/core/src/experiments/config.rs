use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ForceSpec, InitialData, SimConfig, TrigTerm};

/// Checks a scenario can enable.
pub const KNOWN_CHECKS: [&str; 11] = [
    "conservation",
    "compatibility",
    "energy",
    "bounds",
    "regularity",
    "alignment",
    "budget",
    "holder",
    "flocking",
    "mollification",
    "uniqueness",
];

macro_rules! defaults {
    ($($name:ident: $ty:ty = $v:expr;)*) => {
        $(fn $name() -> $ty { $v })*
    };
}

defaults! {
    d_cfl: f64 = 0.4;
    d_one_usize: usize = 1;
    d_one: f64 = 1.0;
    d_half: f64 = 0.5;
    d_mode: u32 = 1;
    d_floor: f64 = 1e-3;
    d_zero_name: String = "zero".into();
    d_smooth_name: String = "smooth".into();
    d_conservation_tol: f64 = 1e-11;
    d_e_integral_tol: f64 = 1e-9;
    d_energy_tol: f64 = 1e-5;
    d_min_order: f64 = 1.95;
    d_strides: Vec<usize> = vec![1, 2, 4];
    d_dissipation_tol: f64 = 1e-5;
    d_compat_tol: f64 = 1e-8;
    d_growth: f64 = 100.0;
    d_budget_tol: f64 = 1e-5;
    d_decay: f64 = 10.0;
    d_holder_gammas: Vec<f64> = vec![0.1, 0.25];
    d_holder_tol: f64 = 0.05;
    d_cauchy_base: f64 = 1.0;
    d_perturbations: Vec<f64> = vec![1e-6, 1e-5];
    d_linear_tol: f64 = 0.05;
    d_rate_tol: f64 = 0.1;
    d_snapshot_files: usize = 2;
}

/// A scenario file: flat `key = value` pairs (TOML syntax).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,

    pub n_points: usize,
    pub alpha: f64,
    pub t_end: f64,
    #[serde(default = "d_cfl")]
    pub cfl_number: f64,
    #[serde(default = "d_one_usize")]
    pub output_stride: usize,
    #[serde(default)]
    pub dt_max: Option<f64>,
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub evolve_e: bool,
    /// Adds `log_times_count` log-uniform output times from
    /// `log_times_start` to `t_end`.
    #[serde(default)]
    pub log_times_start: f64,
    #[serde(default)]
    pub log_times_count: usize,

    /// `stationary`, `smooth`, `steep-tanh` or `random`.
    #[serde(default = "d_smooth_name")]
    pub initial: String,
    #[serde(default = "d_one")]
    pub rho_mean: f64,
    #[serde(default = "d_half")]
    pub rho_amp: f64,
    #[serde(default = "d_mode")]
    pub rho_mode: u32,
    #[serde(default)]
    pub u_mean: f64,
    #[serde(default = "d_one")]
    pub u_amp: f64,
    #[serde(default = "d_mode")]
    pub u_mode: u32,
    #[serde(default)]
    pub steep_base: f64,
    #[serde(default)]
    pub steep_height: f64,
    #[serde(default)]
    pub steep_width: f64,
    #[serde(default)]
    pub u_modes: u32,
    #[serde(default)]
    pub random_modes: u32,
    #[serde(default = "d_one")]
    pub random_decay: f64,
    #[serde(default)]
    pub mollify_eps: f64,
    #[serde(default = "d_floor")]
    pub rho_floor: f64,
    #[serde(default)]
    pub seed: u64,

    /// `zero`, `bump` or `trig`.
    #[serde(default = "d_zero_name")]
    pub force: String,
    #[serde(default)]
    pub force_amplitude: f64,
    #[serde(default = "d_mode")]
    pub force_wavenumber: u32,
    #[serde(default)]
    pub force_phase: f64,
    #[serde(default)]
    pub force_frequency: f64,
    #[serde(default)]
    pub force_support_end: f64,

    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default = "d_conservation_tol")]
    pub conservation_tol: f64,
    #[serde(default = "d_e_integral_tol")]
    pub e_integral_tol: f64,
    #[serde(default = "d_energy_tol")]
    pub energy_tol: f64,
    #[serde(default = "d_min_order")]
    pub energy_min_order: f64,
    #[serde(default = "d_strides")]
    pub energy_strides: Vec<usize>,
    #[serde(default = "d_dissipation_tol")]
    pub dissipation_tol: f64,
    /// Snapshots between double-integral dissipation checks (0: first and
    /// last only).
    #[serde(default)]
    pub dissipation_every: usize,
    #[serde(default = "d_compat_tol")]
    pub compatibility_tol: f64,
    /// Allowed growth of `‖ρ'‖_∞` and `‖e'‖_∞` over their initial values.
    #[serde(default = "d_growth")]
    pub regularity_growth: f64,
    #[serde(default = "d_budget_tol")]
    pub budget_tol: f64,
    #[serde(default = "d_decay")]
    pub budget_decay_factor: f64,
    #[serde(default)]
    pub budget_q_max: Option<i32>,
    #[serde(default = "d_holder_gammas")]
    pub holder_gammas: Vec<f64>,
    #[serde(default)]
    pub holder_t_max: f64,
    #[serde(default = "d_holder_tol")]
    pub holder_tol: f64,
    #[serde(default)]
    pub flocking_fit_start: f64,
    #[serde(default = "d_cauchy_base")]
    pub flocking_pair_base: f64,
    #[serde(default)]
    pub mollification_eps: Vec<f64>,
    #[serde(default)]
    pub mollification_times: Vec<f64>,
    #[serde(default = "d_perturbations")]
    pub uniqueness_perturbations: Vec<f64>,
    #[serde(default = "d_linear_tol")]
    pub uniqueness_linear_tol: f64,
    #[serde(default = "d_rate_tol")]
    pub uniqueness_rate_tol: f64,
    /// Number of evenly spaced snapshot files written (first and last
    /// always included).
    #[serde(default = "d_snapshot_files")]
    pub snapshot_files: usize,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn has_check(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(Error::Config(format!(
                "name {:?} must be a non-empty [A-Za-z0-9_-] string",
                self.name
            )));
        }
        for c in &self.checks {
            if !KNOWN_CHECKS.contains(&c.as_str()) {
                return Err(Error::Config(format!(
                    "unknown check {c:?}; known: {}",
                    KNOWN_CHECKS.join(", ")
                )));
            }
        }
        self.initial_data()?;
        self.force_spec()?;
        self.sim_config()?
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.has_check("mollification") {
            let eps = &self.mollification_eps;
            if eps.len() < 3 {
                return Err(Error::Config(
                    "mollification_eps needs at least 3 entries".into(),
                ));
            }
            if eps.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::Config(
                    "mollification_eps must be strictly decreasing".into(),
                ));
            }
            let h = 2.0 * std::f64::consts::PI / self.n_points as f64;
            if eps.iter().any(|&e| e <= 4.0 * h) {
                return Err(Error::Config(format!(
                    "mollification_eps entries must exceed 4·h = {}",
                    4.0 * h
                )));
            }
        }
        if self.has_check("compatibility") && !self.evolve_e {
            return Err(Error::Config(
                "compatibility check needs evolve_e = true".into(),
            ));
        }
        if self.has_check("alignment") && self.force_spec()?.support_end().is_none() {
            return Err(Error::Config(
                "alignment check needs a force that vanishes after some time".into(),
            ));
        }
        if self.has_check("holder") && !(self.holder_t_max > 0.0) {
            return Err(Error::Config("holder check needs holder_t_max > 0".into()));
        }
        Ok(())
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        Ok(match self.initial.as_str() {
            "stationary" => InitialData::Stationary {
                rho: self.rho_mean,
                u: self.u_mean,
            },
            "smooth" => InitialData::Smooth {
                rho_mean: self.rho_mean,
                rho_amp: self.rho_amp,
                rho_mode: self.rho_mode,
                u_mean: self.u_mean,
                u_amp: self.u_amp,
                u_mode: self.u_mode,
            },
            "steep-tanh" => {
                if !(self.steep_width > 0.0) {
                    return Err(Error::Config("steep-tanh needs steep_width > 0".into()));
                }
                InitialData::SteepTanh {
                    base: self.steep_base,
                    height: self.steep_height,
                    width: self.steep_width,
                    u_amp: self.u_amp,
                    u_modes: self.u_modes,
                }
            }
            "random" => InitialData::Random {
                rho_mean: self.rho_mean,
                rho_amp: self.rho_amp,
                u_mean: self.u_mean,
                u_amp: self.u_amp,
                modes: self.random_modes,
                decay: self.random_decay,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown initial data {other:?}; known: stationary, smooth, steep-tanh, random"
                )))
            }
        })
    }

    pub fn force_spec(&self) -> Result<ForceSpec> {
        Ok(match self.force.as_str() {
            "zero" => ForceSpec::Zero,
            "bump" => {
                if !(self.force_support_end > 0.0) {
                    return Err(Error::Config(
                        "bump force needs force_support_end > 0".into(),
                    ));
                }
                ForceSpec::Bump {
                    amplitude: self.force_amplitude,
                    wavenumber: self.force_wavenumber,
                    phase: self.force_phase,
                    support_end: self.force_support_end,
                }
            }
            "trig" => ForceSpec::Trig {
                terms: vec![TrigTerm {
                    amplitude: self.force_amplitude,
                    wavenumber: self.force_wavenumber,
                    frequency: self.force_frequency,
                    phase: self.force_phase,
                }],
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown force {other:?}; known: zero, bump, trig"
                )))
            }
        })
    }

    pub fn all_output_times(&self) -> Vec<f64> {
        let mut times = self.output_times.clone();
        let k = self.log_times_count;
        if k >= 2 && self.log_times_start > 0.0 && self.log_times_start < self.t_end {
            let ratio = (self.t_end / self.log_times_start).ln();
            times.extend(
                (0..k).map(|i| self.log_times_start * (ratio * i as f64 / (k - 1) as f64).exp()),
            );
            times.pop();
            times.push(self.t_end);
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        Ok(SimConfig {
            n_points: self.n_points,
            alpha: self.alpha,
            t_end: self.t_end,
            cfl_number: self.cfl_number,
            output_stride: self.output_stride,
            dt_max: self.dt_max,
            output_times: self.all_output_times(),
            initial: self.initial_data()?,
            mollify_eps: self.mollify_eps,
            rho_floor: self.rho_floor,
            force: self.force_spec()?,
            seed: self.seed,
            evolve_e: self.evolve_e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
n_points = 64
alpha = 1.0
t_end = 0.5
checks = ["conservation"]
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.cfl_number, 0.4);
        assert_eq!(c.initial, "smooth");
        assert_eq!(c.force_spec().unwrap(), ForceSpec::Zero);
        let back = ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_carry_context() {
        let bad = MINIMAL.replace("alpha = 1.0", "alpha = 1.0\nalhpa = 2.0");
        let e = ScenarioConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(e.contains("alhpa") && e.contains("line"), "{e}");
        let bad = MINIMAL.replace("alpha = 1.0", "alpha = 2.5");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
        let bad = MINIMAL.replace("[\"conservation\"]", "[\"nonsense\"]");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
        let bad = MINIMAL.to_string() + "initial = \"steep-tanh\"\n";
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn mollification_list_validated() {
        let base = MINIMAL.replace("[\"conservation\"]", "[\"mollification\"]");
        let ok = base.clone() + "mollification_eps = [0.8, 0.4, 0.5]\n";
        assert!(ScenarioConfig::from_toml_str(&ok).is_err());
        let ok = base.clone() + "mollification_eps = [0.8, 0.4]\n";
        assert!(ScenarioConfig::from_toml_str(&ok).is_err());
        let ok = base + "mollification_eps = [1.6, 0.8, 0.5]\n";
        assert!(ScenarioConfig::from_toml_str(&ok).is_ok());
    }
}
